"""Command-line entry point and the TOML scenario format.

Scenario files are TOML documents::

    name = "two-dgu"

    [model]
    mode = "first_order"        # or "unit_gain"
    omega_c = 628.3             # rad/s
    k_i = 1.0
    regime = "commuting"        # or "D_identity"
    mu = 1.0
    v_ref = 48.0
    horizon = 5.0
    initially_enabled = [1, 2]

    [[dgus]]
    id = 1
    rated_current = 10.0
    scaling_current = 10.0      # optional, defaults to rated_current
    load_current = 2.0
    present = true              # optional

    [[lines]]
    from = 1
    to = 2
    resistance = 0.1
    inductance = 2e-6           # optional
    closed = true               # optional

    [[comm]]                    # explicit consensus links (D_identity regime)
    i = 1
    j = 2
    coefficient = 5.0

    [[events]]
    time = 1.0
    kind = "load_step"          # connect_line | enable_secondary | plug_in | unplug | load_step
    dgu = 1
    load_current = 4.0

    [[checks]]
    name = "sharing"
    metric = "cs_error"         # cs_error | vb_error | ratio
    start = 4.0
    end = 5.0
    threshold = 0.01
    op = "<="                   # or ">"

Event keys: ``connect_line``: i, j. ``enable_secondary``: dgus. ``plug_in``:
dgu, neighbors, optional comm (list of [j, a_ij]) and secondary. ``unplug``:
dgu. ``load_step``: dgu, load_current. Ratio checks add ``dgus = [a, b]`` and
``factor``.
"""
from __future__ import annotations

import argparse
import logging
import os
import sys
from dataclasses import dataclass
from pathlib import Path

import numpy as np
try:
    import tomllib
except ImportError:  # Python < 3.11
    import tomli as tomllib
import tomli_w

from .dynamics import simulate
from .errors import MicrogridError, ScenarioParseError
from .graph import CommLink, Line
from .model import DguSpec
from .pnp import PlugEvent
from .scenario import (
    Check, ConnectLine, EnableSecondary, LoadStep, Scenario, builtin_stage_scenario, evaluate, plug_in_event,
)
from .spectral import COMMUTING, D_IDENTITY, NEITHER, counterexample_report

log = logging.getLogger("mgconsensus")

_MODEL_KEYS = {"mode", "omega_c", "k_i", "regime", "mu", "v_ref", "horizon", "initially_enabled"}
_DGU_KEYS = {"id", "rated_current", "scaling_current", "load_current", "v_ref", "present"}
_LINE_KEYS = {"from", "to", "resistance", "inductance", "closed"}
_COMM_KEYS = {"i", "j", "coefficient"}
_EVENT_KEYS = {
    "connect_line": {"i", "j"},
    "enable_secondary": {"dgus"},
    "plug_in": {"dgu", "neighbors", "comm", "secondary"},
    "unplug": {"dgu"},
    "load_step": {"dgu", "load_current"},
}
_CHECK_KEYS = {"name", "metric", "start", "end", "threshold", "op", "dgus", "factor"}


def _keys(table, allowed, where, required=()):
    unknown = set(table) - set(allowed)
    if unknown:
        raise ScenarioParseError(f"{where}: unknown keys {sorted(unknown)}")
    missing = [k for k in required if k not in table]
    if missing:
        raise ScenarioParseError(f"{where}: missing keys {missing}")


def parse_scenario(text: str) -> Scenario:
    try:
        doc = tomllib.loads(text)
    except tomllib.TOMLDecodeError as exc:
        raise ScenarioParseError(f"invalid TOML: {exc}") from None
    _keys(doc, {"name", "model", "dgus", "lines", "comm", "events", "checks"}, "document", ("dgus",))
    model = doc.get("model", {})
    _keys(model, _MODEL_KEYS, "[model]")
    v_ref = float(model.get("v_ref", 48.0))

    dgus = []
    for k, g in enumerate(doc["dgus"]):
        _keys(g, _DGU_KEYS, f"dgus[{k}]", ("id", "rated_current"))
        rated = float(g["rated_current"])
        try:
            dgus.append(DguSpec(
                int(g["id"]), rated, float(g.get("scaling_current", rated)), float(g.get("v_ref", v_ref)),
                float(g.get("load_current", 0.0)), bool(g.get("present", True)),
            ))
        except ValueError as exc:
            raise ScenarioParseError(f"dgus[{k}]: {exc}") from None

    lines, closed = [], []
    for k, ln in enumerate(doc.get("lines", [])):
        _keys(ln, _LINE_KEYS, f"lines[{k}]", ("from", "to", "resistance"))
        r = float(ln["resistance"])
        if not r > 0:
            raise ScenarioParseError(f"lines[{k}]: resistance must be positive, got {r}")
        line = Line(int(ln["from"]), int(ln["to"]), r, float(ln.get("inductance", 0.0)))
        lines.append(line)
        if ln.get("closed", True):
            closed.append(line.key)

    comm = {}
    for k, c in enumerate(doc.get("comm", [])):
        _keys(c, _COMM_KEYS, f"comm[{k}]", ("i", "j", "coefficient"))
        a = float(c["coefficient"])
        if not a > 0:
            raise ScenarioParseError(f"comm[{k}]: coefficient must be positive")
        key = frozenset((int(c["i"]), int(c["j"])))
        if key in comm and comm[key].coefficient != a:
            raise ScenarioParseError(f"comm[{k}]: asymmetric coefficients between {c['i']} and {c['j']}")
        comm.setdefault(key, CommLink(int(c["i"]), int(c["j"]), a))

    events = []
    for k, ev in enumerate(doc.get("events", [])):
        kind = ev.get("kind")
        if kind not in _EVENT_KEYS:
            raise ScenarioParseError(f"events[{k}]: unknown kind {kind!r}")
        _keys(ev, _EVENT_KEYS[kind] | {"time", "kind"}, f"events[{k}]",
              ("time", *sorted(_EVENT_KEYS[kind] - {"comm", "secondary"})))
        t = float(ev["time"])
        try:
            if kind == "connect_line":
                events.append(ConnectLine(t, int(ev["i"]), int(ev["j"])))
            elif kind == "enable_secondary":
                events.append(EnableSecondary(t, tuple(int(i) for i in ev["dgus"])))
            elif kind == "load_step":
                events.append(LoadStep(t, int(ev["dgu"]), float(ev["load_current"])))
            elif kind == "unplug":
                events.append(PlugEvent("unplug", t, int(ev["dgu"])))
            else:
                pairs = [(int(j), float(a)) for j, a in ev.get("comm", [])]
                events.append(plug_in_event(dgus, lines, t, int(ev["dgu"]),
                                            tuple(int(j) for j in ev["neighbors"]), pairs,
                                            bool(ev.get("secondary", True))))
        except (MicrogridError, ValueError, StopIteration) as exc:
            raise ScenarioParseError(f"events[{k}]: {exc or 'unknown DGU'}") from None

    checks = []
    for k, c in enumerate(doc.get("checks", [])):
        _keys(c, _CHECK_KEYS, f"checks[{k}]", ("metric", "start", "end", "threshold"))
        try:
            checks.append(Check(
                str(c.get("name", f"check{k}")), c["metric"], float(c["start"]), float(c["end"]),
                float(c["threshold"]), c.get("op", "<="), tuple(int(i) for i in c.get("dgus", ())),
                float(c.get("factor", 1.0)),
            ))
        except ValueError as exc:
            raise ScenarioParseError(f"checks[{k}]: {exc}") from None

    kw = {k: model[k] for k in ("mode", "regime") if k in model}
    kw.update({k: float(model[k]) for k in ("omega_c", "k_i", "mu", "horizon") if k in model})
    try:
        return Scenario(
            dgus=tuple(dgus), lines=tuple(lines), closed_lines=closed, comm=tuple(comm.values()),
            events=tuple(events), checks=tuple(checks),
            initially_enabled=tuple(int(i) for i in model.get("initially_enabled", ())),
            v_ref=v_ref, name=str(doc.get("name", "scenario")), **kw,
        )
    except (MicrogridError, ValueError) as exc:
        raise ScenarioParseError(str(exc)) from None


def _event_table(ev) -> dict:
    out = {"time": ev.time, "kind": ev.kind}
    if ev.kind == "connect_line":
        out.update(i=ev.i, j=ev.j)
    elif ev.kind == "enable_secondary":
        out["dgus"] = list(ev.dgus)
    elif ev.kind == "load_step":
        out.update(dgu=ev.dgu, load_current=ev.load_current)
    elif ev.kind == "unplug":
        out["dgu"] = ev.dgu_id
    else:
        out["dgu"] = ev.dgu_id
        out["neighbors"] = ev.electrical_neighbors
        if ev.comm:
            out["comm"] = [[lk.j if lk.i == ev.dgu_id else lk.i, lk.coefficient] for lk in ev.comm]
        out["secondary"] = ev.secondary
    return out


def dump_scenario(sc: Scenario) -> str:
    doc = {
        "name": sc.name,
        "model": {
            "mode": sc.mode, "omega_c": sc.omega_c, "k_i": sc.k_i, "regime": sc.regime, "mu": sc.mu,
            "v_ref": sc.v_ref, "horizon": sc.horizon, "initially_enabled": list(sc.initially_enabled),
        },
        "dgus": [
            {"id": g.id, "rated_current": g.rated_current, "scaling_current": g.scaling_current,
             "load_current": g.load_current, "v_ref": g.v_ref, "present": g.present}
            for g in sc.dgus
        ],
        "lines": [
            {"from": ln.source, "to": ln.target, "resistance": ln.resistance, "inductance": ln.inductance,
             "closed": ln.key in sc.closed_lines}
            for ln in sc.lines
        ],
        "comm": [{"i": lk.i, "j": lk.j, "coefficient": lk.coefficient} for lk in sc.comm],
        "events": [_event_table(ev) for ev in sc.events],
        "checks": [
            {"name": c.name, "metric": c.metric, "start": c.start, "end": c.end, "threshold": c.threshold,
             "op": c.op, "dgus": list(c.dgus), "factor": c.factor}
            for c in sc.checks
        ],
    }
    for k in ("comm", "events", "checks"):
        if not doc[k]:
            del doc[k]
    return tomli_w.dumps(doc)


def load_scenario(path) -> Scenario:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ScenarioParseError(f"cannot read scenario {path}: {exc.strerror}") from None
    return parse_scenario(text)


@dataclass
class RunConfig:
    subcommand: str
    scenario: str | None = None
    out: str | None = None
    dt: float | None = None
    omega_c: float | None = None
    stride: int | None = None
    raw_removal: bool = False
    seed: int | None = None
    mode: str | None = None
    random_n: int | None = None
    regime: str = COMMUTING

    def __post_init__(self):
        for name in ("dt", "omega_c"):
            val = getattr(self, name)
            if val is not None and not val > 0:
                raise ScenarioParseError(f"--{name.replace('_', '-')} must be positive")
        if self.stride is not None and self.stride < 1:
            raise ScenarioParseError("--stride must be >= 1")


def _parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="mgc", description="Consensus secondary control of DC microgrids")
    sub = p.add_subparsers(dest="subcommand", required=True)

    def common(sp, scenario_required=False):
        sp.add_argument("--scenario", required=scenario_required, help="scenario TOML file")
        sp.add_argument("--out", help="output directory")
        sp.add_argument("--seed", type=int)

    def sim_flags(sp):
        sp.add_argument("--dt", type=float, help="integration step [s]")
        sp.add_argument("--omega-c", type=float, dest="omega_c", help="primary-loop bandwidth [rad/s]")
        sp.add_argument("--stride", type=int, help="record every N integration steps")
        sp.add_argument("--raw-removal", action="store_true",
                        help="drop unplugged DGUs without redistributing their secondary state")
        sp.add_argument("--mode", choices=("first_order", "unit_gain"))

    sp = sub.add_parser("simulate", help="run a scenario file")
    common(sp, scenario_required=True)
    sim_flags(sp)
    sp = sub.add_parser("stages", help="run the builtin seven-DGU scenario")
    common(sp)
    sim_flags(sp)
    sp = sub.add_parser("analyze", help="spectral report of Q for a network")
    common(sp)
    sp.add_argument("--random", type=int, dest="random_n", metavar="N", help="analyze a random N-node model")
    sp.add_argument("--regime", choices=(D_IDENTITY, COMMUTING, NEITHER), default=COMMUTING)
    sp = sub.add_parser("counterexample", help="reproduce the negative-eigenvalue example")
    common(sp)
    return p


def _write(out, name, text):
    if out is None:
        return
    d = Path(out)
    d.mkdir(parents=True, exist_ok=True)
    (d / name).write_text(text)


def _run_simulation(sc: Scenario, cfg: RunConfig) -> int:
    from dataclasses import replace

    if cfg.omega_c is not None:
        sc = replace(sc, omega_c=cfg.omega_c)
    if cfg.mode is not None:
        sc = replace(sc, mode=cfg.mode)
    trace = simulate(sc, dt=cfg.dt, stride=cfg.stride, raw_removal=cfg.raw_removal)
    results = evaluate(trace, sc)
    report = "\n".join(str(r) for r in results)
    print(f"{sc.name}: {len(trace.t)} samples over {trace.t[-1]:g} s")
    if report:
        print(report)
    if cfg.out is not None:
        d = Path(cfg.out)
        d.mkdir(parents=True, exist_ok=True)
        with open(d / "trace.csv", "w", newline="") as fh:
            trace.write_csv(fh)
        _write(d, "checks.txt", report + "\n")
    return 0 if all(r.passed for r in results) else 1


def _analyze(cfg: RunConfig) -> int:
    from .equilibria import convergence_rate_first_order, convergence_rate_unit_gain
    from .randomgraphs import random_model

    if cfg.random_n is not None:
        rng = np.random.default_rng(cfg.seed)
        model = random_model(rng, cfg.random_n, cfg.regime)
    else:
        sc = load_scenario(cfg.scenario) if cfg.scenario else builtin_stage_scenario()
        model = sc.full_grid().coupled
    report = model.report
    if report.assumption_status != NEITHER and report.structure_ok and model.n > 1:
        report.extras["rate_unit_gain"] = convergence_rate_unit_gain(model.Q, report.assumption_status)
        report.extras["rate_first_order"] = convergence_rate_first_order(
            model.Q, model.omega_c, report.assumption_status)
    print(report.to_text())
    _write(cfg.out, "report.txt", report.to_text() + "\n")
    _write(cfg.out, "report.json", report.to_json() + "\n")
    if report.assumption_status == NEITHER:
        print("neither D = I nor commuting Laplacians: stability is not certified", file=sys.stderr)
        return 3
    return 0 if report.structure_ok else 1


def _counterexample(cfg: RunConfig) -> int:
    report = counterexample_report()
    dev = report.extras["max_eig_deviation"]
    ok = dev <= 2e-3
    text = report.to_text() + f"\nmatches published eigenvalues within 2e-3: {ok}"
    print(text)
    _write(cfg.out, "counterexample.txt", text + "\n")
    _write(cfg.out, "counterexample.json", report.to_json() + "\n")
    return 0 if ok else 1


def run(argv=None) -> int:
    logging.basicConfig(level=os.environ.get("MGC_LOG", "WARNING").upper(),
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        args = _parser().parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        cfg = RunConfig(**vars(args))
        if cfg.subcommand == "simulate":
            return _run_simulation(load_scenario(cfg.scenario), cfg)
        if cfg.subcommand == "stages":
            sc = load_scenario(cfg.scenario) if cfg.scenario else builtin_stage_scenario()
            return _run_simulation(sc, cfg)
        if cfg.subcommand == "analyze":
            return _analyze(cfg)
        return _counterexample(cfg)
    except MicrogridError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.exit_code


def main():
    sys.exit(run())


if __name__ == "__main__":
    main()

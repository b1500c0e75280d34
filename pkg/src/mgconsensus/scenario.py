"""Timed scenarios, the builtin seven-DGU experiment and check evaluation."""
from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from . import reference_data as ref
from .errors import MalformedGraphError
from .graph import CommLink, Line
from .model import DEFAULT_OMEGA_C, FIRST_ORDER, MODES, DguSpec
from .pnp import REGIMES, Microgrid, PlugEvent
from .spectral import COMMUTING

# Artifact defaults; the load levels of the reference experiment are not published.
DEFAULT_LOADS_7DGU = {1: 4.0, 2: 4.0, 3: 4.0, 4: 2.0, 5: 2.0, 6: 1.5, 7: 1.5}

STAGE_TIMES = {"t1": 2.0, "t2": 5.0, "t3": 15.0, "t4": 25.0, "t5": 35.0}
CS_THRESHOLD = 1e-2  # p.u.
VB_THRESHOLD = 1e-3  # V


@dataclass(frozen=True)
class ConnectLine:
    time: float
    i: int
    j: int
    kind = "connect_line"

    @property
    def target(self):
        return ("line", frozenset((self.i, self.j)))


@dataclass(frozen=True)
class EnableSecondary:
    time: float
    dgus: tuple
    kind = "enable_secondary"

    def __post_init__(self):
        object.__setattr__(self, "dgus", tuple(self.dgus))
        if not self.dgus:
            raise ValueError("enable_secondary needs at least one DGU")

    @property
    def target(self):
        return ("secondary", frozenset(self.dgus))


@dataclass(frozen=True)
class LoadStep:
    time: float
    dgu: int
    load_current: float
    kind = "load_step"

    @property
    def target(self):
        return ("load", self.dgu)


@dataclass(frozen=True)
class Check:
    """Timed assertion on a trace metric.

    ``op == "<="``: the maximum of the metric over ``[start, end]`` must not
    exceed ``threshold``. ``op == ">"``: the minimum must exceed it.
    Metric ``ratio`` is ``|I_t[a] - factor * I_t[b]| / |I_t[a]|`` for ``dgus = (a, b)``.
    """

    name: str
    metric: str
    start: float
    end: float
    threshold: float
    op: str = "<="
    dgus: tuple = ()
    factor: float = 1.0

    def __post_init__(self):
        object.__setattr__(self, "dgus", tuple(self.dgus))
        if self.metric not in ("cs_error", "vb_error", "ratio"):
            raise ValueError(f"unknown metric {self.metric!r}")
        if self.op not in ("<=", ">"):
            raise ValueError(f"unknown comparison {self.op!r}")
        if self.metric == "ratio" and len(self.dgus) != 2:
            raise ValueError("ratio checks need two DGUs")
        if self.end < self.start:
            raise ValueError(f"check {self.name}: empty window")


@dataclass(frozen=True)
class CheckResult:
    name: str
    passed: bool
    value: float
    threshold: float
    op: str

    def __str__(self):
        flag = "PASS" if self.passed else "FAIL"
        return f"[{flag}] {self.name}: {self.value:.3e} {self.op} {self.threshold:.1e}"


@dataclass(frozen=True)
class Scenario:
    dgus: tuple
    lines: tuple = ()
    closed_lines: frozenset = frozenset()
    comm: tuple = ()
    events: tuple = ()
    checks: tuple = ()
    initially_enabled: tuple = ()
    mode: str = FIRST_ORDER
    omega_c: float = DEFAULT_OMEGA_C
    k_i: float = 1.0
    regime: str = COMMUTING
    mu: float = 1.0
    v_ref: float = 48.0
    horizon: float = 10.0
    name: str = "scenario"

    def __post_init__(self):
        for f in ("dgus", "lines", "comm", "events", "checks", "initially_enabled"):
            object.__setattr__(self, f, tuple(getattr(self, f)))
        object.__setattr__(self, "closed_lines", frozenset(frozenset(p) for p in self.closed_lines))
        ids = [g.id for g in self.dgus]
        if len(set(ids)) != len(ids):
            raise MalformedGraphError("duplicate DGU ids")
        if self.mode not in MODES:
            raise ValueError(f"unknown mode {self.mode!r}")
        if self.regime not in REGIMES:
            raise ValueError(f"unknown regime {self.regime!r}")
        if not (self.omega_c > 0 and self.k_i > 0 and self.mu > 0 and self.horizon > 0):
            raise ValueError("omega_c, k_I, mu and horizon must be positive")
        keys = {ln.key for ln in self.lines}
        for p in self.closed_lines:
            if p not in keys:
                raise MalformedGraphError(f"closed line {sorted(p)} is not in the line table")
        seen = set()
        for ev in self.events:
            if not 0.0 <= ev.time <= self.horizon:
                raise ValueError(f"event {ev.kind} at t={ev.time} outside [0, {self.horizon}]")
            k = (ev.time, ev.target)
            if k in seen:
                raise ValueError(f"duplicate event for {ev.target} at t={ev.time}")
            seen.add(k)
        times = [ev.time for ev in self.events]
        if times != sorted(times):
            raise ValueError("events must be time-ordered")

    @property
    def ids(self) -> tuple:
        return tuple(g.id for g in self.dgus)

    def dgu(self, dgu_id) -> DguSpec:
        for g in self.dgus:
            if g.id == dgu_id:
                return g
        raise KeyError(dgu_id)

    def line(self, i, j) -> Line:
        k = frozenset((i, j))
        for ln in self.lines:
            if ln.key == k:
                return ln
        raise MalformedGraphError(f"no line between {i} and {j} in the line table")

    def initial_grid(self) -> Microgrid:
        present = [g for g in self.dgus if g.present]
        on = {g.id for g in present}
        lines = [ln for ln in self.lines if ln.key in self.closed_lines]
        comm = [lk for lk in self.comm if lk.i in on and lk.j in on]
        return Microgrid(
            present, lines, comm, frozenset(self.initially_enabled),
            regime=self.regime, mu=self.mu, k_i=self.k_i, mode=self.mode, omega_c=self.omega_c,
        ).validate()

    def full_grid(self) -> Microgrid:
        """Every DGU, every line, secondary control everywhere (for spectral analysis)."""
        return Microgrid(
            [replace(g, present=True) for g in self.dgus], self.lines, self.comm, frozenset(self.ids),
            regime=self.regime, mu=self.mu, k_i=self.k_i, mode=self.mode, omega_c=self.omega_c,
        )


def plug_in_event(scenario_dgus, lines, time, dgu_id, neighbors, comm=(), secondary=True) -> PlugEvent:
    """Resolve a plug-in request from ids against DGU and line tables."""
    dgu = next(g for g in scenario_dgus if g.id == dgu_id)
    table = {ln.key: ln for ln in lines}
    try:
        el = tuple(table[frozenset((dgu_id, j))] for j in neighbors)
    except KeyError as exc:
        raise MalformedGraphError(f"plug-in of DGU {dgu_id}: missing line {set(exc.args[0])}") from None
    links = tuple(CommLink(dgu_id, j, a) for j, a in comm)
    return PlugEvent("plug_in", time, replace(dgu, present=True), el, links, secondary)


def builtin_stage_scenario(mode: str = FIRST_ORDER, omega_c: float = DEFAULT_OMEGA_C, loads=None) -> Scenario:
    """Seven-DGU, six-stage plug-and-play experiment.

    Stage 1: DGUs 1-6 isolated, primary loops only. t1: lines among 1-6 close.
    t2: secondary control on 1-6. t3: DGU 7 plugs in through DGUs 4 and 5.
    t4: load current of DGU 1 doubles. t5: DGU 3 disconnects. Horizon 45 s.
    """
    loads = dict(DEFAULT_LOADS_7DGU if loads is None else loads)
    v_ref = ref.V_REF_7DGU
    dgus = tuple(
        DguSpec(i, r, r, v_ref, loads[i], present=(i != 7)) for i, r in ref.RATED_7DGU.items()
    )
    lines = ref.LINES_7DGU
    t = STAGE_TIMES
    events = [
        ConnectLine(t["t1"], ln.source, ln.target)
        for ln in lines
        if 7 not in (ln.source, ln.target)
    ]
    events.append(EnableSecondary(t["t2"], (1, 2, 3, 4, 5, 6)))
    events.append(plug_in_event(dgus, lines, t["t3"], 7, (4, 5)))
    events.append(LoadStep(t["t4"], 1, 2.0 * loads[1]))
    events.append(PlugEvent("unplug", t["t5"], 3))
    checks = builtin_checks()
    return Scenario(
        dgus=dgus, lines=lines, comm=(), events=tuple(events), checks=checks,
        mode=mode, omega_c=omega_c, k_i=1.0, regime=COMMUTING, mu=1.0, v_ref=v_ref,
        horizon=45.0, name="stages",
    )


def builtin_checks() -> tuple:
    t = STAGE_TIMES
    eps = 1e-2  # keep windows clear of the next event instant
    cs, vb = CS_THRESHOLD, VB_THRESHOLD
    out = [
        Check("stage1-2: p.u. currents differ before activation", "cs_error", 0.5, t["t2"] - eps, 0.05, ">"),
        Check("stage3: current sharing", "cs_error", t["t2"] + 8.0, t["t3"] - eps, cs),
        Check("stage3: voltage balancing", "vb_error", t["t2"] + 8.0, t["t3"] - eps, vb),
        Check("stage4: current sharing", "cs_error", t["t4"] - 2.0, t["t4"] - eps, cs),
        Check("stage4: voltage balancing", "vb_error", t["t4"] - 2.0, t["t4"] - eps, vb),
        Check("stage4: I_t1 = 2 I_t4", "ratio", t["t4"] - 2.0, t["t4"] - eps, 1e-2, dgus=(1, 4), factor=2.0),
        Check("stage4: I_t1 = 3 I_t7", "ratio", t["t4"] - 2.0, t["t4"] - eps, 1e-2, dgus=(1, 7), factor=3.0),
        Check("stage5: current sharing", "cs_error", t["t5"] - 2.0, t["t5"] - eps, cs),
        Check("stage5: voltage balancing", "vb_error", t["t5"] - 2.0, t["t5"] - eps, vb),
        Check("stage6: current sharing", "cs_error", 43.0, 45.0, cs),
        Check("stage6: voltage balancing", "vb_error", 43.0, 45.0, vb),
    ]
    return tuple(out)


def sharing_error(i_pu) -> float:
    """Largest pairwise difference of per-unit currents (nan entries ignored)."""
    x = np.asarray(i_pu, dtype=float)
    x = x[np.isfinite(x)]
    return float(x.max() - x.min()) if x.size else 0.0


def balancing_error(v, v_ref: float) -> float:
    x = np.asarray(v, dtype=float)
    x = x[np.isfinite(x)]
    return float(abs(x.mean() - v_ref)) if x.size else 0.0


def _metric_series(trace, check: Check) -> np.ndarray:
    if check.metric == "cs_error":
        return trace.cs_error
    if check.metric == "vb_error":
        return trace.vb_error
    a, b = (trace.ids.index(k) for k in check.dgus)
    ia, ib = trace.It[:, a], trace.It[:, b]
    return np.abs(ia - check.factor * ib) / np.abs(ia)


def evaluate(trace, scenario_or_checks) -> list:
    checks = getattr(scenario_or_checks, "checks", scenario_or_checks)
    out = []
    for c in checks:
        if c.start < trace.t[0] - 1e-12 or c.end > trace.t[-1] + 1e-12:
            raise ValueError(f"check {c.name!r}: window [{c.start}, {c.end}] outside trace")
        mask = (trace.t >= c.start - 1e-12) & (trace.t <= c.end + 1e-12)
        if not mask.any():
            raise ValueError(f"check {c.name!r}: no samples in window")
        series = _metric_series(trace, c)[mask]
        if np.any(~np.isfinite(series)):
            out.append(CheckResult(c.name, False, float("nan"), c.threshold, c.op))
            continue
        if c.op == "<=":
            value = float(series.max())
            ok = value <= c.threshold
        else:
            value = float(series.min())
            ok = value > c.threshold
        out.append(CheckResult(c.name, bool(ok), value, c.threshold, c.op))
    return out

"""Closed-loop voltage dynamics, fixed-step RK4 integration and trace recording."""
from __future__ import annotations

import csv
import io
import logging
import math
from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np

from .errors import NumericalAbort
from .graph import incidence_matrix
from .model import FIRST_ORDER, UNIT_GAIN
from .pnp import SimState, enable_secondary, connect_line, initial_state, plug_in, set_load, unplug
from .scenario import balancing_error, sharing_error

log = logging.getLogger(__name__)

DT_MAX = 1e-3
MAX_SAMPLES = 10_000


class Outputs(NamedTuple):
    i_line: np.ndarray
    i_t: np.ndarray
    i_pu: np.ndarray
    v_avg: float


def rhs_unit_gain(delta_v, i_load, v_ref, model) -> np.ndarray:
    delta_v = np.asarray(delta_v, dtype=float)
    if delta_v.shape != (model.n,):
        raise ValueError(f"state has shape {delta_v.shape}, model has {model.n} nodes")
    v_ref = np.broadcast_to(v_ref, (model.n,))
    return -model.Q @ delta_v - model.LD @ np.asarray(i_load, dtype=float) - model.Q @ v_ref


def rhs_first_order(x, i_load, v_ref, model) -> np.ndarray:
    """``x = [dV, V]``; returns ``[dV', V']``."""
    x = np.asarray(x, dtype=float)
    n = model.n
    if x.shape != (2 * n,):
        raise ValueError(f"state has shape {x.shape}, expected ({2 * n},)")
    dv, v = x[:n], x[n:]
    v_ref = np.broadcast_to(v_ref, (n,))
    d_dv = -model.Q @ v - model.LD @ np.asarray(i_load, dtype=float)
    d_v = model.omega_c * (dv - v + v_ref)
    return np.concatenate([d_dv, d_v])


def first_order_matrix(Q, omega_c: float) -> np.ndarray:
    """The 2N x 2N matrix ``[[0, -Q], [w I, -w I]]``."""
    n = Q.shape[0]
    eye = np.eye(n)
    return np.block([[np.zeros((n, n)), -Q], [omega_c * eye, -omega_c * eye]])


def affine_system(model, i_load, v_ref):
    """``(A, b)`` with ``x' = A x + b`` for the model's primary-loop abstraction."""
    n = model.n
    i_load = np.asarray(i_load, dtype=float)
    v_ref = np.broadcast_to(np.asarray(v_ref, dtype=float), (n,))
    if model.mode == UNIT_GAIN:
        return -model.Q, -model.LD @ i_load - model.Q @ v_ref
    A = first_order_matrix(model.Q, model.omega_c)
    b = np.concatenate([-model.LD @ i_load, model.omega_c * v_ref])
    return A, b


def rk4_step(f, x, dt: float) -> np.ndarray:
    """One classical Runge-Kutta step of the autonomous system ``x' = f(x)``."""
    with np.errstate(over="ignore", invalid="ignore"):
        k1 = f(x)
        k2 = f(x + 0.5 * dt * k1)
        k3 = f(x + 0.5 * dt * k2)
        k4 = f(x + dt * k3)
        out = x + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
    if not np.all(np.isfinite(out)):
        raise NumericalAbort(f"non-finite state after RK4 step of size {dt}")
    return out


def rk4_propagator(A, b, dt: float):
    """``(P, c)`` such that one RK4 step of ``x' = A x + b`` is ``P x + c``.

    For linear dynamics the four stages collapse to the degree-4 Taylor
    polynomial of ``exp(A dt)``; this is the same map as :func:`rk4_step`.
    """
    n = A.shape[0]
    Z = dt * A
    eye = np.eye(n)
    Z2 = Z @ Z
    Z3 = Z2 @ Z
    P = eye + Z + Z2 / 2.0 + Z3 / 6.0 + (Z3 @ Z) / 24.0
    c = dt * ((eye + Z / 2.0 + Z2 / 6.0 + Z3 / 24.0) @ b)
    return P, c


def step(state: SimState, dt: float, inputs, model) -> SimState:
    """Advance ``state`` by ``dt`` with constant ``inputs = (I_L, V_ref)``."""
    if not dt > 0:
        raise ValueError("dt must be positive")
    i_load, v_ref = inputs
    n = model.n
    v_ref_vec = np.broadcast_to(np.asarray(v_ref, dtype=float), (n,))
    if model.mode == UNIT_GAIN:
        dv = rk4_step(lambda x: rhs_unit_gain(x, i_load, v_ref_vec, model), state.delta_v, dt)
        return SimState(state.t + dt, dv, dv + v_ref_vec)
    x0 = np.concatenate([state.delta_v, state.v])
    x = rk4_step(lambda x: rhs_first_order(x, i_load, v_ref_vec, model), x0, dt)
    return SimState(state.t + dt, x[:n], x[n:])


def compute_outputs(v, i_load, el_net, d) -> Outputs:
    v = np.asarray(v, dtype=float)
    B = incidence_matrix(el_net)
    if v.shape != (el_net.n_nodes,):
        raise ValueError(f"voltage vector {v.shape} for {el_net.n_nodes} nodes")
    i_line = -el_net.weights() * (B.T @ v)
    i_t = np.asarray(i_load, dtype=float) - B @ i_line
    return Outputs(i_line, i_t, np.asarray(d) * i_t, float(v.mean()))


def default_dt(model) -> float:
    dt = DT_MAX
    if model.mode == FIRST_ORDER:
        dt = min(dt, 0.1 / model.omega_c)
    lam = np.max(np.abs(np.linalg.eigvals(model.Q))) if model.n else 0.0
    if lam > 0:
        dt = min(dt, 0.1 / lam)
    return dt


@dataclass
class Trace:
    """Sampled simulation output; per-DGU columns follow ``ids`` (nan while absent)."""

    ids: tuple
    v_ref: float
    t: np.ndarray
    V: np.ndarray
    It: np.ndarray
    Ipu: np.ndarray
    IL: np.ndarray
    dV: np.ndarray
    Vavg: np.ndarray
    cs_error: np.ndarray
    vb_error: np.ndarray
    dv_mean: np.ndarray
    events: list = field(default_factory=list)

    def column(self, name: str, dgu_id) -> np.ndarray:
        return getattr(self, name)[:, self.ids.index(dgu_id)]

    def at(self, time: float) -> int:
        """Index of the last sample at or before ``time``."""
        return int(np.searchsorted(self.t, time + 1e-12, side="right") - 1)

    def header(self) -> list:
        cols = ["t"]
        for prefix in ("V", "It", "Ipu"):
            cols += [f"{prefix}_{i}" for i in self.ids]
        return cols + ["Vavg", "cs_error", "vb_error"]

    def write_csv(self, fh) -> None:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(self.header())
        for k in range(len(self.t)):
            row = [self.t[k], *self.V[k], *self.It[k], *self.Ipu[k], self.Vavg[k], self.cs_error[k], self.vb_error[k]]
            w.writerow([_fmt(x) for x in row])

    def to_csv(self) -> str:
        buf = io.StringIO()
        self.write_csv(buf)
        return buf.getvalue()


def _fmt(x) -> str:
    return "nan" if not math.isfinite(x) else repr(float(x))


class _Recorder:
    def __init__(self, ids, v_ref):
        self.ids = tuple(ids)
        self.pos = {i: k for k, i in enumerate(self.ids)}
        self.v_ref = v_ref
        self.rows = {k: [] for k in ("t", "V", "It", "Ipu", "IL", "dV", "Vavg", "cs", "vb", "dvm")}

    def record(self, t, grid, dv, v):
        model = grid.coupled
        out = compute_outputs(v, grid.loads, grid.electrical, model.d)
        nan = np.full(len(self.ids), np.nan)
        cols = [self.pos[i] for i in grid.ids]
        r = self.rows
        r["t"].append(t)
        for key, vals in (("V", v), ("It", out.i_t), ("Ipu", out.i_pu), ("IL", grid.loads), ("dV", dv)):
            row = nan.copy()
            row[cols] = vals
            r[key].append(row)
        r["Vavg"].append(out.v_avg)
        r["cs"].append(sharing_error(out.i_pu))
        r["vb"].append(balancing_error(v, self.v_ref))
        r["dvm"].append(float(np.mean(dv)))
        if not np.all(np.isfinite(v)) or not np.all(np.isfinite(dv)):
            raise NumericalAbort(f"non-finite state at t={t:.6g}")

    def trace(self, events) -> Trace:
        r = self.rows
        return Trace(
            self.ids, self.v_ref, np.array(r["t"]), np.array(r["V"]), np.array(r["It"]),
            np.array(r["Ipu"]), np.array(r["IL"]), np.array(r["dV"]), np.array(r["Vavg"]),
            np.array(r["cs"]), np.array(r["vb"]), np.array(r["dvm"]), list(events),
        )


def _apply(event, grid, state, scenario, raw_removal):
    kind = event.kind
    if kind == "connect_line":
        return connect_line(grid, scenario.line(event.i, event.j)), state
    if kind == "enable_secondary":
        return enable_secondary(grid, state, event.dgus)
    if kind == "load_step":
        return set_load(grid, event.dgu, event.load_current), state
    if kind == "plug_in":
        return plug_in(grid, state, event)
    if kind == "unplug":
        return unplug(grid, state, event, raw=raw_removal)
    raise ValueError(f"unknown event kind {kind!r}")


def _pack(grid, state):
    if grid.mode == UNIT_GAIN:
        return state.delta_v.copy()
    return np.concatenate([state.delta_v, state.v])


def _unpack(grid, x, t):
    n = grid.n
    if grid.mode == UNIT_GAIN:
        return SimState(t, x.copy(), x + grid.v_ref)
    return SimState(t, x[:n].copy(), x[n:].copy())


def simulate(scenario, dt: float | None = None, stride: int | None = None, raw_removal: bool = False,
             initial=None) -> Trace:
    """Integrate ``scenario`` piecewise between events.

    Every segment uses a fixed step that divides it exactly, so events land on
    step boundaries. Samples are taken every ``stride`` steps (by default about
    every ``max(dt, horizon / 10**4)`` seconds), at each segment start (after
    the events there are applied) and at the horizon.
    """
    if dt is not None and not dt > 0:
        raise ValueError("dt must be positive")
    if stride is not None and stride < 1:
        raise ValueError("stride must be >= 1")
    grid = scenario.initial_grid()
    state = initial_state(grid) if initial is None else initial
    rec = _Recorder(scenario.ids, scenario.v_ref)
    log_events = []
    events = list(scenario.events)
    horizon = scenario.horizon
    t = 0.0
    k_ev = 0
    while True:
        while k_ev < len(events) and events[k_ev].time <= t + 1e-12:
            ev = events[k_ev]
            grid, state = _apply(ev, grid, state, scenario, raw_removal)
            if grid.mode == UNIT_GAIN:
                state = SimState(t, state.delta_v, state.delta_v + grid.v_ref)
            log_events.append((t, ev.kind, getattr(ev, "target", None)))
            log.debug("t=%.4f applied %s", t, ev.kind)
            k_ev += 1
        t_next = events[k_ev].time if k_ev < len(events) else horizon
        if t >= horizon - 1e-12:
            rec.record(t, grid, state.delta_v, state.v)
            break
        model = grid.coupled
        h_max = dt if dt is not None else default_dt(model)
        span = t_next - t
        n_steps = max(1, math.ceil(span / h_max - 1e-9))
        h = span / n_steps
        every = stride if stride is not None else max(1, round(max(h_max, horizon / MAX_SAMPLES) / h))
        A, b = affine_system(model, grid.loads, grid.v_ref)
        P, c = rk4_propagator(A, b, h)
        x = _pack(grid, state)
        rec.record(t, grid, state.delta_v, state.v)
        with np.errstate(over="ignore", invalid="ignore"):
            for k in range(1, n_steps + 1):
                x = P @ x + c
                if k % every == 0 and k < n_steps:
                    s = _unpack(grid, x, t + k * h)
                    rec.record(s.t, grid, s.delta_v, s.v)
        if not np.all(np.isfinite(x)):
            raise NumericalAbort(f"non-finite state in segment [{t:.6g}, {t_next:.6g}] with step {h:.3g}")
        t = t_next
        state = _unpack(grid, x, t)
    return rec.trace(log_events)


def propagate(A, b, x0, dt: float, n_steps: int, every: int = 1):
    """Iterate the RK4 map of ``x' = A x + b``; returns ``(times, states)`` every ``every`` steps."""
    P, c = rk4_propagator(np.asarray(A, dtype=float), np.asarray(b, dtype=float), dt)
    Pm = np.linalg.matrix_power(P, every)
    # affine offset accumulated over `every` steps
    cm = np.zeros_like(c)
    for _ in range(every):
        cm = P @ cm + c
    x = np.asarray(x0, dtype=float).copy()
    ts, xs = [0.0], [x.copy()]
    for k in range(every, n_steps + 1, every):
        x = Pm @ x + cm
        ts.append(k * dt)
        xs.append(x.copy())
    xs = np.array(xs)
    if not np.all(np.isfinite(xs)):
        raise NumericalAbort("non-finite state while propagating")
    return np.array(ts), xs

"""Runtime microgrid topology and the plug-and-play secondary-layer procedures.

Every structural change returns a new :class:`Microgrid`; matrices are rebuilt
from scratch, indices are DGU ids.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass, replace
from functools import cached_property

import numpy as np

from .errors import AssumptionViolation, MalformedGraphError, UnsupportedRegimeError
from .graph import CommLink, CommNetwork, ElectricalNetwork, Line, is_connected
from .model import DEFAULT_OMEGA_C, FIRST_ORDER, CoupledModel, DguSpec
from .spectral import COMMUTING, D_IDENTITY

log = logging.getLogger(__name__)

REGIMES = (D_IDENTITY, COMMUTING)
MEAN_TOL = 1e-9


@dataclass(frozen=True)
class SimState:
    t: float
    delta_v: np.ndarray
    v: np.ndarray  # PCC voltages; equals delta_v + v_ref under unit-gain loops


@dataclass(frozen=True)
class PlugEvent:
    """A DGU joining (``plug_in``) or leaving (``unplug``) at ``time``.

    For ``plug_in`` ``lines`` hold the power lines to the electrical neighbours;
    ``comm`` holds explicit consensus coefficients and is only accepted when
    D = I (with commuting Laplacians the coefficients are derived from the
    lines).
    """

    kind: str
    time: float
    dgu: DguSpec | int
    lines: tuple = ()
    comm: tuple = ()
    secondary: bool = True

    def __post_init__(self):
        if self.kind not in ("plug_in", "unplug"):
            raise ValueError(f"unknown plug event kind {self.kind!r}")
        if self.kind == "plug_in" and not isinstance(self.dgu, DguSpec):
            raise ValueError("plug_in needs a full DguSpec")
        object.__setattr__(self, "lines", tuple(self.lines))
        object.__setattr__(self, "comm", tuple(self.comm))

    @property
    def dgu_id(self) -> int:
        return self.dgu.id if isinstance(self.dgu, DguSpec) else self.dgu

    @property
    def target(self):
        return ("dgu", self.dgu_id)

    @property
    def electrical_neighbors(self) -> list:
        i = self.dgu_id
        return [ln.target if ln.source == i else ln.source for ln in self.lines]


@dataclass(frozen=True, eq=False)
class Microgrid:
    dgus: tuple
    lines: tuple = ()
    comm_links: tuple = ()
    enabled: frozenset = frozenset()
    regime: str = COMMUTING
    mu: float = 1.0
    k_i: float = 1.0
    mode: str = FIRST_ORDER
    omega_c: float = DEFAULT_OMEGA_C

    def __post_init__(self):
        object.__setattr__(self, "dgus", tuple(self.dgus))
        object.__setattr__(self, "lines", tuple(self.lines))
        object.__setattr__(self, "comm_links", tuple(self.comm_links))
        object.__setattr__(self, "enabled", frozenset(self.enabled))
        if self.regime not in REGIMES:
            raise ValueError(f"unknown stability regime {self.regime!r}")
        unknown = self.enabled - set(self.ids)
        if unknown:
            raise MalformedGraphError(f"secondary enabled on inactive DGUs {sorted(unknown)}")

    @property
    def ids(self) -> tuple:
        return tuple(g.id for g in self.dgus)

    @property
    def n(self) -> int:
        return len(self.dgus)

    def index(self, dgu_id) -> int:
        return self.ids.index(dgu_id)

    def dgu(self, dgu_id) -> DguSpec:
        return self.dgus[self.index(dgu_id)]

    @property
    def loads(self) -> np.ndarray:
        return np.array([g.load_current for g in self.dgus], dtype=float)

    @property
    def v_ref(self) -> np.ndarray:
        return np.array([g.v_ref for g in self.dgus], dtype=float)

    def topology(self) -> tuple:
        """Hashable description of the graphs, for equality checks."""
        el = frozenset((ln.key, ln.resistance) for ln in self.lines)
        cm = frozenset((lk.key, lk.coefficient) for lk in self.communication().links)
        return frozenset(self.ids), el, cm, self.enabled

    @cached_property
    def electrical(self) -> ElectricalNetwork:
        return ElectricalNetwork(self.ids, self.lines)

    def communication(self) -> CommNetwork:
        on = self.enabled
        if self.regime == COMMUTING:
            links = [
                CommLink(ln.source, ln.target, self.mu / ln.resistance)
                for ln in self.lines
                if ln.source in on and ln.target in on
            ]
        else:
            links = [lk for lk in self.comm_links if lk.i in on and lk.j in on]
        return CommNetwork(self.ids, links, self.k_i)

    @cached_property
    def coupled(self) -> CoupledModel:
        return CoupledModel.from_dgus(
            self.dgus, self.electrical, self.communication(), mode=self.mode, omega_c=self.omega_c
        )

    def comm_neighbors(self, dgu_id) -> list:
        return self.communication().neighbors(dgu_id)

    def validate(self) -> "Microgrid":
        refs = {g.v_ref for g in self.dgus}
        if len(refs) > 1:
            raise AssumptionViolation("common reference", f"references {sorted(refs)}")
        if self.regime == D_IDENTITY and any(g.scaling_current != 1.0 for g in self.dgus):
            raise UnsupportedRegimeError("D = I requires unit scaling currents for every DGU")
        if self.enabled:
            el = self.electrical
            if not is_connected(el.node_ids, [(ln.source, ln.target) for ln in el.lines]):
                raise AssumptionViolation("connectivity", "electrical graph is not connected")
            on = [i for i in self.ids if i in self.enabled]
            links = [(lk.i, lk.j) for lk in self.communication().links]
            if not is_connected(on, links):
                raise AssumptionViolation(
                    "connectivity", "communication graph among secondary-enabled DGUs is not connected"
                )
        return self


def initial_state(grid: Microgrid, t: float = 0.0) -> SimState:
    dv = np.zeros(grid.n)
    return SimState(t, dv, dv + grid.v_ref)


def plug_in(grid: Microgrid, state: SimState, event: PlugEvent):
    """Add a DGU with zeroed secondary state; returns ``(grid, state)``."""
    new = event.dgu
    if new.id in grid.ids:
        raise MalformedGraphError(f"DGU {new.id} is already connected")
    if grid.n and any(g.v_ref != new.v_ref for g in grid.dgus):
        raise AssumptionViolation("common reference", f"DGU {new.id} has V_ref {new.v_ref}")
    for ln in event.lines:
        if new.id not in (ln.source, ln.target):
            raise MalformedGraphError(f"line {ln.source}-{ln.target} does not touch DGU {new.id}")
    if grid.regime == COMMUTING:
        if event.comm:
            raise UnsupportedRegimeError(
                "consensus coefficients are derived from line conductances; explicit ones are rejected"
            )
        comm = ()
    else:
        comm = tuple(event.comm)
        for lk in comm:
            if new.id not in (lk.i, lk.j):
                raise MalformedGraphError(f"comm link {lk.i}-{lk.j} does not touch DGU {new.id}")
    enabled = grid.enabled | {new.id} if event.secondary else grid.enabled
    out = replace(
        grid,
        dgus=grid.dgus + (new,),
        lines=grid.lines + tuple(event.lines),
        comm_links=grid.comm_links + comm,
        enabled=enabled,
    ).validate()
    dv = np.append(state.delta_v, 0.0)
    v = np.append(state.v, new.v_ref)
    return out, SimState(event.time, dv, v)


def redistribute(delta_v, leaving: int, neighbors) -> np.ndarray:
    """Spread the leaving entry evenly over ``neighbors`` (indices), then drop it."""
    dv = np.array(delta_v, dtype=float)
    if len(neighbors):
        dv[list(neighbors)] += dv[leaving] / len(neighbors)
    return np.delete(dv, leaving)


def unplug(grid: Microgrid, state: SimState, event: PlugEvent, raw: bool = False):
    """Remove a DGU. Unless ``raw``, its secondary state is handed to its
    communication neighbours so the mean of the remaining states is unchanged
    when it was zero."""
    j = event.dgu_id
    if j not in grid.ids:
        raise MalformedGraphError(f"DGU {j} is not connected")
    if grid.n == 1:
        raise MalformedGraphError("cannot unplug the last DGU")
    k = grid.index(j)
    mean = float(np.mean(state.delta_v))
    if abs(mean) > MEAN_TOL:
        log.warning("unplugging DGU %s with mean(dV) = %.3e; balancing will be offset", j, mean)
    nbrs = grid.comm_neighbors(j) if j in grid.enabled else []
    if j in grid.enabled and not nbrs:
        raise MalformedGraphError(f"secondary-enabled DGU {j} has no communication neighbours")
    if raw:
        dv = np.delete(state.delta_v, k)
    else:
        dv = redistribute(state.delta_v, k, [grid.index(i) for i in nbrs])
    v = np.delete(state.v, k)
    out = replace(
        grid,
        dgus=tuple(g for g in grid.dgus if g.id != j),
        lines=tuple(ln for ln in grid.lines if j not in (ln.source, ln.target)),
        comm_links=tuple(lk for lk in grid.comm_links if j not in (lk.i, lk.j)),
        enabled=grid.enabled - {j},
    ).validate()
    return out, SimState(event.time, dv, v)


def connect_line(grid: Microgrid, line: Line) -> Microgrid:
    missing = {line.source, line.target} - set(grid.ids)
    if missing:
        raise MalformedGraphError(f"line {line.source}-{line.target} touches inactive DGUs {sorted(missing)}")
    return replace(grid, lines=grid.lines + (line,)).validate()


def enable_secondary(grid: Microgrid, state: SimState, dgu_ids):
    """Activate consensus on ``dgu_ids``; their secondary states start at zero."""
    ids = set(dgu_ids)
    missing = ids - set(grid.ids)
    if missing:
        raise MalformedGraphError(f"cannot enable inactive DGUs {sorted(missing)}")
    dv = state.delta_v.copy()
    fresh = ids - grid.enabled
    for i in fresh:
        dv[grid.index(i)] = 0.0
    out = replace(grid, enabled=grid.enabled | ids).validate()
    return out, SimState(state.t, dv, state.v)


def set_load(grid: Microgrid, dgu_id, load_current: float) -> Microgrid:
    dgus = tuple(replace(g, load_current=load_current) if g.id == dgu_id else g for g in grid.dgus)
    if dgus == grid.dgus and dgu_id not in grid.ids:
        raise MalformedGraphError(f"load step on inactive DGU {dgu_id}")
    return replace(grid, dgus=dgus)

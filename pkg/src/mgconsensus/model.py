"""DGU parameters and the assembled closed-loop model."""
from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property

import numpy as np

from .graph import CommNetwork, ElectricalNetwork, comm_laplacian, electrical_laplacian

UNIT_GAIN = "unit_gain"
FIRST_ORDER = "first_order"
MODES = (UNIT_GAIN, FIRST_ORDER)

DEFAULT_OMEGA_C = 2 * np.pi * 100.0


@dataclass(frozen=True)
class DguSpec:
    """One distributed generation unit.

    ``scaling_current`` is the current-sharing scale I^s (the rated current when
    sharing in p.u.; 1 A everywhere for equal sharing in amperes).
    """

    id: int
    rated_current: float
    scaling_current: float
    v_ref: float = 48.0
    load_current: float = 0.0
    present: bool = True

    def __post_init__(self):
        if not self.scaling_current > 0:
            raise ValueError(f"DGU {self.id}: scaling current must be > 0")
        if not self.rated_current > 0:
            raise ValueError(f"DGU {self.id}: rated current must be > 0")


def scaling_entries(scaling_currents) -> np.ndarray:
    d = 1.0 / np.asarray(scaling_currents, dtype=float)
    if np.any(~np.isfinite(d)) or np.any(d <= 0):
        raise ValueError("scaling currents must be positive")
    return d


@dataclass(frozen=True, eq=False)
class CoupledModel:
    el: ElectricalNetwork
    comm: CommNetwork
    d: np.ndarray  # diagonal of D, 1/A
    mode: str = FIRST_ORDER
    omega_c: float = DEFAULT_OMEGA_C

    def __post_init__(self):
        d = np.asarray(self.d, dtype=float)
        object.__setattr__(self, "d", d)
        if self.el.node_ids != self.comm.node_ids:
            raise ValueError("electrical and communication graphs must share node ordering")
        if d.shape != (self.el.n_nodes,):
            raise ValueError(f"D has {d.shape} entries for {self.el.n_nodes} nodes")
        if np.any(d <= 0):
            raise ValueError("D must be positive definite")
        if self.mode not in MODES:
            raise ValueError(f"unknown mode {self.mode!r}")
        if not self.omega_c > 0:
            raise ValueError("omega_c must be positive")

    @classmethod
    def from_dgus(cls, dgus, el, comm, **kw) -> "CoupledModel":
        return cls(el, comm, scaling_entries([g.scaling_current for g in dgus]), **kw)

    @property
    def n(self) -> int:
        return self.el.n_nodes

    @property
    def node_ids(self) -> tuple:
        return self.el.node_ids

    @cached_property
    def M_mat(self) -> np.ndarray:
        return electrical_laplacian(self.el)

    @cached_property
    def L_mat(self) -> np.ndarray:
        return comm_laplacian(self.comm)

    @cached_property
    def D(self) -> np.ndarray:
        return np.diag(self.d)

    @cached_property
    def Q(self) -> np.ndarray:
        return self.L_mat @ self.D @ self.M_mat

    @cached_property
    def LD(self) -> np.ndarray:
        return self.L_mat * self.d  # L @ diag(d)

    @cached_property
    def report(self):
        from .spectral import analyze_Q

        return analyze_Q(self.Q, self.d, self.L_mat, self.M_mat)

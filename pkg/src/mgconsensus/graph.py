"""Electrical and communication graphs, incidence matrices and Laplacians."""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import NamedTuple, Sequence

import numpy as np
from scipy.sparse import coo_matrix
from scipy.sparse.csgraph import connected_components

from .errors import MalformedGraphError


@dataclass(frozen=True)
class Line:
    """Power line from ``source`` to ``target``.

    The orientation fixes the reference direction of the line current. The
    inductance is carried along for bookkeeping only; lines are purely
    resistive in every computation.
    """

    source: int
    target: int
    resistance: float
    inductance: float = 0.0

    @property
    def conductance(self) -> float:
        return 1.0 / self.resistance

    @property
    def key(self) -> frozenset:
        return frozenset((self.source, self.target))


@dataclass(frozen=True)
class CommLink:
    i: int
    j: int
    coefficient: float

    @property
    def key(self) -> frozenset:
        return frozenset((self.i, self.j))


def _check_nodes(node_ids):
    if len(set(node_ids)) != len(node_ids):
        raise MalformedGraphError(f"duplicate node ids in {list(node_ids)}")


def _check_edges(node_ids, pairs, what):
    known = set(node_ids)
    seen = set()
    for a, b in pairs:
        if a == b:
            raise MalformedGraphError(f"self-loop on node {a} in {what}")
        if a not in known or b not in known:
            raise MalformedGraphError(f"{what} edge ({a}, {b}) references an unknown node")
        k = frozenset((a, b))
        if k in seen:
            raise MalformedGraphError(f"duplicate {what} edge between {a} and {b}")
        seen.add(k)


@dataclass(frozen=True)
class ElectricalNetwork:
    node_ids: tuple
    lines: tuple = ()

    def __post_init__(self):
        object.__setattr__(self, "node_ids", tuple(self.node_ids))
        object.__setattr__(self, "lines", tuple(self.lines))
        _check_nodes(self.node_ids)
        for ln in self.lines:
            if not ln.resistance > 0:
                raise MalformedGraphError(f"line {ln.source}-{ln.target}: resistance must be > 0")
        _check_edges(self.node_ids, [(ln.source, ln.target) for ln in self.lines], "electrical")

    @property
    def n_nodes(self) -> int:
        return len(self.node_ids)

    @property
    def n_lines(self) -> int:
        return len(self.lines)

    def index(self, node_id) -> int:
        return self.node_ids.index(node_id)

    def weights(self) -> np.ndarray:
        return np.array([ln.conductance for ln in self.lines], dtype=float)

    def neighbors(self, node_id) -> list:
        out = []
        for ln in self.lines:
            if ln.source == node_id:
                out.append(ln.target)
            elif ln.target == node_id:
                out.append(ln.source)
        return out


@dataclass(frozen=True)
class CommNetwork:
    """Undirected communication graph; ``k_i`` is the common integral gain."""

    node_ids: tuple
    links: tuple = ()
    k_i: float = 1.0

    def __post_init__(self):
        object.__setattr__(self, "node_ids", tuple(self.node_ids))
        object.__setattr__(self, "links", tuple(self.links))
        _check_nodes(self.node_ids)
        if not self.k_i > 0:
            raise MalformedGraphError("k_I must be positive")
        for lk in self.links:
            if not lk.coefficient > 0:
                raise MalformedGraphError(f"comm link {lk.i}-{lk.j}: coefficient must be > 0")
        _check_edges(self.node_ids, [(lk.i, lk.j) for lk in self.links], "communication")

    @property
    def n_nodes(self) -> int:
        return len(self.node_ids)

    def coefficient(self, i, j) -> float:
        k = frozenset((i, j))
        for lk in self.links:
            if lk.key == k:
                return lk.coefficient
        return 0.0

    def neighbors(self, node_id) -> list:
        out = []
        for lk in self.links:
            if lk.i == node_id:
                out.append(lk.j)
            elif lk.j == node_id:
                out.append(lk.i)
        return out


class LaplacianPair(NamedTuple):
    M_mat: np.ndarray  # electrical
    L_mat: np.ndarray  # communication, gain included


def _incidence(node_ids, pairs) -> np.ndarray:
    pos = {n: k for k, n in enumerate(node_ids)}
    B = np.zeros((len(node_ids), len(pairs)))
    for col, (a, b) in enumerate(pairs):
        B[pos[a], col] = 1.0
        B[pos[b], col] = -1.0
    return B


def incidence_matrix(net: ElectricalNetwork) -> np.ndarray:
    """N x M signed incidence matrix: +1 at the source, -1 at the target of each line."""
    return _incidence(net.node_ids, [(ln.source, ln.target) for ln in net.lines])


def comm_incidence_matrix(comm: CommNetwork) -> np.ndarray:
    return _incidence(comm.node_ids, [(lk.i, lk.j) for lk in comm.links])


def laplacian(incidence, weights) -> np.ndarray:
    """Weighted Laplacian ``B W B^T``; ``weights`` is a vector or a diagonal matrix."""
    B = np.asarray(incidence, dtype=float)
    w = np.asarray(weights, dtype=float)
    if w.ndim == 2:
        if w.shape[0] != w.shape[1] or np.any(w != np.diag(np.diag(w))):
            raise ValueError("weight matrix must be square diagonal")
        w = np.diag(w)
    if B.ndim != 2 or w.shape != (B.shape[1],):
        raise ValueError(f"dimension mismatch: incidence {B.shape}, weights {w.shape}")
    if np.any(w <= 0):
        raise ValueError("weights must be strictly positive")
    A = (B * w) @ B.T
    # exact symmetry; the product can differ in the last bit across the diagonal
    return 0.5 * (A + A.T)


def electrical_laplacian(net: ElectricalNetwork) -> np.ndarray:
    return laplacian(incidence_matrix(net), net.weights())


def comm_laplacian(comm: CommNetwork) -> np.ndarray:
    w = np.array([comm.k_i * lk.coefficient for lk in comm.links], dtype=float)
    return laplacian(comm_incidence_matrix(comm), w)


def laplacian_pair(el: ElectricalNetwork, comm: CommNetwork) -> LaplacianPair:
    if el.node_ids != comm.node_ids:
        raise MalformedGraphError("electrical and communication graphs must share node ordering")
    return LaplacianPair(electrical_laplacian(el), comm_laplacian(comm))


def is_connected(node_ids: Sequence, pairs: Sequence) -> bool:
    """Connectivity of the undirected version of a graph (empty and single-node graphs pass)."""
    n = len(node_ids)
    if n <= 1:
        return True
    pos = {v: k for k, v in enumerate(node_ids)}
    rows = [pos[a] for a, _ in pairs]
    cols = [pos[b] for _, b in pairs]
    adj = coo_matrix((np.ones(len(rows)), (rows, cols)), shape=(n, n))
    n_comp, _ = connected_components(adj, directed=False)
    return n_comp == 1


@dataclass(frozen=True)
class ConnectivityVerdict:
    electrical: bool
    communication: bool
    details: list = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return self.electrical and self.communication


def check_connectivity(el: ElectricalNetwork, c: CommNetwork | None = None) -> ConnectivityVerdict:
    el_ok = is_connected(el.node_ids, [(ln.source, ln.target) for ln in el.lines])
    if c is None:
        c_ok = True
    else:
        c_ok = is_connected(c.node_ids, [(lk.i, lk.j) for lk in c.links])
    details = []
    if not el_ok:
        details.append("electrical graph is not weakly connected")
    if not c_ok:
        details.append("communication graph is not connected")
    return ConnectivityVerdict(el_ok, c_ok, details)


def comm_from_electrical(el: ElectricalNetwork, mu: float, k_i: float = 1.0) -> CommNetwork:
    """Communication graph with the electrical topology and ``a_ij = mu / R_ij``."""
    if not mu > 0:
        raise ValueError("mu must be positive")
    links = tuple(CommLink(ln.source, ln.target, mu / ln.resistance) for ln in el.lines)
    return CommNetwork(el.node_ids, links, k_i)

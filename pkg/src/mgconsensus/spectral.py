"""Eigenstructure of Q = L D M and the zero-mean / constant decomposition."""
from __future__ import annotations

import json
import logging
from dataclasses import dataclass, field

import numpy as np

from . import reference_data as ref
from .graph import laplacian

log = logging.getLogger(__name__)

D_IDENTITY = "D_identity"
COMMUTING = "commuting"
NEITHER = "neither"

IMAG_TOL = 1e-8
CLUSTER_RTOL = 1e-6


def zero_tol(A) -> float:
    """Threshold below which an eigenvalue of ``A`` counts as zero."""
    A = np.asarray(A)
    norm = np.abs(A).sum(axis=1).max() if A.size else 0.0
    return 1e-9 * max(1.0, norm)


def project_h1(v):
    """Split ``v`` into its zero-mean part and its constant part."""
    v = np.asarray(v, dtype=float)
    if v.size == 0:
        raise ValueError("cannot decompose an empty vector")
    bar = np.full_like(v, v.mean())
    return v - bar, bar


def _diag_entries(D) -> np.ndarray:
    D = np.asarray(D, dtype=float)
    if D.ndim == 2:
        if np.any(D != np.diag(np.diag(D))):
            raise ValueError("D must be diagonal")
        D = np.diag(D)
    return D


def build_Q(L_mat, D, M_mat) -> np.ndarray:
    L_mat = np.asarray(L_mat, dtype=float)
    M_mat = np.asarray(M_mat, dtype=float)
    d = _diag_entries(D)
    n = d.shape[0]
    if L_mat.shape != (n, n) or M_mat.shape != (n, n):
        raise ValueError(f"dimension mismatch: L {L_mat.shape}, D {n}, M {M_mat.shape}")
    if np.any(d <= 0):
        raise ValueError("D must have positive entries")
    return (L_mat * d) @ M_mat


def inertia(eigenvalues, tol) -> tuple:
    """(positive, negative, zero) counts, using real parts."""
    re = np.real(np.asarray(eigenvalues))
    return int(np.sum(re > tol)), int(np.sum(re < -tol)), int(np.sum(np.abs(re) <= tol))


def assumption_status(L_mat, D, M_mat) -> str:
    d = _diag_entries(D)
    if np.all(d == 1.0):
        return D_IDENTITY
    Q = build_Q(L_mat, d, M_mat)
    Qt = build_Q(M_mat, d, L_mat)
    if np.linalg.norm(Q - Qt) <= 1e-9 * max(1.0, np.linalg.norm(Q)):
        return COMMUTING
    return NEITHER


def diagonalizability(Q, eigvals=None, eigvecs=None):
    """Compare eigenvalue cluster sizes against the rank of the matching eigenvectors.

    Returns ``(verdict, condition)`` where ``condition`` is the 2-norm condition
    number of the eigenvector matrix (inf when it is numerically singular).
    """
    if eigvals is None:
        eigvals, eigvecs = np.linalg.eig(Q)
    n = len(eigvals)
    if n == 0:
        return True, 1.0
    scale = max(1.0, np.max(np.abs(eigvals)))
    unassigned = list(range(n))
    verdict = True
    while unassigned:
        k = unassigned[0]
        cluster = [m for m in unassigned if abs(eigvals[m] - eigvals[k]) <= CLUSTER_RTOL * scale]
        unassigned = [m for m in unassigned if m not in cluster]
        block = eigvecs[:, cluster]
        s = np.linalg.svd(block, compute_uv=False)
        rank = int(np.sum(s > 1e-8 * s[0])) if s.size and s[0] > 0 else 0
        if rank < len(cluster):
            verdict = False
    s = np.linalg.svd(eigvecs, compute_uv=False)
    cond = float(s[0] / s[-1]) if s[-1] > 0 else float("inf")
    return verdict, cond


@dataclass
class SpectralReport:
    eigenvalues: list
    kernel_residual: float
    range_residual: float
    inertia: tuple
    diagonalizable: bool
    condition: float
    assumption_status: str
    smallest_positive_eig: float | None
    n_zero: int
    all_real: bool
    structure_ok: bool
    extras: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        out = {
            "eigenvalues": [[float(np.real(z)), float(np.imag(z))] for z in self.eigenvalues],
            "inertia": list(self.inertia),
            "assumption_status": self.assumption_status,
            "smallest_positive_eig": self.smallest_positive_eig,
            "kernel_residual": self.kernel_residual,
            "range_residual": self.range_residual,
            "diagonalizable": self.diagonalizable,
            "condition": self.condition if np.isfinite(self.condition) else None,
            "n_zero": self.n_zero,
            "all_real": self.all_real,
            "structure_ok": self.structure_ok,
        }
        out.update(self.extras)
        return out

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2)

    def to_text(self) -> str:
        lines = [f"assumption status : {self.assumption_status}"]
        lines.append("eigenvalues of Q  :")
        for z in self.eigenvalues:
            lines.append(f"  {np.real(z):+.4f} {np.imag(z):+.4f}i")
        i_p, i_m, i_0 = self.inertia
        lines += [
            f"inertia (+,-,0)   : ({i_p}, {i_m}, {i_0})",
            f"|Q 1|             : {self.kernel_residual:.3e}",
            f"|1^T Q|           : {self.range_residual:.3e}",
            f"diagonalizable    : {self.diagonalizable} (eigenvector cond {self.condition:.3g})",
            f"smallest pos. eig : {self.smallest_positive_eig}",
            f"structure ok      : {self.structure_ok}",
        ]
        for k, v in self.extras.items():
            lines.append(f"{k:<18}: {v}")
        return "\n".join(lines)


def _sort_key(z):
    return (-np.real(z), -np.imag(z))


def analyze_Q(Q, D, L_mat, M_mat) -> SpectralReport:
    Q = np.asarray(Q, dtype=float)
    n = Q.shape[0]
    ones = np.ones(n)
    tol = zero_tol(Q)
    status = assumption_status(L_mat, D, M_mat)
    if n == 0:
        return SpectralReport([], 0.0, 0.0, (0, 0, 0), True, 1.0, status, None, 0, True, True)
    w, V = np.linalg.eig(Q)
    real = np.abs(np.imag(w)) <= IMAG_TOL * (1.0 + np.abs(w))
    all_real = bool(np.all(real))
    shown = np.where(real, np.real(w), w)
    eigs = sorted(shown.tolist(), key=_sort_key)
    inert = inertia(np.where(real, np.real(w), w), tol)
    n_zero = int(np.sum(np.abs(w) <= tol))
    pos = np.real(w[real & (np.real(w) > tol)])
    smallest = float(pos.min()) if pos.size else None
    diag, cond = diagonalizability(Q, w, V)
    structure_ok = all_real and inert[1] == 0 and n_zero == 1
    if status != NEITHER and not structure_ok:
        log.warning(
            "Q violates the expected structure under %s: all_real=%s inertia=%s zeros=%d",
            status, all_real, inert, n_zero,
        )
    return SpectralReport(
        eigenvalues=eigs,
        kernel_residual=float(np.linalg.norm(Q @ ones)),
        range_residual=float(np.linalg.norm(ones @ Q)),
        inertia=inert,
        diagonalizable=diag,
        condition=cond,
        assumption_status=status,
        smallest_positive_eig=smallest,
        n_zero=n_zero,
        all_real=all_real,
        structure_ok=structure_ok,
    )


def invariant_subspace_transform(n: int) -> np.ndarray:
    """Columns ``e_k - e_{k+1}`` (k < n) spanning the zero-mean subspace, then the ones vector."""
    if n < 2:
        raise ValueError("transform needs at least two nodes")
    T = np.zeros((n, n))
    for k in range(n - 1):
        T[k, k] = 1.0
        T[k + 1, k] = -1.0
    T[:, -1] = 1.0
    return T


def counterexample_matrices():
    """(L, D, M) recomputed from the published incidence and weight matrices."""
    L = laplacian(ref.COUNTEREXAMPLE_B1, ref.COUNTEREXAMPLE_W1)
    M = laplacian(ref.COUNTEREXAMPLE_B2, ref.COUNTEREXAMPLE_W2)
    return L, ref.COUNTEREXAMPLE_D.copy(), M


def counterexample_report() -> SpectralReport:
    L, d, M = counterexample_matrices()
    Q = build_Q(L, d, M)
    report = analyze_Q(Q, d, L, M)
    report.extras["max_eig_deviation"] = float(eigenvalue_match_error(report.eigenvalues, ref.COUNTEREXAMPLE_EIGENVALUES))
    return report


def eigenvalue_match_error(computed, published) -> float:
    """Largest distance in an optimal one-to-one pairing of two eigenvalue multisets."""
    from scipy.optimize import linear_sum_assignment

    a = np.asarray(computed, dtype=complex)
    b = np.asarray(published, dtype=complex)
    if a.shape != b.shape:
        return float("inf")
    cost = np.abs(a[:, None] - b[None, :])
    r, c = linear_sum_assignment(cost)
    return float(cost[r, c].max())

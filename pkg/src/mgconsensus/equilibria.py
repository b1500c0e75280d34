"""Steady states of the closed loop and theoretical convergence rates."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import AssumptionViolation, UnsupportedRegimeError
from .spectral import NEITHER, IMAG_TOL, invariant_subspace_transform, zero_tol


@dataclass(frozen=True)
class EquilibriumSolution:
    delta_v_hat: np.ndarray  # unique zero-mean solution [V]
    alpha: float  # constant offset of the chosen member of the family [V]
    v_star: np.ndarray
    i_t_star: np.ndarray
    shared_level: float  # common value of D I_t [p.u.]

    @property
    def delta_v(self) -> np.ndarray:
        return self.delta_v_hat + self.alpha

    def family(self, alpha: float) -> np.ndarray:
        return self.delta_v_hat + alpha


def restricted_solve(Q, b) -> np.ndarray:
    """Unique zero-mean ``x`` with ``Q x = b`` for ``b`` in the range of ``Q``.

    Works in the coordinates of ``invariant_subspace_transform`` and drops the
    row/column of the constant direction.
    """
    Q = np.asarray(Q, dtype=float)
    n = Q.shape[0]
    if n == 1:
        return np.zeros(1)
    T = invariant_subspace_transform(n)
    Qt = np.linalg.solve(T, Q @ T)
    bt = np.linalg.solve(T, b)
    Q11 = Qt[:-1, :-1]
    s = np.linalg.svd(Q11, compute_uv=False)
    if s[-1] <= 1e-12 * max(1.0, s[0]):
        raise AssumptionViolation("connectivity", "restricted system is singular")
    y = np.linalg.solve(Q11, bt[:-1])
    return T[:, :-1] @ y


def _solve(model, i_load, v_ref, alpha):
    i_load = np.asarray(i_load, dtype=float)
    v_ref = np.broadcast_to(np.asarray(v_ref, dtype=float), i_load.shape).copy()
    b = -model.LD @ i_load - model.Q @ v_ref
    dv_hat = restricted_solve(model.Q, b)
    v_star = dv_hat + alpha + v_ref
    i_t = i_load + model.M_mat @ v_star
    pu = model.d * i_t
    return EquilibriumSolution(dv_hat, float(alpha), v_star, i_t, float(pu.mean()))


def solve_equilibrium_unit_gain(model, i_load, v_ref, alpha: float = 0.0) -> EquilibriumSolution:
    return _solve(model, i_load, v_ref, alpha)


def solve_equilibrium_first_order(model, i_load, v_ref, alpha: float = 0.0) -> EquilibriumSolution:
    # with V* = dV* + V_ref the first-order steady-state equations collapse onto
    # the unit-gain ones, so omega_c never enters
    return _solve(model, i_load, v_ref, alpha)


def augmented_lstsq_equilibrium(Q, LD, i_load, v_ref) -> np.ndarray:
    """Dense least-squares oracle: stack ``Q x = b`` with ``1^T x = 0``."""
    n = Q.shape[0]
    b = -LD @ i_load - Q @ np.broadcast_to(v_ref, (n,))
    A = np.vstack([Q, np.ones((1, n))])
    rhs = np.concatenate([b, [0.0]])
    x, *_ = np.linalg.lstsq(A, rhs, rcond=None)
    return x


def _positive_spectrum(Q, status):
    if status == NEITHER:
        raise UnsupportedRegimeError("Q = L D M is not covered by D = I or commutation")
    w = np.linalg.eigvals(np.asarray(Q, dtype=float))
    tol = zero_tol(Q)
    if status is None:
        complex_ = np.abs(w.imag) > IMAG_TOL * (1.0 + np.abs(w))
        if np.any(complex_) or np.any(w.real < -tol) or np.sum(np.abs(w) <= tol) != 1:
            raise UnsupportedRegimeError("spectrum of Q is not real, nonnegative with a simple zero")
    re = np.sort(w.real)
    return re[re > tol]


def convergence_rate_unit_gain(Q, status: str | None = None) -> float:
    """Smallest strictly positive eigenvalue of ``Q``."""
    gammas = _positive_spectrum(Q, status)
    if gammas.size == 0:
        raise UnsupportedRegimeError("Q has no positive eigenvalue")
    return float(gammas[0])


def quadratic_roots(gamma: float, omega_c: float) -> tuple:
    """Roots of ``lam**2/omega_c + lam + gamma = 0``."""
    disc = 1.0 - 4.0 * gamma / omega_c
    if disc >= 0:
        q = -0.5 * (1.0 + np.sqrt(disc))
        # citardauq: the small root comes from c/q, free of cancellation
        return complex(q * omega_c), complex(gamma / q)
    im = 0.5 * omega_c * np.sqrt(-disc)
    return complex(-0.5 * omega_c, im), complex(-0.5 * omega_c, -im)


def first_order_spectrum(Q, omega_c: float, status: str | None = None) -> np.ndarray:
    """Eigenvalues of the 2N x 2N first-order system matrix, built from those of Q."""
    if not omega_c > 0:
        raise ValueError("omega_c must be positive")
    gammas = _positive_spectrum(Q, status) if np.asarray(Q).shape[0] > 1 else np.array([])
    out = [0.0 + 0j, complex(-omega_c)]
    for g in gammas:
        out.extend(quadratic_roots(float(g), omega_c))
    return np.array(out)


def convergence_rate_first_order(Q, omega_c: float, status: str | None = None) -> float:
    """Decay constant ``-max Re(lam)`` over the nonzero eigenvalues.

    Reported as a positive number; the slowest mode decays like
    ``exp(-rate * t)``.
    """
    spec = first_order_spectrum(Q, omega_c, status)
    nonzero = spec[1:]
    return float(-np.max(nonzero.real))

"""Predicted versus simulated decay rate as the primary-loop bandwidth varies.

For the seven-DGU network the unit-gain rate is the smallest positive
eigenvalue of Q. With a first-order primary loop the rate saturates at
omega_c / 2 once omega_c < 4 gamma_min and approaches gamma_min as
omega_c grows. At omega_c = 4 gamma_min the slowest mode is a double root,
so the log-norm carries a log(t) term and a finite-window fit reads low.
"""
import numpy as np

from mgconsensus import reference_data as ref
from mgconsensus.dynamics import first_order_matrix, propagate
from mgconsensus.equilibria import convergence_rate_first_order, convergence_rate_unit_gain
from mgconsensus.graph import ElectricalNetwork, comm_from_electrical
from mgconsensus.model import CoupledModel, scaling_entries
from mgconsensus.spectral import COMMUTING


def fitted_rate(A, x0, horizon, dt):
    n_steps = int(np.ceil(horizon / dt))
    t, x = propagate(A, np.zeros(len(x0)), x0, dt, n_steps, max(1, n_steps // 500))
    mask = t >= horizon / 2
    n = len(x0) // 2
    z = x[mask]
    z = np.concatenate([z[:, :n] - z[:, :n].mean(1, keepdims=True), z[:, n:] - z[:, n:].mean(1, keepdims=True)], 1)
    return -np.polyfit(t[mask], np.log(np.linalg.norm(z, axis=1)), 1)[0]


def main():
    el = ElectricalNetwork(range(1, 8), ref.LINES_7DGU)
    model = CoupledModel(el, comm_from_electrical(el, 1.0), scaling_entries(list(ref.RATED_7DGU.values())))
    gamma = convergence_rate_unit_gain(model.Q, COMMUTING)
    lam_max = np.linalg.eigvalsh(model.Q).max()
    print(f"gamma_min = {gamma:.4f} 1/s, lambda_max = {lam_max:.1f} 1/s")
    print(f"{'omega_c':>10} {'predicted':>10} {'simulated':>10}")
    rng = np.random.default_rng(0)
    for omega in (20.0, 60.0, 2 * gamma * 2, 400.0, 2 * np.pi * 100, 5000.0):
        rate = convergence_rate_first_order(model.Q, omega, COMMUTING)
        x0 = rng.normal(size=14)
        dt = min(1e-3, 0.1 / omega, 0.1 / lam_max)
        sim = fitted_rate(first_order_matrix(model.Q, omega), x0, 20.0 / rate, dt)
        print(f"{omega:10.1f} {rate:10.4f} {sim:10.4f}")


if __name__ == "__main__":
    main()

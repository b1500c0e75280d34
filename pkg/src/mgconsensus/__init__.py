"""Consensus-based secondary control of DC microgrids: graph models, spectral
certificates for Q = L D M, closed-loop simulation and plug-and-play events."""

from .graph import (
    CommLink, CommNetwork, ElectricalNetwork, Line, check_connectivity, comm_from_electrical,
    incidence_matrix, laplacian,
)
from .model import CoupledModel, DguSpec
from .spectral import analyze_Q, build_Q, counterexample_report, invariant_subspace_transform, project_h1
from .equilibria import (
    convergence_rate_first_order, convergence_rate_unit_gain, solve_equilibrium_first_order,
    solve_equilibrium_unit_gain,
)
from .dynamics import compute_outputs, simulate
from .scenario import builtin_stage_scenario, evaluate

__all__ = [
    "CommLink", "CommNetwork", "ElectricalNetwork", "Line", "check_connectivity", "comm_from_electrical",
    "incidence_matrix", "laplacian", "CoupledModel", "DguSpec", "analyze_Q", "build_Q",
    "counterexample_report", "invariant_subspace_transform", "project_h1", "convergence_rate_first_order",
    "convergence_rate_unit_gain", "solve_equilibrium_first_order", "solve_equilibrium_unit_gain",
    "compute_outputs", "simulate", "builtin_stage_scenario", "evaluate",
]

__version__ = "0.1.0"

"""Optimal deterministic protocol for the shared Q-queue J-choice K-best secretary problem."""

from .core import ProblemSpec, SpecError, b_table, b_value, offline_optimum, validate_spec
from .dual import DualSolution, ThresholdTable, dual_objective, solve_dual
from .primal import PrimalSolution, primal_from_thresholds, primal_objective
from .protocol import advance_step, run_instance, start_session
from .simulate import SimulationReport, monte_carlo
from .verify import CertificateReport, brute_force_expected_ratio, certify_optimal

__all__ = [
    "ProblemSpec", "SpecError", "b_table", "b_value", "offline_optimum", "validate_spec",
    "DualSolution", "ThresholdTable", "dual_objective", "solve_dual",
    "PrimalSolution", "primal_from_thresholds", "primal_objective",
    "advance_step", "run_instance", "start_session",
    "SimulationReport", "monte_carlo",
    "CertificateReport", "brute_force_expected_ratio", "certify_optimal",
]

"""Near-optimal spaces and necessary conditions for multi-objective linear programs."""

from .conditions import ConditionSpec, NecessaryConditionReport, holds, implies, non_implied, selector
from .esom import EnergyModelSpec, compile_model, report
from .lp import (
    LinearConstraint,
    LinearObjective,
    LinearProgram,
    ModelError,
    SolveOutcome,
    SolverError,
    Status,
    Tolerances,
    Variable,
    evaluate,
    solve,
)
from .modelio import dump_model, emit_results, load_model, read_model
from .necessary import (
    DEFAULT_GRID,
    EpsilonVector,
    NearOptError,
    SweepResult,
    epsilon_box,
    epsilon_space_single,
    necessary_condition_multi,
    necessary_condition_single,
    sweep,
)
from .pareto import ParetoFront, ParetoPoint, dominance_filter, generate_front, individual_optima, spread_report
from .scalarize import EpsilonConstraintSpec, epsilon_constraint, weighted_sum

__all__ = [
    "DEFAULT_GRID",
    "ConditionSpec",
    "EnergyModelSpec",
    "EpsilonConstraintSpec",
    "EpsilonVector",
    "LinearConstraint",
    "LinearObjective",
    "LinearProgram",
    "ModelError",
    "NearOptError",
    "NecessaryConditionReport",
    "ParetoFront",
    "ParetoPoint",
    "SolveOutcome",
    "SolverError",
    "Status",
    "SweepResult",
    "Tolerances",
    "Variable",
    "compile_model",
    "dominance_filter",
    "dump_model",
    "emit_results",
    "epsilon_box",
    "epsilon_constraint",
    "epsilon_space_single",
    "evaluate",
    "generate_front",
    "holds",
    "implies",
    "individual_optima",
    "load_model",
    "necessary_condition_multi",
    "necessary_condition_single",
    "non_implied",
    "read_model",
    "report",
    "selector",
    "solve",
    "spread_report",
    "sweep",
    "weighted_sum",
]

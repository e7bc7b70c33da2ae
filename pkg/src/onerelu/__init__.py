"""Single-neuron ReLU regression: convex active-set surrogates, an approximation
algorithm with a provable ratio, local heuristics, an exact small-instance
oracle and a synthetic benchmark harness."""

__version__ = "0.1.0"

from .core import Dataset, DimensionError, Params, Sample, build_dataset, from_arrays, read_csv, relu_objective, write_csv
from .approx import ApproxResult, enumerate_candidates, generalized_approx, sorting_method
from .heuristics import GdConfig, gradient_descent, iterative_heuristic, sgd
from .oracle import OracleTooLarge, brute_force_opt
from .solver import SolveReport, SolverConfig, minimize_surrogate
from .statgen import Instance, StatModelSpec, asymptotic_bracket, db_to_rho, generate_instance

__all__ = [
    "ApproxResult",
    "Dataset",
    "DimensionError",
    "GdConfig",
    "Instance",
    "OracleTooLarge",
    "Params",
    "Sample",
    "SolveReport",
    "SolverConfig",
    "StatModelSpec",
    "asymptotic_bracket",
    "brute_force_opt",
    "build_dataset",
    "db_to_rho",
    "enumerate_candidates",
    "from_arrays",
    "generalized_approx",
    "generate_instance",
    "gradient_descent",
    "iterative_heuristic",
    "minimize_surrogate",
    "read_csv",
    "relu_objective",
    "sgd",
    "sorting_method",
    "write_csv",
]

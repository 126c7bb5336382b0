"""Truck-and-drone routing (TSPD and FSTSP) with a hybrid genetic algorithm."""

from .chromosome import FeasibilityClass, classify, dumps, loads, validate
from .ga import SolverConfig, SolverResult, run
from .instance import AssumptionProfile, Instance, ProblemKind, from_coordinates, worked_example
from .join import DecodedSolution, Operation, evaluate, join, join_feasible

__all__ = [
    "AssumptionProfile", "DecodedSolution", "FeasibilityClass", "Instance", "Operation",
    "ProblemKind", "SolverConfig", "SolverResult", "classify", "dumps", "evaluate",
    "from_coordinates", "join", "join_feasible", "loads", "run", "validate", "worked_example",
]
__version__ = "0.1.0"

"""Search engines for CTOP orders"""

from .core import (
    Branching,
    ModelKind,
    Mode,
    SolveConfig,
    SolveOutcome,
    SolverException,
    SolveStats,
    SolveStatus,
)
from .network import Network, build_model
from .propagation_solver import PropagationSolver
from .cpsat_solver import CPSATSolver

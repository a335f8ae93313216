"""On-line tracking of a smooth regression function and its derivatives."""

from ._config import Tolerances, get_tolerances, override_tolerances
from .design import (
    GainDesign,
    NormalizedRiccatiSolution,
    StabilityReport,
    StructureMatrices,
    build_structure,
    certify,
    characteristic_coefficients,
    characteristic_roots,
    gain_from_gamma,
    scaled_riccati_solution,
    solve_normalized_riccati,
)
from .estimator import SmoothTracker
from .exceptions import (
    BracketError,
    ClassViolationError,
    ConvergenceError,
    DegenerateGainError,
    InstabilityError,
    NumericalError,
    OrderError,
    SingularMatrixError,
)
from .optimize import DesignProblem, DesignResult, gamma_table, minimize_gamma
from .risk import RiskDecomposition, bias_vector, cost, risk_decomposition, variance_matrix
from .simulation import (
    SignalSpec,
    SimConfig,
    boundary_profile,
    estimate_rate,
    exact_moments,
    generate_signal,
    monte_carlo_risk,
    simulate_observations,
)
from .tracker import TrackerConfig, TrackerState, run_backward, run_combined, run_forward

__version__ = "0.1.0"

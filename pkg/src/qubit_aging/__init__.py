"""Aging transitions in driven, dissipatively coupled qubit networks.

Four independent routes to the steady mean excited-state population
nbar(p): the closed collective-motion system, per-qubit mean field, the
exact master equation (small N), and the second-order correlated moment
system; plus analytic fixed points with stability, bistable-window
location, basin mapping, and the sweep/CLI layer on top.
"""

from .analysis import (
    BasinGrid,
    BistableInterval,
    JumpEvent,
    Sweep2D,
    SweepResult,
    basin_map,
    bistable_interval,
    detect_jumps,
    size_scan,
    sweep_2d,
    sweep_p,
)
from .collective import (
    CollectiveState,
    StabilityReport,
    Trajectory,
    collective_rhs,
    integrate_to_steady,
    stability,
    stability_matrix,
)
from .cumulant import CumulantState, cumulant_rhs, integrate_cumulant, zero_state
from .errors import (
    DegenerateDenominator,
    DimensionMismatch,
    NoBistability,
    NoFixedPoint,
    NonFinite,
    NonIntegerSplit,
    NonPhysical,
    QubitAgingError,
    RequiresZeroV,
    TooLarge,
)
from .exact import (
    DensityMatrix,
    ExactResult,
    LindbladSystem,
    build_system,
    evolve_exact,
    maximally_mixed,
    product_state,
)
from .integrate import IntegrationControls
from .meanfield import (
    CorrelationDiagnostics,
    MeanFieldState,
    correlation_diagnostics,
    integrate_meanfield,
    meanfield_rhs,
)
from .model import (
    CubicCoeffs,
    FixedPoint,
    FixedPointSet,
    ModelParams,
    Region,
    cubic_coefficients,
    solve_fixed_points,
    steady_coherence,
)

__version__ = "0.1.0"

__all__ = [
    "BasinGrid",
    "BistableInterval",
    "CollectiveState",
    "CorrelationDiagnostics",
    "CubicCoeffs",
    "CumulantState",
    "DegenerateDenominator",
    "DensityMatrix",
    "DimensionMismatch",
    "ExactResult",
    "FixedPoint",
    "FixedPointSet",
    "IntegrationControls",
    "JumpEvent",
    "LindbladSystem",
    "MeanFieldState",
    "ModelParams",
    "NoBistability",
    "NoFixedPoint",
    "NonFinite",
    "NonIntegerSplit",
    "NonPhysical",
    "QubitAgingError",
    "Region",
    "RequiresZeroV",
    "StabilityReport",
    "Sweep2D",
    "SweepResult",
    "TooLarge",
    "Trajectory",
    "basin_map",
    "bistable_interval",
    "build_system",
    "collective_rhs",
    "correlation_diagnostics",
    "cubic_coefficients",
    "cumulant_rhs",
    "detect_jumps",
    "evolve_exact",
    "integrate_cumulant",
    "integrate_meanfield",
    "integrate_to_steady",
    "maximally_mixed",
    "meanfield_rhs",
    "product_state",
    "size_scan",
    "solve_fixed_points",
    "stability",
    "stability_matrix",
    "steady_coherence",
    "sweep_2d",
    "sweep_p",
    "zero_state",
]

"""Second-order geometric flows on locally homogeneous 3-manifolds.

Curvature engine, reduced analytic systems, adaptive integrator with
singularity detection, phase-portrait analysis, and a CLI front end.
"""
from .analysis import (
    FixedPoint,
    NoBoundaryError,
    PhaseGrid,
    anisotropy_metrics,
    asymptotic_degeneracy,
    classify_outcome,
    critical_curve,
    curvature_series,
    find_fixed_points,
    is_isotropized,
    phase_grid,
)
from .geometry import (
    CurvatureBundle,
    DegenerateMetricError,
    GeometryClass,
    MetricState,
    StructureConstants,
    curvature_bundle,
    flow_rhs,
    ricci_hat_milnor,
    ricci_milnor,
    ricci_norm_sq,
    scalar_curvature,
    sectional_curvatures,
    specialized_rhs,
    structure_constants,
)
from .integrate import (
    Event,
    FlowParams,
    InconclusiveFlowError,
    IntegratorControls,
    SingularityReport,
    Trajectory,
    conserved_drift,
    detect_events,
    detect_singularity,
    integrate,
    scaling_equivalence_check,
)
from .systems import SYSTEMS, FlowSystem, get_system, system_names

__version__ = "0.1.0"

__all__ = [
    "CurvatureBundle",
    "DegenerateMetricError",
    "Event",
    "FixedPoint",
    "FlowParams",
    "FlowSystem",
    "GeometryClass",
    "InconclusiveFlowError",
    "IntegratorControls",
    "MetricState",
    "NoBoundaryError",
    "PhaseGrid",
    "SYSTEMS",
    "SingularityReport",
    "StructureConstants",
    "Trajectory",
    "anisotropy_metrics",
    "asymptotic_degeneracy",
    "classify_outcome",
    "conserved_drift",
    "critical_curve",
    "curvature_bundle",
    "curvature_series",
    "detect_events",
    "detect_singularity",
    "find_fixed_points",
    "flow_rhs",
    "get_system",
    "integrate",
    "is_isotropized",
    "phase_grid",
    "ricci_hat_milnor",
    "ricci_milnor",
    "ricci_norm_sq",
    "scalar_curvature",
    "scaling_equivalence_check",
    "sectional_curvatures",
    "specialized_rhs",
    "structure_constants",
    "system_names",
    "__version__",
]

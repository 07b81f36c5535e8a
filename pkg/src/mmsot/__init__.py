"""Exact quadratic optimal transport on finite metric measure spaces.

The package studies when optimal couplings are induced by maps, how ball
growth compares against reference profiles, and whether small rescaled balls
look like intervals of the real line.  Costs and masses are exact rationals
end to end; floats appear only in distance matrices and report output.
"""

from .curvature import (
    BallGrowthCurve,
    ComparisonProfile,
    ContractionReport,
    PolarDecomposition,
    ScalingReport,
    annulus_ball_table,
    bg_ratio_curve,
    contraction_zero_set_check,
    nondegeneracy_check,
    polar_decompose,
)
from .geodesics import (
    BranchConfiguration,
    GeodesicPath,
    GeodesicSet,
    enumerate_geodesics,
    evaluate,
    find_branching,
    restrict,
)
from .rationals import as_fraction, format_ratio, parse_ratio
from .scenarios import (
    GADGET_NAMES,
    SCENARIO_NAMES,
    GadgetInstance,
    ScenarioSpec,
    arclength_point,
    build_circle,
    build_cusp,
    build_fan,
    build_gadget,
    build_interval,
    build_polyline,
    build_scenario,
    build_tripod,
    cusp_point,
    fan_atom,
    fan_atom_ids_by_radius,
    fan_bernoulli_measure,
    fan_segment_ids,
    quantile_subset,
    tripod_point,
)
from .spaces import (
    DiscreteMeasure,
    FiniteMetricMeasureSpace,
    MetricGraph,
    ValidationReport,
    from_metric_graph,
    mutually_singular,
    restrict_and_normalize,
    validate_metric,
)
from .tangents import (
    Correspondence,
    DefectDetails,
    PointedRescaledSpace,
    TangentLineReport,
    gh_defect_heuristic,
    gh_distance_exact,
    interval_defect,
    rescale_ball,
    tangent_line_test,
)
from .transport import (
    DynamicalPlan,
    InfeasibleMarginals,
    MonotonicityCertificate,
    MonotonicityWitness,
    TransportPlan,
    VertexEnumeration,
    check_c_monotone,
    enumerate_optimal_vertices,
    is_induced_by_map,
    lift_to_dynamical,
    product_plan,
    solve_w2,
    split_plan,
)

__version__ = "0.1.0"

__all__ = [
    "BallGrowthCurve",
    "BranchConfiguration",
    "ComparisonProfile",
    "ContractionReport",
    "Correspondence",
    "DefectDetails",
    "DiscreteMeasure",
    "DynamicalPlan",
    "FiniteMetricMeasureSpace",
    "GADGET_NAMES",
    "GadgetInstance",
    "GeodesicPath",
    "GeodesicSet",
    "InfeasibleMarginals",
    "MetricGraph",
    "MonotonicityCertificate",
    "MonotonicityWitness",
    "PointedRescaledSpace",
    "PolarDecomposition",
    "SCENARIO_NAMES",
    "ScalingReport",
    "ScenarioSpec",
    "TangentLineReport",
    "TransportPlan",
    "ValidationReport",
    "VertexEnumeration",
    "annulus_ball_table",
    "arclength_point",
    "as_fraction",
    "bg_ratio_curve",
    "build_circle",
    "build_cusp",
    "build_fan",
    "build_gadget",
    "build_interval",
    "build_polyline",
    "build_scenario",
    "build_tripod",
    "check_c_monotone",
    "contraction_zero_set_check",
    "cusp_point",
    "enumerate_geodesics",
    "enumerate_optimal_vertices",
    "evaluate",
    "fan_atom",
    "fan_atom_ids_by_radius",
    "fan_bernoulli_measure",
    "fan_segment_ids",
    "find_branching",
    "format_ratio",
    "gh_defect_heuristic",
    "gh_distance_exact",
    "interval_defect",
    "is_induced_by_map",
    "lift_to_dynamical",
    "mutually_singular",
    "nondegeneracy_check",
    "parse_ratio",
    "polar_decompose",
    "product_plan",
    "quantile_subset",
    "rescale_ball",
    "restrict",
    "restrict_and_normalize",
    "solve_w2",
    "split_plan",
    "tangent_line_test",
    "tripod_point",
    "validate_metric",
    "__version__",
]

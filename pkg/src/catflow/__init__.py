"""Tractrix flows and short retractions on model CAT(k) spaces."""

from .policy import DEFAULT_POLICY, NumericPolicy
from .spaces import (
    EuclideanSpace,
    IntervalSpace,
    Point,
    PointSpace,
    Space,
    SphereSpace,
    TangentVector,
)
from .joins import (
    EuclideanConeSpace,
    ScaledProductSpace,
    SphericalConeSpace,
    SphericalJoinSpace,
    cone_geodesic_point,
    join_distance,
    join_embed,
    join_geodesic_point,
    spherical_cone,
)
from .glued import (
    ArcOnSphere,
    CrossingPolicy,
    DrivingGeodesic,
    GluedSpace,
    build_theorem1_space,
    glued_distance,
    net_graph_distance,
)
from .families import TimeDependentFamily, ball_distance_family, quadratic_family
from .flows import (
    Trajectory,
    check_evi,
    distance_estimate_bound,
    evolve,
    gradient,
    nested_half_delta,
    verify_distance_estimate,
)
from .tractrix import (
    DrivingCurve,
    FlowMap,
    TractrixConfig,
    constant_curve,
    flow_map,
    geodesic_curve,
    tractrix_flow,
    tractrix_flow_gradient,
)
from .lipschitz import LipschitzReport, estimate_lipschitz
from .retractions import (
    ArcConeK,
    CapConeK,
    ConePipeline,
    PhiPipeline,
    PsiPipeline,
    SampledConeK,
    compare_retractions,
    cone_retraction,
    phi_retraction,
    psi_retraction,
    radial_retraction,
)

__version__ = "0.1.0"

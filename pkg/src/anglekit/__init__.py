"""anglekit: construct, verify and explore point configurations realizing
prescribed angle multisets in the plane and in higher dimensions."""

from .errors import (
    ArcOverlap,
    BracketingFailed,
    BudgetExceeded,
    ConvexityFailed,
    CoverFailed,
    DegenerateRay,
    DimensionUnsupported,
    GeometryError,
    MaxAngleViolated,
    NewtonDiverged,
    NotDistinct,
    NotSorted,
    SharedRayCollision,
    UnmatchedTargets,
    UsageError,
    VerificationFailed,
)
from .geom import (
    DEFAULT_TOL,
    RAY_TOL,
    SEP_MIN,
    SOLVER_TOL,
    AngleInstance,
    AngleMultiset,
    Certificate,
    PointConfig,
    angle_at,
    check_angle,
    check_certificate,
    enumerate_angles,
    is_convex_position,
    normalize_similarity,
    verify,
)
from .highdim import (
    AnchorSet,
    CoverCenter,
    anchor_set,
    build_cover,
    place_point,
    realize_highdim,
)
from .multiset import GluePlan, circle_config, glue, realize_multiset
from .planar import (
    FivePointLayout,
    add_point_two_angles,
    construct_five_points,
    realize_planar,
)
from .projection import TailReport, angle_distortion, random_unit_vector, tail_1d
from .solver import (
    ProbEstimate,
    SolverReport,
    decide_triangle,
    estimate_p,
    impossible_four,
    solve_numeric,
)
from .svg import render_svg

__version__ = "0.1.0"

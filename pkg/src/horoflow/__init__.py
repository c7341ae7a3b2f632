"""Geodesic-flow shadowing machinery on the hyperbolic plane.

Exact upper half-plane geometry, horocycle winding, the iterated
shadowing sequence, and the non-expansiveness witness pipeline, with
grid-based verifiers for every quantitative bound involved.
"""

from .numeric import (
    ENV_PRECISION_BITS,
    SplitMix64,
    default_precision_bits,
    derive_seed,
    det_tolerance,
    precision,
    trace_tolerance,
)
from .plane import (
    INFINITY,
    BoundaryPoint,
    FuchsianWordBall,
    Isometry,
    IsometryClass,
    Point,
    UnitTangent,
    apply_isometry,
    backward_endpoint,
    base_origin,
    boundary_gap,
    busemann,
    chordal_gap,
    classify_isometry,
    classify_isometry_detailed,
    d1,
    d1_quotient,
    d1_quotient_detail,
    geodesic_flow,
    hyp_distance,
    reverse,
    stable_vector,
    standardizer,
    time_one_point,
    vector_point,
    vector_points,
)
from .horocycle import (
    Horocycle,
    KeyPropReport,
    OrientedPair,
    StandardTangency,
    TangencyData,
    key_proposition_check,
    make_oriented_tangency,
    make_parabolic,
    random_isometry,
    random_tangency,
    standardize_tangency,
    tangency,
    tangent_horocycle,
    translation_length,
    wind,
    winding_time,
)
from .sequence import (
    PairSequence,
    PairSequenceSpec,
    PrecisionExhausted,
    WindingSequence,
    build_pair_sequence,
    iterate_winding,
    letters_ball,
    verify_cor1,
    verify_pm,
    xi_nested_separation,
    xi_of_sequence,
)
from .witness import (
    SEP_TOL,
    WitnessReport,
    build_witness,
    local_product,
    product_modulus,
)

__all__ = [name for name in dir() if not name.startswith("_")]

__version__ = "0.1.0"

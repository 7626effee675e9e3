"""Exact computations with fine monoids, Kato fans, join fans and chart data."""

from .abelian import (
    FGAbelianGroup,
    GroupHom,
    IntMatrix,
    Presentation,
    cokernel,
    kernel_image,
    short_exact_check,
    smith_normal_form,
)
from .charts import (
    ChartDatum,
    construct_neat_chart,
    criterion_report,
    gp_rank,
    log_etale_condition,
    log_smooth_condition,
    neatness_check,
    rel_char,
    torsion_invertible,
)
from .fan import Fan, FanMorphism, etale_fiber_product, fan_isomorphic, is_etale, spec
from .groupoid import (
    JointFace,
    JoinFan,
    PMonoid,
    build_truncation,
    facelem_check,
    join,
    joint_face_poset,
    verify_groupoid,
)
from .monoid import (
    FineMonoid,
    MonoidHom,
    faces,
    groupify,
    hom_flags,
    is_isomorphic,
    localize,
    membership,
    saturate,
    sharp_localize,
    sharpen,
    units,
)

__version__ = "0.1.0"

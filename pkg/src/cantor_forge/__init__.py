"""cantor-forge: fractal pointset constructions with certified dimension,
spanner/treewidth witnesses, and compiled hardness-reduction instances."""

from .geometry import (
    GeometryError,
    NetReport,
    Point,
    PointSet,
    SubstitutionError,
    build_epsilon_net,
    count_net_in_ball,
    linf_dist,
    pt,
    scale_point_set,
    sq_dist,
    substitute_point_set,
)
from .fractals import (
    CrossbarDecomposition,
    CrossbarParams,
    decompose_crossbar,
    gen_f,
    gen_h,
    gen_integer_grid,
    gen_sierpinski_carpet,
)

__all__ = [
    "GeometryError",
    "NetReport",
    "Point",
    "PointSet",
    "SubstitutionError",
    "build_epsilon_net",
    "count_net_in_ball",
    "linf_dist",
    "pt",
    "scale_point_set",
    "sq_dist",
    "substitute_point_set",
    "CrossbarDecomposition",
    "CrossbarParams",
    "decompose_crossbar",
    "gen_f",
    "gen_h",
    "gen_integer_grid",
    "gen_sierpinski_carpet",
]

__version__ = "0.1.0"

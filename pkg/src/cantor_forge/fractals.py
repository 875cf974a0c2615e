"""Deterministic generators for the pointset families: integer grids, the
discrete Sierpinski carpet (with or without box points), the 2-D Cantor
crossbar and its generalization f/h over odd parameters (l, v), plus the
structural decomposition into embedded-grid core M and connector set C.

Coordinate convention: a cell with index vector (i_1..i_d) at recursion depth
j occupies offset i * l^(k-j); base-case points sit at the cell's minimal
corner, so every generated coordinate is a nonnegative integer below l^k.
Outputs are canonically sorted, so identical parameters give bit-identical
pointsets.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from itertools import product

from .geometry import GeometryError, Point, PointSet


@dataclass(frozen=True)
class CrossbarParams:
    l: int
    v: int
    d: int
    k: int

    def __post_init__(self):
        if self.l % 2 == 0 or self.v % 2 == 0:
            raise GeometryError("l and v must be odd")
        if not (self.l > self.v >= 1):
            raise GeometryError("need l > v >= 1")
        if self.d < 2:
            raise GeometryError("d must be >= 2")
        if self.k < 0:
            raise GeometryError("k must be >= 0")

    @property
    def dim_exponent(self) -> float:
        """log(l*(l-v)^(d-1)) / log l, strictly between 1 and d."""
        return math.log(self.l * (self.l - self.v) ** (self.d - 1)) / math.log(self.l)

    def h_count(self) -> int:
        return (self.l * (self.l - self.v) ** (self.d - 1)) ** self.k

    def f_count_bound(self) -> int:
        return self.d * self.h_count()

    def core_side(self) -> int:
        return (self.l - self.v) ** self.k

    def full_rows_per_axis(self) -> int:
        return (self.l - self.v) ** (self.k * (self.d - 1))


def _mid_range(l: int, v: int) -> range:
    lo = (l - v) // 2
    return range(lo, lo + v)


@lru_cache(maxsize=None)
def _h_tuples(l: int, v: int, d: int, axis: int, k: int) -> tuple:
    """h^{l,v,d}_axis(k) as sorted integer tuples (axis is 1-based)."""
    if k == 0:
        return ((0,) * d,)
    sub = _h_tuples(l, v, d, axis, k - 1)
    mid = set(_mid_range(l, v))
    step = l ** (k - 1)
    ranges = [
        range(l) if dim == axis - 1 else [i for i in range(l) if i not in mid]
        for dim in range(d)
    ]
    out = []
    for cell in product(*ranges):
        base = tuple(i * step for i in cell)
        out.extend(tuple(b + c for b, c in zip(base, p)) for p in sub)
    return tuple(sorted(out))


@lru_cache(maxsize=None)
def _f_tuples(l: int, v: int, d: int, k: int) -> tuple:
    """f^{l,v,d}(k): corners recurse on f, single-mid-axis cells carry the
    matching h copy, everything with two or more mid coordinates is removed."""
    if k == 0:
        return ((0,) * d,)
    f_sub = _f_tuples(l, v, d, k - 1)
    h_subs = [_h_tuples(l, v, d, m + 1, k - 1) for m in range(d)]
    mid = set(_mid_range(l, v))
    step = l ** (k - 1)
    out = []
    for cell in product(range(l), repeat=d):
        mids = [dim for dim in range(d) if cell[dim] in mid]
        if len(mids) == 0:
            block = f_sub
        elif len(mids) == 1:
            block = h_subs[mids[0]]
        else:
            continue
        base = tuple(i * step for i in cell)
        out.extend(tuple(b + c for b, c in zip(base, p)) for p in block)
    return tuple(sorted(out))


def _to_pointset(tuples, d: int, labels=None) -> PointSet:
    return PointSet(d, [tuple(Fraction(c) for c in t) for t in tuples], labels)


def gen_integer_grid(n: int, d: int) -> PointSet:
    """The full integer grid {1..n}^d (n is the side, so n^d points)."""
    if n < 1 or d < 1:
        raise GeometryError("need n >= 1 and d >= 1")
    return _to_pointset(sorted(product(range(1, n + 1), repeat=d)), d)


def gen_h(params: CrossbarParams, axis: int) -> PointSet:
    if not (1 <= axis <= params.d):
        raise GeometryError(f"axis must be in 1..{params.d}")
    return _to_pointset(_h_tuples(params.l, params.v, params.d, axis, params.k), params.d)


def gen_f(params: CrossbarParams) -> PointSet:
    return _to_pointset(_f_tuples(params.l, params.v, params.d, params.k), params.d)


# -- discrete Sierpinski carpet ----------------------------------------------


@lru_cache(maxsize=None)
def carpet_cells(k: int) -> frozenset:
    """Surviving cells of the depth-k carpet on {0..3^k-1}^2 (8^k cells)."""
    if k < 0:
        raise GeometryError("k must be >= 0")
    if k == 0:
        return frozenset({(0, 0)})
    sub = carpet_cells(k - 1)
    step = 3 ** (k - 1)
    out = set()
    for cx, cy in product(range(3), repeat=2):
        if cx == 1 and cy == 1:
            continue
        out.update((cx * step + x, cy * step + y) for x, y in sub)
    return frozenset(out)


def carpet_box_point(bx: int, by: int) -> Point:
    """Interior point of unit box (bx,by): quarter-point of its chosen
    diagonal, alternated checkerboard-style so adjacent boxes share an
    attachment corner."""
    if (bx + by) % 2 == 0:
        return (Fraction(4 * bx + 1, 4), Fraction(4 * by + 1, 4))
    return (Fraction(4 * bx + 1, 4), Fraction(4 * by + 3, 4))


def carpet_box_corners(bx: int, by: int) -> tuple[Point, Point]:
    """The diagonal pair the box point attaches to."""
    if (bx + by) % 2 == 0:
        return (
            (Fraction(bx), Fraction(by)),
            (Fraction(bx + 1), Fraction(by + 1)),
        )
    return (
        (Fraction(bx), Fraction(by + 1)),
        (Fraction(bx + 1), Fraction(by)),
    )


def carpet_lattice_vertices(k: int) -> list[Point]:
    """Vertices of the [0,3^k]^2 unit lattice that touch a surviving box:
    exactly the grid-with-holes vertex set (hole interiors removed)."""
    cells = carpet_cells(k)
    side = 3**k
    verts = []
    for x in range(side + 1):
        for y in range(side + 1):
            incident = (
                (x - 1, y - 1) in cells
                or (x, y - 1) in cells
                or (x - 1, y) in cells
                or (x, y) in cells
            )
            if incident:
                verts.append((Fraction(x), Fraction(y)))
    return verts


def gen_sierpinski_carpet(k: int, with_box_points: bool = False) -> PointSet:
    """Recursive grid-with-holes X (8^k points), or the spanner pointset:
    lattice vertices with hole interiors removed plus one interior point per
    surviving unit box."""
    if k < 0:
        raise GeometryError("k must be >= 0")
    if not with_box_points:
        cells = sorted(carpet_cells(k))
        return _to_pointset(cells, 2)
    verts = carpet_lattice_vertices(k)
    boxes = [carpet_box_point(bx, by) for bx, by in sorted(carpet_cells(k))]
    pts = verts + boxes
    labels = ["grid"] * len(verts) + ["box"] * len(boxes)
    order = sorted(range(len(pts)), key=lambda i: pts[i])
    return PointSet(2, [pts[i] for i in order], [labels[i] for i in order])


# -- full-row detection and crossbar decomposition ---------------------------


def axis_runs(ps: PointSet, axis: int) -> list[list[int]]:
    """Maximal axis-parallel runs of unit-spaced points (axis 0-based).
    Each run is a list of point indices ordered by the axis coordinate."""
    groups: dict[tuple, list[tuple[Fraction, int]]] = {}
    for i, p in enumerate(ps.points):
        key = p[:axis] + p[axis + 1 :]
        groups.setdefault(key, []).append((p[axis], i))
    runs = []
    for key in sorted(groups):
        seq = sorted(groups[key])
        cur = [seq[0][1]]
        for (c_prev, _), (c, idx) in zip(seq, seq[1:]):
            if c - c_prev == 1:
                cur.append(idx)
            else:
                runs.append(cur)
                cur = [idx]
        runs.append(cur)
    return runs


def full_rows(ps: PointSet, axis: int, row_len: int) -> list[list[int]]:
    """Runs of exactly `row_len` unit-spaced points along `axis`."""
    return [r for r in axis_runs(ps, axis) if len(r) == row_len]


@dataclass
class CrossbarDecomposition:
    params: CrossbarParams
    all: PointSet
    core: PointSet
    connectors: PointSet
    full_rows_by_axis: list[list[list[int]]]
    core_offsets: list[list[Fraction]]

    def core_indices(self) -> set[int]:
        return {self.all.index_of(p) for p in self.core.points}


def decompose_crossbar(ps: PointSet, params: CrossbarParams) -> CrossbarDecomposition:
    """Identify full rows per axis, the embedded grid M (points on a full row
    in every axis direction) and the connector set C = P \\ M. The input is
    structurally validated against the generator first."""
    expected = gen_f(params)
    if ps != expected:
        raise GeometryError("pointset is not the crossbar for these parameters")

    row_len = params.l**params.k
    want_rows = params.full_rows_per_axis()
    rows_by_axis = []
    on_full_row = []
    for axis in range(params.d):
        rows = full_rows(ps, axis, row_len)
        if len(rows) != want_rows:
            raise GeometryError(
                f"axis {axis}: found {len(rows)} full rows, expected {want_rows}"
            )
        rows_by_axis.append(rows)
        member = set()
        for r in rows:
            member.update(r)
        on_full_row.append(member)

    core_idx = sorted(set.intersection(*on_full_row))
    want_core = params.core_side() ** params.d
    if len(core_idx) != want_core:
        raise GeometryError(f"core has {len(core_idx)} points, expected {want_core}")
    core_points = [ps.points[i] for i in core_idx]
    conn_points = [p for i, p in enumerate(ps.points) if i not in set(core_idx)]

    offsets = []
    for axis in range(params.d):
        vals = sorted({p[axis] for p in core_points})
        if len(vals) != params.core_side():
            raise GeometryError("core is not a product grid")
        offsets.append(vals)
    prod = {tuple(c) for c in product(*offsets)}
    if prod != set(core_points):
        raise GeometryError("core is not the product of its per-axis offsets")

    labels = ["core" if i in set(core_idx) else "connector" for i in range(len(ps))]
    labeled = PointSet(ps.dim, ps.points, labels)
    core = PointSet(ps.dim, core_points)
    connectors = (
        PointSet(ps.dim, conn_points) if conn_points else PointSet(ps.dim, core_points[:1])
    )
    if not conn_points:
        # k = 0 degenerate crossbar: a single point, no connectors
        connectors = None
    return CrossbarDecomposition(
        params=params,
        all=labeled,
        core=core,
        connectors=connectors,
        full_rows_by_axis=rows_by_axis,
        core_offsets=offsets,
    )

"""Exact rational geometry: points, squared distances, greedy epsilon-nets,
ball counting, uniform scaling and gadget substitution.

All predicates are exact. Coordinates are `fractions.Fraction`; heavy batch
work lifts a pointset onto a common integer lattice (coords * lcm of
denominators) and runs int64 numpy arithmetic. Floats never decide anything,
they only appear in reports.
"""

from __future__ import annotations

import math
import random
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Iterable, Mapping, Sequence

import numpy as np

Point = tuple[Fraction, ...]

# int64 safety margin: with |coord*q| < 2**29, a squared distance over d <= 8
# coordinates stays below 2**61.
_MAX_LIFTED_ABS = 1 << 29


class GeometryError(ValueError):
    pass


class SubstitutionError(GeometryError):
    """Substitution-lemma precondition violated; message names the offender."""


def pt(*coords) -> Point:
    """Build a point from ints/strings/Fractions, e.g. pt(1, '1/8')."""
    return tuple(Fraction(c) for c in coords)


def sq_dist(p: Point, q: Point) -> Fraction:
    """Exact squared Euclidean distance."""
    if len(p) != len(q):
        raise GeometryError(f"dimension mismatch: {len(p)} vs {len(q)}")
    return sum((a - b) * (a - b) for a, b in zip(p, q))


def linf_dist(p: Point, q: Point) -> Fraction:
    if len(p) != len(q):
        raise GeometryError(f"dimension mismatch: {len(p)} vs {len(q)}")
    return max(abs(a - b) for a, b in zip(p, q))


class PointSet:
    """Finite set of distinct d-dimensional rational points.

    Point order is part of the value (generators emit canonically sorted
    points); `labels`, when present, carries one role tag per point.
    """

    __slots__ = ("dim", "points", "labels", "_index", "_lift")

    def __init__(self, dim: int, points: Sequence[Point], labels: Sequence[str] | None = None):
        if dim < 1:
            raise GeometryError("dim must be >= 1")
        pts = [tuple(Fraction(c) for c in p) for p in points]
        if not pts:
            raise GeometryError("a PointSet holds at least one point")
        for p in pts:
            if len(p) != dim:
                raise GeometryError(f"point {p} does not have dimension {dim}")
        if len(set(pts)) != len(pts):
            seen = set()
            for p in pts:
                if p in seen:
                    raise GeometryError(f"duplicate point {p}")
                seen.add(p)
        if labels is not None and len(labels) != len(pts):
            raise GeometryError("labels length must match points")
        self.dim = dim
        self.points = pts
        self.labels = list(labels) if labels is not None else None
        self._index = None
        self._lift = None

    def __len__(self) -> int:
        return len(self.points)

    def __iter__(self):
        return iter(self.points)

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, PointSet)
            and self.dim == other.dim
            and self.points == other.points
        )

    def __repr__(self) -> str:
        return f"PointSet(dim={self.dim}, n={len(self.points)})"

    def index_of(self, p: Point) -> int:
        if self._index is None:
            self._index = {q: i for i, q in enumerate(self.points)}
        return self._index[p]

    def __contains__(self, p) -> bool:
        if self._index is None:
            self._index = {q: i for i, q in enumerate(self.points)}
        return tuple(Fraction(c) for c in p) in self._index

    def as_point_set(self) -> set:
        return set(self.points)

    def sorted(self) -> "PointSet":
        order = sorted(range(len(self.points)), key=lambda i: self.points[i])
        labels = [self.labels[i] for i in order] if self.labels else None
        return PointSet(self.dim, [self.points[i] for i in order], labels)

    # -- integer lattice lifting -------------------------------------------

    def lift_scale(self) -> int:
        """lcm of all coordinate denominators (cached)."""
        if self._lift is None:
            self._lift = {}
        q = self._lift.get("scale")
        if q is None:
            q = 1
            for p in self.points:
                for c in p:
                    q = q * c.denominator // math.gcd(q, c.denominator)
            self._lift["scale"] = q
        return q

    def as_int_lattice(self, q: int | None = None):
        """Return (int64 array of coords*q, q). Cached per q."""
        if q is None:
            q = self.lift_scale()
        if self._lift is None:
            self._lift = {}
        arr = self._lift.get(q)
        if arr is None:
            base = self._lift.get(self._lift.get("scale")) if "scale" in self._lift else None
            q0 = self._lift.get("scale")
            if base is not None and q0 is not None and q % q0 == 0:
                factor = q // q0
                arr = base * np.int64(factor)
                hi = int(np.abs(arr).max()) if arr.size else 0
                if hi >= _MAX_LIFTED_ABS:
                    raise GeometryError(
                        "coordinates too large for exact int64 lattice arithmetic"
                    )
            else:
                arr = _lift_points(self.points, q)
            self._lift[q] = arr
        return arr, q


def _lift_points(points: Sequence[Point], q: int) -> np.ndarray:
    rows = []
    for p in points:
        row = []
        for c in p:
            v = c * q
            if v.denominator != 1:
                raise GeometryError(f"scale {q} does not clear denominator of {c}")
            iv = v.numerator
            if abs(iv) >= _MAX_LIFTED_ABS:
                raise GeometryError("coordinates too large for exact int64 lattice arithmetic")
            row.append(iv)
        rows.append(row)
    return np.asarray(rows, dtype=np.int64)


def _common_lift(ps: PointSet, extra_fracs: Iterable[Fraction]):
    q = ps.lift_scale()
    for f in extra_fracs:
        q = q * f.denominator // math.gcd(q, f.denominator)
    arr, _ = ps.as_int_lattice(q)
    return arr, q


# -- epsilon nets -----------------------------------------------------------


@dataclass
class NetReport:
    """Greedy sequential net plus exactly-verified packing/covering facts.

    Convention (fixed artifact-wide): admit at distance >= eps, cover at < eps.
    The covering radius is stored squared to stay rational.
    """

    epsilon: Fraction
    net: PointSet
    net_indices: list[int]
    packing_ok: bool
    covering_ok: bool
    covering_radius_sq: Fraction

    @property
    def covering_radius(self) -> float:
        return math.sqrt(float(self.covering_radius_sq))


def scan_order(n: int, seed: int | None) -> list[int]:
    """Identity order for seed=None, else a seed-reproducible shuffle."""
    order = list(range(n))
    if seed is not None:
        random.Random(seed).shuffle(order)
    return order


def build_epsilon_net(ps: PointSet, eps: Fraction, seed: int | None = None) -> NetReport:
    """Greedy sequential eps-net: scan in seeded order, admit a point iff its
    distance to every admitted point is >= eps. Packing and covering are then
    re-verified exactly and recorded."""
    eps = Fraction(eps)
    if eps <= 0:
        raise GeometryError("eps must be > 0")
    X, q = _common_lift(ps, [eps])
    n = len(ps)
    thr = eps * q  # integer-valued Fraction
    thr_sq = int(thr.numerator) ** 2
    assert thr.denominator == 1

    order = scan_order(n, seed)
    if thr_sq <= 1:
        # lattice spacing: distinct lifted points are already >= 1 apart
        picked = order
        admitted = X[order]
        m = n
    else:
        admitted = np.empty_like(X)
        picked = []
        m = 0
        for i in order:
            p = X[i]
            if m:
                diff = admitted[:m] - p
                d2 = np.einsum("ij,ij->i", diff, diff)
                if bool((d2 < thr_sq).any()):
                    continue
            admitted[m] = p
            picked.append(i)
            m += 1

    net_points = [ps.points[i] for i in picked]
    net = PointSet(ps.dim, net_points)
    A = admitted[:m]

    # exact re-verification
    packing_ok = True
    if m > 1:
        for s in range(0, m, 512):
            blk = A[s : s + 512]
            d2 = ((blk[:, None, :] - A[None, :, :]) ** 2).sum(axis=2)
            np.fill_diagonal(d2[:, s : s + blk.shape[0]], thr_sq)
            if bool((d2 < thr_sq).any()):
                packing_ok = False
                break

    worst = 0
    for s in range(0, n, 512):
        blk = X[s : s + 512]
        d2 = ((blk[:, None, :] - A[None, :, :]) ** 2).sum(axis=2)
        worst = max(worst, int(d2.min(axis=1).max()))
    covering_radius_sq = Fraction(worst, q * q)
    covering_ok = worst < thr_sq

    return NetReport(
        epsilon=eps,
        net=net,
        net_indices=picked,
        packing_ok=packing_ok,
        covering_ok=covering_ok,
        covering_radius_sq=covering_radius_sq,
    )


def count_net_in_ball(net: PointSet, x: Point, r: Fraction) -> int:
    """|net ∩ closed ball(x, r)| via exact comparison sqDist <= r^2."""
    r = Fraction(r)
    if r <= 0:
        raise GeometryError("r must be > 0")
    x = tuple(Fraction(c) for c in x)
    if len(x) != net.dim:
        raise GeometryError("center dimension mismatch")
    extra = [r] + [c for c in x]
    A, q = _common_lift(net, extra)
    xv = np.asarray([int(c * q) for c in x], dtype=np.int64)
    rq = int(r * q)
    diff = A - xv
    d2 = np.einsum("ij,ij->i", diff, diff)
    return int((d2 <= rq * rq).sum())


def counts_in_balls(net: PointSet, centers: np.ndarray, r_sq_int: int) -> np.ndarray:
    """Vectorized closed-ball counts on an already-lifted lattice.

    `centers` must be int64 rows on the same lattice as `net.as_int_lattice()`,
    and `r_sq_int` the squared radius on that lattice.
    """
    A, _ = net.as_int_lattice()
    out = np.empty(len(centers), dtype=np.int64)
    for s in range(0, len(centers), 256):
        blk = centers[s : s + 256]
        d2 = ((blk[:, None, :] - A[None, :, :]) ** 2).sum(axis=2)
        out[s : s + 256] = (d2 <= r_sq_int).sum(axis=1)
    return out


# -- invariance transforms --------------------------------------------------


def scale_point_set(ps: PointSet, c: Fraction) -> PointSet:
    """Uniform scaling about the origin by rational c > 0."""
    c = Fraction(c)
    if c <= 0:
        raise GeometryError("scale factor must be > 0")
    return PointSet(ps.dim, [tuple(c * v for v in p) for p in ps.points], ps.labels)


def substitute_point_set(
    ps: PointSet,
    gadget: Mapping[Point, Sequence[Point]] | Callable[[Point], Sequence[Point]],
    clearance_sq: Fraction,
    k: int,
) -> PointSet:
    """Replace every p by its gadget set S_p and return the union.

    Preconditions (verified exactly, violations name the offender):
      * pairwise sqDist of base points > 16 * clearance_sq   ("d(u,v) > 4c")
      * |S_p| <= k
      * every x in S_p has sqDist(x, p) <= clearance_sq      ("d(x,p) <= c")
    """
    clearance_sq = Fraction(clearance_sq)
    if clearance_sq <= 0:
        raise GeometryError("clearance_sq must be > 0")
    lookup = gadget if callable(gadget) else lambda p: gadget[p]

    pts = ps.points
    lim = 16 * clearance_sq
    for i in range(len(pts)):
        for j in range(i + 1, len(pts)):
            if sq_dist(pts[i], pts[j]) <= lim:
                raise SubstitutionError(
                    f"base pair too close for substitution: {pts[i]} and {pts[j]}"
                )
    out: list[Point] = []
    for p in pts:
        sp = [tuple(Fraction(c) for c in x) for x in lookup(p)]
        if len(sp) > k:
            raise SubstitutionError(f"gadget at {p} has {len(sp)} > k={k} points")
        for x in sp:
            if sq_dist(x, p) > clearance_sq:
                raise SubstitutionError(f"gadget point {x} too far from base {p}")
        out.extend(sp)
    return PointSet(ps.dim, out)

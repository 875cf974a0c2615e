"""Empirical fractal-dimension estimation via multi-scale epsilon-net ball
counting, plus claimed-bound verification.

Two quantities are reported and deliberately kept apart: a log-log
least-squares slope of max ball counts against r/eps (trend), and an envelope
constant at a claimed exponent (bound checking). Counts are exact; floats
enter only in the fit.
"""

from __future__ import annotations

import math
import random
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .geometry import GeometryError, PointSet, build_epsilon_net, _common_lift

FULL_ENUMERATION_LIMIT = 10_000


@dataclass
class ScaleSample:
    eps: Fraction
    r: Fraction
    centers_used: int
    max_count: int
    net_size: int


@dataclass
class DimReport:
    samples: list[ScaleSample]
    fitted_exponent: float
    envelope_constant: float
    degenerate: bool = False
    claimed_exponent: float | None = None

    @property
    def scale_pairs(self):
        return [(s.eps, s.r) for s in self.samples]

    def to_dict(self) -> dict:
        return {
            "samples": [
                {
                    "eps": [str(s.eps.numerator), str(s.eps.denominator)],
                    "r": [str(s.r.numerator), str(s.r.denominator)],
                    "centers_used": s.centers_used,
                    "max_count": s.max_count,
                    "net_size": s.net_size,
                }
                for s in self.samples
            ],
            "fitted_exponent": self.fitted_exponent,
            "envelope_constant": self.envelope_constant,
            "degenerate": self.degenerate,
            "claimed_exponent": self.claimed_exponent,
        }


@dataclass
class BoundViolation:
    eps: Fraction
    r: Fraction
    center: tuple
    count: int
    bound: float

    def __str__(self):
        return (
            f"count {self.count} at center {self.center} exceeds "
            f"{self.bound:.3f} for eps={self.eps}, r={self.r}"
        )


def _check_pairs(scale_pairs):
    pairs = [(Fraction(e), Fraction(r)) for e, r in scale_pairs]
    for e, r in pairs:
        if e <= 0 or r < 2 * e:
            raise GeometryError(f"scale pair needs r >= 2*eps > 0, got eps={e}, r={r}")
    return pairs


def _pair_max_count(net, eps, r, centers_per_pair, seed):
    n = len(net)
    if n <= FULL_ENUMERATION_LIMIT or n <= centers_per_pair:
        centers_idx = list(range(n))
    else:
        centers_idx = sorted(random.Random(seed).sample(range(n), centers_per_pair))
    A, q = _common_lift(net, [r])
    rq = int(r * q)
    C = A[centers_idx]
    best_count, best_center = 0, 0
    for s in range(0, len(C), 256):
        blk = C[s : s + 256]
        d2 = ((blk[:, None, :] - A[None, :, :]) ** 2).sum(axis=2)
        counts = (d2 <= rq * rq).sum(axis=1)
        i = int(counts.argmax())
        if int(counts[i]) > best_count:
            best_count = int(counts[i])
            best_center = centers_idx[s + i]
    return best_count, len(centers_idx), net.points[best_center]


def _max_counts(ps, scale_pairs, centers_per_pair, seed, net_orders=1):
    """Per scale pair: greedy eps-net(s), sampled centers, exact max closed
    ball count. The net is built for the identity scan order plus
    `net_orders - 1` seeded shuffles; the max count over orders is kept
    (greedy nets are not adversarial, so multiple orders stress the bound).
    Nets are cached per (eps, order)."""
    pairs = _check_pairs(scale_pairs)
    orders = [None] + [seed + i for i in range(max(0, net_orders - 1))]
    nets: dict[tuple, object] = {}
    out = []
    for eps, r in pairs:
        best = None
        for o in orders:
            if (eps, o) not in nets:
                nets[(eps, o)] = build_epsilon_net(ps, eps, seed=o).net
            net = nets[(eps, o)]
            count, used, center = _pair_max_count(net, eps, r, centers_per_pair, seed)
            if best is None or count > best[0].max_count:
                best = (ScaleSample(eps, r, used, count, len(net)), center)
        out.append(best)
    return out


def estimate_dimension(
    ps: PointSet,
    scale_pairs,
    centers_per_pair: int = 128,
    seed: int = 0,
    net_orders: int = 1,
) -> DimReport:
    """Fit a dimension exponent from max net-ball counts across scales."""
    samples = [s for s, _ in _max_counts(ps, scale_pairs, centers_per_pair, seed, net_orders)]
    xs = np.array([math.log(float(s.r / s.eps)) for s in samples])
    ys = np.array([math.log(max(s.max_count, 1)) for s in samples])
    if np.allclose(xs, xs[0]):
        return DimReport(samples, float("nan"), float("nan"), degenerate=True)
    slope, _ = np.polyfit(xs, ys, 1)
    envelope = max(
        s.max_count / float(s.r / s.eps) ** slope for s in samples
    )
    return DimReport(samples, float(slope), float(envelope))


def verify_dimension_bound(
    ps: PointSet,
    delta: float,
    big_c: float,
    scale_pairs,
    centers_per_pair: int = 128,
    seed: int = 0,
    net_orders: int = 1,
) -> list[BoundViolation]:
    """Empty list iff every sampled (eps, r, center) satisfies
    count <= big_c * (r/eps)^delta."""
    if delta <= 0 or big_c <= 0:
        raise GeometryError("delta and big_c must be > 0")
    violations = []
    for sample, center in _max_counts(ps, scale_pairs, centers_per_pair, seed, net_orders):
        bound = big_c * float(sample.r / sample.eps) ** delta
        if sample.max_count > bound:
            violations.append(
                BoundViolation(sample.eps, sample.r, center, sample.max_count, bound)
            )
    return violations


def default_scale_ladder(ps: PointSet, base: int = 3, r_factors=None):
    """Geometric eps ladder base^j with r/eps spanning 2 .. base^3.

    Balls are capped at half the extent so counts never saturate, and an eps
    level is used only while base^2 * eps still fits under that cap (coarser
    nets have too little dynamic range to inform the fit)."""
    ext = 0
    for axis in range(ps.dim):
        vals = [p[axis] for p in ps.points]
        ext = max(ext, max(vals) - min(vals))
    if ext <= 0:
        raise GeometryError("degenerate pointset extent")
    if r_factors is None:
        r_factors = (2, base, 4, base * base, base**3)
    pairs = []
    eps = Fraction(1)
    while eps * base * base <= ext / 2:
        for f in sorted(set(r_factors)):
            r = eps * f
            if r >= 2 * eps and r <= ext / 2:
                pairs.append((eps, r))
        eps *= base
    if not pairs:
        pairs = [(Fraction(1), Fraction(2))]
    return pairs

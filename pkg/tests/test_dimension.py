import math
import random
from fractions import Fraction

import pytest

from cantor_forge.dimension import (
    default_scale_ladder,
    estimate_dimension,
    verify_dimension_bound,
)
from cantor_forge.fractals import CrossbarParams, gen_f, gen_integer_grid, gen_sierpinski_carpet
from cantor_forge.geometry import (
    GeometryError,
    PointSet,
    build_epsilon_net,
    count_net_in_ball,
    pt,
    scale_point_set,
    substitute_point_set,
)

LOG63 = math.log(6) / math.log(3)


def test_line_has_dimension_one():
    ps = gen_integer_grid(200, 1)
    rep = estimate_dimension(ps, default_scale_ladder(ps), seed=0)
    assert abs(rep.fitted_exponent - 1.0) <= 0.1


def test_crossbar_f3_estimate():
    ps = gen_f(CrossbarParams(3, 1, 2, 4))
    rep = estimate_dimension(ps, default_scale_ladder(ps), seed=0)
    assert abs(rep.fitted_exponent - LOG63) <= 0.2
    assert not rep.degenerate


def test_rejects_bad_scale_pair():
    ps = gen_integer_grid(10, 1)
    with pytest.raises(GeometryError):
        estimate_dimension(ps, [(Fraction(1), Fraction(1))])


def test_degenerate_ladder_flagged():
    ps = gen_integer_grid(30, 1)
    rep = estimate_dimension(ps, [(Fraction(1), Fraction(2)), (Fraction(2), Fraction(4))])
    assert rep.degenerate
    assert math.isnan(rep.fitted_exponent)


def test_monotonicity_in_r():
    ps = gen_sierpinski_carpet(3)
    eps = Fraction(1)
    pairs = [(eps, Fraction(r)) for r in (2, 3, 5, 9, 13)]
    rep = estimate_dimension(ps, pairs, seed=0)
    counts = [s.max_count for s in rep.samples]
    assert counts == sorted(counts)


def test_verify_bound_crossbar_paper_delta():
    # the proof-side constant for f^{3,1,2} is 558 on (r/2eps); 600 on (r/eps)
    # dominates it, and measured envelopes sit near 4
    ps = gen_f(CrossbarParams(3, 1, 2, 4))
    violations = verify_dimension_bound(ps, LOG63, 600.0, default_scale_ladder(ps), seed=0)
    assert violations == []


def test_verify_bound_flags_undersized_delta():
    ps = gen_integer_grid(27, 2)
    pairs = [(Fraction(1), Fraction(13))]
    violations = verify_dimension_bound(ps, 1.2, 10.0, pairs, seed=0)
    assert violations, "a 2-D grid must violate a 1.2-dimensional bound"
    v = violations[0]
    assert v.count > v.bound


def test_verify_bound_single_point():
    ps = PointSet(2, [pt(3, 4)])
    assert verify_dimension_bound(ps, 0.5, 1.0, [(Fraction(1), Fraction(2))]) == []


def test_scaling_invariance_of_counts():
    # count-level equality under (P, eps, r) -> (cP, c eps, c r)
    ps = gen_f(CrossbarParams(3, 1, 2, 2))
    c = Fraction(7, 3)
    scaled = scale_point_set(ps, c)
    for eps, r in [(Fraction(1), Fraction(2)), (Fraction(3), Fraction(9))]:
        net = build_epsilon_net(ps, eps).net
        net_scaled = build_epsilon_net(scaled, c * eps).net
        assert net_scaled.points == [tuple(c * v for v in p) for p in net.points]
        for x in ps.points[:: max(1, len(ps) // 7)]:
            a = count_net_in_ball(net, x, r)
            b = count_net_in_ball(net_scaled, tuple(c * v for v in x), c * r)
            assert a == b


def test_substitution_stability_inequality():
    # finite form of the substitution proof, eps > 4c branch:
    # |N ∩ ball(x,r)| <= |M ∩ ball(x, r + eps/2 + c)| with
    # N an eps-net of P', M an (eps/2 - 2c)-net of P.
    rng = random.Random(2)
    base = set()
    while len(base) < 12:
        base.add((rng.randrange(0, 15) * 11, rng.randrange(0, 15) * 11))
    ps = PointSet(2, [pt(*p) for p in sorted(base)])
    c = Fraction(1)
    gad = {
        p: [p, (p[0] + Fraction(1, 2), p[1] + Fraction(1, 2)), (p[0] - 1, p[1])]
        for p in ps.points
    }
    sub = substitute_point_set(ps, gad, c * c, 3)
    eps = Fraction(6)  # > 4c
    n_rep = build_epsilon_net(sub, eps, seed=None)
    m_rep = build_epsilon_net(ps, eps / 2 - 2 * c, seed=None)
    for x in ps.points:
        for r in [Fraction(12), Fraction(20), Fraction(40)]:
            lhs = count_net_in_ball(n_rep.net, x, r)
            rhs = count_net_in_ball(m_rep.net, x, r + eps / 2 + c)
            assert lhs <= rhs


def test_report_serialization_roundtrip_fields():
    ps = gen_integer_grid(30, 1)
    rep = estimate_dimension(ps, default_scale_ladder(ps), seed=1)
    doc = rep.to_dict()
    assert len(doc["samples"]) == len(rep.samples)
    assert doc["fitted_exponent"] == rep.fitted_exponent

import random
from fractions import Fraction

import pytest

from cantor_forge.geometry import (
    GeometryError,
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


def line(*xs):
    return PointSet(1, [pt(x) for x in xs])


def test_sq_dist_examples():
    assert sq_dist(pt(0, 0), pt(1, 0)) == 1
    assert sq_dist(pt(0, 0), pt(3, 4)) == 25
    # the section-3 worked ball pair with d=2, Delta=2, alpha=1/8
    assert sq_dist(pt("1/8", "2/8"), pt("10/8", "1/8")) == Fraction(82, 64)


def test_sq_dist_symmetry_and_identity():
    rng = random.Random(7)
    for _ in range(50):
        d = rng.choice([1, 2, 3])
        p = pt(*[Fraction(rng.randrange(-20, 20), rng.randrange(1, 9)) for _ in range(d)])
        q = pt(*[Fraction(rng.randrange(-20, 20), rng.randrange(1, 9)) for _ in range(d)])
        assert sq_dist(p, q) == sq_dist(q, p)
        assert sq_dist(p, p) == 0


def test_sq_dist_dimension_mismatch():
    with pytest.raises(GeometryError):
        sq_dist(pt(0, 0), pt(1, 0, 0))


def test_pointset_rejects_duplicates_and_empty():
    with pytest.raises(GeometryError):
        PointSet(2, [pt(0, 0), pt(0, 0)])
    with pytest.raises(GeometryError):
        PointSet(2, [])


def test_net_line_example():
    rep = build_epsilon_net(line(0, 1, 2, 3), Fraction(2))
    assert [p[0] for p in rep.net.points] == [0, 2]
    assert rep.packing_ok and rep.covering_ok
    assert rep.covering_radius_sq == 1


def test_net_eps_below_min_distance_keeps_everything():
    ps = line(0, 5, 9, 14)
    rep = build_epsilon_net(ps, Fraction(3))
    assert len(rep.net) == len(ps)


def test_net_unit_square_all_orders():
    ps = PointSet(2, [pt(0, 0), pt(0, 1), pt(1, 0), pt(1, 1)])
    # every scan order admits exactly one point: all pairwise distances < 3/2
    for seed in [None, 0, 1, 2, 3, 17]:
        rep = build_epsilon_net(ps, Fraction(3, 2), seed=seed)
        assert len(rep.net) == 1
        assert rep.packing_ok and rep.covering_ok
        assert rep.covering_radius_sq <= 2


def test_net_sandwich_random():
    rng = random.Random(11)
    for trial in range(25):
        n = rng.randrange(2, 40)
        pts = set()
        while len(pts) < n:
            pts.add((rng.randrange(0, 30), rng.randrange(0, 30)))
        ps = PointSet(2, [pt(*p) for p in sorted(pts)])
        eps = Fraction(rng.randrange(1, 8), rng.choice([1, 2]))
        rep = build_epsilon_net(ps, eps, seed=trial)
        assert rep.packing_ok, "pairwise net distances must be >= eps"
        assert rep.covering_ok, "every point must be within < eps of the net"
        assert rep.covering_radius_sq < eps * eps


def test_count_net_in_ball():
    net = line(0, 2, 4)
    assert count_net_in_ball(net, pt(0), Fraction(3)) == 2
    # boundary is closed: distance exactly r counts
    assert count_net_in_ball(net, pt(0), Fraction(2)) == 2
    assert count_net_in_ball(net, pt(0), Fraction(4)) == 3


def test_scale_examples():
    ps = PointSet(2, [pt(1, 1)])
    assert scale_point_set(ps, Fraction(2)).points == [pt(2, 2)]
    grid = PointSet(2, [pt(x, y) for x in range(3) for y in range(3)])
    third = scale_point_set(grid, Fraction(1, 3))
    assert pt("1/3", "2/3") in third
    with pytest.raises(GeometryError):
        scale_point_set(ps, Fraction(0))


def test_scaling_count_identity():
    # finite form of the scaling lemma: counts are invariant under (c*eps, c*r)
    rng = random.Random(3)
    for trial in range(20):
        pts = set()
        while len(pts) < 15:
            pts.add((rng.randrange(0, 40), rng.randrange(0, 40)))
        ps = PointSet(2, [pt(*p) for p in sorted(pts)])
        c = Fraction(rng.randrange(1, 9), rng.randrange(1, 5))
        eps = Fraction(rng.randrange(1, 6))
        rep = build_epsilon_net(ps, eps, seed=trial)
        scaled = scale_point_set(ps, c)
        rep_scaled = build_epsilon_net(scaled, c * eps, seed=trial)
        # same seed, scaled metric: the greedy net scales pointwise
        assert rep_scaled.net.points == [tuple(c * v for v in p) for p in rep.net.points]
        assert rep_scaled.packing_ok and rep_scaled.covering_ok
        x = ps.points[rng.randrange(len(ps))]
        r = Fraction(rng.randrange(2, 20))
        a = count_net_in_ball(rep.net, x, r)
        b = count_net_in_ball(rep_scaled.net, tuple(c * v for v in x), c * r)
        assert a == b


def test_substitution_identity_and_threshold():
    ps = PointSet(2, [pt(0, 0), pt(5, 0)])
    ident = substitute_point_set(ps, lambda p: [p], Fraction(1, 64), 1)
    assert ident.as_point_set() == ps.as_point_set()

    # two points at distance 5 with clearance c=1: 5 > 4 passes, c=2 fails
    gad = {
        pt(0, 0): [pt(1, 0), pt(0, 1)],
        pt(5, 0): [pt(5, 1), pt(6, 0)],
    }
    out = substitute_point_set(ps, gad, Fraction(1), 2)
    assert len(out) == 4
    with pytest.raises(SubstitutionError):
        substitute_point_set(ps, gad, Fraction(4), 2)  # c=2 -> 4c=8 > 5


def test_substitution_rejects_far_gadget_point():
    ps = PointSet(2, [pt(0, 0), pt(50, 0)])
    with pytest.raises(SubstitutionError):
        substitute_point_set(ps, {pt(0, 0): [pt(3, 0)], pt(50, 0): [pt(50, 0)]}, Fraction(1), 1)


def test_substitution_cover_bound():
    # with preconditions met: |P' in ball(x,r)| <= k * |P in ball(x, r+c)|
    rng = random.Random(5)
    for trial in range(20):
        base = set()
        while len(base) < 8:
            base.add((rng.randrange(0, 12) * 10, rng.randrange(0, 12) * 10))
        ps = PointSet(2, [pt(*p) for p in sorted(base)])
        c = Fraction(1)
        k = 3
        gad = {
            p: [p, (p[0] + Fraction(1, 2), p[1]), (p[0], p[1] - Fraction(1, 2))][: rng.randrange(1, k + 1)]
            for p in ps.points
        }
        sub = substitute_point_set(ps, gad, c * c, k)
        for _ in range(5):
            x = pt(rng.randrange(0, 120), rng.randrange(0, 120))
            r = Fraction(rng.randrange(2, 60))
            lhs = count_net_in_ball(sub, x, r)
            rhs = count_net_in_ball(ps, x, r + c)
            assert lhs <= k * rhs


def test_linf_dist():
    assert linf_dist(pt(0, 0), pt("3/4", "3/4")) == Fraction(3, 4)
    assert linf_dist(pt(0, 0), pt("1/2", "9/8")) == Fraction(9, 8)

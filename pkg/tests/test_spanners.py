import math
from fractions import Fraction

import pytest

from cantor_forge.fractals import CrossbarParams, decompose_crossbar, gen_f, gen_integer_grid
from cantor_forge.geometry import PointSet, pt
from cantor_forge.serialize import graph_from_dict, graph_to_dict
from cantor_forge.spanners import (
    GridMinorCertificate,
    PathCollisionError,
    SpannerError,
    SpannerGraph,
    TreeDecomposition,
    build_carpet_spanner,
    build_carpet_tree_decomposition,
    build_greedy_spanner,
    extract_grid_minor,
    rows_from_carpet_spanner,
    rows_from_decomposition,
    rows_from_grid,
    validate_minor,
    validate_tree_decomposition,
    verify_spanner,
)

C_CARPET = 1 + math.sqrt(2) - 1e-6


def test_greedy_collinear_path_only():
    ps = PointSet(1, [pt(0), pt(1), pt(2)])
    g = build_greedy_spanner(ps, Fraction(1))
    assert g.edges == [(0, 1), (1, 2)]


def test_greedy_unit_square_c2_omits_diagonals():
    ps = PointSet(2, [pt(0, 0), pt(0, 1), pt(1, 0), pt(1, 1)])
    g = build_greedy_spanner(ps, Fraction(2))
    assert len(g.edges) == 4
    for u, v in g.edges:
        assert g.edge_sq_length(u, v) == 1


def test_greedy_crossbar_c_three_halves():
    f2 = gen_f(CrossbarParams(3, 1, 2, 2))
    g = build_greedy_spanner(f2, Fraction(3, 2))
    assert g.is_connected()
    rep = verify_spanner(g, Fraction(3, 2))
    assert rep.ok


def test_verify_path_graph_stretch_one():
    ps = PointSet(1, [pt(0), pt(1), pt(2), pt(3)])
    g = SpannerGraph(ps, [(0, 1), (1, 2), (2, 3)])
    rep = verify_spanner(g)
    assert abs(rep.max_stretch - 1.0) < 1e-12


def test_verify_square_cycle_stretch_sqrt2():
    ps = PointSet(2, [pt(0, 0), pt(0, 1), pt(1, 0), pt(1, 1)])
    g = SpannerGraph(ps, [(0, 1), (0, 2), (1, 3), (2, 3)])
    rep = verify_spanner(g)
    assert abs(rep.max_stretch - math.sqrt(2)) < 1e-9


def test_verify_disconnected_reports_infinite():
    ps = PointSet(1, [pt(0), pt(1), pt(5)])
    g = SpannerGraph(ps, [(0, 1)])
    rep = verify_spanner(g)
    assert not rep.connected and rep.max_stretch == math.inf


def test_carpet_spanner_structure_k1():
    g = build_carpet_spanner(1)
    labels = g.points.labels
    boxes = [i for i, lab in enumerate(labels) if lab == "box"]
    assert len(boxes) == 8
    for b in boxes:
        assert len(g.neighbors(b)) == 2  # one diagonal pair
    rep = verify_spanner(g, C_CARPET)
    assert rep.ok


def test_carpet_spanner_stretch_k2():
    rep = verify_spanner(build_carpet_spanner(2), C_CARPET)
    assert rep.ok
    assert rep.max_stretch < 1 + math.sqrt(2)


def test_minor_grid9():
    g9 = gen_integer_grid(9, 2)
    G = build_greedy_spanner(g9, Fraction(1))
    cert = extract_grid_minor(G, rows_from_grid(9, 2), 1)
    assert cert.side >= 4
    ok, why = validate_minor(G, cert)
    assert ok, why


def test_minor_crossbar_k2_k3():
    for k, need in [(2, 2), (3, 4)]:
        params = CrossbarParams(3, 1, 2, k)
        f = gen_f(params)
        G = build_greedy_spanner(f, Fraction(1), verify=False)
        cert = extract_grid_minor(G, rows_from_decomposition(decompose_crossbar(f, params)), 1)
        assert cert.side >= need
        assert validate_minor(G, cert)[0]


def test_minor_single_row_degenerate():
    ps = PointSet(2, [pt(x, 0) for x in range(5)])
    G = build_greedy_spanner(ps, Fraction(1))
    from cantor_forge.spanners import RowStructure

    rows = RowStructure(dim=2, offsets=[[Fraction(x) for x in range(5)], [Fraction(0)]], row_len=5)
    cert = extract_grid_minor(G, rows, 1)
    assert cert.side == 1
    assert validate_minor(G, cert)[0]


def test_minor_constructed_negatives():
    g9 = gen_integer_grid(3, 2)
    G = build_greedy_spanner(g9, Fraction(1))
    cert = extract_grid_minor(G, rows_from_grid(3, 2), 1)
    assert validate_minor(G, cert)[0]

    # two cells sharing a vertex -> disjointness
    bad = GridMinorCertificate(
        cert.dim, cert.sides, {k: list(v) for k, v in cert.branch_sets.items()}, dict(cert.paths)
    )
    cells = list(bad.branch_sets)
    bad.branch_sets[cells[1]] = list(bad.branch_sets[cells[0]])
    ok, why = validate_minor(G, bad)
    assert not ok and "disjointness" in why

    # missing adjacency path -> adjacency
    bad2 = GridMinorCertificate(
        cert.dim, cert.sides, dict(cert.branch_sets), dict(cert.paths)
    )
    key = next(iter(bad2.paths))
    del bad2.paths[key]
    ok, why = validate_minor(G, bad2)
    assert not ok and "adjacency" in why


def test_minor_roundtrip_json():
    g9 = gen_integer_grid(5, 2)
    G = build_greedy_spanner(g9, Fraction(1))
    cert = extract_grid_minor(G, rows_from_grid(5, 2), 1)
    back = GridMinorCertificate.from_dict(cert.to_dict())
    assert back.branch_sets == cert.branch_sets
    assert back.paths == cert.paths
    assert validate_minor(G, back)[0]


def test_treedec_trivial_and_path():
    ps = PointSet(1, [pt(i) for i in range(4)])
    g = SpannerGraph(ps, [(0, 1), (1, 2), (2, 3)])
    trivial = TreeDecomposition([-1], [set(range(4))])
    ok, _ = validate_tree_decomposition(g, trivial)
    assert ok and trivial.width == 3
    sliding = TreeDecomposition([-1, 0, 1], [{0, 1}, {1, 2}, {2, 3}])
    ok, _ = validate_tree_decomposition(g, sliding)
    assert ok and sliding.width == 1


def test_treedec_negatives():
    ps = PointSet(1, [pt(i) for i in range(4)])
    g = SpannerGraph(ps, [(0, 1), (1, 2), (2, 3)])
    # vertex 1 appears in bags 0 and 2 but not the middle: connectivity
    broken = TreeDecomposition([-1, 0, 1], [{0, 1}, {2}, {1, 2, 3}])
    ok, why = validate_tree_decomposition(g, broken)
    assert not ok and "connectivity" in why
    # missing vertex: coverage
    missing = TreeDecomposition([-1, 0], [{0, 1}, {1, 2}])
    ok, why = validate_tree_decomposition(g, missing)
    assert not ok and "coverage" in why
    # edge not inside any bag
    no_edge = TreeDecomposition([-1, 0], [{0, 1, 3}, {1, 2}])
    ok, why = validate_tree_decomposition(g, no_edge)
    assert not ok and "edge" in why


def test_carpet_treedec_valid_and_small():
    for k in (1, 2):
        G = build_carpet_spanner(k)
        td = build_carpet_tree_decomposition(G)
        ok, why = validate_tree_decomposition(G, td)
        assert ok, why
        assert td.width + 1 <= 8 * 2**k


def test_carpet_treedec_rejects_other_graphs():
    g9 = gen_integer_grid(4, 2)
    G = build_greedy_spanner(g9, Fraction(1))
    with pytest.raises(SpannerError):
        build_carpet_tree_decomposition(G)


def test_carpet_sandwich_k2():
    G = build_carpet_spanner(2)
    td = build_carpet_tree_decomposition(G)
    cert = extract_grid_minor(G, rows_from_carpet_spanner(G), C_CARPET)
    assert validate_minor(G, cert)[0]
    assert cert.side <= td.width + 1


def test_graph_json_roundtrip():
    ps = PointSet(2, [pt(0, 0), pt(0, 1), pt(1, 0), pt(1, 1)])
    g = build_greedy_spanner(ps, Fraction(2))
    doc = graph_to_dict(g.points, g.edges)
    pts2, edges2 = graph_from_dict(doc)
    g2 = SpannerGraph(pts2, edges2)
    assert g2.points == g.points and g2.edges == g.edges
    # squared lengths recomputed, never trusted
    assert g2.edge_sq_length(*g2.edges[0]) == g.edge_sq_length(*g.edges[0])

import math

import numpy as np
import pytest
import shapely

from owplan import DomainError, Region, build_pv_graph, clique_visibility, hyper_triangulate, triangulate
from owplan.partition import Partition, Triangle
from owplan.pvgraph import PVGraph, overlap_matrix, plan_radius, visibility_area_polygon
from layouts import make


def test_small_triangle_in_big_convex_room_sees_everything():
    L = make("square4")
    p = Triangle((1.9, 1.9), (2.1, 1.9), (2.0, 2.1), 0)
    v = visibility_area_polygon(p, L, 10.0)
    assert abs(v.area - 16.0) <= 1e-6


def test_circumcentre_witness_in_equilateral_triangle():
    L = make("square4")
    r = 1.0
    s = math.sqrt(3) * r * 0.999
    p = Triangle((1, 1), (1 + s, 1), (1 + s / 2, 1 + s * math.sqrt(3) / 2), 0)
    v = visibility_area_polygon(p, L, r)
    # inscribed k-gon shrinks the range by cos(pi/k); the exact disk would still meet at the circumcentre
    o = np.mean(np.array(p.corners), axis=0)
    assert all(math.dist(o, c) <= r for c in p.corners)
    assert v.is_empty or v.contains(o, tol=1e-6)


def test_small_triangle_inside_own_visibility_area():
    L = make("lshape")
    part = hyper_triangulate(L, 0.5)
    for t in part.triangles:
        v = visibility_area_polygon(t, L, 0.5 / math.cos(math.pi / 64))
        tri = shapely.Polygon(t.corners)
        assert tri.difference(v.geom).area <= 1e-9


def test_complete_graph_for_convex_room():
    L = make("square4")
    part = hyper_triangulate(L, 2.0)
    g = build_pv_graph(part, L, 100.0)
    M = len(g)
    assert g.adj.sum() == M * (M - 1)
    assert not g.adj.diagonal().any()


def test_separated_rooms_have_no_cross_edges():
    L = make("straight")
    r = 1.5
    part = hyper_triangulate(L, r)
    g = build_pv_graph(part, L, r)
    cx = np.array([np.mean(part.points[t][:, 0]) for t in part.tris])
    left, right = np.nonzero(cx < 4)[0], np.nonzero(cx > 14)[0]
    assert not g.adj[np.ix_(left, right)].any()
    # oracle: direct pairwise intersections
    for i in left[:10]:
        for j in right[:10]:
            assert g.vis[i].intersect(g.vis[j]).area <= 1e-6


def test_adjacency_matches_pairwise_intersections():
    L = make("s_corridor")
    part = hyper_triangulate(L, 1.0)
    g = build_pv_graph(part, L, 1.0)
    assert np.array_equal(g.adj, g.adj.T)
    n = len(g)
    rng = np.random.default_rng(3)
    for _ in range(400):
        i, j = rng.integers(0, n, 2)
        if i == j:
            continue
        assert g.adj[i, j] == (g.vis[i].intersect(g.vis[j]).area > g.cfg.eps_area)


def test_overlap_matrix_deep_grid_agrees_with_brute_force():
    rng = np.random.default_rng(0)
    regs = []
    for _ in range(60):
        x, y = rng.uniform(0, 10, 2)
        regs.append(Region(shapely.Point(x, y).buffer(rng.uniform(0.2, 1.5), 16)))
    A = overlap_matrix(regs, 1e-6)
    for i in range(len(regs)):
        for j in range(len(regs)):
            if i != j:
                assert A[i, j] == (regs[i].intersect(regs[j]).area > 1e-6)


def test_plan_radius_is_inscribed_margin():
    assert plan_radius(1.0) == pytest.approx(math.cos(math.pi / 64))


def _synthetic(regions, adj):
    part = Partition(np.zeros((0, 2)), np.zeros((0, 3), dtype=int))
    return PVGraph(part, make("square4"), 1.0, regions, np.asarray(adj, dtype=bool))


def test_singleton_clique_visibility():
    L = make("lshape")
    g = build_pv_graph(hyper_triangulate(L, 1.0), L, 1.0)
    assert clique_visibility({0}, g) == g.vis[0]


def test_helly_violating_triple_is_empty():
    # three thin strips forming a triangle: pairwise overlaps, no common point
    a = Region(shapely.LineString([(0, 0), (4, 0)]).buffer(0.1, cap_style="flat"))
    b = Region(shapely.LineString([(0, -0.5), (2, 3.5)]).buffer(0.1, cap_style="flat"))
    c = Region(shapely.LineString([(4, -0.5), (2, 3.5)]).buffer(0.1, cap_style="flat"))
    g = _synthetic([a, b, c], [[0, 1, 1], [1, 0, 1], [1, 1, 0]])
    for i, j in [(0, 1), (0, 2), (1, 2)]:
        assert g.vis[i].intersect(g.vis[j]).area > 1e-6
    assert clique_visibility({0, 1, 2}, g).is_empty


def test_clique_visibility_rejects_bad_ids():
    g = _synthetic([Region.from_coords([(0, 0), (1, 0), (0, 1)])], [[0]])
    with pytest.raises(DomainError):
        clique_visibility(set(), g)
    with pytest.raises(DomainError):
        clique_visibility({5}, g)


def test_adjacency_text():
    g = _synthetic([Region.from_coords([(0, 0), (1, 0), (0, 1)])] * 2, [[0, 1], [1, 0]])
    assert g.to_adjacency_text() == "0 1\n1 0\n"


def test_base_triangulation_graph_on_two_rooms():
    L = make("two_rooms")
    g = build_pv_graph(triangulate(L), L, 50.0)
    assert len(g) == len(L) - 2
    assert not g.empty_nodes

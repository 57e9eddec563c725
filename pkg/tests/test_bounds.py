import networkx as nx
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from owplan import (ConnectivityCertificate, DomainError, build_pv_graph, find_hidden_points, hyper_triangulate,
                    lower_bound, max_independent_set, verify_connectivity_certificate, verify_hidden_set)
from owplan.bounds import _check_once, greedy_hidden_points
from owplan.geometry import GeomConfig, default_sample_pitch
from owplan.partition import Partition
from layouts import make


def _is_independent(adj, ids):
    return all(not adj[i, j] for i in ids for j in ids if i != j)


def test_mis_complete_graph():
    adj = np.ones((7, 7), dtype=bool)
    np.fill_diagonal(adj, False)
    s = max_independent_set(adj)
    assert len(s) == 1 and s.exact


def test_mis_edgeless_graph():
    s = max_independent_set(np.zeros((9, 9), dtype=bool))
    assert s.ids == tuple(range(9))


@settings(max_examples=60)
@given(st.integers(1, 28), st.floats(0.05, 0.9), st.integers(0, 2**31 - 1))
def test_mis_matches_networkx(n, p, seed):
    G = nx.gnp_random_graph(n, p, seed=seed)
    adj = nx.to_numpy_array(G, nodelist=range(n)).astype(bool)
    s = max_independent_set(adj)
    assert _is_independent(adj, s.ids)
    best, _ = nx.max_weight_clique(nx.complement(G), weight=None)
    assert len(s) == len(best)


def test_mis_greedy_above_budget():
    G = nx.gnp_random_graph(40, 0.3, seed=1)
    adj = nx.to_numpy_array(G, nodelist=range(40)).astype(bool)
    s = max_independent_set(adj, budget=10)
    assert not s.exact and _is_independent(adj, s.ids) and len(s) >= 1


def test_hidden_set_examples(square4):
    assert verify_hidden_set([(1, 1)], square4, 1.0)
    assert not verify_hidden_set([(2, 2), (2.1, 2)], square4, 1.0)
    corners = [(0.05, 0.05), (3.95, 0.05), (3.95, 3.95), (0.05, 3.95)]
    assert verify_hidden_set(corners, square4, 1.0)


def test_hidden_set_rejects_outside_point(square4):
    with pytest.raises(DomainError):
        verify_hidden_set([(5, 5)], square4, 1.0)


def test_rooms_behind_a_wall_centroids_succeed():
    L = make("two_rooms")
    pts = np.array([[0, 3], [1, 3], [0, 4], [9, 3], [10, 3], [10, 4]], float)
    part = Partition(pts, np.array([[0, 1, 2], [3, 4, 5]]))
    cert = find_hidden_points([0, 1], part, L, 1.0)
    assert cert is not None
    assert cert.points[0] == part.triangle(0).centroid and cert.points[1] == part.triangle(1).centroid


def test_corridor_needs_deeper_candidates():
    L = make("straight")
    pts = np.array([[5, 1.5], [9, 1.5], [5, 2.5], [12, 1.5], [12, 2.5], [8, 2.5]], float)
    part = Partition(pts, np.array([[0, 1, 2], [3, 4, 5]]))
    r = 2.3
    cents = [part.triangle(0).centroid, part.triangle(1).centroid]
    assert not verify_hidden_set(cents, L, r)
    cert = find_hidden_points([0, 1], part, L, r)
    assert cert is not None and cert.points != tuple(cents)
    assert verify_hidden_set(cert.points, L, r)


def test_greedy_hidden_points_always_verifies():
    L = make("s_corridor")
    part = hyper_triangulate(L, 1.0)
    cert = greedy_hidden_points(range(len(part)), part, L, 1.0)
    assert cert.s >= 1 and verify_hidden_set(cert.points, L, 1.0)


def test_lower_bound_square_r1(square4):
    b = lower_bound(square4, 1.0)
    assert b.lower_bound >= 4
    assert verify_hidden_set(b.certificate.points, square4, 1.0)


def test_lower_bound_convex_large_r(square4):
    assert lower_bound(square4, 100.0).lower_bound == 1


def test_lower_bound_comb(comb6):
    b = lower_bound(comb6, 1000.0)
    assert b.lower_bound == 6 and b.exact


def test_lower_bound_json():
    b = lower_bound(make("lshape"), 0.8).to_json()
    assert set(b) >= {"t_max", "exact", "certified_lower_bound", "certificate"}
    assert b["certified_lower_bound"] <= b["t_max"]


def test_certificate_all_zero_b_is_hidden_set(square4):
    pts = ((0.05, 0.05), (3.95, 3.95))
    chk = verify_connectivity_certificate(ConnectivityCertificate(pts, (0, 0)), square4, 1.0)
    assert chk.accepted and chk.bound == 2
    chk = verify_connectivity_certificate(ConnectivityCertificate(((1.9, 2), (2.1, 2)), (0, 0)), square4, 1.0)
    assert not chk.accepted


def test_dumbbell_certificate(dumbbell):
    chk = verify_connectivity_certificate(ConnectivityCertificate(((2.0, 2.0),), (2,)), dumbbell, 2.0)
    assert chk.accepted and chk.bound == 3 and chk.witness is not None


def test_straight_corridor_certificate_rejected():
    L = make("straight")
    chk = verify_connectivity_certificate(ConnectivityCertificate(((2.0, 2.0),), (2,)), L, 2.0)
    assert not chk.accepted


def test_certificate_validation():
    with pytest.raises(DomainError):
        ConnectivityCertificate(((0, 0),), (-1,))
    with pytest.raises(DomainError):
        ConnectivityCertificate(((0, 0), (1, 1)), (1,))


def test_checker_never_accepts_what_a_finer_run_rejects(dumbbell):
    r = 2.0
    pitch = default_sample_pitch(dumbbell, r)
    fine = GeomConfig(max_samples=4000)
    for b in range(7):
        cert = ConnectivityCertificate(((2.0, 2.0),), (b,))
        if verify_connectivity_certificate(cert, dumbbell, r).accepted:
            assert _check_once(cert, dumbbell, r, fine, pitch / 4).accepted, b


def test_pv_graph_for_bounds_uses_exact_range():
    L = make("lshape")
    g = build_pv_graph(hyper_triangulate(L, 0.8), L, 0.8, margin=False)
    assert g.r_plan == 0.8

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from mgconsensus import reference_data as ref
from mgconsensus.errors import MalformedGraphError
from mgconsensus.graph import (
    CommLink, CommNetwork, ElectricalNetwork, Line, check_connectivity, comm_from_electrical, comm_laplacian,
    electrical_laplacian, incidence_matrix, laplacian,
)
from mgconsensus.randomgraphs import random_electrical
from oracles import brute_laplacian


def test_incidence_two_nodes():
    net = ElectricalNetwork((1, 2), [Line(1, 2, 0.1)])
    np.testing.assert_array_equal(incidence_matrix(net), [[1.0], [-1.0]])


def test_incidence_reproduces_published_b1():
    net = ElectricalNetwork(range(1, 10), [Line(a, b, 1.0) for a, b in ref.COUNTEREXAMPLE_EDGES_G1])
    np.testing.assert_array_equal(incidence_matrix(net), ref.COUNTEREXAMPLE_B1)
    net2 = ElectricalNetwork(range(1, 10), [Line(a, b, 1.0) for a, b in ref.COUNTEREXAMPLE_EDGES_G2])
    np.testing.assert_array_equal(incidence_matrix(net2), ref.COUNTEREXAMPLE_B2)


def test_incidence_path_zero_column_sums():
    net = ElectricalNetwork((1, 2, 3), [Line(1, 2, 0.1), Line(2, 3, 0.2)])
    B = incidence_matrix(net)
    assert B.shape == (3, 2)
    np.testing.assert_array_equal(B.sum(axis=0), 0.0)


@pytest.mark.parametrize("lines", [
    [Line(1, 2, 0.1), Line(2, 1, 0.2)],
    [Line(1, 1, 0.1)],
    [Line(1, 2, 0.0)],
    [Line(1, 2, -0.3)],
    [Line(1, 5, 0.1)],
])
def test_malformed_networks(lines):
    with pytest.raises(MalformedGraphError):
        ElectricalNetwork((1, 2, 3), lines)


def test_duplicate_node_ids():
    with pytest.raises(MalformedGraphError):
        ElectricalNetwork((1, 1), [])


def test_laplacian_two_nodes():
    np.testing.assert_allclose(laplacian([[1.0], [-1.0]], [0.5]), [[0.5, -0.5], [-0.5, 0.5]])


def test_laplacian_accepts_diagonal_weight_matrix():
    B = ref.COUNTEREXAMPLE_B1
    np.testing.assert_allclose(laplacian(B, np.diag(ref.COUNTEREXAMPLE_W1)), laplacian(B, ref.COUNTEREXAMPLE_W1))


def test_laplacian_matches_published_matrix():
    L = laplacian(ref.COUNTEREXAMPLE_B1, ref.COUNTEREXAMPLE_W1)
    assert L[4, 4] == pytest.approx(1.9631, abs=1e-12)
    # printed weights are rounded to 4 decimals, so sums can be off in the last digit
    np.testing.assert_allclose(L, ref.COUNTEREXAMPLE_L, atol=2e-4)
    M = laplacian(ref.COUNTEREXAMPLE_B2, ref.COUNTEREXAMPLE_W2)
    np.testing.assert_allclose(M, ref.COUNTEREXAMPLE_M, atol=2e-4)


def test_laplacian_orientation_independent():
    a = ElectricalNetwork((1, 2, 3), [Line(1, 2, 0.1), Line(2, 3, 0.2)])
    b = ElectricalNetwork((1, 2, 3), [Line(2, 1, 0.1), Line(2, 3, 0.2)])
    np.testing.assert_array_equal(electrical_laplacian(a), electrical_laplacian(b))


def test_laplacian_dimension_mismatch():
    with pytest.raises(ValueError):
        laplacian(np.ones((3, 2)), [1.0, 2.0, 3.0])


def test_laplacian_matches_brute_force(rng):
    net = random_electrical(rng, 8)
    pos = {v: k for k, v in enumerate(net.node_ids)}
    expected = brute_laplacian(8, [(pos[ln.source], pos[ln.target], ln.conductance) for ln in net.lines])
    np.testing.assert_allclose(electrical_laplacian(net), expected, atol=1e-12)


def test_connectivity_single_node_passes():
    v = check_connectivity(ElectricalNetwork((1,), []), CommNetwork((1,), []))
    assert v.ok


def test_connectivity_two_components_fails():
    el = ElectricalNetwork((1, 2, 3, 4), [Line(1, 2, 0.1), Line(3, 4, 0.1)])
    v = check_connectivity(el, comm_from_electrical(el, 1.0))
    assert not v.electrical and not v.communication and not v.ok


def test_connectivity_stage2_topology():
    ids = (1, 2, 3, 4, 5, 6)
    lines = [ln for ln in ref.LINES_7DGU if 7 not in (ln.source, ln.target)]
    el = ElectricalNetwork(ids, lines)
    assert check_connectivity(el, comm_from_electrical(el, 1.0)).ok


def test_comm_from_electrical_coefficients():
    el = ElectricalNetwork((1, 2), [Line(1, 2, 0.05)])
    assert comm_from_electrical(el, 1.0).coefficient(1, 2) == pytest.approx(20.0)
    assert comm_from_electrical(el, 2.0).coefficient(2, 1) == pytest.approx(40.0)


def test_comm_from_electrical_full_table():
    el = ElectricalNetwork(range(1, 8), ref.LINES_7DGU)
    np.testing.assert_allclose(comm_laplacian(comm_from_electrical(el, 1.0)), electrical_laplacian(el), rtol=1e-14)


def test_comm_network_rejects_bad_gain_and_coefficients():
    with pytest.raises(MalformedGraphError):
        CommNetwork((1, 2), [CommLink(1, 2, 1.0)], k_i=0.0)
    with pytest.raises(MalformedGraphError):
        CommNetwork((1, 2), [CommLink(1, 2, -1.0)])


def test_comm_laplacian_includes_gain():
    c = CommNetwork((1, 2), [CommLink(1, 2, 3.0)], k_i=2.0)
    np.testing.assert_allclose(comm_laplacian(c), [[6.0, -6.0], [-6.0, 6.0]])


@settings(max_examples=60, deadline=None)
@given(n=st.integers(2, 12), seed=st.integers(0, 2**32 - 1))
def test_laplacian_properties(n, seed):
    rng = np.random.default_rng(seed)
    A = electrical_laplacian(random_electrical(rng, n))
    ones = np.ones(n)
    scale = np.abs(A).sum(axis=1).max()
    np.testing.assert_array_equal(A, A.T)
    assert np.abs(A @ ones).max() <= 1e-12 * scale
    off = A[~np.eye(n, dtype=bool)]
    assert np.all(off <= 0)
    w = np.linalg.eigvalsh(A)
    assert w.min() >= -1e-10 * scale
    assert np.sum(np.abs(w) <= 1e-9 * scale) == 1
    # invertible on zero-mean vectors: unique zero-mean solution
    b = rng.normal(size=n)
    b -= b.mean()
    x, *_ = np.linalg.lstsq(A, b, rcond=None)
    x -= x.mean()
    np.testing.assert_allclose(A @ x, b, atol=1e-9 * max(1.0, scale))

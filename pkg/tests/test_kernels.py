"""Cross-checks of the compiled kernels against the numpy fallback."""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from cutforge import _fallback, kernels
from cutforge.features import normalized_laplacian
from cutforge.graph import gnp_graph

from conftest import graphs

BACKENDS = kernels.available_backends()
native = pytest.mark.skipif("native" not in BACKENDS, reason="compiled extension not built")


def _terms_input(g, gamma):
    W = g.weights
    eu, ev, _ = g.edge_arrays
    return np.cos(gamma * W), np.sin(gamma * W), eu, ev


def test_backend_flag():
    assert kernels.BACKEND in BACKENDS


@native
@settings(max_examples=100, deadline=None)
@given(graphs(min_nodes=2, max_nodes=10, weights=st.floats(-2, 2, allow_nan=False)), st.floats(-np.pi, np.pi))
def test_edge_terms_bit_identical(g, gamma):
    args = _terms_input(g, gamma)
    a_nat, b_nat = BACKENDS["native"].edge_terms(*args)
    a_py, b_py = _fallback.edge_terms(*args)
    assert np.array_equal(a_nat, a_py) and np.array_equal(b_nat, b_py)


@native
@settings(max_examples=60, deadline=None)
@given(graphs(min_nodes=2, max_nodes=12, weights=st.integers(-4, 4).map(float)))
def test_brute_force_identical(g):
    eu, ev, w = g.edge_arrays
    assert BACKENDS["native"].brute_force_maxcut(g.n, eu, ev, w) == _fallback.brute_force_maxcut(g.n, eu, ev, w)


@pytest.mark.parametrize("name", sorted(BACKENDS))
def test_jacobi_matches_lapack(name):
    rng = np.random.default_rng(3)
    for n in (1, 2, 5, 17, 40):
        A = rng.normal(size=(n, n))
        A = A + A.T
        got = BACKENDS[name].jacobi_eigenvalues(A)
        assert np.all(np.diff(got) >= 0)
        assert np.max(np.abs(got - np.linalg.eigvalsh(A))) <= 1e-9 * max(1.0, np.abs(A).max())


@native
def test_jacobi_backends_agree_on_laplacians():
    rng = np.random.default_rng(8)
    for _ in range(10):
        L = normalized_laplacian(gnp_graph(30, 0.3, rng))
        nat = BACKENDS["native"].jacobi_eigenvalues(L)
        py = _fallback.jacobi_eigenvalues(L)
        assert np.max(np.abs(nat - py)) <= 1e-12

import numpy as np
import pytest
from hypothesis import given, strategies as st

from qstree import kernels
from qstree.generators import random_trivalent

BACKENDS = kernels.backends()
needs_both = pytest.mark.skipif(len(BACKENDS) < 2, reason="compiled kernels not built")


def _csr(size, seed):
    return random_trivalent(size, seed).csr


@needs_both
@given(st.integers(0, 30), st.integers(0, 10_000))
def test_backends_agree_on_tree_kernels(size, seed):
    tree = random_trivalent(size, seed)
    indptr, nbr, edge_of, weight, _, eu, ev = tree.csr
    py, cy = BACKENDS["python"], BACKENDS["cython"]
    assert np.array_equal(py.tree_distances(indptr, nbr, weight, 0), cy.tree_distances(indptr, nbr, weight, 0))
    src = np.arange(len(tree))
    assert np.array_equal(py.tree_distance_matrix(indptr, nbr, weight, src),
                          cy.tree_distance_matrix(indptr, nbr, weight, src))
    assert np.array_equal(py.branch_diameters(indptr, nbr, weight), cy.branch_diameters(indptr, nbr, weight))
    rng = np.random.default_rng(seed)
    mask = (rng.random(len(tree)) < 0.3).astype(np.uint8)
    assert np.array_equal(py.cut_components(indptr, nbr, edge_of, eu, ev, mask),
                          cy.cut_components(indptr, nbr, edge_of, eu, ev, mask))
    vals = rng.integers(-1, 50, len(tree)).astype(np.int64)
    a = py.path_max_sweep(indptr, nbr, weight, vals, 0)
    b = cy.path_max_sweep(indptr, nbr, weight, vals, 0)
    assert all(np.array_equal(x, y) for x, y in zip(a, b))


@needs_both
@given(st.integers(1, 12), st.integers(0, 10_000), st.booleans())
def test_backends_agree_on_ratio_search(n, seed, maximize):
    rng = np.random.default_rng(seed)
    num = rng.integers(0, 1000, (n, n)).astype(np.int64)
    den = rng.integers(0, 5, (n, n)).astype(np.int64)
    assert tuple(BACKENDS["python"].ratio_argext(num, den, maximize)) == \
        tuple(BACKENDS["cython"].ratio_argext(num, den, maximize))


def test_safe_ratio_routes_large_entries():
    num = np.array([[0, 1 << 40], [3, 0]], dtype=object)
    den = np.array([[0, 1 << 41], [1, 0]], dtype=object)
    i, j = kernels.safe_ratio_argext(num, den, maximize=False)
    assert (i, j) == (0, 1)


def test_distance_matrix_against_pairwise_sweeps():
    indptr, nbr, _, weight, _, _, _ = _csr(12, 4)
    n = len(indptr) - 1
    mat = kernels.tree_distance_matrix(indptr, nbr, weight, np.arange(n))
    assert np.array_equal(mat, mat.T)
    for s in range(n):
        assert np.array_equal(mat[s], kernels.tree_distances(indptr, nbr, weight, s))

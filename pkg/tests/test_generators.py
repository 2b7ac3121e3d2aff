from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from qstree.errors import BudgetExceeded, DegenerateTree, NotAnExcursion
from qstree.generators import (ExcursionSample, brownian_excursion, crt_quotient, excursion_distance, grid_classes,
                               make_model, perturbed, random_trivalent)

from conftest import bfs_distances, jn


def tent(m):
    return ExcursionSample(m, tuple(2 * min(j, m - j) / m for j in range(m + 1)))


def test_make_model_kinds():
    t = make_model("jn", n=1)
    assert len(t.branch_points) == 1 and t.diameter == 2
    assert make_model("random_trivalent", size=5, seed=1).is_trivalent
    with pytest.raises(ValueError):
        make_model("nope")
    with pytest.raises(BudgetExceeded):
        random_trivalent(10 ** 6)


def test_degenerate_perturbation_is_identity():
    base = jn(4)
    same = perturbed(4, (1, 1), seed=3)
    assert [e.length for e in same.edges] == [e.length for e in base.edges]
    assert same.positions == base.positions


@given(st.integers(0, 6), st.integers(0, 1000))
def test_perturbed_keeps_structure(n, seed):
    base = jn(n)
    t = perturbed(n, (1, 2), seed=seed)
    assert [(e.u, e.v) for e in t.edges] == [(e.u, e.v) for e in base.edges]
    assert all(1 <= e.length / b.length <= 2 for e, b in zip(t.edges, base.edges))
    assert t.is_trivalent or n == 0


@given(st.integers(0, 60), st.integers(0, 10_000))
def test_random_trivalent_counts(size, seed):
    t = random_trivalent(size, seed)
    assert len(t.branch_points) == size
    assert all(t.degree(v) in (1, 3) for v in t.ids)
    assert len(t.leaves) == size + 2


def test_tent_excursion():
    ex = tent(8)
    assert excursion_distance(ex.values, 0, 4) == 1
    tree = crt_quotient(ex)
    assert tree.diameter == 1
    assert len(tree) == 2


def test_zero_excursion_is_degenerate():
    with pytest.raises(DegenerateTree):
        crt_quotient(ExcursionSample(4, (0.0,) * 5))
    with pytest.raises(NotAnExcursion):
        crt_quotient(ExcursionSample(2, (0.0, -1.0, 0.0)))
    with pytest.raises(NotAnExcursion):
        crt_quotient(ExcursionSample(2, (0.5, 1.0, 0.0)))


@given(st.integers(0, 1000))
def test_brownian_excursion_invariants(seed):
    ex = brownian_excursion(64, seed)
    ex.validate()
    assert ex.values[0] == ex.values[-1] == 0 and min(ex.values) >= 0
    assert brownian_excursion(64, seed) == ex


def test_excursion_csv_roundtrip():
    ex = brownian_excursion(32, 7)
    assert ExcursionSample.from_csv(ex.to_csv(), seed=7) == ex


@given(st.integers(0, 300))
def test_excursion_distance_is_a_pseudometric(seed):
    vals = brownian_excursion(16, seed).values
    n = len(vals)
    d = [[excursion_distance(vals, s, t) for t in range(n)] for s in range(n)]
    for s in range(n):
        assert d[s][s] == 0
        for t in range(n):
            assert d[s][t] == d[t][s] >= 0
            for r in range(n):
                assert d[s][t] <= d[s][r] + d[r][t]


@settings(max_examples=20)
@given(st.integers(0, 300), st.booleans())
def test_quotient_reproduces_excursion_distance(seed, contract):
    ex = brownian_excursion(64, seed)
    tree = crt_quotient(ex, contract=contract)
    cls = grid_classes(ex)
    reps = {int(label): v for v, label in tree.labels.items()}
    grid = [j for j in range(len(ex.values)) if cls[j] in reps]
    for s in grid:
        dist = bfs_distances(tree, reps[cls[s]])
        for t in grid:
            assert dist[reps[cls[t]]] == excursion_distance(ex.values, s, t)


def test_eps_merging_shrinks_tree():
    ex = brownian_excursion(256, 1)
    fine = crt_quotient(ex)
    coarse = crt_quotient(ex, eps=Fraction(1, 16))
    assert len(coarse) < len(fine)

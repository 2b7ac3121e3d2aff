from fractions import Fraction

import pytest
from hypothesis import given, strategies as st

from qstree.csst import (apply_word, boundary_sides, branch_vertices, build_jn, euclidean_distance,
                         geodesic_distance, in_attractor, level_bound_check, render_svg, tile_contains_point,
                         tile_info, tile_intersection, tiles_intersect, word_vertex_map)
from qstree.errors import BudgetExceeded
from qstree.exact import I_UNIT, MINUS_ONE, ONE, ZERO, DyadicPoint
from qstree.tree_core import decompose

from conftest import bfs_distances, jn

words = st.text(alphabet="123", max_size=7)
HALF = DyadicPoint(1, 0, 1)
MINUS_HALF = DyadicPoint(-1, 0, 1)


def test_first_level_maps():
    assert apply_word("1", ZERO) == MINUS_HALF
    assert apply_word("2", ZERO) == HALF
    assert apply_word("3", ZERO) == DyadicPoint(0, 1, 1)
    assert apply_word("", I_UNIT) == I_UNIT
    assert apply_word("11", ONE) == MINUS_HALF
    assert apply_word("1", ONE) == apply_word("2", MINUS_ONE) == apply_word("3", MINUS_ONE) == ZERO


def test_tile_info_examples():
    root = tile_info("")
    assert root.boundary == () and root.diameter == 2
    t3 = tile_info("3")
    assert t3.boundary == (ZERO,) and t3.diameter == 1
    t13 = tile_info("13")
    assert t13.boundary == (MINUS_HALF,) and t13.diameter == Fraction(1, 2)


def test_branch_vertices_examples():
    (only,) = branch_vertices(1)
    assert only == ("", ZERO, 1)
    two = {p: h for _, p, h in branch_vertices(2)}
    assert two == {ZERO: 1, MINUS_HALF: Fraction(1, 2), HALF: Fraction(1, 2), DyadicPoint(0, 1, 1): Fraction(1, 2)}
    for n in range(1, 7):
        assert len(branch_vertices(n)) == (3 ** n - 1) // 2
    with pytest.raises(BudgetExceeded):
        branch_vertices(20, budget_level=12)


def test_euclidean_examples():
    assert euclidean_distance(MINUS_HALF, HALF) == 1
    assert euclidean_distance(HALF, HALF) == 0
    assert euclidean_distance(ZERO, DyadicPoint(0, 1, 1)) == Fraction(1, 4)


def test_geodesic_examples():
    assert geodesic_distance("", "", -1, 1) == 2
    assert geodesic_distance("", "1") == Fraction(1, 2)
    assert geodesic_distance("1", "2") == 1


def test_level_bound_examples():
    j4 = jn(4)
    wm = word_vertex_map(j4)
    res = level_bound_check([""], decompose(j4, [wm[""]]))
    assert res.passed and sorted(res.words) == ["1", "2", "3"]
    res = level_bound_check([], decompose(j4, []))
    assert res.passed and res.words == [""]
    res = level_bound_check(["", "1"], decompose(j4, [wm[""], wm["1"]]))
    assert res.passed and sorted(res.words) == ["11", "12", "13", "2", "3"]


@given(words)
def test_diameter_is_tip_distance(w):
    assert euclidean_distance(apply_word(w, MINUS_ONE), apply_word(w, ONE)) == tile_info(w).diameter ** 2


@given(words)
def test_children_cover_parent_tips(w):
    assert apply_word(w + "1", MINUS_ONE) == apply_word(w, MINUS_ONE)
    assert apply_word(w + "2", ONE) == apply_word(w, ONE)
    assert apply_word(w + "3", ONE) == apply_word(w, I_UNIT)
    assert in_attractor(apply_word(w, ZERO))


@given(words, words)
def test_intersection_is_symmetric_and_exact(v, w):
    assert tiles_intersect(v, w) == tiles_intersect(w, v)
    p = tile_intersection(v, w)
    if p is not None:
        assert tile_contains_point(v, p) and tile_contains_point(w, p)


@given(words)
def test_boundary_sides_rule(w):
    left, right = boundary_sides(w)
    if w.endswith("3"):
        assert (left, right) == (True, False)
    if not w:
        assert not left and not right


def test_geodesic_against_bfs_on_j4():
    j4 = jn(4)
    wm = word_vertex_map(j4)
    ws = list(wm)
    for v in ws:
        oracle = bfs_distances(j4, wm[v])
        for w in ws:
            assert geodesic_distance(v, w) == oracle[wm[w]]


def test_render_svg_counts():
    assert render_svg(0).count("<polyline") == 2
    assert render_svg(2).count("<polyline") == 2 * 9
    assert build_jn(2).diameter == 2

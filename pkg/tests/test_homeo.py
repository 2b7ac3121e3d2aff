from fractions import Fraction

import pytest
from hypothesis import given, strategies as st

from qstree.csst import apply_word, tiles_intersect
from qstree.errors import DepthExceeded, MarkNotInLeafTile, NotEdgeLike, NotTrivalent, PreconditionNotVerified
from qstree.exact import MINUS_ONE, ONE, ZERO, DyadicPoint
from qstree.generators import perturbed
from qstree.homeo import (MarkedTree, TileHomeomorphism, build_tile_homeo, check_refinement_properties,
                          end_to_end, evaluate, refine_homeo, verify_isomorphism)
from qstree.subdivision import SubdivisionConfig, build_levels, calibrate_delta, verify_decomposition_properties
from qstree.tree_core import GEODESIC, SimplicialMetricTree

from conftest import jn
from marked import check_tile_map, random_marked_tree

QUARTER = Fraction(1, 4)
GRID = [Fraction(1, 2), QUARTER, Fraction(1, 8)]


def tripod():
    return SimplicialMetricTree([0, 1, 2, 3], [(0, 1, 1), (0, 2, 1), (0, 3, 1)], GEODESIC)


def spine():
    """Leaves p=0, q=4 joined through branch points 1, 2, 3, each carrying one extra leg."""
    edges = [(0, 1, 1), (1, 2, 1), (2, 3, 1), (3, 4, 1), (1, 5, 1), (2, 6, 1), (3, 7, 1)]
    return SimplicialMetricTree(range(8), edges, GEODESIC)


@pytest.fixture(scope="module")
def calibrated():
    cal = calibrate_delta(jn(6), 2, GRID)
    return cal, refine_homeo(cal.sequence, 2, cal.report)


def test_tripod_base_case():
    tm = build_tile_homeo(MarkedTree(tripod(), {0}))
    assert sorted(w for _, w in tm.tiles) == ["1", "2", "3"]
    assert tm.vertex_words == {0: ""}
    assert apply_word(tm.vertex_words[0], ZERO) == ZERO


def test_empty_cut():
    tm = build_tile_homeo(MarkedTree(tripod(), set()))
    assert [w for _, w in tm.tiles] == [""]


def test_two_marks_normalize_to_11_and_22():
    tm = build_tile_homeo(MarkedTree(spine(), {1, 2, 3}, {-1: 0, 1: 4}))
    assert tm.guarantee == "iii"
    assert (tm.mark_tiles[0], tm.mark_tiles[4]) == ("11", "22")
    assert apply_word(tm.vertex_words[1], ZERO) == DyadicPoint(-1, 0, 1)
    assert apply_word(tm.vertex_words[3], ZERO) == DyadicPoint(1, 0, 1)
    assert (tm.mark_points[0], tm.mark_points[4]) == (MINUS_ONE, ONE)


def test_single_mark_normalizes():
    for side, word in ((-1, "11"), (1, "22")):
        tm = build_tile_homeo(MarkedTree(spine(), {1, 2}, {side: 0}))
        assert tm.guarantee == "ii" and tm.mark_tiles[0] == word


def test_precondition_errors():
    star = SimplicialMetricTree(range(5), [(0, k, 1) for k in range(1, 5)], GEODESIC)
    with pytest.raises(NotTrivalent):
        build_tile_homeo(MarkedTree(star, set()))
    with pytest.raises(MarkNotInLeafTile):
        build_tile_homeo(MarkedTree(spine(), {1, 3}, {-1: 6}))
    with pytest.raises(MarkNotInLeafTile):
        build_tile_homeo(MarkedTree(spine(), {2}, {-1: 0, 1: 5}))
    # cutting at all three branch points of a claw-shaped core leaves a middle tile with three boundary points
    claw = SimplicialMetricTree(range(10), [(0, 1, 1), (0, 2, 1), (0, 3, 1), (1, 4, 1), (1, 5, 1),
                                            (2, 6, 1), (2, 7, 1), (3, 8, 1), (3, 9, 1)], GEODESIC)
    with pytest.raises(NotEdgeLike):
        build_tile_homeo(MarkedTree(claw, {1, 2, 3}))


@given(st.integers(0, 100_000))
def test_random_marked_trees_meet_tile_map_guarantees(seed):
    marked = random_marked_tree(seed)
    assert check_tile_map(marked, build_tile_homeo(marked)) == []


def test_refined_homeo_passes_all_checks(calibrated):
    cal, homeo = calibrated
    iso = verify_isomorphism(cal.sequence, homeo)
    assert iso.passed, iso.witnesses
    props = check_refinement_properties(cal.sequence, homeo, cal.report.N)
    assert props.passed, props.witnesses
    assert homeo.words[0] == [""]
    assert all(1 <= len(w) <= len(cal.sequence.V[1]) for w in homeo.words[1])


def test_boundary_children_grow_by_two(calibrated):
    cal, homeo = calibrated
    seq = cal.sequence
    for n in range(homeo.depth):
        ref = seq.refinements[n]
        for k, ch in enumerate(ref.children):
            bnd = set(seq.levels[n].tiles[k].boundary)
            for c in ch:
                if bnd & set(seq.levels[n + 1].tiles[c].boundary):
                    assert len(homeo.words[n + 1][c]) == len(homeo.words[n][k]) + 2


def test_level_zero_homeo_is_vacuous():
    seq = build_levels(jn(6), SubdivisionConfig(QUARTER, 2))
    homeo = refine_homeo(seq, 0)
    assert homeo.words == [[""]]
    assert verify_isomorphism(seq, homeo).passed


def test_refine_refuses_failing_sequence():
    seq = build_levels(jn(6), SubdivisionConfig(Fraction(1, 2), 2))
    with pytest.raises(PreconditionNotVerified):
        refine_homeo(seq, 2, verify_decomposition_properties(seq))


def test_swapped_words_break_containment(calibrated):
    cal, homeo = calibrated
    words = [list(ws) for ws in homeo.words]
    a = next(k for k, w in enumerate(words[1]) if w.startswith("1"))
    b = next(k for k, w in enumerate(words[1]) if w.startswith("2"))
    words[1][a], words[1][b] = words[1][b], words[1][a]
    bad = TileHomeomorphism(homeo.seq, words, homeo.vertex_words, homeo.images, homeo.orientation)
    rep = verify_isomorphism(cal.sequence, bad)
    assert not rep.checks["containment"]
    parents = {w["parent"] for w in rep.witnesses["containment"]}
    assert parents <= {a, b} and parents


def test_evaluate(calibrated):
    cal, homeo = calibrated
    seq = cal.sequence
    e0 = evaluate(homeo, seq.tree.ids[0], 0)
    assert e0.point == ZERO and e0.error_bound == 2
    v = sorted(seq.V[1])[0]
    e1, e2 = evaluate(homeo, v, 1), evaluate(homeo, v, 2)
    assert e1.pinned and e2.pinned and e1.point == e2.point == homeo.images[v]
    assert e2.error_bound < e1.error_bound
    with pytest.raises(DepthExceeded):
        evaluate(homeo, v, 3)


def test_disjoint_tiles_have_disjoint_images(calibrated):
    cal, homeo = calibrated
    dec = cal.sequence.levels[2]
    verts = [dec.tile_vertices(t.index) for t in dec.tiles]
    for i in range(len(verts)):
        for j in range(i + 1, len(verts)):
            if not verts[i] & verts[j]:
                assert not tiles_intersect(homeo.words[2][i], homeo.words[2][j])


def test_deterministic():
    cal = calibrate_delta(jn(6), 2, GRID)
    a = refine_homeo(cal.sequence, 2, cal.report)
    cal2 = calibrate_delta(jn(6), 2, GRID)
    b = refine_homeo(cal2.sequence, 2, cal2.report)
    assert a.words == b.words and a.images == b.images


def test_pipeline_on_j8():
    res = end_to_end(jn(8), GRID, 2, budget=2000)
    assert res.ok and res.failing_stage() is None
    assert res.distortion.K >= 1 and res.distortion.K < float("inf")


def test_perturbed_model_has_larger_distortion():
    """Compared at the unperturbed fit's exponent: raw K is not comparable across exponents."""
    base = end_to_end(jn(8), GRID, 2, budget=3000)
    alpha = base.distortion.alpha
    k_base = dict(base.distortion.per_alpha)[alpha]
    for seed in range(4):
        res = end_to_end(perturbed(8, (1, 2), seed=seed), GRID, 2, budget=3000)
        assert res.ok
        assert dict(res.distortion.per_alpha)[alpha] > k_base

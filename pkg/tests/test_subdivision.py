from fractions import Fraction

import pytest
from hypothesis import given, strategies as st

from qstree.errors import NoFeasibleDelta
from qstree.generators import random_trivalent
from qstree.subdivision import (SubdivisionConfig, build_levels, calibrate_delta, parse_grid,
                                verify_decomposition_properties)
from qstree.tree_core import GEODESIC, SimplicialMetricTree

from conftest import jn

HALF, QUARTER, EIGHTH = Fraction(1, 2), Fraction(1, 4), Fraction(1, 8)


def tripod():
    return SimplicialMetricTree([0, 1, 2, 3], [(0, 1, 1), (0, 2, 1), (0, 3, 1)], GEODESIC)


def labels(seq, n):
    return sorted(seq.label(v) for v in seq.V[n])


def test_config_validation():
    with pytest.raises(ValueError):
        SubdivisionConfig(1, 2)
    with pytest.raises(ValueError):
        SubdivisionConfig(HALF, 0)


def test_csst_cut_sets_follow_word_length():
    # the model has diameter 2, so normalized heights are 2^-(len(w)+1)
    seq = build_levels(jn(8), SubdivisionConfig(HALF, 2))
    assert seq.factor == HALF
    assert labels(seq, 1) == [""]
    assert labels(seq, 2) == ["", "1", "2", "3"]
    assert [len(d.tiles) for d in seq.levels] == [1, 3, 9]


def test_segment_has_no_cut_points():
    seg = SimplicialMetricTree([0, 1, 2], [(0, 1, 1), (1, 2, 1)], GEODESIC)
    seq = build_levels(seg, SubdivisionConfig(HALF, 3))
    assert all(not v for v in seq.V)
    assert all(len(d.tiles) == 1 for d in seq.levels)
    assert seq.empty_levels() == [1, 2, 3]


def test_tripod_first_level():
    seq = build_levels(tripod(), SubdivisionConfig(HALF, 1))
    assert seq.V[1] == {0}
    assert len(seq.levels[1].tiles) == 3


def test_half_fails_three_point_rule_with_witness():
    rep = verify_decomposition_properties(build_levels(jn(6), SubdivisionConfig(HALF, 3)))
    assert all(rep.properties[k].passed for k in ("i", "ii", "iii"))
    assert not rep.properties["vii"].passed
    assert {"level": 2, "tile": 1, "boundary": ["1", ""], "arc_cut_points": ["12"]} in rep.properties["vii"].witnesses


def test_eighth_passes_on_j6():
    rep = verify_decomposition_properties(build_levels(jn(6), SubdivisionConfig(EIGHTH, 2)))
    assert rep.ok, rep.failing()
    assert rep.N >= 2


def test_single_branch_point_fails_two_point_rule():
    rep = verify_decomposition_properties(build_levels(tripod(), SubdivisionConfig(HALF, 1)))
    assert not rep.properties["vi"].passed


def test_calibration():
    cal = calibrate_delta(jn(6), 2, [HALF, QUARTER, EIGHTH])
    assert cal.delta == QUARTER
    assert [d for d, _ in cal.trail] == [HALF, QUARTER]
    again = calibrate_delta(jn(6), 2, [HALF, QUARTER, QUARTER, EIGHTH])
    assert again.delta == QUARTER
    with pytest.raises(NoFeasibleDelta) as exc:
        calibrate_delta(tripod(), 1, [HALF, QUARTER])
    assert len(exc.value.trail) == 2
    with pytest.raises(ValueError):
        calibrate_delta(jn(4), 1, [QUARTER, HALF])


def test_parse_grid():
    assert parse_grid("1/2, 1/4,1/8") == [HALF, QUARTER, EIGHTH]


def test_report_json_shape():
    rep = verify_decomposition_properties(build_levels(jn(6), SubdivisionConfig(QUARTER, 2)))
    doc = rep.to_json()
    assert doc["pass"] and doc["delta"] == "1/4" and set(doc["properties"]) == {"i", "ii", "iii", "iv", "v", "vi", "vii"}


deltas = st.sampled_from([HALF, Fraction(1, 3), QUARTER, EIGHTH])


@given(st.integers(1, 30), st.integers(0, 10_000), deltas, st.integers(1, 4))
def test_cut_sets_are_nested_and_refine_exactly(size, seed, delta, n_max):
    seq = build_levels(random_trivalent(size, seed), SubdivisionConfig(delta, n_max))
    for n in range(n_max):
        assert seq.V[n] <= seq.V[n + 1]
        ref = seq.refinements[n]
        for k, ch in enumerate(ref.children):
            assert sum(len(seq.levels[n + 1].tiles[c].edges) for c in ch) == len(seq.levels[n].tiles[k].edges)
    for n in range(1, n_max + 1):
        thr = delta ** n
        assert seq.V[n] == {v for v, h in seq.heights.items() if h >= thr}


@given(st.integers(1, 30), st.integers(0, 10_000), deltas)
def test_tree_tiles_have_at_most_two_boundary_points_when_reported(size, seed, delta):
    seq = build_levels(random_trivalent(size, seed), SubdivisionConfig(delta, 2))
    rep = verify_decomposition_properties(seq)
    worst = max(len(t.boundary) for d in seq.levels for t in d.tiles)
    assert rep.properties["iii"].passed == (worst <= 2)

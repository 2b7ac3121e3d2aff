from fractions import Fraction

import pytest
from hypothesis import given, strategies as st

from qstree.csst import build_jn, vertex_of_point, word_vertex_map, words_up_to
from qstree.errors import LeafInCutSet, NotASuperset
from qstree.exact import I_UNIT, MINUS_ONE, ONE
from qstree.generators import random_trivalent
from qstree.tree_core import (GEODESIC, SimplicialMetricTree, TreePoint, arc, branches_and_height, center,
                              decompose, geometric_constants, refine, separation_constant)

from conftest import bfs_distances, jn


def tripod():
    return SimplicialMetricTree([0, 1, 2, 3], [(0, 1, 1), (0, 2, 1), (0, 3, 1)], GEODESIC)


def segment(length=2):
    return SimplicialMetricTree([0, 1], [(0, 1, length)], GEODESIC)


def edges_with_prefix(tree, prefix):
    return {e for e, (w, _) in enumerate(tree.edge_labels) if w.startswith(prefix)}


def test_tripod_arc_and_degenerate_arc():
    t = tripod()
    a = arc(t, 1, 2)
    assert a.length == 2
    assert TreePoint.at(0) in a.trace
    assert arc(t, 1, 1).length == 0


def test_arc_on_j2():
    j2 = jn(2)
    a = vertex_of_point(j2, MINUS_ONE)
    b = vertex_of_point(j2, I_UNIT)
    assert arc(j2, a, b).length == 2 == bfs_distances(j2, a)[b]


def test_arc_through_edge_interior():
    a = arc(segment(), TreePoint.on_edge(0, Fraction(1, 4)), TreePoint.on_edge(0, Fraction(3, 4)))
    assert a.length == 1


def test_heights():
    assert branches_and_height(tripod(), 0).height == 1
    rec = branches_and_height(segment(), 0)
    assert rec.branch_diameters == (2,) and rec.height is None
    j6 = jn(6)
    wm = word_vertex_map(j6)
    for w in ("12", "33", "21"):
        assert abs(j6.height(wm[w]) - Fraction(1, 4)) <= Fraction(4, 64)


def test_decompose_tripod_and_empty_cut():
    dec = decompose(tripod(), [0])
    assert len(dec.tiles) == 3
    assert all(t.boundary == (0,) for t in dec.tiles)
    whole = decompose(tripod(), [])
    assert len(whole.tiles) == 1 and whole.tiles[0].boundary == ()
    with pytest.raises(LeafInCutSet):
        decompose(tripod(), [1])


def test_decompose_csst_at_minus_half():
    j4 = jn(4)
    wm = word_vertex_map(j4)
    dec = decompose(j4, [wm["1"]])
    got = {frozenset(t.edges) for t in dec.tiles}
    t11, t13 = edges_with_prefix(j4, "11"), edges_with_prefix(j4, "13")
    rest = set(range(len(j4.edges))) - t11 - t13
    assert got == {frozenset(t11), frozenset(t13), frozenset(rest)}


def test_refine_examples():
    t = tripod()
    coarse = decompose(t, [])
    fine, ref = refine(t, coarse, [0])
    assert ref.children == [[0, 1, 2]]
    same, ref2 = refine(t, fine, [0])
    assert ref2.parent == [0, 1, 2]
    with pytest.raises(NotASuperset):
        refine(t, fine, [])

    j4 = jn(4)
    wm = word_vertex_map(j4)
    c = decompose(j4, [wm[""]])
    f, ref = refine(j4, c, [wm[""], wm["1"]])
    by_edges = {frozenset(x.edges): x.index for x in c.tiles}
    t1 = by_edges[frozenset(edges_with_prefix(j4, "1"))]
    kids = {frozenset(f.tiles[k].edges) for k in ref.children[t1]}
    assert kids == {frozenset(edges_with_prefix(j4, "1" + a)) for a in "123"}
    for a in "23":
        k = by_edges[frozenset(edges_with_prefix(j4, a))]
        assert [frozenset(f.tiles[x].edges) for x in ref.children[k]] == [frozenset(c.tiles[k].edges)]


def test_center():
    t = tripod()
    assert center(t, 1, 1, 2).point == TreePoint.at(1)
    c = center(t, 1, 2, 3)
    assert c.point == TreePoint.at(0)
    j4 = jn(4)
    got = center(j4, *(vertex_of_point(j4, p) for p in (MINUS_ONE, ONE, I_UNIT)))
    assert j4.labels[got.point.vertex] == ""


def test_geometric_constants():
    assert geometric_constants(jn(4)).bounded_turning == 1
    gc = geometric_constants(segment())
    assert gc.separation is None and gc.density is None
    j6 = jn(6)
    wm = word_vertex_map(j6)
    value, (p, q) = separation_constant(j6, [wm[w] for w in words_up_to(4)])
    assert value == 1
    assert j6.distance(p, q) == min(j6.height(p), j6.height(q))


@given(st.integers(1, 25), st.integers(0, 10_000))
def test_distances_match_bfs(size, seed):
    tree = random_trivalent(size, seed)
    src = tree.ids[seed % len(tree)]
    oracle = bfs_distances(tree, src)
    assert all(tree.distance(src, v) == d for v, d in oracle.items())


@given(st.integers(1, 25), st.integers(0, 10_000))
def test_decomposition_partitions_edges(size, seed):
    tree = random_trivalent(size, seed)
    bps = list(tree.branch_points)
    cut = bps[: 1 + seed % len(bps)]
    dec = decompose(tree, cut)
    edges = sorted(e for t in dec.tiles for e in t.edges)
    assert edges == list(range(len(tree.edges)))
    assert sum(len(t.boundary) for t in dec.tiles) == 3 * len(cut)
    assert len(dec.tiles) == 1 + 2 * len(cut)


@given(st.integers(2, 25), st.integers(0, 10_000))
def test_center_lies_on_all_three_arcs(size, seed):
    tree = random_trivalent(size, seed)
    leaves = tree.leaves
    x, y, z = (leaves[(seed + k) % len(leaves)] for k in range(3))
    c = center(tree, x, y, z).point.vertex
    for a, b in ((x, y), (y, z), (x, z)):
        if a != b:
            assert tree.distance(a, c) + tree.distance(c, b) == tree.distance(a, b)


@given(st.integers(1, 25), st.integers(0, 10_000))
def test_height_is_third_branch_diameter(size, seed):
    tree = random_trivalent(size, seed)
    for v in tree.branch_points:
        ds = sorted((d for _, d in tree.branch_diameters_of(v)), reverse=True)
        assert tree.height(v) == ds[2]
    assert len(tree.branch_points) == size


def test_build_jn_shape():
    assert len(build_jn(0).edges) == 2
    for n in range(5):
        assert len(jn(n).edges) == 2 * 3 ** n
    assert jn(0).diameter == 2

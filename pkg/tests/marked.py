"""Seeded random marked trees and an independent checker for single-level tile maps."""
from fractions import Fraction

import numpy as np

from qstree.csst import apply_word, tile_contains_point, tiles_intersect
from qstree.exact import MINUS_ONE, ONE, ZERO
from qstree.generators import random_trivalent
from qstree.homeo import MarkedTree
from qstree.tree_core import decompose

MAX_BRANCH_POINTS = 40


def _edge_like(dec):
    return all(len(t.boundary) <= 2 for t in dec.tiles)


def random_marked_tree(seed):
    """A random trivalent tree with a cut set inducing an edge-like decomposition and 0-2 marks.

    Half of the cases cut along the arc between two leaves (marks at its ends
    when present), the other half take a random subset of branch points and
    keep it only if the decomposition is edge-like.
    """
    rng = np.random.default_rng(seed)
    size = int(rng.integers(1, MAX_BRANCH_POINTS + 1))
    tree = random_trivalent(size, int(rng.integers(1 << 30)))
    leaves = list(tree.leaves)
    n_marks = int(rng.integers(0, 3))
    cut = None
    if rng.random() < 0.5:
        subset = [v for v in tree.branch_points if rng.random() < 0.4]
        dec = decompose(tree, subset)
        if _edge_like(dec):
            cut = subset
            leaf_tiles = [t for t in dec.tiles if len(t.boundary) <= 1]
            marks = {}
            used = set()
            for side in (-1, 1)[:n_marks]:
                options = [v for t in leaf_tiles if t.index not in used for v in dec.tile_vertices(t.index)
                           if tree.degree(v) == 1]
                if not options:
                    break
                v = options[int(rng.integers(len(options)))]
                marks[side] = v
                used.update(dec.tiles_at(v))
            if not cut and len(marks) == 2:
                marks = {-1: marks[-1]}
    if cut is None:
        p, q = rng.choice(len(leaves), size=2, replace=False).tolist()
        p, q = leaves[p], leaves[q]
        on = [v for v in tree.vertex_path(p, q)[1:-1]]
        k = int(rng.integers(1, len(on) + 1)) if on else 0
        cut = sorted(rng.choice(on, size=k, replace=False).tolist()) if k else []
        ends = [(-1, p), (1, q)] if rng.random() < 0.5 else [(1, p), (-1, q)]
        marks = dict(ends[:n_marks])
        if not cut and len(marks) == 2:
            marks = dict(ends[:1])
    return MarkedTree(tree, frozenset(cut), marks)


def check_tile_map(marked, tm):
    """Failures of the four tile-map guarantees plus bijectivity and incidence, as a list of strings."""
    tree, cut, marks = marked.tree, marked.cut, marked.marks
    bad = []
    dec = decompose(tree, sorted(cut))
    got = {frozenset(e): w for e, w in tm.tiles}
    want = {frozenset(t.edges) for t in dec.tiles}
    if set(got) != want:
        bad.append("tiles differ from the decomposition")
        return bad
    words = list(got.values())
    if len(set(words)) != len(words):
        bad.append("repeated word")
    if sum(Fraction(1, 3 ** len(w)) for w in words) != 1:
        bad.append("words do not cover the attractor")
    if any(a != b and b.startswith(a) for a in words for b in words):
        bad.append("nested words")
    tiles = [(frozenset(dec.tile_vertices(t.index)), got[frozenset(t.edges)]) for t in dec.tiles]
    for i, (va, wa) in enumerate(tiles):
        for vb, wb in tiles[i + 1:]:
            if bool(va & vb) != tiles_intersect(wa, wb):
                bad.append(f"incidence differs for {wa}, {wb}")
    for v, u in tm.vertex_words.items():
        p = apply_word(u, ZERO)
        for k in dec.tiles_at(v):
            if not tile_contains_point(got[frozenset(dec.tiles[k].edges)], p):
                bad.append(f"cut point {v} maps outside an adjacent tile")
    # (i) marks land on -1 / 1
    for side, m in marks.items():
        if tm.mark_points.get(m) != (MINUS_ONE if side == -1 else ONE):
            bad.append(f"mark {m} on side {side} maps to {tm.mark_points.get(m)}")
    # (ii) one mark, at least two cut points
    if len(marks) == 1 and len(cut) >= 2:
        (side, m), = marks.items()
        if tm.mark_tiles[m] != ("11" if side == -1 else "22"):
            bad.append(f"single mark tile maps to {tm.mark_tiles[m]!r}")
    # (iii) two marks, at least three cut points on the arc between them
    if len(marks) == 2 and sum(v in cut for v in tree.vertex_path(marks[-1], marks[1])) >= 3:
        if (tm.mark_tiles[marks[-1]], tm.mark_tiles[marks[1]]) != ("11", "22"):
            bad.append(f"mark tiles map to {tm.mark_tiles[marks[-1]]!r}, {tm.mark_tiles[marks[1]]!r}")
    # (iv) word length bounded by the number of cut points
    if any(len(w) > len(cut) for w in words):
        bad.append("a word is longer than the cut set")
    return bad

"""Tile-homeomorphisms from marked trivalent trees onto word tiles, and their refinement.

A marked tree carries at most two marked leaves, each tagged with the side
(-1 or +1) of the image tile it must land on.  Splitting at a cut point x
yields three branches; the branch holding the -1 mark gets letter 1, the
branch holding the +1 mark gets letter 2, and x becomes a mark of every
branch (the +1 mark of branch 1, the -1 mark of branches 2 and 3), matching
``g_1(1) = g_2(-1) = g_3(-1) = 0``.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

import numpy as np

from .csst import ALPHABET, Word, apply_word, boundary_sides, tile_diameter
from .errors import (
    DepthExceeded,
    MarkNotInLeafTile,
    NotEdgeLike,
    NotTrivalent,
    PreconditionNotVerified,
    QsTreeError,
)
from .exact import MINUS_ONE, ONE, ZERO, DyadicPoint, Surd
from .quasivisual import DistortionFit, QvReport, WordCover, check_quasivisual, fit_distortion
from .subdivision import Calibration, DecompositionReport, SubdivisionSequence, calibrate_delta, \
    verify_decomposition_properties
from .tree_core import GEODESIC, PointLike, SimplicialMetricTree

SIDE_POINT = {-1: MINUS_ONE, 1: ONE}


class _Region:
    """Subtree of a host tree given by an edge set."""

    def __init__(self, tree: SimplicialMetricTree, edges: Sequence[int]):
        self.tree = tree
        self.edges = list(edges)
        eu, ev = tree._edge_ends
        adj: dict[int, list[tuple[int, int]]] = {}
        for e in self.edges:
            adj.setdefault(eu[e], []).append((ev[e], e))
            adj.setdefault(ev[e], []).append((eu[e], e))
        self.adj = adj

    def degree(self, v: int) -> int:
        return len(self.adj.get(v, ()))

    def components(self, cut) -> list[tuple[list[int], set[int]]]:
        """Closures of the components of the region minus ``cut`` as (edges, vertices)."""
        eu, ev = self.tree._edge_ends
        seen: set[int] = set()
        out = []
        for e0 in self.edges:
            if e0 in seen:
                continue
            seen.add(e0)
            group = [e0]
            verts = {eu[e0], ev[e0]}
            stack = [v for v in (eu[e0], ev[e0]) if v not in cut]
            while stack:
                x = stack.pop()
                for y, e in self.adj[x]:
                    if e in seen:
                        continue
                    seen.add(e)
                    group.append(e)
                    verts.add(y)
                    if y not in cut:
                        stack.append(y)
            out.append((sorted(group), verts))
        return out

    def path(self, a: int, b: int) -> list[int]:
        parent = {a: None}
        stack = [a]
        while stack:
            x = stack.pop()
            if x == b:
                break
            for y, _ in self.adj[x]:
                if y not in parent:
                    parent[y] = x
                    stack.append(y)
        out = [b]
        while out[-1] != a:
            out.append(parent[out[-1]])
        return out[::-1]

    def nearest_cut(self, a: int, cut) -> int:
        seen = {a}
        stack = [a]
        while stack:
            x = stack.pop()
            for y, _ in self.adj[x]:
                if y in seen:
                    continue
                if y in cut:
                    return y
                seen.add(y)
                stack.append(y)
        raise MarkNotInLeafTile(f"no cut point reachable from {a}")


@dataclass
class MarkedTree:
    """A tree (or the subtree spanned by ``edges``) with a cut set and up to two side-tagged marks."""

    tree: SimplicialMetricTree
    cut: frozenset[int]
    marks: dict[int, int] = field(default_factory=dict)
    edges: tuple[int, ...] | None = None

    def __post_init__(self):
        self.cut = frozenset(self.cut)
        self.marks = dict(self.marks)
        if any(s not in (-1, 1) for s in self.marks):
            raise ValueError("mark sides must be -1 or +1")
        if len(self.marks) == 2 and self.marks[-1] == self.marks[1]:
            raise ValueError("the two marks must be distinct leaves")


@dataclass
class TileMap:
    """Output of one tile-homeomorphism: tiles (edge sets) to words, cut points to words."""

    tiles: list[tuple[tuple[int, ...], Word]]
    vertex_words: dict[int, Word]
    mark_points: dict[int, DyadicPoint]
    guarantee: str | None
    mark_tiles: dict[int, Word]

    def words_for(self, decomposition) -> list[Word]:
        """Words indexed like the tiles of a decomposition of the same host tree."""
        out: list[Word | None] = [None] * len(decomposition.tiles)
        for edges, w in self.tiles:
            out[int(decomposition.edge_label[edges[0]])] = w
        if any(w is None for w in out):
            raise QsTreeError("tile map does not match the decomposition")
        return out  # type: ignore[return-value]


def _validate(region: _Region, cut, marks: dict[int, int]):
    for v, nb in region.adj.items():
        if len(nb) > 3:
            raise NotTrivalent(f"vertex {v} has degree {len(nb)}")
    for v in cut:
        if region.degree(v) != 3:
            raise NotTrivalent(f"cut point {v} has degree {region.degree(v)} (need 3)")
    for m in marks.values():
        if region.degree(m) != 1:
            raise MarkNotInLeafTile(f"mark {m} is not a leaf")
    if not cut:
        return
    owner = {}
    for k, (edges, verts) in enumerate(region.components(cut)):
        bnd = [v for v in verts if v in cut]
        if len(bnd) > 2:
            raise NotEdgeLike(f"tile with boundary {sorted(bnd)} has more than two boundary points")
        for side, m in marks.items():
            if m in verts:
                if len(bnd) != 1:
                    raise MarkNotInLeafTile(f"mark {m} lies in a tile with {len(bnd)} boundary points")
                owner[side] = k
    if len(owner) == 2 and owner[-1] == owner[1]:
        raise MarkNotInLeafTile("the two marks lie in the same leaf-tile")


def _branch_diameter(tree: SimplicialMetricTree, edges):
    return tree.subtree_diameter(edges)


class _Builder:
    def __init__(self, tree: SimplicialMetricTree):
        self.tree = tree
        self.tiles: list[tuple[tuple[int, ...], Word]] = []
        self.vertex_words: dict[int, Word] = {}
        self.mark_points: dict[int, DyadicPoint] = {}
        self.mark_tiles: dict[int, Word] = {}

    def run(self, region: _Region, cut: frozenset[int], marks: dict[int, int], prefix: Word,
            candidates=None, force: dict[str, int] | None = None):
        if not cut:
            self.tiles.append((tuple(region.edges), prefix))
            for side, m in marks.items():
                self.mark_points[m] = apply_word(prefix, SIDE_POINT[side])
                self.mark_tiles[m] = prefix
            return
        if candidates is None:
            if len(marks) == 2:
                on = set(region.path(marks[-1], marks[1]))
                candidates = [v for v in cut if v in on]
            else:
                candidates = list(cut)
        best = None
        for x in sorted(candidates):
            comps = region.components({x})
            worst = max(_branch_diameter(self.tree, e) for e, _ in comps)
            if best is None or worst < best[0]:
                best = (worst, x, comps)
        _, x, comps = best
        self.vertex_words[x] = prefix
        branches = []
        for edges, verts in comps:
            others = verts - {x}
            branches.append({
                "edges": edges,
                "verts": verts,
                "diam": _branch_diameter(self.tree, edges),
                "low": min(others),
                "marks": {s: m for s, m in marks.items() if m in verts},
            })
        letter: dict[int, str] = {}
        for b, br in enumerate(branches):
            if -1 in br["marks"]:
                letter[b] = "1"
            if 1 in br["marks"]:
                if b in letter:
                    raise MarkNotInLeafTile("both marks fall in one branch")
                letter[b] = "2"
        free = [k for k in ALPHABET if k not in letter.values()]
        rest = sorted((b for b in range(len(branches)) if b not in letter),
                      key=lambda b: (-branches[b]["diam"], branches[b]["low"]))
        for b, k in zip(rest, free):
            letter[b] = k
        for b in sorted(range(len(branches)), key=lambda b: letter[b]):
            br = branches[b]
            k = letter[b]
            sub_marks = dict(br["marks"])
            if k == "1":
                sub_marks[1] = x
            else:
                sub_marks[-1] = x
            sub_cut = frozenset(v for v in cut if v in br["verts"] and v != x)
            forced = None
            if force and k in force:
                forced = [force[k]]
            self.run(_Region(self.tree, br["edges"]), sub_cut, sub_marks, prefix + k, forced)


def _tile_map(tree: SimplicialMetricTree, edges: Sequence[int], cut, marks: dict[int, int], prefix: Word = "",
              validate: bool = True) -> TileMap:
    region = _Region(tree, edges)
    cut = frozenset(cut)
    if validate:
        _validate(region, cut, marks)
    b = _Builder(tree)
    candidates = None
    force = None
    guarantee = None
    if len(marks) == 2 and cut:
        on = [v for v in region.path(marks[-1], marks[1]) if v in cut]
        if len(on) >= 3:
            candidates = on[1:-1]
            force = {"1": on[0], "2": on[-1]}
            guarantee = "iii"
    elif len(marks) == 1 and len(cut) >= 2:
        (side, m), = marks.items()
        m1 = region.nearest_cut(m, cut)
        candidates = [v for v in cut if v != m1]
        force = {"1" if side == -1 else "2": m1}
        guarantee = "ii"
    b.run(region, cut, marks, prefix, candidates, force)
    return TileMap(b.tiles, b.vertex_words, b.mark_points, guarantee, b.mark_tiles)


def build_tile_homeo(marked: MarkedTree) -> TileMap:
    """Map the tiles of the decomposition induced by ``marked.cut`` to word tiles.

    Guarantees: marks land on their side (``F(p) = -1`` or ``F(p) = 1``);
    with one mark and at least two cut points the mark's leaf-tile maps to a
    word of length 2; with two marks and at least three cut points on the arc
    between them both mark tiles map to ``11`` and ``22``; no word is longer
    than the number of cut points.
    """
    edges = marked.edges if marked.edges is not None else range(len(marked.tree.edges))
    return _tile_map(marked.tree, list(edges), marked.cut, marked.marks)


# ---- refinement --------------------------------------------------------------------


@dataclass
class TileHomeomorphism:
    seq: SubdivisionSequence
    words: list[list[Word]]
    vertex_words: list[dict[int, Word]]
    images: dict[int, DyadicPoint]
    orientation: list[list[dict[int, int]]]

    @property
    def depth(self) -> int:
        return len(self.words) - 1

    def word(self, n: int, k: int) -> Word:
        return self.words[n][k]

    def image_cover(self) -> WordCover:
        return WordCover(self.words)

    def to_json(self) -> dict:
        return {
            "levels": [
                {
                    "tiles": [{"tile_id": k, "word": w} for k, w in enumerate(self.words[n])],
                    "vertices": [{"v": v, "word_of_g0": u} for v, u in sorted(self.vertex_words[n].items())],
                }
                for n in range(len(self.words))
            ]
        }


_REQUIRED = ("iii", "iv", "vi", "vii")


def refine_homeo(seq: SubdivisionSequence, upto: int | None = None,
                 report: DecompositionReport | None = None) -> TileHomeomorphism:
    """Refine level by level: each tile X with image ``T_w`` is mapped by a tile-homeomorphism
    of (X, cut points inside X, boundary of X as marks) and the words are prefixed with ``w``."""
    upto = seq.n_max if upto is None else upto
    if upto > seq.n_max:
        raise DepthExceeded(f"sequence has only {seq.n_max} levels")
    if report is None:
        report = verify_decomposition_properties(seq)
    bad = [k for k in _REQUIRED if not report.properties[k].passed]
    if bad and upto > 0:
        raise PreconditionNotVerified(f"decomposition properties {', '.join(bad)} fail; refusing to refine")
    tree = seq.tree
    words: list[list[Word]] = [[""]]
    vwords: list[dict[int, Word]] = [{}]
    images: dict[int, DyadicPoint] = {}
    orient: list[list[dict[int, int]]] = [[{}]]
    for n in range(upto):
        dec = seq.levels[n]
        nxt = seq.levels[n + 1]
        cuts = seq.tile_cut_points(n)
        child_words: list[Word | None] = [None] * len(nxt.tiles)
        new_vertices: dict[int, Word] = {}
        for t in dec.tiles:
            w = words[n][t.index]
            marks = _boundary_sides(w, t.boundary, images)
            tm = _tile_map(tree, t.edges, cuts[t.index], marks, prefix=w, validate=False)
            for edges, cw in tm.tiles:
                child_words[int(nxt.edge_label[edges[0]])] = cw
            new_vertices.update(tm.vertex_words)
        if any(c is None for c in child_words):
            raise QsTreeError(f"level {n + 1} tiles left unmapped")
        for v, u in new_vertices.items():
            images[v] = apply_word(u, ZERO)
        words.append(child_words)  # type: ignore[arg-type]
        vwords.append(new_vertices)
        orient.append([_boundary_sides(child_words[k], nt.boundary, images) for k, nt in enumerate(nxt.tiles)])
    return TileHomeomorphism(seq, words, vwords, images, orient)


def _boundary_sides(w: Word, boundary, images: dict[int, DyadicPoint]) -> dict[int, int]:
    left, right = boundary_sides(w)
    out = {}
    for b in boundary:
        p = images[b]
        if left and p == apply_word(w, MINUS_ONE):
            out[-1] = b
        elif right and p == apply_word(w, ONE):
            out[1] = b
        else:
            raise QsTreeError(f"boundary point {b} maps to {p}, not a boundary point of tile {w!r}")
    return out


# ---- verification ------------------------------------------------------------------


def _complete_prefix_code(words: Sequence[Word], root: Word = "") -> str | None:
    """None if the words (all extending ``root``) tile ``T_root`` exactly, else a reason."""
    ws = sorted(set(words))
    if len(ws) != len(words):
        return "repeated word"
    if any(not w.startswith(root) for w in ws):
        return "word outside the parent tile"
    for a, b in zip(ws, ws[1:]):
        if b.startswith(a):
            return f"nested words {a!r}, {b!r}"
    total = sum(Fraction(1, 3 ** (len(w) - len(root))) for w in ws)
    if total != 1:
        return f"words cover a fraction {total} of the tile"
    return None


@dataclass
class IsoReport:
    passed: bool
    checks: dict[str, bool]
    witnesses: dict[str, list]
    levels: int

    def to_json(self):
        return {"pass": self.passed, "levels": self.levels, "checks": self.checks,
                "witnesses": {k: v[:20] for k, v in self.witnesses.items()}}


def verify_isomorphism(seq: SubdivisionSequence, homeo: TileHomeomorphism) -> IsoReport:
    depth = homeo.depth
    wit: dict[str, list] = {k: [] for k in ("intersection", "containment", "subdivision", "orientation",
                                             "injectivity")}
    tcover = seq.cover()
    wcover = homeo.image_cover()
    for n in range(depth + 1):
        ws = homeo.words[n]
        if len(ws) != len(seq.levels[n].tiles):
            wit["subdivision"].append({"level": n, "reason": "tile count mismatch"})
            continue
        if len(set(ws)) != len(ws):
            seen = {}
            for k, w in enumerate(ws):
                if w in seen:
                    wit["injectivity"].append({"level": n, "tiles": [seen[w], k], "word": w})
                seen[w] = k
        why = _complete_prefix_code(ws)
        if why:
            wit["subdivision"].append({"level": n, "reason": why})
        a = {tuple(sorted(p)) for p in tcover.pairs(n, n)}
        b = {tuple(sorted(p)) for p in wcover.pairs(n, n)}
        for i, j in sorted(a ^ b):
            wit["intersection"].append({"level": n, "tiles": [i, j], "words": [ws[i], ws[j]],
                                        "tree_meet": (i, j) in a, "image_meet": (i, j) in b})
        for k, t in enumerate(seq.levels[n].tiles):
            w = ws[k]
            left, right = boundary_sides(w)
            expected = ([apply_word(w, MINUS_ONE)] if left else []) + ([apply_word(w, ONE)] if right else [])
            got = [homeo.images.get(b) for b in t.boundary]
            if sorted(map(str, got)) != sorted(map(str, expected)):
                wit["orientation"].append({"level": n, "tile": k, "word": w})
    for n in range(depth):
        ref = seq.refinements[n]
        coarse = homeo.words[n]
        index = {w: k for k, w in enumerate(coarse)}
        for c, w in enumerate(homeo.words[n + 1]):
            owners = [index[w[:j]] for j in range(len(w) + 1) if w[:j] in index]
            if owners != [ref.parent[c]]:
                wit["containment"].append({"level": n + 1, "tile": c, "word": w, "parent": ref.parent[c],
                                           "parent_word": coarse[ref.parent[c]],
                                           "image_parents": owners})
        for k, ch in enumerate(ref.children):
            why = _complete_prefix_code([homeo.words[n + 1][c] for c in ch], coarse[k])
            if why:
                wit["subdivision"].append({"level": n + 1, "parent": k, "reason": why})
    checks = {k: not v for k, v in wit.items()}
    return IsoReport(all(checks.values()), checks, wit, depth)


@dataclass
class PropertiesReport:
    passed: bool
    checks: dict[str, bool]
    witnesses: dict[str, list]

    def to_json(self):
        return {"pass": self.passed, "checks": self.checks,
                "witnesses": {k: v[:20] for k, v in self.witnesses.items()}}


def check_refinement_properties(seq: SubdivisionSequence, homeo: TileHomeomorphism, N: int) -> PropertiesReport:
    """The four refinement properties: (A) level-wise word bijection, (B) coarse images are unions of
    child images, (C) child word length grows by 1..N, (D) children touching the parent boundary grow by 2."""
    wit: dict[str, list] = {k: [] for k in "ABCD"}
    for n in range(homeo.depth + 1):
        why = _complete_prefix_code(homeo.words[n])
        if why:
            wit["A"].append({"level": n, "reason": why})
    for n in range(homeo.depth):
        ref = seq.refinements[n]
        coarse = seq.levels[n]
        for k, ch in enumerate(ref.children):
            w = homeo.words[n][k]
            why = _complete_prefix_code([homeo.words[n + 1][c] for c in ch], w)
            if why:
                wit["B"].append({"level": n, "tile": k, "reason": why})
            bset = set(coarse.tiles[k].boundary)
            for c in ch:
                cw = homeo.words[n + 1][c]
                inc = len(cw) - len(w)
                if not 1 <= inc <= N:
                    wit["C"].append({"level": n + 1, "tile": c, "increment": inc})
                touches = bset & set(seq.levels[n + 1].tiles[c].boundary)
                if touches and inc != 2:
                    wit["D"].append({"level": n + 1, "tile": c, "word": cw, "parent_word": w, "increment": inc})
    checks = {k: not v for k, v in wit.items()}
    return PropertiesReport(all(checks.values()), checks, wit)


# ---- evaluation --------------------------------------------------------------------


@dataclass
class Evaluation:
    point: DyadicPoint
    error_bound: Fraction
    word: Word
    pinned: bool

    def to_json(self):
        re, im = self.point.to_json()
        return {"re": re, "im": im, "decimal": [f"{float(self.point.real):.12g}", f"{float(self.point.imag):.12g}"],
                "error_bound": str(self.error_bound), "word": self.word, "pinned": self.pinned}


def evaluate(homeo: TileHomeomorphism, x: PointLike, depth: int) -> Evaluation:
    """Image of x to resolution ``depth``: the centre of the image of a descending tile chain.

    Cut points already in ``V^depth`` have exact images; those are returned
    as is (``pinned``) together with the chain's error bound.
    """
    if depth > homeo.depth or depth < 0:
        raise DepthExceeded(f"requested depth {depth}, homeomorphism has {homeo.depth}")
    seq = homeo.seq
    tree = seq.tree
    p = tree.check_point(x)
    k = 0
    for n in range(1, depth + 1):
        dec = seq.levels[n]
        if p.is_vertex:
            cands = set(dec.tiles_at(p.vertex))
        else:
            cands = {int(dec.edge_label[p.edge])}
        kids = sorted(cands & set(seq.refinements[n - 1].children[k]))
        k = kids[0]
    w = homeo.words[depth][k]
    bound = tile_diameter(w)
    if p.is_vertex and p.vertex in homeo.images and p.vertex in seq.V[depth]:
        return Evaluation(homeo.images[p.vertex], bound, w, True)
    return Evaluation(apply_word(w, ZERO), bound, w, False)


# ---- pipeline ------------------------------------------------------------------------


@dataclass
class PipelineResult:
    calibration: Calibration
    homeo: TileHomeomorphism
    isomorphism: IsoReport
    properties: PropertiesReport
    image_qv: QvReport
    distortion: DistortionFit

    @property
    def sequence(self) -> SubdivisionSequence:
        return self.calibration.sequence

    @property
    def ok(self) -> bool:
        return self.isomorphism.passed and self.properties.passed and self.image_qv.ok

    def failing_stage(self) -> str | None:
        if not self.isomorphism.passed:
            return "isomorphism"
        if not self.properties.passed:
            return "refinement-properties"
        if not self.image_qv.ok:
            return "image-quasivisual"
        return None


def pulled_back_metric(homeo: TileHomeomorphism):
    images = homeo.images

    def d(x, y):
        return Surd((images[x] - images[y]).norm_sq())

    return d


def end_to_end(tree: SimplicialMetricTree, grid: Sequence, n_max: int, budget: int = 5000, seed: int = 0,
               max_constant=64) -> PipelineResult:
    cal = calibrate_delta(tree, n_max, grid, max_constant=max_constant)
    seq = cal.sequence
    homeo = refine_homeo(seq, n_max, cal.report)
    iso = verify_isomorphism(seq, homeo)
    props = check_refinement_properties(seq, homeo, cal.report.N)
    qv = check_quasivisual(homeo.image_cover())
    pts = sorted(seq.V[n_max])
    fit = fit_distortion(pts, seq.tree.distance, pulled_back_metric(homeo), budget=budget, seed=seed)
    return PipelineResult(cal, homeo, iso, props, qv, fit)

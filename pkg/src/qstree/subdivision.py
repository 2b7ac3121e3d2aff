"""Height-graded vertex sets and the induced subdivision of a trivalent tree.

Level n cuts the tree at every branch point whose height is at least
``delta**n`` (after rescaling the tree to diameter 1).  The verifier checks
the seven decomposition properties, numbered here as

(i) every level is finite; (ii) the levels form a quasi-visual subdivision;
(iii) every tile has at most two boundary points; (iv) the decomposition of a
tile by its next-level cut points is edge-like; (v) the number of next-level
cut points inside a tile is bounded (``N`` is reported); (vi) every tile holds
at least two next-level cut points; (vii) the open arc between the two
boundary points of an edge-tile carries at least three of them.

Per-tile properties (iv)-(vii) need the next level, so they are checked for
tiles of levels ``0 .. n_max - 1``.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Sequence

from .errors import NoFeasibleDelta
from .exact import Surd, format_rational
from .quasivisual import QvReport, TreeCover, VisualReport, check_quasivisual, check_visual
from .tree_core import Decomposition, Length, Refinement, SimplicialMetricTree, containment, decompose

PROPERTIES = ("i", "ii", "iii", "iv", "v", "vi", "vii")


@dataclass(frozen=True)
class SubdivisionConfig:
    delta: Fraction
    n_max: int

    def __post_init__(self):
        object.__setattr__(self, "delta", Fraction(self.delta))
        if not 0 < self.delta < 1:
            raise ValueError(f"delta must lie in (0, 1), got {self.delta}")
        if self.n_max < 1:
            raise ValueError("n_max must be at least 1")


@dataclass
class SubdivisionSequence:
    tree: SimplicialMetricTree
    config: SubdivisionConfig
    factor: Fraction | None
    unit: Length
    heights: dict[int, Length]
    V: list[frozenset[int]]
    levels: list[Decomposition]
    refinements: list[Refinement]
    ambiguous: list[tuple[int, int]] = field(default_factory=list)

    @property
    def delta(self) -> Fraction:
        return self.config.delta

    @property
    def n_max(self) -> int:
        return self.config.n_max

    def empty_levels(self) -> list[int]:
        return [n for n in range(1, len(self.V)) if not self.V[n]]

    def tile_cut_points(self, n: int) -> list[list[int]]:
        """For each tile X of level n < n_max, the sorted next-level cut points in its interior."""
        dec = self.levels[n]
        out: list[list[int]] = [[] for _ in dec.tiles]
        for v in sorted(self.V[n + 1] - self.V[n]):
            (k,) = dec.tiles_at(v)
            out[k].append(v)
        return out

    def cover(self) -> TreeCover:
        return TreeCover(self.tree, self.levels)

    def label(self, v: int) -> str:
        if self.tree.labels and v in self.tree.labels:
            return str(self.tree.labels[v])
        return str(v)

    def to_json(self) -> dict:
        return {
            "delta": format_rational(self.delta),
            "n_max": self.n_max,
            "normalization": {"factor": None if self.factor is None else format_rational(self.factor),
                              "unit": str(self.unit)},
            "levels": [
                {"V": sorted(self.V[n]),
                 "tiles": [{"edges": list(t.edges), "boundary": list(t.boundary)} for t in dec.tiles]}
                for n, dec in enumerate(self.levels)
            ],
            "ambiguous": [{"vertex": v, "level": n} for v, n in self.ambiguous],
        }


def _rational_diameter(tree: SimplicialMetricTree) -> Fraction | None:
    d = tree.diameter
    if isinstance(d, Fraction):
        return d
    if isinstance(d, Surd):
        return d.exact
    return None


def build_levels(tree: SimplicialMetricTree, config: SubdivisionConfig,
                 height_slack: Length = Fraction(0)) -> SubdivisionSequence:
    """Cut sets ``V^n = {p : H(p) >= delta^n}`` and their decompositions for n = 0..n_max.

    A vertex enters ``V^n`` only if ``H(p) - height_slack`` clears the
    threshold; points with ``|H(p) - delta^n| < height_slack`` are recorded as
    ambiguous.  When the diameter is rational the tree is rescaled to diameter
    1; otherwise thresholds are multiplied by the diameter instead.
    """
    raw_heights = tree.heights
    d = _rational_diameter(tree)
    if d is not None and d > 0:
        factor = 1 / d
        work = tree if factor == 1 else tree.scaled(factor)
        unit: Length = Fraction(1)
        heights = {v: h * factor for v, h in raw_heights.items()}
    else:
        factor = None
        work = tree
        unit = tree.diameter
        heights = dict(raw_heights)
    slack = height_slack
    V = [frozenset()]
    ambiguous = []
    for n in range(1, config.n_max + 1):
        thr = config.delta ** n * unit
        chosen = set()
        for v, h in heights.items():
            if h - slack >= thr:
                chosen.add(v)
            elif slack and h + slack >= thr:
                ambiguous.append((v, n))
        V.append(frozenset(chosen | V[-1]))
    levels = [decompose(work, sorted(vs)) for vs in V]
    refinements = [containment(levels[n], levels[n + 1]) for n in range(config.n_max)]
    return SubdivisionSequence(work, config, factor, unit, heights, V, levels, refinements, ambiguous)


@dataclass
class PropertyCheck:
    passed: bool
    detail: str
    witnesses: list[dict] = field(default_factory=list)

    def to_json(self):
        return {"pass": self.passed, "detail": self.detail, "witnesses": self.witnesses[:20],
                "witness_count": len(self.witnesses)}


@dataclass
class DecompositionReport:
    delta: Fraction
    n_max: int
    properties: dict[str, PropertyCheck]
    N: int
    visual: VisualReport
    quasivisual: QvReport
    empty_levels: list[int]

    @property
    def ok(self) -> bool:
        return all(p.passed for p in self.properties.values())

    def failing(self) -> list[str]:
        return [k for k in PROPERTIES if not self.properties[k].passed]

    def to_json(self) -> dict:
        return {
            "delta": format_rational(self.delta),
            "n_max": self.n_max,
            "pass": self.ok,
            "N": self.N,
            "empty_levels": self.empty_levels,
            "properties": {k: self.properties[k].to_json() for k in PROPERTIES},
            "visual": self.visual.to_json(),
            "quasivisual": self.quasivisual.to_json(),
        }


def verify_decomposition_properties(seq: SubdivisionSequence, max_constant=64) -> DecompositionReport:
    tree = seq.tree
    props: dict[str, PropertyCheck] = {}
    sizes = [len(v) for v in seq.V]
    props["i"] = PropertyCheck(True, f"cut set sizes {sizes}")

    cover = seq.cover()
    visual = check_visual(cover, seq.delta, max_constant=max_constant, scale=seq.unit)
    qv = visual.quasivisual or check_quasivisual(cover)
    nested = all(seq.V[n] <= seq.V[n + 1] for n in range(seq.n_max))
    ok2 = visual.passed and qv.ok and nested
    msgs = list(visual.messages) + list(qv.messages)
    props["ii"] = PropertyCheck(ok2, "; ".join(msgs) if msgs else
                                f"visual with diameter constant {float(visual.diameter_constant):.4g}")

    w3 = []
    for n, dec in enumerate(seq.levels):
        for t in dec.tiles:
            nb = len(t.boundary)
            if nb > 2 or (nb == 0 and len(dec.tiles) > 1):
                w3.append({"level": n, "tile": t.index, "boundary": [seq.label(b) for b in t.boundary]})
    props["iii"] = PropertyCheck(not w3, "every tile has at most two boundary points" if not w3 else
                                 f"{len(w3)} tiles with more than two boundary points", w3)

    w4, w6, w7 = [], [], []
    N = 0
    for n in range(seq.n_max):
        dec = seq.levels[n]
        ref = seq.refinements[n]
        cuts = seq.tile_cut_points(n)
        for t in dec.tiles:
            vx = cuts[t.index]
            N = max(N, len(vx))
            if vx:
                for c in ref.children[t.index]:
                    rb = ref.relative_boundary[c]
                    if len(rb) > 2:
                        w4.append({"level": n, "tile": t.index, "child": c,
                                   "relative_boundary": [seq.label(b) for b in rb]})
            if len(vx) < 2:
                w6.append({"level": n, "tile": t.index, "cut_points": [seq.label(v) for v in vx]})
            if len(t.boundary) == 2:
                u, v = t.boundary
                inner = set(vx)
                on_arc = [x for x in tree.vertex_path(u, v)[1:-1] if x in inner]
                if len(on_arc) < 3:
                    w7.append({"level": n, "tile": t.index, "boundary": [seq.label(u), seq.label(v)],
                               "arc_cut_points": [seq.label(x) for x in on_arc]})
    props["iv"] = PropertyCheck(not w4, "induced tile decompositions are edge-like" if not w4 else
                                f"{len(w4)} non edge-like children", w4)
    props["v"] = PropertyCheck(True, f"N = {N}")
    props["vi"] = PropertyCheck(not w6, "every tile has at least two next-level cut points" if not w6 else
                                f"{len(w6)} tiles with fewer than two next-level cut points", w6)
    props["vii"] = PropertyCheck(not w7, "every edge-tile arc carries at least three cut points" if not w7 else
                                 f"{len(w7)} edge-tiles with fewer than three cut points on the arc", w7)
    return DecompositionReport(seq.delta, seq.n_max, props, N, visual, qv, seq.empty_levels())


@dataclass
class Calibration:
    delta: Fraction
    sequence: SubdivisionSequence
    report: DecompositionReport
    trail: list[tuple[Fraction, DecompositionReport]]


def calibrate_delta(tree: SimplicialMetricTree, n_max: int, grid: Sequence, max_constant=64) -> Calibration:
    """First delta of a descending grid for which every property holds through ``n_max``."""
    grid = [Fraction(g) for g in grid]
    if any(a < b for a, b in zip(grid, grid[1:])):
        raise ValueError("delta grid must be sorted in descending order")
    trail = []
    for delta in grid:
        seq = build_levels(tree, SubdivisionConfig(delta, n_max))
        rep = verify_decomposition_properties(seq, max_constant=max_constant)
        trail.append((delta, rep))
        if rep.ok:
            return Calibration(delta, seq, rep, trail)
    summary = ", ".join(f"{format_rational(d)}: fails {'/'.join(r.failing())}" for d, r in trail)
    raise NoFeasibleDelta(f"no delta in the grid passes through level {n_max} ({summary})", trail)


def parse_grid(text: str | Iterable) -> list[Fraction]:
    from .exact import parse_rational

    if isinstance(text, str):
        return [parse_rational(s.strip()) for s in text.split(",") if s.strip()]
    return [Fraction(x) for x in text]

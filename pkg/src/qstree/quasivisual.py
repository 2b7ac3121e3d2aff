"""Verification of quasi-visual level covers, the pairing index, and distortion fits.

A level cover is a finite sequence of finite covers of one space, level 0
being the whole space.  Three concrete covers are provided: word tiles of the
self-similar tree (:class:`WordCover`), decompositions of a simplicial tree
(:class:`TreeCover`) and explicit finite point sets (:class:`ExplicitCover`).
"""
from __future__ import annotations

import math
from abc import ABC, abstractmethod
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Hashable, Sequence

import numpy as np

from .csst import ALPHABET, Word, apply_word, boundary_sides, tile_contains_point, tile_diameter
from .errors import BudgetTooShallow, DegenerateMetric, EmptyLevel
from .exact import MINUS_ONE, ONE, ZERO, DyadicPoint, Surd, format_rational
from .tree_core import GEODESIC, Decomposition, Length, SimplicialMetricTree

Pair = tuple[int, int]


def _ratio(a, b):
    """Exact ratio of two lengths (Fraction or Surd)."""
    return a / b


def _fl(x) -> float:
    return float(x)


def length_json(x) -> dict | None:
    if x is None:
        return None
    if isinstance(x, Surd):
        return x.to_json()
    if isinstance(x, Fraction) or isinstance(x, int):
        return {"decimal": f"{float(x):.12g}", "exact": format_rational(x)}
    return {"decimal": f"{float(x):.12g}"}


@dataclass
class DistanceBracket:
    """Certified ``lo <= dist <= hi``; ``partner`` is a tile realising ``hi``."""

    lo: Length
    hi: Length
    partner: int


class LevelCover(ABC):
    """Finite sequence of finite covers with exact diameters and intersection data."""

    @property
    @abstractmethod
    def max_level(self) -> int: ...

    @abstractmethod
    def size(self, n: int) -> int: ...

    @abstractmethod
    def diam(self, n: int, k: int) -> Length: ...

    @abstractmethod
    def intersecting(self, n: int, m: int) -> set[Pair]:
        """Pairs ``(i, j)``, tile i of level n meeting tile j of level m (``n <= m``)."""

    @abstractmethod
    def nearest_disjoint(self, n: int) -> list[DistanceBracket | None]:
        """Per tile of level n, the distance bracket to the nearest disjoint tile of the same level."""

    @abstractmethod
    def tiles_containing(self, n: int, x) -> list[int]: ...

    @abstractmethod
    def distance(self, x, y) -> Length: ...

    def describe(self, n: int, k: int) -> str:
        return f"level {n} tile {k}"

    def pairs(self, n: int, m: int) -> set[Pair]:
        memo = self.__dict__.setdefault("_memo_pairs", {})
        if (n, m) not in memo:
            memo[(n, m)] = self.intersecting(n, m)
        return memo[(n, m)]

    def disjoint(self, n: int) -> list[DistanceBracket | None]:
        memo = self.__dict__.setdefault("_memo_disjoint", {})
        if n not in memo:
            memo[n] = self.nearest_disjoint(n)
        return memo[n]


# ---- word covers ------------------------------------------------------------------


def _boundary_points(w: Word) -> list[DyadicPoint]:
    left, right = boundary_sides(w)
    out = []
    if left:
        out.append(apply_word(w, MINUS_ONE))
    if right:
        out.append(apply_word(w, ONE))
    return out


class WordCover(LevelCover):
    """Cover whose tiles are word tiles ``T_w`` with the Euclidean metric.

    Distances between disjoint tiles are bracketed by sampling the centres
    ``g_{wu}(0)`` (``len(u) <= depth``) and the two tips: every point of
    ``T_w`` is within ``2^-(len w + depth)`` of a sampled centre, which gives
    the certified lower end.
    """

    def __init__(self, levels: Sequence[Sequence[Word]], sample_depth: int = 3):
        self.levels = [list(ws) for ws in levels]
        self.sample_depth = sample_depth
        self._index = [{w: k for k, w in enumerate(ws)} for ws in self.levels]
        self._bmaps: dict[int, dict[DyadicPoint, list[int]]] = {}
        self._prefix: dict[int, dict[Word, list[int]]] = {}

    @classmethod
    def uniform(cls, max_level: int, sample_depth: int = 3) -> WordCover:
        from .csst import words_of_length

        return cls([list(words_of_length(n)) for n in range(max_level + 1)], sample_depth)

    @property
    def max_level(self) -> int:
        return len(self.levels) - 1

    def size(self, n):
        return len(self.levels[n])

    def diam(self, n, k):
        return tile_diameter(self.levels[n][k])

    def describe(self, n, k):
        return f"level {n} tile T_{self.levels[n][k] or '(root)'}"

    def _boundary_map(self, n):
        if n not in self._bmaps:
            bm: dict[DyadicPoint, list[int]] = {}
            for k, w in enumerate(self.levels[n]):
                for p in _boundary_points(w):
                    bm.setdefault(p, []).append(k)
            self._bmaps[n] = bm
        return self._bmaps[n]

    def _prefix_map(self, n):
        if n not in self._prefix:
            pm: dict[Word, list[int]] = {}
            for k, w in enumerate(self.levels[n]):
                for j in range(len(w) + 1):
                    pm.setdefault(w[:j], []).append(k)
            self._prefix[n] = pm
        return self._prefix[n]

    def intersecting(self, n, m):
        out: set[Pair] = set()
        bm = self._boundary_map(n)
        pm = self._prefix_map(n)
        idx = self._index[n]
        for j, y in enumerate(self.levels[m]):
            for p in _boundary_points(y):
                for i in bm.get(p, ()):
                    out.add((i, j))
            for cut in range(len(y) + 1):
                i = idx.get(y[:cut])
                if i is not None:
                    out.add((i, j))
            for i in pm.get(y, ()):
                out.add((i, j))
        if n == m:
            out = {(i, j) for i, j in out if i != j}
        return out

    def _samples(self, w: Word) -> list[tuple[int, int, int]]:
        """Sample points of ``T_w`` as integer pairs at scale ``2^-S`` with S = len(w) + depth + 1."""
        s = len(w) + self.sample_depth + 1
        pts = [apply_word(w, MINUS_ONE).scaled(s), apply_word(w, ONE).scaled(s)]
        frontier = [w]
        for _ in range(self.sample_depth + 1):
            nxt = []
            for u in frontier:
                pts.append(apply_word(u, ZERO).scaled(s))
                nxt.extend(u + k for k in ALPHABET)
            frontier = nxt
        return pts

    def nearest_disjoint(self, n):
        from scipy.spatial import cKDTree

        words = self.levels[n]
        if len(words) < 2:
            return [None] * len(words)
        touching: list[set[int]] = [set() for _ in words]
        for i, j in self.pairs(n, n):
            touching[i].add(j)
            touching[j].add(i)
        smax = max(len(w) for w in words) + self.sample_depth + 1
        coords = []
        owner = []
        for k, w in enumerate(words):
            shift = smax - (len(w) + self.sample_depth + 1)
            for a, b in self._samples(w):
                coords.append((a << shift, b << shift))
                owner.append(k)
        arr = np.array(coords, dtype=np.int64)
        owner_a = np.array(owner)
        kd = cKDTree(arr.astype(float))
        out: list[DistanceBracket | None] = []
        start = 0
        counts = np.bincount(owner_a, minlength=len(words))
        for k, w in enumerate(words):
            mine = arr[start:start + counts[k]]
            start += counts[k]
            banned = np.array(sorted(touching[k] | {k}))
            if len(banned) >= len(words):
                out.append(None)
                continue
            kq = min(32, len(arr))
            while True:
                dists, idxs = kd.query(mine.astype(float), k=kq)
                dists = dists.reshape(len(mine), -1)
                idxs = idxs.reshape(len(mine), -1)
                valid = idxs < len(arr)
                ok = valid & ~np.isin(owner_a[np.where(valid, idxs, 0)], banned)
                has = ok.any(axis=1)
                first = ok.argmax(axis=1)
                rows = np.nonzero(has)[0]
                fbest = dists[rows, first[rows]].min() if len(rows) else np.inf
                # a row without a disjoint neighbour can still win only if its k-th neighbour is closer
                lacking = ~has & (dists[:, -1] <= fbest * (1 + 1e-9))
                if not lacking.any() or kq >= len(arr):
                    break
                kq = min(len(arr), kq * 4)
            best = None
            for r in rows:
                q = idxs[r, first[r]]
                if dists[r, first[r]] <= fbest * (1 + 1e-9) + 1e-9:
                    dx = int(mine[r, 0] - arr[q, 0])
                    dy = int(mine[r, 1] - arr[q, 1])
                    d2 = dx * dx + dy * dy
                    if best is None or d2 < best[0] or (d2 == best[0] and owner_a[q] < best[1]):
                        best = (d2, int(owner_a[q]))
            if best is None:
                out.append(None)
                continue
            d2, partner = best
            hi = Surd(Fraction(d2, 1 << (2 * smax)))
            margin = Fraction(1, 1 << (len(w) + self.sample_depth)) + \
                Fraction(1, 1 << (len(words[partner]) + self.sample_depth))
            lo_root = Fraction(math.isqrt(d2 << 80), 1 << (smax + 40))
            lo = max(Fraction(0), lo_root - margin)
            out.append(DistanceBracket(Surd.of(lo), hi, partner))
        return out

    def tiles_containing(self, n, x: DyadicPoint):
        words = self._index[n]
        pm = self._prefix_map(n)
        found = []
        stack = [""]
        while stack:
            p = stack.pop()
            if p in words:
                found.append(words[p])
                continue
            if p not in pm:
                continue
            for k in ALPHABET:
                c = p + k
                if c in pm and tile_contains_point(c, x):
                    stack.append(c)
        return sorted(found)

    def distance(self, x: DyadicPoint, y: DyadicPoint):
        return Surd((x - y).norm_sq())


# ---- tree covers ----------------------------------------------------------------


class TreeCover(LevelCover):
    """Cover by the tiles of nested decompositions of one simplicial tree."""

    def __init__(self, tree: SimplicialMetricTree, levels: Sequence[Decomposition]):
        self.tree = tree
        self.levels = list(levels)
        self._parents: dict[tuple[int, int], list[int]] = {}

    @property
    def max_level(self):
        return len(self.levels) - 1

    def size(self, n):
        return len(self.levels[n].tiles)

    def diam(self, n, k):
        return self.levels[n].diameters[k]

    def ancestor(self, n: int, m: int) -> list[int]:
        """For each tile of level m, the level-n tile containing it (n <= m)."""
        key = (n, m)
        if key not in self._parents:
            lab = self.levels[n].edge_label
            self._parents[key] = [int(lab[t.edges[0]]) for t in self.levels[m].tiles]
        return self._parents[key]

    def intersecting(self, n, m):
        out: set[Pair] = set()
        coarse = self.levels[n]
        cut_n = coarse.cut_set
        anc = self.ancestor(n, m) if n != m else None
        for j, t in enumerate(self.levels[m].tiles):
            if anc is not None:
                out.add((anc[j], j))
            for b in t.boundary:
                if b in cut_n:
                    for i in coarse.tiles_at(b):
                        if n != m or i != j:
                            out.add((i, j))
        return out

    def nearest_disjoint(self, n):
        dec = self.levels[n]
        tree = self.tree
        if tree.metric != GEODESIC:
            return self._nearest_disjoint_bruteforce(n)
        # the arc from X to a disjoint Y crosses a whole edge-tile Z adjacent to X
        out: list[DistanceBracket | None] = []
        span = {}
        for z in dec.tiles:
            if z.is_edge_tile:
                span[z.index] = tree.geodesic(*z.boundary)
        for x in dec.tiles:
            best = None
            for b in x.boundary:
                for zi in dec.tiles_at(b):
                    if zi == x.index or zi not in span:
                        continue
                    z = dec.tiles[zi]
                    far = z.boundary[0] if z.boundary[1] == b else z.boundary[1]
                    partners = [y for y in dec.tiles_at(far) if y != zi]
                    if not partners:
                        continue
                    if best is None or span[zi] < best[0]:
                        best = (span[zi], min(partners))
            out.append(None if best is None else DistanceBracket(best[0], best[0], best[1]))
        return out

    def _nearest_disjoint_bruteforce(self, n):
        dec = self.levels[n]
        tree = self.tree
        verts = [sorted(dec.tile_vertices(k)) for k in range(len(dec.tiles))]
        touching = [set() for _ in dec.tiles]
        for i, j in self.pairs(n, n):
            touching[i].add(j)
            touching[j].add(i)
        out = []
        for i in range(len(dec.tiles)):
            best = None
            for j in range(len(dec.tiles)):
                if j == i or j in touching[i]:
                    continue
                d = min(tree.dist_sq(a, b) for a in verts[i] for b in verts[j])
                if best is None or d < best[0]:
                    best = (d, j)
            if best is None:
                out.append(None)
            else:
                d = Surd(best[0])
                out.append(DistanceBracket(d, d, best[1]))
        return out

    def tiles_containing(self, n, x: int):
        return self.levels[n].tiles_at(x)

    def distance(self, x: int, y: int):
        return self.tree.distance(x, y)


# ---- explicit covers --------------------------------------------------------------


class ExplicitCover(LevelCover):
    """Tiles given as finite point sets of a finite metric space (brute force; small inputs)."""

    def __init__(self, levels: Sequence[Sequence[frozenset[Hashable]]], metric: Callable[[Hashable, Hashable], Length]):
        self.levels = [[frozenset(t) for t in lvl] for lvl in levels]
        self.metric = metric

    @property
    def max_level(self):
        return len(self.levels) - 1

    def size(self, n):
        return len(self.levels[n])

    def diam(self, n, k):
        pts = list(self.levels[n][k])
        best = Fraction(0)
        for a in range(len(pts)):
            for b in range(a + 1, len(pts)):
                d = self.metric(pts[a], pts[b])
                if d > best:
                    best = d
        return best

    def intersecting(self, n, m):
        out = set()
        for i, x in enumerate(self.levels[n]):
            for j, y in enumerate(self.levels[m]):
                if (n != m or i != j) and x & y:
                    out.add((i, j))
        return out

    def nearest_disjoint(self, n):
        out = []
        tiles = self.levels[n]
        for i, x in enumerate(tiles):
            best = None
            for j, y in enumerate(tiles):
                if i == j or x & y:
                    continue
                d = min(self.metric(a, b) for a in x for b in y)
                if best is None or d < best[0]:
                    best = (d, j)
            out.append(None if best is None else DistanceBracket(best[0], best[0], best[1]))
        return out

    def tiles_containing(self, n, x):
        return [k for k, t in enumerate(self.levels[n]) if x in t]

    def distance(self, x, y):
        return self.metric(x, y)


# ---- the four conditions ----------------------------------------------------------


@dataclass
class LevelConstants:
    level: int
    tiles: int
    same_level_ratio: Length
    same_level_witness: Pair | None
    separation_lo: Length | None
    separation_hi: Length | None
    separation_witness: Pair | None
    neighbor_ratio: Length | None
    neighbor_witness: Pair | None


@dataclass
class QvReport:
    max_level: int
    levels: list[LevelConstants]
    k0: int | None
    lam: Length | None
    lam_witness: tuple[int, int, int, int] | None
    C: float | None
    rho: float | None
    tau: Length | None
    decay_replay_ok: bool | None
    decay_pairs_checked: int
    passed: dict[str, bool]
    messages: list[str] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return all(self.passed.values())

    def to_json(self) -> dict:
        return {
            "max_level": self.max_level,
            "pass": self.ok,
            "conditions": {k: v for k, v in self.passed.items()},
            "k0": self.k0,
            "lambda": length_json(self.lam),
            "lambda_witness": list(self.lam_witness) if self.lam_witness else None,
            "C": None if self.C is None else f"{self.C:.12g}",
            "rho": None if self.rho is None else f"{self.rho:.12g}",
            "tau": length_json(self.tau),
            "decay_replay_ok": self.decay_replay_ok,
            "decay_pairs_checked": self.decay_pairs_checked,
            "levels": [
                {
                    "level": c.level,
                    "tiles": c.tiles,
                    "same_level_ratio": length_json(c.same_level_ratio),
                    "same_level_witness": list(c.same_level_witness) if c.same_level_witness else None,
                    "separation_lo": length_json(c.separation_lo),
                    "separation_hi": length_json(c.separation_hi),
                    "separation_witness": list(c.separation_witness) if c.separation_witness else None,
                    "neighbor_ratio": length_json(c.neighbor_ratio),
                    "neighbor_witness": list(c.neighbor_witness) if c.neighbor_witness else None,
                }
                for c in self.levels
            ],
            "messages": list(self.messages),
        }


def _positive(x) -> bool:
    return x is not None and x > 0


def _max_gap(top: int) -> int:
    return top - 1 if top >= 2 else top


def check_quasivisual(cover: LevelCover, max_level: int | None = None) -> QvReport:
    """Measure the extremal ratios of the four conditions level by level.

    (i) intersecting tiles of one level have comparable diameters;
    (ii) disjoint tiles of one level are at distance comparable to their diameters;
    (iii) intersecting tiles of neighbouring levels have comparable diameters;
    (iv) some fixed level gap ``k0`` shrinks intersecting tiles by a factor ``lam < 1``.
    """
    top = cover.max_level if max_level is None else min(max_level, cover.max_level)
    for n in range(top + 1):
        if cover.size(n) == 0:
            raise EmptyLevel(f"level {n} has no tiles")
    if cover.size(0) != 1:
        raise EmptyLevel("level 0 must consist of the whole space")
    levels: list[LevelConstants] = []
    msgs: list[str] = []
    sep_ok = True
    pairs = cover.pairs

    for n in range(top + 1):
        same = pairs(n, n)
        r1: Length = Fraction(1)
        w1 = None
        for i, j in same:
            r = _ratio(cover.diam(n, i), cover.diam(n, j))
            if r > r1 or (r == r1 and w1 is not None and (i, j) < w1):
                r1, w1 = r, (i, j)
        lo = hi = None
        w2 = None
        for i, br in enumerate(cover.disjoint(n)):
            if br is None:
                continue
            d = cover.diam(n, i)
            rlo, rhi = _ratio(br.lo, d), _ratio(br.hi, d)
            if lo is None or rlo < lo:
                lo, w2 = rlo, (i, br.partner)
            if hi is None or rhi < hi:
                hi = rhi
        if lo is not None and not lo > 0:
            sep_ok = False
            msgs.append(f"(ii) not certified at level {n}: lower bracket {lo} for {w2}")
        r3 = None
        w3 = None
        if n < top:
            for i, j in pairs(n, n + 1):
                a, b = cover.diam(n, i), cover.diam(n + 1, j)
                r = _ratio(a, b) if a >= b else _ratio(b, a)
                if r3 is None or r > r3:
                    r3, w3 = r, (i, j)
        levels.append(LevelConstants(n, cover.size(n), r1, w1, lo, hi, w2, r3, w3))

    # (iv): a gap must be seen from at least two starting levels when the budget allows it,
    # otherwise the single pair (0, top) would certify any cover whose last level is smaller
    kmax = _max_gap(top)
    k0 = lam = lam_w = None
    for k in range(1, kmax + 1):
        worst = None
        wit = None
        for n in range(0, top - k + 1):
            for i, j in pairs(n, n + k):
                r = _ratio(cover.diam(n + k, j), cover.diam(n, i))
                if worst is None or r > worst:
                    worst, wit = r, (n, i, n + k, j)
        if worst is not None and worst < 1:
            k0, lam, lam_w = k, worst, wit
            break
        if worst is not None:
            lam_w = wit
    C = rho = None
    tau = None
    up = Fraction(1)
    down = None
    for n in range(top):
        for i, j in pairs(n, n + 1):
            r = _ratio(cover.diam(n + 1, j), cover.diam(n, i))
            if r > up:
                up = r
            if down is None or r < down:
                down = r
    if down is not None:
        tau = down if down < 1 else Fraction(1)
    replay_ok = None
    checked = 0
    if k0 is not None:
        rho = _fl(lam) ** (1.0 / k0)
        C = max(1.0, (_fl(up) / rho) ** (k0 - 1))
        replay_ok = True
        for n in range(top + 1):
            for m in range(n + 1, top + 1):
                for i, j in pairs(n, m):
                    checked += 1
                    lhs = _fl(cover.diam(m, j))
                    rhs = C * rho ** (m - n) * _fl(cover.diam(n, i))
                    if lhs > rhs * (1 + 1e-9):
                        replay_ok = False
                        msgs.append(f"decay replay fails for {cover.describe(n, i)} / {cover.describe(m, j)}")
    elif top >= 1:
        msgs.append(f"(iv) no level gap k0 <= {kmax} shrinks all intersecting tiles; witness {lam_w}")
    passed = {
        "i": True,
        "ii": sep_ok,
        "iii": True,
        "iv": k0 is not None or top == 0,
    }
    if k0 is None and top == 0:
        k0 = None
    if replay_ok is False:
        passed["iv"] = False
    return QvReport(top, levels, k0, lam, lam_w, C, rho, tau, replay_ok, checked, passed, msgs)


@dataclass
class VisualReport:
    delta: Fraction
    passed: bool
    diameter_constant: Length | None
    distance_constant: Length | None
    per_level: list[tuple[int, float, float, float | None]]
    drift_factor: float
    messages: list[str]
    quasivisual: QvReport | None = None

    def to_json(self) -> dict:
        return {
            "delta": format_rational(self.delta),
            "pass": self.passed,
            "diameter_constant": length_json(self.diameter_constant),
            "distance_constant": length_json(self.distance_constant),
            "drift_factor": f"{self.drift_factor:.6g}",
            "per_level": [
                {"level": n, "diam_over_delta_min": f"{a:.6g}", "diam_over_delta_max": f"{b:.6g}",
                 "dist_over_delta_min": None if c is None else f"{c:.6g}"}
                for n, a, b, c in self.per_level
            ],
            "messages": self.messages,
        }


def check_visual(cover: LevelCover, delta, max_constant=64, max_drift: float = 4.0,
                 scale=Fraction(1)) -> VisualReport:
    """Check ``diam(X) ~ delta^n`` and ``dist(X, Y) >~ delta^n`` through the cover's levels.

    Finite data always admits some constant, so three things are tested: the
    implied constant stays below ``max_constant``; the decay gap it implies
    fits inside the level budget; and the per-level ratios show no geometric
    trend (the fitted slope of log-ratio against level, accumulated over the
    levels, stays within a factor ``max_drift``).
    ``scale`` divides all lengths (use the tree diameter to normalize).
    """
    delta = Fraction(delta)
    if not 0 < delta < 1:
        raise ValueError("delta must lie in (0, 1)")
    top = cover.max_level
    per = []
    lo_all = hi_all = dist_all = None
    msgs = []
    mids = []
    dmins = []
    for n in range(top + 1):
        unit = delta ** n * scale
        ratios = [_ratio(cover.diam(n, k), unit) for k in range(cover.size(n))]
        lo, hi = min(ratios), max(ratios)
        lo_all = lo if lo_all is None or lo < lo_all else lo_all
        hi_all = hi if hi_all is None or hi > hi_all else hi_all
        dmin = None
        for br in cover.disjoint(n):
            if br is None:
                continue
            r = _ratio(br.lo, unit)
            if dmin is None or r < dmin:
                dmin = r
        if dmin is not None:
            dist_all = dmin if dist_all is None or dmin < dist_all else dist_all
            dmins.append((n, _fl(dmin)))
        per.append((n, _fl(lo), _fl(hi), None if dmin is None else _fl(dmin)))
        mids.append((n, math.sqrt(_fl(lo) * _fl(hi))))
    ok = True
    if lo_all is None or not lo_all > 0:
        ok = False
        msgs.append("a tile has zero diameter")
    const = max(hi_all, 1 / lo_all) if ok else None
    if const is not None and const > max_constant:
        ok = False
        msgs.append(f"diameter constant {float(const):.4g} exceeds {max_constant}")
    if ok and top >= 1:
        # diam(Y) / diam(X) <= (hi / lo) * delta^k for Y k levels below X; that gap must fit the budget
        spread = hi_all / lo_all
        need = 1
        while spread * delta ** need >= 1:
            need += 1
        if need > _max_gap(top):
            ok = False
            msgs.append(f"diameter bracket needs a decay gap of {need} levels; {top} levels certify at most "
                        f"{_max_gap(top)}")
    drift = _drift(mids)
    if drift > max_drift:
        ok = False
        msgs.append(f"(i) diameter/delta^n drifts by a factor {drift:.4g} across levels")
    if dist_all is not None:
        if not dist_all > 0:
            ok = False
            msgs.append("disjoint tiles at distance not certified positive")
        elif 1 / dist_all > max_constant:
            ok = False
            msgs.append(f"distance constant {float(dist_all):.4g} below 1/{max_constant}")
        ddrift = _drift(dmins)
        if ddrift > max_drift:
            ok = False
            msgs.append(f"dist/delta^n drifts by a factor {ddrift:.4g} across levels")
        drift = max(drift, ddrift)
    report = VisualReport(delta, ok, const, dist_all, per, drift, msgs)
    if ok:
        qv = check_quasivisual(cover)
        report.quasivisual = qv
        assert qv.ok, f"visual cover failed the quasi-visual check: {qv.messages}"
    return report


def _drift(points: list[tuple[int, float]]) -> float:
    """exp(|slope| * span) of a least-squares line through (level, log value)."""
    pts = [(n, math.log(v)) for n, v in points if v > 0]
    if len(pts) < 2:
        return 1.0
    xs = np.array([p[0] for p in pts], dtype=float)
    ys = np.array([p[1] for p in pts], dtype=float)
    slope = np.polyfit(xs, ys, 1)[0]
    return float(math.exp(abs(slope) * (xs.max() - xs.min())))


# ---- pairing index ------------------------------------------------------------------


@dataclass
class PairingResult:
    m: int
    diam_tile: Length
    ratio: Length
    tile_x: int
    tile_y: int


def pairing_index(cover: LevelCover, x, y) -> PairingResult:
    """Largest level at which some tile containing x meets some tile containing y."""
    if x == y:
        raise ValueError("x and y must differ")
    best = None
    for n in range(cover.max_level + 1):
        tx = cover.tiles_containing(n, x)
        ty = cover.tiles_containing(n, y)
        if not tx or not ty:
            raise ValueError(f"point not covered at level {n}")
        hit = None
        if set(tx) & set(ty):
            k = min(set(tx) & set(ty))
            hit = (k, k)
        else:
            inter = cover.pairs(n, n)
            for i in tx:
                for j in ty:
                    if (i, j) in inter:
                        hit = (i, j)
                        break
                if hit:
                    break
        if hit is None:
            break
        best = (n, hit)
    else:
        raise BudgetTooShallow(f"tiles at the deepest level {cover.max_level} still meet")
    if best is None:
        raise BudgetTooShallow("level 0 does not pair the points")
    n, (i, j) = best
    d = cover.diam(n, i)
    return PairingResult(n, d, _ratio(cover.distance(x, y), d), i, j)


# ---- distortion fit -------------------------------------------------------------------

ALPHA_GRID = tuple(Fraction(k, 20) for k in range(1, 21))


@dataclass
class DistortionFit:
    samples: int
    alpha: Fraction
    K: float
    residual: float
    per_alpha: list[tuple[Fraction, float]]
    seed: int

    def to_json(self) -> dict:
        return {
            "samples": self.samples,
            "alpha": format_rational(self.alpha),
            "alpha_decimal": f"{float(self.alpha):.2f}",
            "K": f"{self.K:.12g}",
            "residual": f"{self.residual:.6g}",
            "seed": self.seed,
            "per_alpha": [{"alpha": format_rational(a), "K": f"{k:.12g}"} for a, k in self.per_alpha],
        }


def fit_distortion(points: Sequence, d1: Callable, d2: Callable, budget: int = 5000, seed: int = 0,
                   rel_tol: float = 1e-9) -> DistortionFit:
    """Fit ``eta(t) = K max(t^alpha, t^(1/alpha))`` dominating all sampled distance-ratio pairs.

    For each alpha on the grid the minimal K is taken (never below 1, and
    snapped to 1 within ``rel_tol`` of it); the fit minimizes K, then
    maximizes alpha, treating K values within ``rel_tol`` as equal.
    """
    n = len(points)
    if n < 3:
        raise DegenerateMetric("need at least three points")
    rng = np.random.default_rng(seed)
    ts = []
    tps = []
    for _ in range(budget):
        a, b, c = rng.choice(n, size=3, replace=False).tolist()
        x, y, z = points[a], points[b], points[c]
        vals = [d1(x, y), d1(x, z), d2(x, y), d2(x, z)]
        if any(v == 0 for v in vals):
            raise DegenerateMetric(f"zero distance between distinct points {x!r}, {y!r}, {z!r}")
        ts.append(float(vals[0] / vals[1]))
        tps.append(float(vals[2] / vals[3]))
    t = np.array(ts)
    tp = np.array(tps)
    per = []
    for a in ALPHA_GRID:
        af = float(a)
        env = np.maximum(t ** af, t ** (1.0 / af))
        k = float(np.max(tp / env))
        per.append((a, 1.0 if k <= 1 + rel_tol else k))
    kmin = min(k for _, k in per)
    chosen = max((a, k) for a, k in per if k <= kmin * (1 + rel_tol))
    a, k = chosen
    af = float(a)
    env = np.maximum(t ** af, t ** (1.0 / af))
    residual = float(max(0.0, np.max(tp / env - k)))
    if residual <= rel_tol * k:
        residual = 0.0
    return DistortionFit(budget, a, k, residual, per, seed)

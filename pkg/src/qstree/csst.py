"""Exact model of the continuum self-similar tree.

The tree is the attractor of the three contractions

    g1(z) = z/2 - 1/2,   g2(z) = conj(z)/2 + 1/2,   g3(z) = i conj(z)/2 + i/2,

and its tiles are the images ``g_w(T)`` for words ``w`` over ``{1, 2, 3}``.
Everything is answered through word addresses and Gaussian-dyadic
coordinates; the finite approximants ``J_n`` are built as simplicial trees.
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from itertools import product
from typing import Iterable, Iterator

import numpy as np

from . import kernels
from .errors import BudgetExceeded, NotWordAddressed
from .exact import I_UNIT, MINUS_ONE, ONE, ZERO, DyadicPoint, Surd, format_rational
from .tree_core import GEODESIC, Decomposition, SimplicialMetricTree

Word = str
ALPHABET = "123"
DEFAULT_BUDGET_LEVEL = 12


def check_word(w: Word) -> Word:
    if any(c not in ALPHABET for c in w):
        raise ValueError(f"invalid word {w!r}")
    return w


def words_of_length(n: int) -> Iterator[Word]:
    for t in product(ALPHABET, repeat=n):
        yield "".join(t)


def words_up_to(n: int) -> Iterator[Word]:
    for k in range(n + 1):
        yield from words_of_length(k)


def _check_budget(n: int, budget_level: int) -> None:
    if n > budget_level:
        raise BudgetExceeded(f"3^{n} words exceed the budget 3^{budget_level}")


# ---- contractions -------------------------------------------------------------

def _apply_letter(k: str, z: DyadicPoint) -> DyadicPoint:
    a, b, s = z.a, z.b, z.k
    one = 1 << s
    if k == "1":
        return DyadicPoint(a - one, b, s + 1)
    if k == "2":
        return DyadicPoint(a + one, -b, s + 1)
    if k == "3":
        return DyadicPoint(b, a + one, s + 1)
    raise ValueError(f"invalid letter {k!r}")


def apply_word(w: Word, z: DyadicPoint) -> DyadicPoint:
    """``g_w(z)`` with ``g_w = g_{w1} o ... o g_{wn}``."""
    for k in reversed(w):
        z = _apply_letter(k, z)
    return z


def _invert_letter(k: str, y: DyadicPoint) -> DyadicPoint:
    a, b, s = y.a, y.b, y.k
    one = 1 << s
    if k == "1":  # 2y + 1
        return DyadicPoint(2 * a + one, 2 * b, s)
    if k == "2":  # conj(2y - 1)
        return DyadicPoint(2 * a - one, -2 * b, s)
    # 2i conj(y) - 1
    return DyadicPoint(2 * b - one, 2 * a, s)


_ANCHORS = frozenset({MINUS_ONE, ZERO, ONE, I_UNIT})


def in_attractor(z: DyadicPoint) -> bool:
    """Exact membership of a Gaussian dyadic point in the tree."""
    if z.norm_sq() > 1:
        return False
    if z in _ANCHORS:
        return True
    if z.k == 0:
        return False
    return any(in_attractor(_invert_letter(k, z)) for k in ALPHABET)


def tile_contains_point(w: Word, z: DyadicPoint) -> bool:
    for k in w:
        z = _invert_letter(k, z)
        if z.norm_sq() > 1:
            return False
    return in_attractor(z)


# Affine data of g_w: g_w(z) = (rot * z~ + shift) / 2^len, z~ = conj(z) when flipped.
_LETTER_DATA = {"1": ((1, 0), False, (-1, 0)), "2": ((1, 0), True, (1, 0)), "3": ((0, 1), True, (0, 1))}


def _gmul(p, q):
    return p[0] * q[0] - p[1] * q[1], p[0] * q[1] + p[1] * q[0]


def _child_affine(rot, flip, shift, k):
    alpha, kflip, beta = _LETTER_DATA[k]
    if flip:
        alpha = (alpha[0], -alpha[1])
        beta = (beta[0], -beta[1])
    r = _gmul(rot, alpha)
    t = _gmul(rot, beta)
    return r, flip != kflip, (2 * shift[0] + t[0], 2 * shift[1] + t[1])


def iter_word_frames(n: int) -> Iterator[tuple[Word, tuple[int, int], tuple[int, int], tuple[int, int]]]:
    """Yield ``(w, g_w(-1), g_w(0), g_w(1))`` for all words of length n, lexicographically.

    Points are integer pairs in units of ``2^-n``.
    """
    def rec(w, rot, flip, shift):
        if len(w) == n:
            yield (w, (shift[0] - rot[0], shift[1] - rot[1]), shift, (shift[0] + rot[0], shift[1] + rot[1]))
            return
        for k in ALPHABET:
            yield from rec(w + k, *_child_affine(rot, flip, shift, k))

    yield from rec("", (1, 0), False, (0, 0))


# ---- tiles ---------------------------------------------------------------------


def boundary_sides(w: Word) -> tuple[bool, bool]:
    """Which of ``g_w(-1)``, ``g_w(1)`` lie on the boundary of the tile ``T_w``."""
    left = right = False
    for k in w:
        if k == "1":
            right = True
        elif k == "2":
            left = True
        else:
            left, right = True, False
    return left, right


@dataclass(frozen=True)
class TileInfo:
    word: Word
    diameter: Fraction
    boundary: tuple[DyadicPoint, ...]
    center: DyadicPoint

    def to_json(self) -> dict:
        return {"word": self.word, "diam": format_rational(self.diameter),
                "boundary": [p.to_json() for p in self.boundary]}


def tile_diameter(w: Word) -> Fraction:
    return Fraction(2, 1 << len(w))


def tile_info(w: Word) -> TileInfo:
    check_word(w)
    left, right = boundary_sides(w)
    bnd = []
    if left:
        bnd.append(apply_word(w, MINUS_ONE))
    if right:
        bnd.append(apply_word(w, ONE))
    return TileInfo(w, tile_diameter(w), tuple(bnd), apply_word(w, ZERO))


def tiles_intersect(v: Word, w: Word) -> bool:
    """Exact intersection test for two tiles."""
    return v.startswith(w) or w.startswith(v) or _junction(v, w) is not None


def _junction(v: Word, w: Word) -> Word | None:
    """Common prefix ``u`` when ``T_v`` and ``T_w`` (neither containing the other) meet at ``g_u(0)``."""
    n = 0
    while n < len(v) and n < len(w) and v[n] == w[n]:
        n += 1
    if n == len(v) or n == len(w):
        return None
    for x in (v, w):
        tail = x[n + 1:]
        need = "2" if x[n] == "1" else "1"  # g_u(0) sits at g_{ua}(1) for a = 1, at g_{ua}(-1) otherwise
        if tail.strip(need):
            return None
    return v[:n]


def tile_intersection(v: Word, w: Word) -> DyadicPoint | None:
    """The shared point of two distinct non-nested tiles, if any."""
    u = _junction(v, w)
    return None if u is None else apply_word(u, ZERO)


# ---- branch points and metrics ---------------------------------------------------


def branch_vertices(n: int, budget_level: int = DEFAULT_BUDGET_LEVEL) -> list[tuple[Word, DyadicPoint, Fraction]]:
    """All ``(u, g_u(0), 2^-len(u))`` with ``len(u) <= n - 1``."""
    if n < 1:
        raise ValueError("n must be at least 1")
    _check_budget(n, budget_level)
    out = []
    seen = set()
    for u in words_up_to(n - 1):
        p = apply_word(u, ZERO)
        if p in seen:
            raise AssertionError(f"branch points collide at {p}")
        seen.add(p)
        out.append((u, p, Fraction(1, 1 << len(u))))
    return out


def euclidean_distance(p: DyadicPoint, q: DyadicPoint) -> Fraction:
    """Squared Euclidean distance, exact."""
    return (p - q).norm_sq()


_Q = {"1": 1, "2": -1, "3": -1}


@lru_cache(maxsize=None)
def _rho_anchor(anchor: int, w: Word, b: int = 0) -> Fraction:
    """rho(anchor, g_w(b)) for anchor, b in {-1, 0, 1}."""
    if not w:
        return Fraction(abs(anchor - b))
    if anchor == 0:
        return _rho_anchor(_Q[w[0]], w[1:], b) / 2
    own = "1" if anchor == -1 else "2"
    if w[0] == own:
        return _rho_anchor(anchor, w[1:], b) / 2
    return 1 + _rho_anchor(0, w, b)


def geodesic_distance(v: Word, w: Word, a: int = 0, b: int = 0) -> Fraction:
    """Length of the arc between ``g_v(a)`` and ``g_w(b)`` inside the tree (``a, b`` in {-1, 0, 1}).

    Strips the common prefix (scaling by 1/2 per letter), routes through 0
    when the remainders start with different letters, and uses
    ``0 = g1(1) = g2(-1) = g3(-1)`` to descend into a first-level tile.
    """
    n = 0
    while n < len(v) and n < len(w) and v[n] == w[n]:
        n += 1
    x, y = v[n:], w[n:]
    if not x:
        d = _rho_anchor(a, y, b)
    elif not y:
        d = _rho_anchor(b, x, a)
    else:
        d = _rho_anchor(0, x, a) + _rho_anchor(0, y, b)
    return d / (1 << n)


def truncation_bound(m: int) -> Fraction:
    """Certified additive error of branch diameters measured on ``J_m``."""
    return Fraction(4, 1 << m)


# ---- approximants -----------------------------------------------------------------


def build_jn(n: int, budget_level: int = DEFAULT_BUDGET_LEVEL, metric: str = GEODESIC) -> SimplicialMetricTree:
    """The approximant ``J_n``: segments ``g_w([-1, 1])`` for all words of length n, split at midpoints.

    Vertex labels carry word addresses: ``"w"`` for the midpoint ``g_w(0)``
    (any ``len(w) <= n``) and ``"w-"``/``"w+"`` for a tip ``g_w(-1)``/``g_w(1)``
    that is no midpoint.  Edge labels are ``(w, half)`` with half 0 for
    ``[g_w(-1), g_w(0)]`` and 1 for ``[g_w(0), g_w(1)]``.
    """
    _check_budget(n, budget_level)
    ids: dict[tuple[int, int], int] = {}
    tips: dict[int, str] = {}
    edges = []
    elabels = []
    length = Fraction(1, 1 << n)
    for w, left, mid, right in iter_word_frames(n):
        vid = []
        for p, tag in ((left, "-"), (mid, ""), (right, "+")):
            if p not in ids:
                ids[p] = len(ids)
                if tag:
                    tips[ids[p]] = w + tag
            vid.append(ids[p])
        edges.append((vid[0], vid[1], length))
        edges.append((vid[1], vid[2], length))
        elabels.append((w, 0))
        elabels.append((w, 1))
    den = 1 << n
    positions = {v: (Fraction(a, den), Fraction(b, den)) for (a, b), v in ids.items()}
    labels = dict(tips)
    for u in words_up_to(n):
        a, b = apply_word(u, ZERO).scaled(n)
        labels[ids[(a, b)]] = u
    return SimplicialMetricTree(range(len(ids)), edges, metric, positions, (), labels, elabels, validate=False)


def vertex_address(label: str) -> tuple[Word, int]:
    """Decode a ``J_n`` vertex label into ``(w, a)`` with the vertex equal to ``g_w(a)``."""
    if label.endswith("+"):
        return label[:-1], 1
    if label.endswith("-"):
        return label[:-1], -1
    return label, 0


def word_vertex_map(tree: SimplicialMetricTree) -> dict[Word, int]:
    """Midpoint word -> vertex id for a ``J_n`` model."""
    return {w: v for v, w in tree.labels.items() if not w.endswith(("+", "-"))}


def vertex_of_point(tree: SimplicialMetricTree, p: DyadicPoint) -> int | None:
    key = p.as_fractions()
    for v, pos in tree.positions.items():
        if pos == key:
            return v
    return None


def match_tile_word(tree: SimplicialMetricTree, edge_ids: Iterable[int]) -> Word:
    """Word ``w`` with ``T_w`` equal to the tile spanned by ``edge_ids`` in a ``J_m`` model."""
    if tree.edge_labels is None:
        raise NotWordAddressed("tree carries no word labels")
    edge_ids = list(edge_ids)
    words = [tree.edge_labels[e][0] for e in edge_ids]
    m = len(words[0])
    prefix = words[0]
    for x in words[1:]:
        k = 0
        while k < len(prefix) and prefix[k] == x[k]:
            k += 1
        prefix = prefix[:k]
    if len(edge_ids) != 2 * 3 ** (m - len(prefix)):
        raise NotWordAddressed(f"tile with {len(edge_ids)} edges is not a word tile (best prefix {prefix!r})")
    return prefix


@dataclass
class LevelBoundResult:
    passed: bool
    words: list[Word]
    witness: Word | None
    message: str


def level_bound_check(cut_words: Iterable[Word], decomposition: Decomposition) -> LevelBoundResult:
    """Check ``1 <= len(w) <= #V`` for every tile word of a decomposition of ``J_m``."""
    cut_words = set(cut_words)
    nv = len(cut_words)
    words = [match_tile_word(decomposition.tree, t.edges) for t in decomposition.tiles]
    for w in words:
        if len(w) > nv:
            return LevelBoundResult(False, words, w, f"tile {w} has level {len(w)} > #V = {nv}")
        if nv and len(w) < 1:
            return LevelBoundResult(False, words, w, "root tile survives a nonempty cut")
    return LevelBoundResult(True, words, None, "ok")


# ---- metric constants ------------------------------------------------------------


@dataclass(frozen=True)
class CsstMetrics:
    quasi_convexity: Surd
    pair: tuple[str, str]
    level_bound: int
    pairs_tested: int


def _scaled_points(words: list[Word], k: int) -> tuple[np.ndarray, np.ndarray]:
    pts = [apply_word(w, ZERO).scaled(k) for w in words]
    return np.array([p[0] for p in pts], dtype=np.int64), np.array([p[1] for p in pts], dtype=np.int64)


def jn_distance_data(m: int) -> tuple[SimplicialMetricTree, np.ndarray, np.ndarray, int]:
    """All-pairs geodesic and squared Euclidean distances between vertices of ``J_m``.

    Geodesic entries are in units of ``2^-m``, squared Euclidean ones in units of ``4^-m``.
    """
    jm = build_jn(m)
    indptr, nbr, _, weight, scale, _, _ = jm.csr
    assert scale == 1 << m
    rho = kernels.tree_distance_matrix(indptr, nbr, weight, np.arange(len(jm)))
    den = 1 << m
    x = np.array([int(jm.positions[v][0] * den) for v in jm.ids], dtype=np.int64)
    y = np.array([int(jm.positions[v][1] * den) for v in jm.ids], dtype=np.int64)
    eu = np.subtract.outer(x, x) ** 2 + np.subtract.outer(y, y) ** 2
    return jm, rho, eu, den


def csst_metrics(level_bound: int) -> CsstMetrics:
    """Quasi-convexity constant ``L = max rho(p,q)/|p-q|`` over all vertex pairs of ``J_level_bound``.

    Vertices include the tips ``g_w(+-1)``; over midpoints alone the supremum
    is only approached in the limit.
    """
    jm, rho, eu, _ = jn_distance_data(level_bound)
    num = rho * rho
    i, j = kernels.safe_ratio_argext(num, eu, maximize=True)
    value = Surd(Fraction(int(num[i, j]), int(eu[i, j])))
    n = len(jm)
    return CsstMetrics(value, (jm.labels[jm.ids[i]], jm.labels[jm.ids[j]]), level_bound, n * (n - 1) // 2)


def separation_ratio(level_bound: int) -> tuple[Surd, tuple[Word, Word]]:
    """min |g_v(0) - g_w(0)| / min(2^-len v, 2^-len w) over distinct words of length ``<= level_bound``."""
    words = list(words_up_to(level_bound))
    k = level_bound + 1
    x, y = _scaled_points(words, k)
    eu = np.subtract.outer(x, x) ** 2 + np.subtract.outer(y, y) ** 2
    h = np.array([1 << (k - len(w)) for w in words], dtype=np.int64)
    hm = np.minimum.outer(h, h)
    i, j = kernels.safe_ratio_argext(eu, hm * hm, maximize=False)
    return Surd(Fraction(int(eu[i, j]), int(hm[i, j]) ** 2)), (words[i], words[j])


# ---- rendering ---------------------------------------------------------------------


def _generation(w: Word) -> int:
    """Level at which the segment containing ``g_w([-1, 1])`` first appears."""
    k = w.rfind("3")
    return k + 1


def render_svg(n: int, budget_level: int = DEFAULT_BUDGET_LEVEL) -> str:
    """SVG drawing of ``J_n``; one polyline per edge, stroke width halves with each generation."""
    _check_budget(n, budget_level)
    den = 1 << n
    lines = [
        '<svg xmlns="http://www.w3.org/2000/svg" viewBox="-1.1 -1.15 2.2 1.25" width="880" height="500">',
        '<g fill="none" stroke="black" stroke-linecap="round">',
    ]

    def fmt(v):
        return f"{v / den:.6f}".rstrip("0").rstrip(".") if v else "0"

    for w, left, mid, right in iter_word_frames(n):
        width = 0.02 / (1 << _generation(w))
        for a, b in ((left, mid), (mid, right)):
            lines.append(
                f'<polyline points="{fmt(a[0])},{fmt(-a[1])} {fmt(b[0])},{fmt(-b[1])}" stroke-width="{width:.6g}"/>'
            )
    lines.append("</g>")
    lines.append("</svg>")
    return "\n".join(lines) + "\n"

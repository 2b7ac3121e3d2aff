"""Input trees: approximants, perturbed copies, random trivalent trees and discretized CRT samples."""
from __future__ import annotations

import csv
import io
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

import numpy as np

from .csst import DEFAULT_BUDGET_LEVEL, build_jn
from .errors import BudgetExceeded, DegenerateTree, NotAnExcursion
from .tree_core import GEODESIC, SimplicialMetricTree

MAX_RANDOM_SIZE = 100_000
EXCURSION_BITS = 20


def _dyadic(rng, lo: Fraction, hi: Fraction, bits: int) -> Fraction:
    """A uniform multiple of ``2^-bits`` in [lo, hi] (endpoints rounded inward)."""
    den = 1 << bits
    a = -((-lo.numerator * den) // lo.denominator)
    b = (hi.numerator * den) // hi.denominator
    if b < a:
        raise ValueError(f"no multiple of 2^-{bits} in [{lo}, {hi}]")
    return Fraction(int(rng.integers(a, b + 1)), den)


def perturbed(n: int, factor_range=(1, 2), seed: int = 0, bits: int = 8,
              budget_level: int = DEFAULT_BUDGET_LEVEL) -> SimplicialMetricTree:
    """``J_n`` with each edge length multiplied by an independent dyadic factor from ``factor_range``."""
    lo, hi = (Fraction(x) for x in factor_range)
    if not 0 < lo <= hi:
        raise ValueError("factor range must be positive and ordered")
    base = build_jn(n, budget_level)
    rng = np.random.default_rng(seed)
    factors = [_dyadic(rng, lo, hi, bits) for _ in base.edges]
    edges = [(e.u, e.v, e.length * f) for e, f in zip(base.edges, factors)]
    keep = base.positions if all(f == 1 for f in factors) else None
    return SimplicialMetricTree(base.ids, edges, GEODESIC, keep, (), base.labels, base.edge_labels,
                                validate=False)


def random_trivalent(size: int, seed: int = 0, bits: int = 8) -> SimplicialMetricTree:
    """Start from a segment and sprout ``size`` leaves, each from the midpoint of a random edge.

    Every sprout creates one branch point of degree 3, so the result has
    exactly ``size`` branch points.  Leaf lengths are multiples of ``2^-bits``
    in ``(0, 1]``.
    """
    if size < 0:
        raise ValueError("size must be non-negative")
    if size > MAX_RANDOM_SIZE:
        raise BudgetExceeded(f"size {size} exceeds {MAX_RANDOM_SIZE}")
    rng = np.random.default_rng(seed)
    den = 1 << bits

    def length():
        return Fraction(int(rng.integers(1, den + 1)), den)

    edges: list[list] = [[0, 1, length()]]
    nxt = 2
    for _ in range(size):
        k = int(rng.integers(len(edges)))
        u, v, ln = edges[k]
        mid, leaf = nxt, nxt + 1
        nxt += 2
        edges[k] = [u, mid, ln / 2]
        edges.append([mid, v, ln / 2])
        edges.append([mid, leaf, length()])
    return SimplicialMetricTree(range(nxt), [tuple(e) for e in edges], GEODESIC)


def make_model(kind: str, **params) -> SimplicialMetricTree:
    """``kind`` is ``jn`` (n), ``perturbed`` (n, factor_range, seed, bits) or ``random_trivalent`` (size, seed)."""
    if kind == "jn":
        return build_jn(params["n"], params.get("budget_level", DEFAULT_BUDGET_LEVEL))
    if kind == "perturbed":
        return perturbed(**params)
    if kind == "random_trivalent":
        return random_trivalent(**params)
    raise ValueError(f"unknown model kind {kind!r}")


# ---- excursions and the CRT ---------------------------------------------------------


@dataclass(frozen=True)
class ExcursionSample:
    m: int
    values: tuple[float, ...]
    seed: int | None = None

    def __post_init__(self):
        if len(self.values) != self.m + 1:
            raise NotAnExcursion(f"expected {self.m + 1} values, got {len(self.values)}")

    def validate(self) -> None:
        if self.values[0] != 0 or self.values[-1] != 0:
            raise NotAnExcursion("an excursion starts and ends at 0")
        if min(self.values) < 0:
            raise NotAnExcursion("an excursion is non-negative")

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["t", "e"])
        for j, v in enumerate(self.values):
            w.writerow([repr(j / self.m), repr(v)])
        return buf.getvalue()

    @classmethod
    def from_csv(cls, text: str, seed: int | None = None) -> ExcursionSample:
        rows = list(csv.reader(io.StringIO(text)))
        vals = tuple(float(r[1]) for r in rows[1:] if r)
        return cls(len(vals) - 1, vals, seed)


def brownian_excursion(m: int, seed: int = 0) -> ExcursionSample:
    """Cyclic shift of a Gaussian random-walk bridge at its minimum, scaled by ``m^-1/2``.

    Values are rounded to multiples of ``2^-20`` so that later arithmetic on
    them is exact.
    """
    if m < 2 or m & (m - 1):
        raise ValueError("m must be a power of two (at least 2)")
    rng = np.random.default_rng(seed)
    steps = rng.standard_normal(m)
    walk = np.concatenate([[0.0], np.cumsum(steps)])
    bridge = walk - np.arange(m + 1) / m * walk[-1]
    tau = int(np.argmin(bridge[:m]))
    shifted = np.array([bridge[(tau + j) % m] - bridge[tau] for j in range(m + 1)])
    scaled = shifted / np.sqrt(m)
    q = float(1 << EXCURSION_BITS)
    vals = np.maximum(np.round(scaled * q) / q, 0.0)
    vals[0] = vals[-1] = 0.0
    return ExcursionSample(m, tuple(float(v) for v in vals), seed)


def excursion_distance(values: Sequence, s: int, t: int) -> Fraction:
    """``e(s) + e(t) - 2 min e`` over the grid points between s and t (exact)."""
    a, b = min(s, t), max(s, t)
    vals = [Fraction(v) for v in values[a:b + 1]]
    return Fraction(values[s]) + Fraction(values[t]) - 2 * min(vals)


def crt_quotient(sample: ExcursionSample, eps=0, contract: bool = True) -> SimplicialMetricTree:
    """Quotient tree of the grid under ``d_e = 0``.

    Grid points are grouped into classes (equal value, nothing lower in
    between); each class hangs below the nearer, higher of its two
    lower-valued neighbours found by a monotone stack.  Edges of length at
    most ``eps`` are contracted when ``eps > 0``; with ``contract`` set,
    vertices of degree 2 are removed.  Vertex labels hold the first grid index
    of each class.
    """
    sample.validate()
    vals = [Fraction(v) for v in sample.values]
    cls = list(range(len(vals)))
    parent: dict[int, int] = {}
    stack: list[int] = []
    for j, v in enumerate(vals):
        while stack and vals[stack[-1]] > v:
            p = stack.pop()
            if stack and vals[stack[-1]] > v:
                parent[p] = stack[-1]
            else:
                parent[p] = -1 - j
        if stack and vals[stack[-1]] == v:
            cls[j] = stack[-1]
        else:
            stack.append(j)
    for p, q in list(parent.items()):
        if q < 0:
            parent[p] = cls[-1 - q]
    nodes = sorted(set(cls))
    if len(nodes) < 2:
        raise DegenerateTree("the quotient is a single point")
    eps = Fraction(eps)
    if eps > 0:
        merged = {}

        def find(x):
            while x in merged:
                x = merged[x]
            return x

        for p in sorted(parent, key=lambda x: vals[x]):
            q = find(parent[p])
            if vals[p] - vals[q] <= eps:
                merged[p] = q
        nodes = [x for x in nodes if x not in merged]
        parent = {p: find(q) for p, q in parent.items() if p not in merged}
    edges = [(p, q, vals[p] - vals[q]) for p, q in sorted(parent.items())]
    labels = {x: str(x) for x in nodes}
    tree = SimplicialMetricTree(nodes, edges, GEODESIC, None, (), labels)
    return _contract_degree_two(tree) if contract else tree


def grid_classes(sample: ExcursionSample) -> list[int]:
    """First grid index of the class of every grid point."""
    vals = [Fraction(v) for v in sample.values]
    cls = list(range(len(vals)))
    stack: list[int] = []
    for j, v in enumerate(vals):
        while stack and vals[stack[-1]] > v:
            stack.pop()
        if stack and vals[stack[-1]] == v:
            cls[j] = stack[-1]
        else:
            stack.append(j)
    return cls


def _contract_degree_two(tree: SimplicialMetricTree) -> SimplicialMetricTree:
    adj: dict[int, dict[int, Fraction]] = {v: {} for v in tree.ids}
    for e in tree.edges:
        adj[e.u][e.v] = e.length
        adj[e.v][e.u] = e.length
    for v in list(adj):
        if len(adj[v]) == 2:
            (a, la), (b, lb) = adj[v].items()
            if b in adj[a]:
                continue
            del adj[a][v], adj[b][v]
            adj[a][b] = adj[b][a] = la + lb
            del adj[v]
    ids = sorted(adj)
    edges = sorted({(min(u, v), max(u, v), ln) for u in adj for v, ln in adj[u].items()})
    labels = {v: tree.labels[v] for v in ids} if tree.labels else None
    return SimplicialMetricTree(ids, edges, GEODESIC, None, (), labels)

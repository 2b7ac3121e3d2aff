"""Finite simplicial metric trees with exact lengths.

A tree is stored as integer vertex ids, edges with rational lengths and,
in the Euclidean-embedded mode, rational plane positions.  All predicates use
exact arithmetic; geodesic quantities are :class:`~fractions.Fraction` and
Euclidean distances are :class:`~qstree.exact.Surd` values.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property, reduce
from typing import Iterable, Sequence, Union

import numpy as np

from . import kernels
from .errors import DegenerateTree, InvalidPoint, LeafInCutSet, NotASuperset
from .exact import Surd

Length = Union[Fraction, Surd]
GEODESIC = "geodesic"
EUCLIDEAN = "euclidean"


@dataclass(frozen=True, order=True)
class TreePoint:
    """A vertex, or a point in the interior of an edge at parameter ``t`` from its first endpoint."""

    vertex: int | None = None
    edge: int | None = None
    t: Fraction = Fraction(0)

    @classmethod
    def at(cls, vertex: int) -> TreePoint:
        return cls(vertex=vertex)

    @classmethod
    def on_edge(cls, edge: int, t) -> TreePoint:
        t = Fraction(t)
        if not 0 < t < 1:
            raise InvalidPoint("edge parameter must lie strictly between 0 and 1")
        return cls(edge=edge, t=t)

    @property
    def is_vertex(self) -> bool:
        return self.vertex is not None


PointLike = Union[int, TreePoint]


def _as_point(p: PointLike) -> TreePoint:
    if isinstance(p, TreePoint):
        return p
    return TreePoint(vertex=int(p))


@dataclass(frozen=True)
class Edge:
    u: int
    v: int
    length: Fraction


class SimplicialMetricTree:
    """Immutable finite tree with exact edge lengths.

    :param vertex_ids: distinct integer ids
    :param edges: ``(u, v, length)`` triples
    :param metric: ``"geodesic"`` (path metric) or ``"euclidean"`` (straight edges in the plane)
    :param positions: map id -> (x, y); required in Euclidean mode
    :param marks: distinguished vertex ids carried through serialization
    :param labels: optional per-vertex annotations (e.g. word addresses)
    :param edge_labels: optional per-edge annotations
    """

    def __init__(
        self,
        vertex_ids: Sequence[int],
        edges: Sequence[tuple[int, int, object]],
        metric: str = GEODESIC,
        positions: dict[int, tuple[Fraction, Fraction]] | None = None,
        marks: Sequence[int] = (),
        labels: dict[int, str] | None = None,
        edge_labels: Sequence[object] | None = None,
        validate: bool = True,
    ):
        if metric not in (GEODESIC, EUCLIDEAN):
            raise ValueError(f"unknown metric {metric!r}")
        self.metric = metric
        self.ids: tuple[int, ...] = tuple(int(v) for v in vertex_ids)
        self.index: dict[int, int] = {v: i for i, v in enumerate(self.ids)}
        self.edges: tuple[Edge, ...] = tuple(Edge(int(u), int(v), Fraction(length)) for u, v, length in edges)
        self.positions = dict(positions) if positions else None
        self.marks: tuple[int, ...] = tuple(marks)
        self.labels: dict[int, str] = dict(labels) if labels else {}
        self.edge_labels = tuple(edge_labels) if edge_labels is not None else None
        if validate:
            self._validate()

    def _validate(self) -> None:
        n = len(self.ids)
        if n == 0:
            raise DegenerateTree("tree needs at least one vertex")
        if len(self.index) != n:
            raise DegenerateTree("duplicate vertex ids")
        if len(self.edges) != n - 1:
            raise DegenerateTree(f"{n} vertices need {n - 1} edges, got {len(self.edges)}")
        parent = list(range(n))

        def find(a):
            while parent[a] != a:
                parent[a] = parent[parent[a]]
                a = parent[a]
            return a

        for e in self.edges:
            if e.u not in self.index or e.v not in self.index:
                raise DegenerateTree(f"edge {e.u}-{e.v} references an unknown vertex")
            if e.length <= 0:
                raise DegenerateTree(f"edge {e.u}-{e.v} has non-positive length")
            a, b = find(self.index[e.u]), find(self.index[e.v])
            if a == b:
                raise DegenerateTree("edges contain a cycle")
            parent[a] = b
        if self.metric == EUCLIDEAN:
            if self.positions is None or any(v not in self.positions for v in self.ids):
                raise DegenerateTree("euclidean mode needs a position for every vertex")
            for e in self.edges:
                if self._pos_dist_sq(e.u, e.v) != e.length * e.length:
                    raise DegenerateTree(f"edge {e.u}-{e.v}: length does not match its straight segment")
        for m in self.marks:
            if m not in self.index:
                raise DegenerateTree(f"mark {m} is not a vertex")
        if self.edge_labels is not None and len(self.edge_labels) != len(self.edges):
            raise DegenerateTree("edge_labels must align with edges")

    # ---- structure -------------------------------------------------------------

    def __len__(self) -> int:
        return len(self.ids)

    def __repr__(self) -> str:
        return f"SimplicialMetricTree({len(self.ids)} vertices, {self.metric})"

    @cached_property
    def csr(self):
        """CSR adjacency over vertex indices: ``(indptr, nbr, edge_of, weight, scale)``.

        ``weight`` holds integer edge lengths in units of ``1/scale``.
        """
        n = len(self.ids)
        m = len(self.edges)
        eu = np.fromiter((self.index[e.u] for e in self.edges), dtype=np.int64, count=m)
        ev = np.fromiter((self.index[e.v] for e in self.edges), dtype=np.int64, count=m)
        scale = reduce(math.lcm, {e.length.denominator for e in self.edges}, 1)
        wint = [int(e.length * scale) for e in self.edges]
        deg = np.bincount(np.concatenate([eu, ev]), minlength=n) if m else np.zeros(n, dtype=np.int64)
        indptr = np.zeros(n + 1, dtype=np.int64)
        np.cumsum(deg, out=indptr[1:])
        src = np.concatenate([eu, ev])
        dst = np.concatenate([ev, eu])
        eid = np.concatenate([np.arange(m), np.arange(m)])
        order = np.argsort(src, kind="stable")
        nbr = dst[order].astype(np.int64)
        edge_of = eid[order].astype(np.int64)
        if max(wint, default=0) < (1 << 62) // max(m, 1):
            weight = np.asarray(wint, dtype=np.int64)[edge_of] if m else np.zeros(0, dtype=np.int64)
        else:
            weight = np.asarray([wint[k] for k in edge_of], dtype=object)
        return indptr, nbr, edge_of, weight, scale, eu, ev

    @cached_property
    def _adj(self) -> list[list[tuple[int, int]]]:
        indptr, nbr, edge_of = self.csr[:3]
        ip = indptr.tolist()
        nb = nbr.tolist()
        eo = edge_of.tolist()
        return [list(zip(nb[ip[i]:ip[i + 1]], eo[ip[i]:ip[i + 1]])) for i in range(len(self.ids))]

    def degree(self, v: int) -> int:
        return len(self._adj[self.index[v]])

    def neighbors(self, v: int) -> list[int]:
        return [self.ids[j] for j, _ in self._adj[self.index[v]]]

    def incident_edges(self, v: int) -> list[int]:
        return [e for _, e in self._adj[self.index[v]]]

    @cached_property
    def leaves(self) -> tuple[int, ...]:
        return tuple(v for i, v in enumerate(self.ids) if len(self._adj[i]) == 1)

    @cached_property
    def branch_points(self) -> tuple[int, ...]:
        return tuple(v for i, v in enumerate(self.ids) if len(self._adj[i]) >= 3)

    @cached_property
    def is_trivalent(self) -> bool:
        return all(len(a) <= 3 for a in self._adj)

    @cached_property
    def _rooted(self):
        """BFS from index 0: parent index, parent edge, hop depth, and integer root distance."""
        n = len(self.ids)
        weight = self.csr[3]
        indptr = self.csr[0].tolist()
        wl = [int(x) for x in weight]
        parent = [-1] * n
        pedge = [-1] * n
        depth = [0] * n
        rdist = [0] * n
        seen = [False] * n
        seen[0] = True
        order = [0]
        adj = self._adj
        for v in order:
            base = indptr[v]
            for off, (u, e) in enumerate(adj[v]):
                if not seen[u]:
                    seen[u] = True
                    parent[u] = v
                    pedge[u] = e
                    depth[u] = depth[v] + 1
                    rdist[u] = rdist[v] + wl[base + off]
                    order.append(u)
        return parent, pedge, depth, rdist, order

    # ---- points and positions -------------------------------------------------

    def check_point(self, p: PointLike) -> TreePoint:
        p = _as_point(p)
        if p.is_vertex:
            if p.vertex not in self.index:
                raise InvalidPoint(f"unknown vertex {p.vertex}")
        elif p.edge is None or not 0 <= p.edge < len(self.edges) or not 0 < p.t < 1:
            raise InvalidPoint(f"invalid edge point {p}")
        return p

    def position(self, p: PointLike) -> tuple[Fraction, Fraction]:
        if self.positions is None:
            raise InvalidPoint("tree has no embedding")
        p = self.check_point(p)
        if p.is_vertex:
            return self.positions[p.vertex]
        e = self.edges[p.edge]
        (x0, y0), (x1, y1) = self.positions[e.u], self.positions[e.v]
        return x0 + p.t * (x1 - x0), y0 + p.t * (y1 - y0)

    def _pos_dist_sq(self, u: int, v: int) -> Fraction:
        (x0, y0), (x1, y1) = self.positions[u], self.positions[v]
        return (x0 - x1) ** 2 + (y0 - y1) ** 2

    # ---- distances ------------------------------------------------------------

    def lca_index(self, i: int, j: int) -> int:
        parent, _, depth, _, _ = self._rooted
        while depth[i] > depth[j]:
            i = parent[i]
        while depth[j] > depth[i]:
            j = parent[j]
        while i != j:
            i, j = parent[i], parent[j]
        return i

    def geodesic(self, u: int, v: int) -> Fraction:
        """Path-metric distance between two vertices."""
        i, j = self.index[u], self.index[v]
        rdist = self._rooted[3]
        c = self.lca_index(i, j)
        return Fraction(rdist[i] + rdist[j] - 2 * rdist[c], self.csr[4])

    def dist_sq(self, u: int, v: int) -> Fraction:
        if self.metric == EUCLIDEAN:
            return self._pos_dist_sq(u, v)
        g = self.geodesic(u, v)
        return g * g

    def distance(self, u: int, v: int) -> Length:
        if self.metric == EUCLIDEAN:
            return Surd(self._pos_dist_sq(u, v))
        return self.geodesic(u, v)

    def vertex_path(self, u: int, v: int) -> list[int]:
        parent = self._rooted[0]
        i, j = self.index[u], self.index[v]
        c = self.lca_index(i, j)
        left = []
        while i != c:
            left.append(i)
            i = parent[i]
        right = []
        while j != c:
            right.append(j)
            j = parent[j]
        return [self.ids[k] for k in left + [c] + right[::-1]]

    @cached_property
    def diameter(self) -> Length:
        if self.metric == EUCLIDEAN:
            return euclidean_set_diameter([self.positions[v] for v in self.ids])
        return self.subtree_diameter(range(len(self.edges)))

    def subtree_diameter(self, edge_ids: Iterable[int]) -> Length:
        """Diameter of the subtree spanned by ``edge_ids`` (assumed connected)."""
        edge_ids = list(edge_ids)
        if not edge_ids:
            return Fraction(0) if self.metric == GEODESIC else Surd(0)
        if self.metric == EUCLIDEAN:
            pts = {}
            for e in edge_ids:
                ed = self.edges[e]
                pts[ed.u] = self.positions[ed.u]
                pts[ed.v] = self.positions[ed.v]
            return euclidean_set_diameter(list(pts.values()))
        wint = self._int_lengths
        eu, ev = self._edge_ends
        adj: dict[int, list[tuple[int, int]]] = {}
        for e in edge_ids:
            u, v, w = eu[e], ev[e], wint[e]
            adj.setdefault(u, []).append((v, w))
            adj.setdefault(v, []).append((u, w))

        def far(src):
            dist = {src: 0}
            stack = [src]
            while stack:
                x = stack.pop()
                dx = dist[x]
                for y, w in adj[x]:
                    if y not in dist:
                        dist[y] = dx + w
                        stack.append(y)
            return max(dist.items(), key=lambda kv: (kv[1], -kv[0]))

        a, _ = far(eu[edge_ids[0]])
        _, d = far(a)
        return Fraction(d, self.csr[4])

    @cached_property
    def _int_lengths(self) -> list[int]:
        scale = self.csr[4]
        return [int(e.length * scale) for e in self.edges]

    @cached_property
    def _edge_ends(self) -> tuple[list[int], list[int]]:
        return [e.u for e in self.edges], [e.v for e in self.edges]

    # ---- branch data ------------------------------------------------------------

    @cached_property
    def _geodesic_branch_table(self) -> list[int]:
        indptr, nbr, _, weight, _, _, _ = self.csr
        return kernels.branch_diameters(indptr, nbr, weight).tolist()

    def branch_diameters_of(self, v: int) -> list[tuple[int, Length]]:
        """``(neighbor id, branch diameter)`` for every branch of vertex ``v``."""
        i = self.index[v]
        if self.metric == GEODESIC:
            indptr = self.csr[0]
            scale = self.csr[4]
            table = self._geodesic_branch_table
            lo = int(indptr[i])
            return [(self.ids[j], Fraction(table[lo + off], scale)) for off, (j, _) in enumerate(self._adj[i])]
        out = []
        for j, e in self._adj[i]:
            verts = self._component_vertices(i, j)
            out.append((self.ids[j], euclidean_set_diameter([self.positions[self.ids[k]] for k in verts])))
        return out

    def _component_vertices(self, i: int, j: int) -> list[int]:
        """Indices of the closure of the component of ``T - {i}`` containing ``j``."""
        seen = {i, j}
        stack = [j]
        while stack:
            x = stack.pop()
            for y, _ in self._adj[x]:
                if y not in seen:
                    seen.add(y)
                    stack.append(y)
        return sorted(seen)

    def height(self, v: int) -> Length | None:
        ds = sorted((d for _, d in self.branch_diameters_of(v)), reverse=True)
        return ds[2] if len(ds) >= 3 else None

    @cached_property
    def heights(self) -> dict[int, Length]:
        """Height of every branch point."""
        return {v: self.height(v) for v in self.branch_points}

    # ---- modification -----------------------------------------------------------

    def with_points(self, points: Sequence[PointLike]) -> tuple[SimplicialMetricTree, list[int]]:
        """Subdivide edges so every given point is a vertex; returns the new tree and the vertex ids."""
        pts = [self.check_point(p) for p in points]
        by_edge: dict[int, set[Fraction]] = {}
        for p in pts:
            if not p.is_vertex:
                by_edge.setdefault(p.edge, set()).add(p.t)
        if not by_edge:
            return self, [p.vertex for p in pts]
        next_id = max(self.ids) + 1
        new_ids = list(self.ids)
        new_pos = dict(self.positions) if self.positions is not None else None
        new_edges = []
        new_elabels = [] if self.edge_labels is not None else None
        made: dict[tuple[int, Fraction], int] = {}
        for k, e in enumerate(self.edges):
            ts = sorted(by_edge.get(k, ()))
            if not ts:
                new_edges.append((e.u, e.v, e.length))
                if new_elabels is not None:
                    new_elabels.append(self.edge_labels[k])
                continue
            chain = [e.u]
            for t in ts:
                made[(k, t)] = next_id
                chain.append(next_id)
                new_ids.append(next_id)
                if new_pos is not None:
                    new_pos[next_id] = self.position(TreePoint(edge=k, t=t))
                next_id += 1
            chain.append(e.v)
            params = [Fraction(0)] + ts + [Fraction(1)]
            for a, b, ta, tb in zip(chain, chain[1:], params, params[1:]):
                new_edges.append((a, b, e.length * (tb - ta)))
                if new_elabels is not None:
                    new_elabels.append(self.edge_labels[k])
        tree = SimplicialMetricTree(new_ids, new_edges, self.metric, new_pos, self.marks, self.labels,
                                    new_elabels, validate=False)
        return tree, [p.vertex if p.is_vertex else made[(p.edge, p.t)] for p in pts]

    def scaled(self, factor) -> SimplicialMetricTree:
        """Copy with all lengths (and positions) multiplied by a positive rational."""
        factor = Fraction(factor)
        pos = None
        if self.positions is not None:
            pos = {v: (x * factor, y * factor) for v, (x, y) in self.positions.items()}
        return SimplicialMetricTree(self.ids, [(e.u, e.v, e.length * factor) for e in self.edges], self.metric,
                                    pos, self.marks, self.labels, self.edge_labels, validate=False)


def euclidean_set_diameter(points: Sequence[tuple[Fraction, Fraction]]) -> Surd:
    """Exact diameter of a finite planar point set via its convex hull."""
    pts = sorted(set(points))
    if len(pts) < 2:
        return Surd(0)
    den = reduce(math.lcm, (c.denominator for p in pts for c in p), 1)
    ip = [(int(x * den), int(y * den)) for x, y in pts]

    def cross(o, a, b):
        return (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])

    lower: list[tuple[int, int]] = []
    for p in ip:
        while len(lower) >= 2 and cross(lower[-2], lower[-1], p) <= 0:
            lower.pop()
        lower.append(p)
    upper: list[tuple[int, int]] = []
    for p in reversed(ip):
        while len(upper) >= 2 and cross(upper[-2], upper[-1], p) <= 0:
            upper.pop()
        upper.append(p)
    hull = lower[:-1] + upper[:-1] or ip
    best = 0
    for a in range(len(hull)):
        ax, ay = hull[a]
        for b in range(a + 1, len(hull)):
            dx, dy = ax - hull[b][0], ay - hull[b][1]
            d = dx * dx + dy * dy
            if d > best:
                best = d
    return Surd(Fraction(best, den * den))


# ---- arcs -------------------------------------------------------------------------


@dataclass(frozen=True)
class Arc:
    trace: tuple[TreePoint, ...]
    length: Fraction
    diameter: Length


def arc(tree: SimplicialMetricTree, x: PointLike, y: PointLike) -> Arc:
    """The unique arc from ``x`` to ``y`` with its length and metric diameter."""
    x, y = tree.check_point(x), tree.check_point(y)
    if x == y:
        zero = Fraction(0) if tree.metric == GEODESIC else Surd(0)
        return Arc((x,), Fraction(0), zero)
    sub, (vx, vy) = tree.with_points([x, y])
    path = sub.vertex_path(vx, vy)
    back = {vx: x, vy: y}
    trace = tuple(back.get(v, TreePoint(vertex=v)) for v in path)
    length = sum((sub.geodesic(a, b) for a, b in zip(path, path[1:])), Fraction(0))
    if tree.metric == GEODESIC:
        diam: Length = length
    else:
        diam = euclidean_set_diameter([sub.positions[v] for v in path])
    return Arc(trace, length, diam)


# ---- heights ----------------------------------------------------------------------


@dataclass(frozen=True)
class HeightRecord:
    point: TreePoint
    branch_diameters: tuple[Length, ...]
    height: Length | None


def branches_and_height(tree: SimplicialMetricTree, p: PointLike) -> HeightRecord:
    p = tree.check_point(p)
    if len(tree) < 2:
        raise DegenerateTree("need at least two points")
    if p.is_vertex:
        ds = sorted((d for _, d in tree.branch_diameters_of(p.vertex)), reverse=True)
    else:
        sub, (v,) = tree.with_points([p])
        ds = sorted((d for _, d in sub.branch_diameters_of(v)), reverse=True)
    return HeightRecord(p, tuple(ds), ds[2] if len(ds) >= 3 else None)


# ---- decompositions -------------------------------------------------------------


@dataclass(frozen=True)
class Tile:
    index: int
    edges: tuple[int, ...]
    boundary: tuple[int, ...]

    @property
    def is_leaf_tile(self) -> bool:
        return len(self.boundary) == 1

    @property
    def is_edge_tile(self) -> bool:
        return len(self.boundary) == 2


@dataclass
class Decomposition:
    tree: SimplicialMetricTree
    cut: tuple[int, ...]
    tiles: list[Tile]
    edge_label: np.ndarray = field(repr=False)

    @cached_property
    def cut_set(self) -> frozenset[int]:
        return frozenset(self.cut)

    def tiles_at(self, v: int) -> list[int]:
        """Indices of the tiles containing vertex ``v``."""
        return sorted({int(self.edge_label[e]) for e in self.tree.incident_edges(v)})

    def tile_vertices(self, k: int) -> set[int]:
        out = set()
        for e in self.tiles[k].edges:
            ed = self.tree.edges[e]
            out.add(ed.u)
            out.add(ed.v)
        return out

    @cached_property
    def diameters(self) -> list[Length]:
        return [self.tree.subtree_diameter(t.edges) for t in self.tiles]


def decompose(tree: SimplicialMetricTree, cut: Iterable[PointLike]) -> Decomposition:
    """Tiles are the closures of the components of ``T - cut``."""
    pts = [tree.check_point(p) for p in cut]
    if any(not p.is_vertex for p in pts):
        tree, vids = tree.with_points(pts)
    else:
        vids = [p.vertex for p in pts]
    cut_ids = tuple(sorted(set(vids)))
    for v in cut_ids:
        if tree.degree(v) <= 1:
            raise LeafInCutSet(f"vertex {v} is a leaf")
    indptr, nbr, edge_of, _, _, eu, ev = tree.csr
    mask = np.zeros(len(tree), dtype=np.uint8)
    for v in cut_ids:
        mask[tree.index[v]] = 1
    labels = kernels.cut_components(indptr, nbr, edge_of, eu, ev, mask)
    groups: list[list[int]] = [[] for _ in range(int(labels.max()) + 1 if len(labels) else 0)]
    for e, lab in enumerate(labels.tolist()):
        groups[lab].append(e)
    bnd: list[set[int]] = [set() for _ in groups]
    for v in cut_ids:
        for e in tree.incident_edges(v):
            bnd[int(labels[e])].add(v)
    tiles = [Tile(k, tuple(g), tuple(sorted(b))) for k, (g, b) in enumerate(zip(groups, bnd))]
    return Decomposition(tree, cut_ids, tiles, labels)


@dataclass
class Refinement:
    parent: list[int]
    children: list[list[int]]
    relative_boundary: list[tuple[int, ...]]


def refine(tree: SimplicialMetricTree, coarse: Decomposition, fine_cut: Iterable[PointLike]) -> tuple[Decomposition, Refinement]:
    fine = decompose(tree, fine_cut)
    if fine.tree is not coarse.tree and len(fine.tree) != len(coarse.tree):
        raise InvalidPoint("refinement points must be vertices of the coarse tree")
    missing = set(coarse.cut) - set(fine.cut)
    if missing:
        raise NotASuperset(f"coarse cut points missing from the fine cut: {sorted(missing)}")
    return fine, containment(coarse, fine)


def containment(coarse: Decomposition, fine: Decomposition) -> Refinement:
    """Map each fine tile into the coarse tile containing it and check exact unions."""
    parent = []
    children: list[list[int]] = [[] for _ in coarse.tiles]
    for t in fine.tiles:
        owners = {int(coarse.edge_label[e]) for e in t.edges}
        if len(owners) != 1:
            raise NotASuperset(f"fine tile {t.index} straddles coarse tiles {sorted(owners)}")
        (o,) = owners
        parent.append(o)
        children[o].append(t.index)
    for k, ch in enumerate(children):
        if sum(len(fine.tiles[c].edges) for c in ch) != len(coarse.tiles[k].edges):
            raise NotASuperset(f"coarse tile {k} is not the union of its fine tiles")
    cset = coarse.cut_set
    rel = [tuple(b for b in t.boundary if b not in cset) for t in fine.tiles]
    return Refinement(parent, children, rel)


# ---- centers ----------------------------------------------------------------------


@dataclass(frozen=True)
class Center:
    point: TreePoint
    height_lower_bound: Length | None


def center(tree: SimplicialMetricTree, x: PointLike, y: PointLike, z: PointLike) -> Center:
    pts = [tree.check_point(p) for p in (x, y, z)]
    sub, vids = tree.with_points(pts)
    ix = [sub.index[v] for v in vids]
    depth = sub._rooted[2]
    cands = [sub.lca_index(ix[0], ix[1]), sub.lca_index(ix[1], ix[2]), sub.lca_index(ix[0], ix[2])]
    c = sub.ids[max(cands, key=lambda k: depth[k])]
    back = dict(zip(vids, pts))
    point = back.get(c, TreePoint(vertex=c))
    bound = None
    if all(p.is_vertex and tree.degree(p.vertex) >= 3 for p in pts):
        bound = min(tree.height(p.vertex) for p in pts)
    return Center(point, bound)


# ---- geometric constants ----------------------------------------------------------


@dataclass
class GeometricConstants:
    bounded_turning: Length | None
    bounded_turning_exact: bool
    separation: Length | None
    separation_pair: tuple[int, int] | None
    density: Length | None
    density_pair: tuple[int, int] | None
    pairs_without_branch_point: int
    doubling_estimate: int
    pairs_examined: int
    sampled: bool


def _exact_min_ratio(num: np.ndarray, den: np.ndarray) -> tuple[int, Fraction] | None:
    """Index and value of min num/den over entries with den > 0 (exact; floats only prefilter)."""
    ok = den > 0
    if not ok.any():
        return None
    idx = np.nonzero(ok)[0]
    f = num[idx].astype(float) / den[idx].astype(float)
    lo = f.min()
    cand = idx[f <= lo * (1 + 1e-9) + 1e-300]
    best = min(cand.tolist(), key=lambda k: (Fraction(int(num[k]), int(den[k])), k))
    return best, Fraction(int(num[best]), int(den[best]))


def geometric_constants(tree: SimplicialMetricTree, budget: int = 250_000, seed: int = 0) -> GeometricConstants:
    """Bounded turning, separation, density and a doubling estimate.

    Pair sweeps are exhaustive when the number of vertex pairs is within
    ``budget``; otherwise a seeded sample of source vertices is used and the
    report is flagged as sampled.
    """
    n = len(tree)
    rng = np.random.default_rng(seed)
    indptr, nbr, _, weight, scale, _, _ = tree.csr
    all_pairs = n * (n - 1) // 2
    sampled = all_pairs > budget
    if sampled:
        k = max(1, budget // max(n, 1))
        sources = np.sort(rng.choice(n, size=min(n, k), replace=False))
    else:
        sources = np.arange(n)
    geo = tree.metric == GEODESIC

    # separation over all branch-point pairs (exact, through the kernels)
    bps = list(tree.branch_points)
    sep = sep_pair = None
    if len(bps) >= 2:
        sep, sep_pair = separation_constant(tree, bps)

    # density and bounded turning, per source
    hvals = np.full(n, -1, dtype=object if not geo else np.int64)
    if geo:
        for v, h in tree.heights.items():
            hvals[tree.index[v]] = int(h * scale)
    dens_best: tuple[Fraction, tuple[int, int]] | None = None
    no_branch = 0
    examined = 0
    K: Length | None = Fraction(1) if geo and n > 1 else None
    if geo and n > 1 and bps:
        for s in sources.tolist():
            dist, pmax = kernels.path_max_sweep(indptr, nbr, weight, hvals, s)
            mask = np.arange(n) != s
            examined += int(mask.sum())
            has = mask & (pmax >= 0)
            no_branch += int((mask & (pmax < 0)).sum())
            num = np.where(has, pmax, 0)
            den = np.where(has, dist, 0)
            got = _exact_min_ratio(num, den)
            if got is not None:
                j, val = got
                if dens_best is None or val < dens_best[0]:
                    dens_best = (val, (tree.ids[s], tree.ids[j]))
    elif not geo and n > 1:
        K, examined, no_branch, dens_best = _euclidean_turning_density(tree, sources)
    doubling = _doubling_estimate(tree, rng, sources)
    return GeometricConstants(
        bounded_turning=K,
        bounded_turning_exact=not sampled,
        separation=sep,
        separation_pair=sep_pair,
        density=dens_best[0] if dens_best else None,
        density_pair=dens_best[1] if dens_best else None,
        pairs_without_branch_point=no_branch,
        doubling_estimate=doubling,
        pairs_examined=examined,
        sampled=sampled,
    )


def separation_constant(tree: SimplicialMetricTree, points: Sequence[int]) -> tuple[Length, tuple[int, int]]:
    """min |p - q| / min(H(p), H(q)) over distinct pairs of the given branch points."""
    pts = list(points)
    heights = [tree.height(p) for p in pts]
    if tree.metric == GEODESIC:
        indptr, nbr, _, weight, scale, _, _ = tree.csr
        rows = kernels.tree_distance_matrix(indptr, nbr, weight, [tree.index[p] for p in pts])
        cols = [tree.index[p] for p in pts]
        num = rows[:, cols]
        h = np.array([int(x * scale) for x in heights], dtype=np.int64)
        den = np.minimum.outer(h, h)
        i, j = kernels.safe_ratio_argext(num, den, maximize=False)
        value: Length = Fraction(int(num[i, j]), int(den[i, j]))
    else:
        sq = [x.sq for x in heights]
        coords = [tree.positions[p] for p in pts]
        d = reduce(math.lcm, [c.denominator for xy in coords for c in xy] + [s.denominator for s in sq], 1)
        X = np.array([int(x * d) for x, _ in coords], dtype=object)
        Y = np.array([int(y * d) for _, y in coords], dtype=object)
        num = (np.subtract.outer(X, X) ** 2 + np.subtract.outer(Y, Y) ** 2)
        hs = np.array([int(s * d * d) for s in sq], dtype=object)
        den = np.minimum.outer(hs, hs)
        i, j = kernels.safe_ratio_argext(num, den, maximize=False)
        value = Surd(Fraction(int(num[i, j]), int(den[i, j])))
    return value, (pts[i], pts[j])


def _euclidean_turning_density(tree: SimplicialMetricTree, sources):
    K = None
    dens = None
    examined = 0
    no_branch = 0
    heights = tree.heights
    for s in sources.tolist():
        sv = tree.ids[s]
        for t in range(s + 1, len(tree)):
            tv = tree.ids[t]
            path = tree.vertex_path(sv, tv)
            dpath = euclidean_set_diameter([tree.positions[v] for v in path])
            direct = Surd(tree._pos_dist_sq(sv, tv))
            r = dpath / direct
            if K is None or r > K:
                K = r
            hs = [heights[v] for v in path if v in heights]
            examined += 1
            if not hs:
                no_branch += 1
                continue
            val = max(hs) / dpath
            if dens is None or val < dens[0]:
                dens = (val, (sv, tv))
    return K, examined, no_branch, dens


def _doubling_estimate(tree: SimplicialMetricTree, rng, sources, n_balls: int = 24) -> int:
    """Greedy half-radius covers of sampled balls; lowest vertex id breaks ties."""
    n = len(tree)
    if n < 2:
        return 1
    centers = sorted(set(rng.choice(n, size=min(n, n_balls), replace=False).tolist()))
    diam = tree.diameter
    best = 1
    order = sorted(range(n), key=lambda k: tree.ids[k])
    rows: dict[int, list[Fraction]] = {}

    def row(k):
        if k not in rows:
            rows[k] = _dist_sq_row(tree, k)
        return rows[k]

    for c in centers:
        dc = row(c)
        for j in range(4):
            r_sq = (diam.sq if isinstance(diam, Surd) else diam * diam) / (4 ** j)
            ball = [k for k in order if dc[k] <= r_sq]
            uncovered = set(ball)
            count = 0
            for k in ball:
                if k not in uncovered:
                    continue
                count += 1
                dk = row(k)
                uncovered -= {q for q in uncovered if dk[q] * 4 <= r_sq}
            best = max(best, count)
    return best


def _dist_sq_row(tree: SimplicialMetricTree, i: int) -> list[Fraction]:
    if tree.metric == GEODESIC:
        indptr, nbr, _, weight, scale, _, _ = tree.csr
        d = kernels.tree_distances(indptr, nbr, weight, i)
        return [Fraction(int(x) * int(x), scale * scale) for x in d]
    u = tree.ids[i]
    return [tree._pos_dist_sq(u, v) for v in tree.ids]

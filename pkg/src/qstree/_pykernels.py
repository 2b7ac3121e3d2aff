"""Pure-Python implementations of the hot kernels.

Every function mirrors one in ``_ckernels.pyx`` with the same signature and
results.  Trees are passed in CSR form: ``indptr``/``indices`` give the
neighbours of each vertex and ``weights`` the integer edge lengths aligned
with ``indices``.
"""
import numpy as np


def _lists(indptr, indices, weights):
    return list(map(int, indptr)), list(map(int, indices)), list(map(int, weights))


def tree_distances(indptr, indices, weights, source):
    ip, ix, w = _lists(indptr, indices, weights)
    n = len(ip) - 1
    dist = [-1] * n
    dist[source] = 0
    stack = [source]
    while stack:
        v = stack.pop()
        dv = dist[v]
        for k in range(ip[v], ip[v + 1]):
            u = ix[k]
            if dist[u] < 0:
                dist[u] = dv + w[k]
                stack.append(u)
    return np.array(dist, dtype=np.int64)


def tree_distance_matrix(indptr, indices, weights, sources):
    ip, ix, w = _lists(indptr, indices, weights)
    n = len(ip) - 1
    out = np.empty((len(sources), n), dtype=np.int64)
    for r, s in enumerate(sources):
        dist = [-1] * n
        dist[s] = 0
        stack = [s]
        while stack:
            v = stack.pop()
            dv = dist[v]
            for k in range(ip[v], ip[v + 1]):
                u = ix[k]
                if dist[u] < 0:
                    dist[u] = dv + w[k]
                    stack.append(u)
        out[r, :] = dist
    return out


def path_max_sweep(indptr, indices, weights, values, source):
    """Distances from ``source`` and the running maximum of ``values`` along each path."""
    ip, ix, w = _lists(indptr, indices, weights)
    vals = list(map(int, values))
    n = len(ip) - 1
    dist = [-1] * n
    pmax = [0] * n
    dist[source] = 0
    pmax[source] = vals[source]
    stack = [source]
    while stack:
        v = stack.pop()
        for k in range(ip[v], ip[v + 1]):
            u = ix[k]
            if dist[u] < 0:
                dist[u] = dist[v] + w[k]
                pmax[u] = pmax[v] if pmax[v] >= vals[u] else vals[u]
                stack.append(u)
    return np.array(dist, dtype=np.int64), np.array(pmax, dtype=np.int64)


def branch_diameters(indptr, indices, weights):
    """Diameter of every branch, indexed like ``indices``.

    Entry ``k`` with ``indptr[v] <= k < indptr[v+1]`` is the diameter of the
    closure of the component of ``T - {v}`` that contains ``indices[k]``.
    Computed by one rerooting pass, so the total cost is linear.
    """
    ip, ix, w = _lists(indptr, indices, weights)
    n = len(ip) - 1
    out = [0] * len(ix)
    if n == 0:
        return np.array(out, dtype=np.int64)
    parent = [-1] * n
    pweight = [0] * n
    order = [0]
    seen = [False] * n
    seen[0] = True
    for v in order:
        for k in range(ip[v], ip[v + 1]):
            u = ix[k]
            if not seen[u]:
                seen[u] = True
                parent[u] = v
                pweight[u] = w[k]
                order.append(u)
    h = [0] * n
    dd = [0] * n
    for v in reversed(order):
        a1 = a2 = 0
        best_d = 0
        for k in range(ip[v], ip[v + 1]):
            u = ix[k]
            if u == parent[v]:
                continue
            arm = h[u] + w[k]
            out[k] = dd[u] if dd[u] > arm else arm
            if dd[u] > best_d:
                best_d = dd[u]
            if arm > a1:
                a1, a2 = arm, a1
            elif arm > a2:
                a2 = arm
        h[v] = a1
        dd[v] = best_d if best_d > a1 + a2 else a1 + a2
    up_h = [0] * n
    up_d = [0] * n
    for v in order:
        # arms and diameters available at v, tagged by neighbour
        arms = []
        diams = []
        if parent[v] >= 0:
            arms.append((up_h[v], -1))
            diams.append((up_d[v], -1))
        for k in range(ip[v], ip[v + 1]):
            u = ix[k]
            if u == parent[v]:
                out[k] = up_d[v]
                continue
            arms.append((h[u] + w[k], u))
            diams.append((dd[u], u))
        arms.sort(reverse=True)
        diams.sort(reverse=True)
        top_arms = arms[:3]
        top_diams = diams[:2]
        for k in range(ip[v], ip[v + 1]):
            u = ix[k]
            if u == parent[v]:
                continue
            others = [a for a, tag in top_arms if tag != u][:2]
            while len(others) < 2:
                others.append(0)
            od = 0
            for d, tag in top_diams:
                if tag != u:
                    od = d
                    break
            rest_d = od if od > others[0] + others[1] else others[0] + others[1]
            up_h[u] = w[k] + others[0]
            up_d[u] = rest_d if rest_d > up_h[u] else up_h[u]
    return np.array(out, dtype=np.int64)


def cut_components(indptr, indices, edge_of, eu, ev, cut_mask):
    """Label edges by the component of ``T - cut`` they belong to.

    Labels are numbered in order of the smallest edge index of each component.
    """
    ip = list(map(int, indptr))
    ix_edge = list(map(int, edge_of))
    u_of = list(map(int, eu))
    v_of = list(map(int, ev))
    cut = [bool(c) for c in cut_mask]
    m = len(u_of)
    label = [-1] * m
    nxt = 0
    for e in range(m):
        if label[e] >= 0:
            continue
        label[e] = nxt
        stack = [e]
        while stack:
            f = stack.pop()
            for x in (u_of[f], v_of[f]):
                if cut[x]:
                    continue
                for k in range(ip[x], ip[x + 1]):
                    g = ix_edge[k]
                    if label[g] < 0:
                        label[g] = nxt
                        stack.append(g)
        nxt += 1
    return np.array(label, dtype=np.int64)


def ratio_argext(num, den, maximize):
    """Index pair ``i < j`` extremizing ``num[i,j] / den[i,j]`` over cells with ``den > 0``.

    Comparisons use exact integer cross-multiplication; the first pair in
    row-major order wins ties.  Returns ``(-1, -1)`` when no cell qualifies.
    """
    n = len(num)
    bi = bj = -1
    bn, bd = 0, 1
    for i in range(n):
        rn = num[i]
        rd = den[i]
        for j in range(i + 1, n):
            d = int(rd[j])
            if d <= 0:
                continue
            a = int(rn[j])
            if bi < 0:
                bi, bj, bn, bd = i, j, a, d
                continue
            lhs = a * bd
            rhs = bn * d
            if (maximize and lhs > rhs) or (not maximize and lhs < rhs):
                bi, bj, bn, bd = i, j, a, d
    return bi, bj

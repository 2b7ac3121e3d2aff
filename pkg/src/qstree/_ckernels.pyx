# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled versions of the hot kernels; see ``_pykernels`` for the reference semantics."""
import numpy as np
cimport numpy as cnp

cnp.import_array()

ctypedef cnp.int64_t i64


cdef void _sweep(const i64[:] ip, const i64[:] ix, const i64[:] w, Py_ssize_t source,
                 i64[:] dist, i64[:] stack) noexcept nogil:
    cdef Py_ssize_t top = 0, v, u, k
    dist[source] = 0
    stack[0] = source
    top = 1
    while top > 0:
        top -= 1
        v = stack[top]
        for k in range(ip[v], ip[v + 1]):
            u = ix[k]
            if dist[u] < 0:
                dist[u] = dist[v] + w[k]
                stack[top] = u
                top += 1


def tree_distances(indptr, indices, weights, Py_ssize_t source):
    cdef const i64[:] ip = np.ascontiguousarray(indptr, dtype=np.int64)
    cdef const i64[:] ix = np.ascontiguousarray(indices, dtype=np.int64)
    cdef const i64[:] w = np.ascontiguousarray(weights, dtype=np.int64)
    cdef Py_ssize_t n = ip.shape[0] - 1
    out = np.full(n, -1, dtype=np.int64)
    stack = np.empty(max(n, 1), dtype=np.int64)
    cdef i64[:] d = out
    cdef i64[:] st = stack
    with nogil:
        _sweep(ip, ix, w, source, d, st)
    return out


def tree_distance_matrix(indptr, indices, weights, sources):
    cdef const i64[:] ip = np.ascontiguousarray(indptr, dtype=np.int64)
    cdef const i64[:] ix = np.ascontiguousarray(indices, dtype=np.int64)
    cdef const i64[:] w = np.ascontiguousarray(weights, dtype=np.int64)
    cdef const i64[:] src = np.ascontiguousarray(sources, dtype=np.int64)
    cdef Py_ssize_t n = ip.shape[0] - 1, r, nsrc = src.shape[0]
    out = np.full((nsrc, n), -1, dtype=np.int64)
    stack = np.empty(max(n, 1), dtype=np.int64)
    cdef i64[:, :] o = out
    cdef i64[:] st = stack
    with nogil:
        for r in range(nsrc):
            _sweep(ip, ix, w, src[r], o[r], st)
    return out


def path_max_sweep(indptr, indices, weights, values, Py_ssize_t source):
    cdef const i64[:] ip = np.ascontiguousarray(indptr, dtype=np.int64)
    cdef const i64[:] ix = np.ascontiguousarray(indices, dtype=np.int64)
    cdef const i64[:] w = np.ascontiguousarray(weights, dtype=np.int64)
    cdef const i64[:] vals = np.ascontiguousarray(values, dtype=np.int64)
    cdef Py_ssize_t n = ip.shape[0] - 1, top, v, u, k
    dist_a = np.full(n, -1, dtype=np.int64)
    pmax_a = np.zeros(n, dtype=np.int64)
    stack_a = np.empty(max(n, 1), dtype=np.int64)
    cdef i64[:] dist = dist_a
    cdef i64[:] pmax = pmax_a
    cdef i64[:] stack = stack_a
    with nogil:
        dist[source] = 0
        pmax[source] = vals[source]
        stack[0] = source
        top = 1
        while top > 0:
            top -= 1
            v = stack[top]
            for k in range(ip[v], ip[v + 1]):
                u = ix[k]
                if dist[u] < 0:
                    dist[u] = dist[v] + w[k]
                    pmax[u] = pmax[v] if pmax[v] >= vals[u] else vals[u]
                    stack[top] = u
                    top += 1
    return dist_a, pmax_a


def branch_diameters(indptr, indices, weights):
    cdef const i64[:] ip = np.ascontiguousarray(indptr, dtype=np.int64)
    cdef const i64[:] ix = np.ascontiguousarray(indices, dtype=np.int64)
    cdef const i64[:] w = np.ascontiguousarray(weights, dtype=np.int64)
    cdef Py_ssize_t n = ip.shape[0] - 1, nnz = ix.shape[0]
    out_a = np.zeros(nnz, dtype=np.int64)
    if n == 0:
        return out_a
    parent_a = np.full(n, -1, dtype=np.int64)
    order_a = np.empty(n, dtype=np.int64)
    seen_a = np.zeros(n, dtype=np.uint8)
    h_a = np.zeros(n, dtype=np.int64)
    dd_a = np.zeros(n, dtype=np.int64)
    uh_a = np.zeros(n, dtype=np.int64)
    ud_a = np.zeros(n, dtype=np.int64)
    cdef i64[:] out = out_a
    cdef i64[:] parent = parent_a
    cdef i64[:] order = order_a
    cdef cnp.uint8_t[:] seen = seen_a
    cdef i64[:] h = h_a
    cdef i64[:] dd = dd_a
    cdef i64[:] up_h = uh_a
    cdef i64[:] up_d = ud_a
    cdef Py_ssize_t head = 0, tail = 1, v, u, k, idx
    cdef i64 a1, a2, a3, arm, best_d, d1, d2, o0, o1, od, rest_d
    cdef Py_ssize_t t1, t2, t3, dt1, dt2
    with nogil:
        order[0] = 0
        seen[0] = 1
        while head < tail:
            v = order[head]
            head += 1
            for k in range(ip[v], ip[v + 1]):
                u = ix[k]
                if not seen[u]:
                    seen[u] = 1
                    parent[u] = v
                    order[tail] = u
                    tail += 1
        for idx in range(n - 1, -1, -1):
            v = order[idx]
            a1 = 0
            a2 = 0
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
                    a2 = a1
                    a1 = arm
                elif arm > a2:
                    a2 = arm
            h[v] = a1
            dd[v] = best_d if best_d > a1 + a2 else a1 + a2
        for idx in range(n):
            v = order[idx]
            # top three arms and top two branch diameters at v, tagged by neighbour (-1 = parent side)
            a1 = -1
            a2 = -1
            a3 = -1
            t1 = -2
            t2 = -2
            t3 = -2
            d1 = -1
            d2 = -1
            dt1 = -2
            dt2 = -2
            if parent[v] >= 0:
                a1 = up_h[v]
                t1 = -1
                d1 = up_d[v]
                dt1 = -1
            for k in range(ip[v], ip[v + 1]):
                u = ix[k]
                if u == parent[v]:
                    out[k] = up_d[v]
                    continue
                arm = h[u] + w[k]
                if arm > a1:
                    a3 = a2
                    t3 = t2
                    a2 = a1
                    t2 = t1
                    a1 = arm
                    t1 = u
                elif arm > a2:
                    a3 = a2
                    t3 = t2
                    a2 = arm
                    t2 = u
                elif arm > a3:
                    a3 = arm
                    t3 = u
                if dd[u] > d1:
                    d2 = d1
                    dt2 = dt1
                    d1 = dd[u]
                    dt1 = u
                elif dd[u] > d2:
                    d2 = dd[u]
                    dt2 = u
            for k in range(ip[v], ip[v + 1]):
                u = ix[k]
                if u == parent[v]:
                    continue
                if t1 == u:
                    o0 = a2
                    o1 = a3
                elif t2 == u:
                    o0 = a1
                    o1 = a3
                else:
                    o0 = a1
                    o1 = a2
                if o0 < 0:
                    o0 = 0
                if o1 < 0:
                    o1 = 0
                od = d2 if dt1 == u else d1
                if od < 0:
                    od = 0
                rest_d = od if od > o0 + o1 else o0 + o1
                up_h[u] = w[k] + o0
                up_d[u] = rest_d if rest_d > up_h[u] else up_h[u]
    return out_a


def cut_components(indptr, indices, edge_of, eu, ev, cut_mask):
    cdef const i64[:] ip = np.ascontiguousarray(indptr, dtype=np.int64)
    cdef const i64[:] eo = np.ascontiguousarray(edge_of, dtype=np.int64)
    cdef const i64[:] uu = np.ascontiguousarray(eu, dtype=np.int64)
    cdef const i64[:] vv = np.ascontiguousarray(ev, dtype=np.int64)
    cdef const cnp.uint8_t[:] cut = np.ascontiguousarray(cut_mask, dtype=np.uint8)
    cdef Py_ssize_t m = uu.shape[0], e, f, g, k, top, side, x
    label_a = np.full(m, -1, dtype=np.int64)
    stack_a = np.empty(max(m, 1), dtype=np.int64)
    cdef i64[:] label = label_a
    cdef i64[:] stack = stack_a
    cdef i64 nxt = 0
    with nogil:
        for e in range(m):
            if label[e] >= 0:
                continue
            label[e] = nxt
            stack[0] = e
            top = 1
            while top > 0:
                top -= 1
                f = stack[top]
                for side in range(2):
                    x = uu[f] if side == 0 else vv[f]
                    if cut[x]:
                        continue
                    for k in range(ip[x], ip[x + 1]):
                        g = eo[k]
                        if label[g] < 0:
                            label[g] = nxt
                            stack[top] = g
                            top += 1
            nxt += 1
    return label_a


def ratio_argext(num, den, bint maximize):
    cdef const i64[:, :] a = np.ascontiguousarray(num, dtype=np.int64)
    cdef const i64[:, :] b = np.ascontiguousarray(den, dtype=np.int64)
    cdef Py_ssize_t n = a.shape[0], i, j, bi = -1, bj = -1
    cdef i64 bn = 0, bd = 1, x, d
    cdef i64 lhs, rhs
    with nogil:
        for i in range(n):
            for j in range(i + 1, n):
                d = b[i, j]
                if d <= 0:
                    continue
                x = a[i, j]
                if bi < 0:
                    bi = i
                    bj = j
                    bn = x
                    bd = d
                    continue
                lhs = x * bd
                rhs = bn * d
                if (maximize and lhs > rhs) or ((not maximize) and lhs < rhs):
                    bi = i
                    bj = j
                    bn = x
                    bd = d
    return bi, bj

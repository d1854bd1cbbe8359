# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
# distutils: language = c++
"""Compiled hot kernels; semantics identical to ``_pykernels``."""

from libc.stdlib cimport malloc, free
from libc.math cimport floor
from libcpp.queue cimport priority_queue
from libcpp.pair cimport pair
from libcpp.vector cimport vector

ctypedef long long i64
ctypedef pair[i64, int] qitem

cdef i64 BIG = 1LL << 62
cdef double TOL = 1e-9


def ssp_min_cost_flow(int n_nodes, tails, heads, caps, costs, int source, int sink, i64 amount):
    cdef int n_arcs = len(tails)
    cdef vector[i64] rescap = vector[i64](2 * n_arcs)
    cdef vector[i64] rcost = vector[i64](2 * n_arcs)
    cdef vector[int] rhead = vector[int](2 * n_arcs)
    cdef vector[vector[int]] out = vector[vector[int]](n_nodes)
    cdef int i, u, v, e, k
    for i in range(n_arcs):
        rescap[2 * i] = caps[i]
        rcost[2 * i] = costs[i]
        rcost[2 * i + 1] = -<i64>costs[i]
        rhead[2 * i] = heads[i]
        rhead[2 * i + 1] = tails[i]
        out[<int>tails[i]].push_back(2 * i)
        out[<int>heads[i]].push_back(2 * i + 1)

    cdef vector[i64] pot = vector[i64](n_nodes, 0)
    cdef vector[i64] dist = vector[i64](n_nodes)
    cdef vector[int] parent = vector[int](n_nodes)
    cdef vector[char] done = vector[char](n_nodes)
    cdef priority_queue[qitem] heap
    cdef qitem top
    cdef i64 routed = 0, total = 0, d, nd, pu, dsink, push
    while routed < amount:
        for i in range(n_nodes):
            dist[i] = BIG
            parent[i] = -1
            done[i] = 0
        dist[source] = 0
        heap.push(qitem(0, -source))
        while not heap.empty():
            top = heap.top()
            heap.pop()
            d = -top.first
            u = -top.second
            if done[u] or d > dist[u]:
                continue
            done[u] = 1
            pu = pot[u]
            for k in range(<int>out[u].size()):
                e = out[u][k]
                if rescap[e] <= 0:
                    continue
                v = rhead[e]
                if done[v]:
                    continue
                nd = d + rcost[e] + pu - pot[v]
                if nd < dist[v]:
                    dist[v] = nd
                    parent[v] = e
                    heap.push(qitem(-nd, -v))
                elif nd == dist[v] and e < parent[v]:
                    parent[v] = e
        if dist[sink] == BIG:
            break
        dsink = dist[sink]
        for v in range(n_nodes):
            pot[v] += dist[v] if dist[v] < dsink else dsink
        push = amount - routed
        v = sink
        while v != source:
            e = parent[v]
            if rescap[e] < push:
                push = rescap[e]
            v = rhead[e ^ 1]
        v = sink
        while v != source:
            e = parent[v]
            rescap[e] -= push
            rescap[e ^ 1] += push
            total += push * rcost[e]
            v = rhead[e ^ 1]
        routed += push

    flows = [rescap[2 * i + 1] for i in range(n_arcs)]
    return flows, routed, total


cdef struct Pack:
    int n
    int n_res
    double *res
    double *dem      # n x n_res
    i64 *mbps
    i64 *cents
    i64 *suffix
    int *counts
    int *best_counts
    i64 target
    int has_best
    i64 best_a      # achieved
    i64 best_c      # cost


cdef void _bounds(double *residual, double *dem, int n, int n_res, i64 *out):
    cdef int u, r
    cdef i64 b, c
    cdef int seen
    for u in range(n):
        seen = 0
        b = 0
        for r in range(n_res):
            if dem[u * n_res + r] > 0:
                c = <i64>floor((residual[r] + TOL) / dem[u * n_res + r])
                if not seen or c < b:
                    b = c
                    seen = 1
        out[u] = b if (seen and b > 0) else 0


cdef void _max_dfs(Pack *p, int u, i64 achieved, i64 cost):
    cdef int i, r, c, ok
    if u == p.n:
        if achieved > p.best_a or (achieved == p.best_a and cost < p.best_c):
            p.best_a = achieved
            p.best_c = cost
            for i in range(p.n):
                p.best_counts[i] = p.counts[i]
        return
    if achieved + p.suffix[u] < p.best_a:
        return
    c = 0
    while True:
        p.counts[u] = c
        _max_dfs(p, u + 1, achieved + c * p.mbps[u], cost + c * p.cents[u])
        ok = 1
        for r in range(p.n_res):
            p.res[r] -= p.dem[u * p.n_res + r]
            if p.res[r] < -TOL:
                ok = 0
        if not ok:
            break
        c += 1
    for r in range(p.n_res):
        p.res[r] += p.dem[u * p.n_res + r] * (c + 1)
    p.counts[u] = 0


cdef void _min_dfs(Pack *p, int u, i64 achieved, i64 cost):
    cdef int i, r, c, ok
    if achieved >= p.target:
        if (not p.has_best or cost < p.best_c
                or (cost == p.best_c and achieved < p.best_a)):
            p.has_best = 1
            p.best_c = cost
            p.best_a = achieved
            for i in range(p.n):
                p.best_counts[i] = p.counts[i]
        return
    if u == p.n or achieved + p.suffix[u] < p.target:
        return
    if p.has_best and cost > p.best_c:
        return
    c = 0
    while True:
        p.counts[u] = c
        _min_dfs(p, u + 1, achieved + c * p.mbps[u], cost + c * p.cents[u])
        if achieved + c * p.mbps[u] >= p.target:
            break
        ok = 1
        for r in range(p.n_res):
            p.res[r] -= p.dem[u * p.n_res + r]
            if p.res[r] < -TOL:
                ok = 0
        if not ok:
            c += 1
            break
        c += 1
    for r in range(p.n_res):
        p.res[r] += p.dem[u * p.n_res + r] * c
    p.counts[u] = 0


cdef _run(residual, demands, mbps, cents, i64 target, int mode):
    cdef Pack p
    cdef int n = len(mbps)
    cdef int n_res = len(residual)
    cdef int u, r
    p.n = n
    p.n_res = n_res
    p.res = <double *>malloc(max(n_res, 1) * sizeof(double))
    p.dem = <double *>malloc(max(n * n_res, 1) * sizeof(double))
    p.mbps = <i64 *>malloc(max(n, 1) * sizeof(i64))
    p.cents = <i64 *>malloc(max(n, 1) * sizeof(i64))
    p.suffix = <i64 *>malloc((n + 1) * sizeof(i64))
    p.counts = <int *>malloc(max(n, 1) * sizeof(int))
    p.best_counts = <int *>malloc(max(n, 1) * sizeof(int))
    cdef i64 *bounds = <i64 *>malloc(max(n, 1) * sizeof(i64))
    try:
        for r in range(n_res):
            p.res[r] = residual[r]
        for u in range(n):
            p.mbps[u] = mbps[u]
            p.cents[u] = cents[u]
            p.counts[u] = 0
            p.best_counts[u] = 0
            for r in range(n_res):
                p.dem[u * n_res + r] = demands[u][r]
        _bounds(p.res, p.dem, n, n_res, bounds)
        p.suffix[n] = 0
        for u in range(n - 1, -1, -1):
            p.suffix[u] = p.suffix[u + 1] + bounds[u] * p.mbps[u]
        p.target = target
        p.has_best = 0
        p.best_c = 0
        if mode == 0:
            p.best_a = -1
            _max_dfs(&p, 0, 0, 0)
            return [p.best_counts[u] for u in range(n)], p.best_a, p.best_c
        p.best_a = 0
        _min_dfs(&p, 0, 0, 0)
        if not p.has_best:
            return None
        return [p.best_counts[u] for u in range(n)], p.best_a, p.best_c
    finally:
        free(p.res)
        free(p.dem)
        free(p.mbps)
        free(p.cents)
        free(p.suffix)
        free(p.counts)
        free(p.best_counts)
        free(bounds)


def packing_max(residual, demands, mbps, cents):
    return _run(residual, demands, mbps, cents, 0, 0)


def packing_min_cost(residual, demands, mbps, cents, target):
    if target <= 0:
        return [0] * len(mbps), 0, 0
    return _run(residual, demands, mbps, cents, target, 1)


cdef void _pivot(double[:, ::1] T, Py_ssize_t[::1] basis, int r, int j) noexcept:
    cdef int m = T.shape[0], n = T.shape[1], i, k
    cdef double piv = T[r, j], f
    for k in range(n):
        T[r, k] /= piv
    for i in range(m):
        if i == r:
            continue
        f = T[i, j]
        if f != 0.0:
            for k in range(n):
                T[i, k] -= f * T[r, k]
    basis[r] = j


def simplex_pivot(double[:, ::1] T, Py_ssize_t[::1] basis, int r, int j):
    _pivot(T, basis, r, j)


def simplex_run(double[:, ::1] T, double[::1] u, double[::1] value, Py_ssize_t[::1] basis,
                double[::1] c, allowed, int degenerate_run, double pivot_tol, double feas_tol):
    cdef int m = T.shape[0], n = T.shape[1]
    cdef int i, k, j, leave, iterations = 0, degenerate = 0
    cdef bint use_bland = False, upper
    cdef double dj, best, sigma, a, r, t_min, t_flip, t_best, INFV = float("inf")
    cdef vector[double] d = vector[double](n)
    cdef vector[char] is_basic = vector[char](n)
    cdef vector[char] at_up = vector[char](n)
    cdef vector[double] alpha = vector[double](m)
    cdef vector[double] ratios = vector[double](m)
    cdef unsigned char[::1] allow = allowed.view("uint8")
    cdef double cb
    while True:
        for k in range(n):
            d[k] = c[k]
            is_basic[k] = 0
        for i in range(m):
            is_basic[basis[i]] = 1
            cb = c[basis[i]]
            if cb != 0.0:
                for k in range(n):
                    d[k] -= cb * T[i, k]
        j = -1
        best = 0.0
        for k in range(n):
            if is_basic[k]:
                d[k] = 0.0
                at_up[k] = 0
                continue
            upper = (value[k] >= u[k] - feas_tol) and u[k] != INFV
            at_up[k] = upper
            if not allow[k]:
                continue
            dj = d[k]
            if (dj < -pivot_tol and not upper) or (dj > pivot_tol and upper):
                if use_bland:
                    j = k
                    break
                if dj < 0:
                    dj = -dj
                if j < 0 or dj > best:
                    j = k
                    best = dj
        if j < 0:
            return 0, iterations
        sigma = -1.0 if at_up[j] else 1.0
        t_flip = u[j]
        t_min = INFV
        for i in range(m):
            a = T[i, j] * sigma
            alpha[i] = a
            r = INFV
            if a > pivot_tol:
                r = value[basis[i]]
                if r < 0:
                    r = 0
                r = r / a
            elif a < -pivot_tol and u[basis[i]] != INFV:
                r = u[basis[i]] - value[basis[i]]
                if r < 0:
                    r = 0
                r = r / (-a)
            ratios[i] = r
            if r < t_min:
                t_min = r
        leave = -1
        if t_min < t_flip - 1e-12:
            best = -1.0
            for i in range(m):
                if ratios[i] <= t_min + 1e-12:
                    if use_bland:
                        if leave < 0 or basis[i] < basis[leave]:
                            leave = i
                    else:
                        a = alpha[i] if alpha[i] > 0 else -alpha[i]
                        if a > best:
                            best = a
                            leave = i
            t_best = ratios[leave]
        elif t_flip != INFV:
            t_best = t_flip
        else:
            return 1, iterations

        iterations += 1
        if t_best <= 1e-12:
            degenerate += 1
            if degenerate >= degenerate_run:
                use_bland = True
        else:
            degenerate = 0

        for i in range(m):
            value[basis[i]] -= t_best * alpha[i]
        value[j] += sigma * t_best
        if leave < 0:
            continue
        k = basis[leave]
        value[k] = u[k] if alpha[leave] < 0 else 0.0
        _pivot(T, basis, leave, j)
        for k in range(n):
            if value[k] < 0.0:
                value[k] = 0.0
            elif value[k] > u[k]:
                value[k] = u[k]

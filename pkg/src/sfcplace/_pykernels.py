"""Pure-Python hot kernels.  ``_kernels.pyx`` mirrors these line for line."""

import heapq

import numpy as np

INF = float("inf")
TOL = 1e-9


def ssp_min_cost_flow(n_nodes, tails, heads, caps, costs, source, sink, amount):
    """Successive shortest paths with Dijkstra on reduced costs.

    Arcs are given as parallel sequences; all costs must be non-negative.
    Returns ``(flows, routed, total_cost)``; ``routed < amount`` means the
    maximum flow is smaller than ``amount``.

    Residual arc ``2*i`` is the forward copy of arc ``i`` and ``2*i + 1`` its
    reverse.  Labels are only improved strictly, or on equal distance by a
    lower residual arc id; the heap pops the lowest ``(distance, node)``.
    """
    n_arcs = len(tails)
    rescap = [0] * (2 * n_arcs)
    rcost = [0] * (2 * n_arcs)
    rhead = [0] * (2 * n_arcs)
    out = [[] for _ in range(n_nodes)]
    for i in range(n_arcs):
        rescap[2 * i] = caps[i]
        rcost[2 * i] = costs[i]
        rcost[2 * i + 1] = -costs[i]
        rhead[2 * i] = heads[i]
        rhead[2 * i + 1] = tails[i]
        out[tails[i]].append(2 * i)
        out[heads[i]].append(2 * i + 1)

    pot = [0] * n_nodes
    routed = 0
    total = 0
    while routed < amount:
        dist = [INF] * n_nodes
        parent = [-1] * n_nodes
        done = [False] * n_nodes
        dist[source] = 0
        heap = [(0, source)]
        while heap:
            d, u = heapq.heappop(heap)
            if done[u] or d > dist[u]:
                continue
            done[u] = True
            pu = pot[u]
            for e in out[u]:
                if rescap[e] <= 0:
                    continue
                v = rhead[e]
                if done[v]:
                    continue
                nd = d + rcost[e] + pu - pot[v]
                if nd < dist[v]:
                    dist[v] = nd
                    parent[v] = e
                    heapq.heappush(heap, (nd, v))
                elif nd == dist[v] and e < parent[v]:
                    parent[v] = e
        if dist[sink] == INF:
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


def _count_bounds(residual, demands, n_types):
    bounds = []
    for u in range(n_types):
        b = None
        for r, d in enumerate(demands[u]):
            if d > 0:
                c = int((residual[r] + TOL) // d)
                b = c if b is None or c < b else b
        bounds.append(0 if b is None else max(b, 0))
    return bounds


def packing_max(residual, demands, mbps, cents):
    """Maximum achievable throughput of one node.

    Ties: lower host cost, then the lexicographically smaller count vector.
    Returns ``(counts, achieved, cost)``.
    """
    n = len(mbps)
    n_res = len(residual)
    bounds = _count_bounds(residual, demands, n)
    # suffix upper bound on throughput from types u.. given a full residual
    suffix = [0] * (n + 1)
    for u in range(n - 1, -1, -1):
        suffix[u] = suffix[u + 1] + bounds[u] * mbps[u]

    best = [-1, 0, None]  # achieved, cost, counts
    counts = [0] * n
    res = list(residual)

    def dfs(u, achieved, cost):
        if u == n:
            if achieved > best[0] or (achieved == best[0] and cost < best[1]):
                best[0], best[1], best[2] = achieved, cost, list(counts)
            return
        if achieved + suffix[u] < best[0]:
            return
        c = 0
        while True:
            counts[u] = c
            dfs(u + 1, achieved + c * mbps[u], cost + c * cents[u])
            ok = True
            for r in range(n_res):
                res[r] -= demands[u][r]
                if res[r] < -TOL:
                    ok = False
            if not ok:
                break
            c += 1
        for r in range(n_res):
            res[r] += demands[u][r] * (c + 1)
        counts[u] = 0

    dfs(0, 0, 0)
    return best[2], best[0], best[1]


def packing_min_cost(residual, demands, mbps, cents, target):
    """Cheapest count vector with throughput at least ``target``.

    Ties: lower achieved throughput, then the lexicographically smaller
    count vector.  Returns ``None`` when no packing reaches ``target``.
    """
    n = len(mbps)
    n_res = len(residual)
    if target <= 0:
        return [0] * n, 0, 0
    bounds = _count_bounds(residual, demands, n)
    suffix = [0] * (n + 1)
    for u in range(n - 1, -1, -1):
        suffix[u] = suffix[u + 1] + bounds[u] * mbps[u]

    best = [None, 0, None]  # cost, achieved, counts
    counts = [0] * n
    res = list(residual)

    def better(cost, achieved):
        if best[0] is None:
            return True
        return cost < best[0] or (cost == best[0] and achieved < best[1])

    def dfs(u, achieved, cost):
        if achieved >= target:
            if better(cost, achieved):
                best[0], best[1], best[2] = cost, achieved, list(counts)
            return
        if u == n or achieved + suffix[u] < target:
            return
        if best[0] is not None and cost > best[0]:
            return
        c = 0
        while True:
            counts[u] = c
            dfs(u + 1, achieved + c * mbps[u], cost + c * cents[u])
            if achieved + c * mbps[u] >= target:
                break
            ok = True
            for r in range(n_res):
                res[r] -= demands[u][r]
                if res[r] < -TOL:
                    ok = False
            if not ok:
                c += 1
                break
            c += 1
        for r in range(n_res):
            res[r] += demands[u][r] * c
        counts[u] = 0

    dfs(0, 0, 0)
    if best[0] is None:
        return None
    return best[2], best[1], best[0]


def simplex_pivot(T, basis, r, j):
    piv = T[r, j]
    T[r] /= piv
    col = T[:, j].copy()
    col[r] = 0.0
    nz = np.nonzero(col)[0]
    if len(nz):
        T[nz] -= np.outer(col[nz], T[r])
    basis[r] = j


def simplex_run(T, u, value, basis, c, allowed, degenerate_run, pivot_tol, feas_tol):
    """Bounded primal simplex iterations on a dense tableau, in place.

    Returns ``(status, iterations)`` with status 0 = optimal, 1 = unbounded.
    """
    m = T.shape[0]
    use_bland = False
    degenerate = 0
    iterations = 0
    finite_u = np.isfinite(u)
    while True:
        d = c - c[basis] @ T
        d[basis] = 0.0
        at_upper = (value >= u - feas_tol) & finite_u
        at_upper[basis] = False
        eligible = allowed & (((d < -pivot_tol) & ~at_upper) | ((d > pivot_tol) & at_upper))
        eligible[basis] = False
        cand = np.nonzero(eligible)[0]
        if len(cand) == 0:
            return 0, iterations
        j = cand[0] if use_bland else cand[np.argmax(np.abs(d[cand]))]
        sigma = -1.0 if at_upper[j] else 1.0
        alpha = T[:, j] * sigma

        xb = value[basis]
        ub = u[basis]
        t_flip = u[j]
        dec = alpha > pivot_tol
        inc = (alpha < -pivot_tol) & np.isfinite(ub)
        ratios = np.full(m, np.inf)
        ratios[dec] = np.maximum(xb[dec], 0.0) / alpha[dec]
        ratios[inc] = np.maximum(ub[inc] - xb[inc], 0.0) / (-alpha[inc])
        t_min = ratios.min() if m else np.inf
        leave = -1
        if t_min < t_flip - 1e-12:
            ties = np.nonzero(ratios <= t_min + 1e-12)[0]
            if use_bland:
                leave = ties[np.argmin(basis[ties])]
            else:
                leave = ties[np.argmax(np.abs(alpha[ties]))]
            t_best = ratios[leave]
        elif np.isfinite(t_flip):
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

        value[basis] = xb - t_best * alpha
        value[j] += sigma * t_best
        if leave < 0:
            continue
        out = basis[leave]
        value[out] = u[out] if alpha[leave] < 0 else 0.0
        simplex_pivot(T, basis, leave, j)
        np.clip(value, 0.0, u, out=value)

"""Pure-Python kernels; the reference behaviour for the compiled module."""

import heapq

INF = float("inf")


def dijkstra(indptr, indices, weights, source, blocked=None):
    indptr = list(indptr)
    indices = list(indices)
    weights = list(weights)
    n = len(indptr) - 1
    block = list(blocked) if blocked is not None else [0] * n
    dist = [INF] * n
    if block[source]:
        return dist
    done = [False] * n
    dist[source] = 0.0
    heap = [(0.0, source)]
    while heap:
        d, u = heapq.heappop(heap)
        if done[u]:
            continue
        done[u] = True
        for e in range(indptr[u], indptr[u + 1]):
            v = indices[e]
            if block[v]:
                continue
            nd = d + weights[e]
            if nd < dist[v]:
                dist[v] = nd
                heapq.heappush(heap, (nd, v))
    return dist


def pagerank(indptr, indices, weights, damping, tol, max_iter):
    indptr = list(indptr)
    indices = list(indices)
    weights = list(weights)
    n = len(indptr) - 1
    out_weight = [sum(weights[indptr[u]:indptr[u + 1]]) for u in range(n)]
    x = [1.0 / n] * n
    delta = INF
    iterations = 0
    converged = False
    while iterations < max_iter:
        iterations += 1
        dangling = sum(x[u] for u in range(n) if out_weight[u] <= 0.0)
        base = ((1.0 - damping) + damping * dangling) / n
        new = [base] * n
        for u in range(n):
            if out_weight[u] > 0.0:
                share = damping * x[u] / out_weight[u]
                for e in range(indptr[u], indptr[u + 1]):
                    new[indices[e]] += share * weights[e]
        delta = sum(abs(a - b) for a, b in zip(new, x))
        x = new
        if delta < tol:
            converged = True
            break
    return x, iterations, converged, delta

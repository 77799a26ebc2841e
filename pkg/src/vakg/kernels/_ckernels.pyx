# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled Dijkstra and PageRank over CSR arrays."""

import numpy as np
cimport numpy as cnp
from libc.stdlib cimport malloc, free
from libc.math cimport INFINITY, fabs

cnp.import_array()


cdef inline void _push(double* hd, Py_ssize_t* hv, Py_ssize_t* size, double d, Py_ssize_t v) nogil:
    cdef Py_ssize_t i = size[0]
    cdef Py_ssize_t parent
    size[0] += 1
    while i > 0:
        parent = (i - 1) >> 1
        if hd[parent] <= d:
            break
        hd[i] = hd[parent]
        hv[i] = hv[parent]
        i = parent
    hd[i] = d
    hv[i] = v


cdef inline void _pop(double* hd, Py_ssize_t* hv, Py_ssize_t* size, double* d, Py_ssize_t* v) nogil:
    cdef Py_ssize_t n, i, child
    cdef double last_d
    cdef Py_ssize_t last_v
    d[0] = hd[0]
    v[0] = hv[0]
    size[0] -= 1
    n = size[0]
    if n == 0:
        return
    last_d = hd[n]
    last_v = hv[n]
    i = 0
    while True:
        child = 2 * i + 1
        if child >= n:
            break
        if child + 1 < n and hd[child + 1] < hd[child]:
            child += 1
        if hd[child] >= last_d:
            break
        hd[i] = hd[child]
        hv[i] = hv[child]
        i = child
    hd[i] = last_d
    hv[i] = last_v


def dijkstra(const cnp.int64_t[::1] indptr, const cnp.int64_t[::1] indices,
             const double[::1] weights, Py_ssize_t source, blocked=None):
    cdef Py_ssize_t n = indptr.shape[0] - 1
    cdef Py_ssize_t m = indices.shape[0]
    dist_arr = np.full(n, np.inf, dtype=np.float64)
    cdef double[::1] dist = dist_arr
    block_arr = np.zeros(n, dtype=np.uint8) if blocked is None else np.ascontiguousarray(blocked, dtype=np.uint8)
    cdef const cnp.uint8_t[::1] block = block_arr
    if block[source]:
        return dist_arr
    done_arr = np.zeros(n, dtype=np.uint8)
    cdef cnp.uint8_t[::1] done = done_arr
    cdef double* hd = <double*> malloc((m + 1) * sizeof(double))
    cdef Py_ssize_t* hv = <Py_ssize_t*> malloc((m + 1) * sizeof(Py_ssize_t))
    if hd == NULL or hv == NULL:
        free(hd)
        free(hv)
        raise MemoryError()
    cdef Py_ssize_t size = 0
    cdef Py_ssize_t u, v, e
    cdef double d, nd
    with nogil:
        dist[source] = 0.0
        _push(hd, hv, &size, 0.0, source)
        while size > 0:
            _pop(hd, hv, &size, &d, &u)
            if done[u]:
                continue
            done[u] = 1
            for e in range(indptr[u], indptr[u + 1]):
                v = indices[e]
                if block[v]:
                    continue
                nd = d + weights[e]
                if nd < dist[v]:
                    dist[v] = nd
                    _push(hd, hv, &size, nd, v)
    free(hd)
    free(hv)
    return dist_arr


def pagerank(const cnp.int64_t[::1] indptr, const cnp.int64_t[::1] indices,
             const double[::1] weights, double damping, double tol, Py_ssize_t max_iter):
    cdef Py_ssize_t n = indptr.shape[0] - 1
    cdef Py_ssize_t u, e, iterations = 0
    out_arr = np.zeros(n, dtype=np.float64)
    x_arr = np.full(n, 1.0 / n, dtype=np.float64)
    new_arr = np.empty(n, dtype=np.float64)
    cdef double[::1] out_w = out_arr
    cdef double[::1] x = x_arr
    cdef double[::1] new = new_arr
    cdef double dangling, base, share, delta = INFINITY
    cdef bint converged = False
    for u in range(n):
        for e in range(indptr[u], indptr[u + 1]):
            out_w[u] += weights[e]
    with nogil:
        while iterations < max_iter:
            iterations += 1
            dangling = 0.0
            for u in range(n):
                if out_w[u] <= 0.0:
                    dangling += x[u]
            base = ((1.0 - damping) + damping * dangling) / n
            for u in range(n):
                new[u] = base
            for u in range(n):
                if out_w[u] > 0.0:
                    share = damping * x[u] / out_w[u]
                    for e in range(indptr[u], indptr[u + 1]):
                        new[indices[e]] += share * weights[e]
            delta = 0.0
            for u in range(n):
                delta += fabs(new[u] - x[u])
                x[u] = new[u]
            if delta < tol:
                converged = True
                break
    return x_arr.tolist(), iterations, converged, delta

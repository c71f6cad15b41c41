# cython: boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled graph kernels. Mirrors ``_pykernels`` exactly."""

import numpy as np
cimport numpy as cnp
from libc.math cimport INFINITY

cnp.import_array()

cdef enum:
    CAP = 0
    AND_EX = 1
    OR_EX = 2
    SOURCE = 3


def propagate(const long long[:] order,
              const long long[:] pred_ptr,
              const long long[:] pred_src,
              const long long[:] pred_edge,
              const unsigned char[:] edge_on,
              const signed char[:] kind,
              const double[:] prob,
              const unsigned char[:] fixed,
              double[:] P):
    cdef Py_ssize_t i, k, node, src
    cdef double val, q, v
    cdef signed char kd
    for i in range(order.shape[0]):
        node = order[i]
        if fixed[node]:
            P[node] = 1.0
            continue
        kd = kind[node]
        if kd == AND_EX:
            if pred_ptr[node] == pred_ptr[node + 1]:
                val = 0.0
            else:
                val = prob[node]
                for k in range(pred_ptr[node], pred_ptr[node + 1]):
                    if edge_on[pred_edge[k]]:
                        val *= P[pred_src[k]]
                    else:
                        val = 0.0
        else:
            q = 1.0
            for k in range(pred_ptr[node], pred_ptr[node + 1]):
                if edge_on[pred_edge[k]]:
                    v = P[pred_src[k]]
                    q *= 1.0 - v
            val = 1.0 - q
            if kd == OR_EX:
                val *= prob[node]
        P[node] = val


def reach(const long long[:] succ_ptr,
          const long long[:] succ_dst,
          const long long[:] succ_edge,
          const unsigned char[:] edge_on,
          const signed char[:] kind,
          const unsigned char[:] usable,
          const long long[:] indeg,
          long long source):
    cdef Py_ssize_t n = kind.shape[0]
    cdef cnp.ndarray[cnp.uint8_t, ndim=1] out = np.zeros(n, dtype=np.uint8)
    cdef unsigned char[:] reached = out
    cdef long long[:] count = np.zeros(n, dtype=np.int64)
    cdef long long[:] stack = np.empty(n + 1, dtype=np.int64)
    cdef Py_ssize_t top = 0, k, u, v
    reached[source] = 1
    stack[top] = source
    top += 1
    while top > 0:
        top -= 1
        u = stack[top]
        for k in range(succ_ptr[u], succ_ptr[u + 1]):
            if not edge_on[succ_edge[k]]:
                continue
            v = succ_dst[k]
            if reached[v]:
                continue
            count[v] += 1
            if not usable[v]:
                continue
            if kind[v] == AND_EX and count[v] < indeg[v]:
                continue
            reached[v] = 1
            stack[top] = v
            top += 1
    return out


cdef inline void _sift_up(double[:] hk, long long[:] hv, Py_ssize_t i) noexcept:
    cdef Py_ssize_t parent
    cdef double key = hk[i]
    cdef long long val = hv[i]
    while i > 0:
        parent = (i - 1) >> 1
        if hk[parent] <= key:
            break
        hk[i] = hk[parent]
        hv[i] = hv[parent]
        i = parent
    hk[i] = key
    hv[i] = val


cdef inline void _sift_down(double[:] hk, long long[:] hv, Py_ssize_t size) noexcept:
    cdef Py_ssize_t i = 0, child
    cdef double key = hk[0]
    cdef long long val = hv[0]
    while True:
        child = 2 * i + 1
        if child >= size:
            break
        if child + 1 < size and hk[child + 1] < hk[child]:
            child += 1
        if hk[child] >= key:
            break
        hk[i] = hk[child]
        hv[i] = hv[child]
        i = child
    hk[i] = key
    hv[i] = val


def shortest_distance(const long long[:] succ_ptr,
                      const long long[:] succ_dst,
                      const long long[:] succ_edge,
                      const double[:] weight,
                      long long source,
                      long long target):
    """Dijkstra with nonnegative edge weights; returns inf when unreachable."""
    cdef Py_ssize_t n = succ_ptr.shape[0] - 1
    cdef Py_ssize_t m = succ_dst.shape[0]
    cdef double[:] dist = np.full(n, INFINITY)
    cdef unsigned char[:] done = np.zeros(n, dtype=np.uint8)
    cdef double[:] hk = np.empty(m + 1)
    cdef long long[:] hv = np.empty(m + 1, dtype=np.int64)
    cdef Py_ssize_t size = 0, k, u, v
    cdef double d, nd
    dist[source] = 0.0
    hk[0] = 0.0
    hv[0] = source
    size = 1
    while size > 0:
        d = hk[0]
        u = hv[0]
        size -= 1
        if size > 0:
            hk[0] = hk[size]
            hv[0] = hv[size]
            _sift_down(hk, hv, size)
        if done[u]:
            continue
        done[u] = 1
        if u == target:
            return d
        for k in range(succ_ptr[u], succ_ptr[u + 1]):
            v = succ_dst[k]
            if done[v]:
                continue
            nd = d + weight[succ_edge[k]]
            if nd < dist[v]:
                dist[v] = nd
                hk[size] = nd
                hv[size] = v
                _sift_up(hk, hv, size)
                size += 1
    return dist[target]

"""Pure-Python graph kernels, used when the compiled module is unavailable."""

import heapq
import math

import numpy as np

CAP, AND_EX, OR_EX, SOURCE = 0, 1, 2, 3


def propagate(order, pred_ptr, pred_src, pred_edge, edge_on, kind, prob, fixed, P):
    for node in order:
        node = int(node)
        if fixed[node]:
            P[node] = 1.0
            continue
        lo, hi = pred_ptr[node], pred_ptr[node + 1]
        if kind[node] == AND_EX:
            if lo == hi:
                val = 0.0
            else:
                val = float(prob[node])
                for k in range(lo, hi):
                    val *= P[pred_src[k]] if edge_on[pred_edge[k]] else 0.0
        else:
            q = 1.0
            for k in range(lo, hi):
                if edge_on[pred_edge[k]]:
                    q *= 1.0 - P[pred_src[k]]
            val = 1.0 - q
            if kind[node] == OR_EX:
                val *= prob[node]
        P[node] = val


def reach(succ_ptr, succ_dst, succ_edge, edge_on, kind, usable, indeg, source):
    n = len(kind)
    reached = np.zeros(n, dtype=np.uint8)
    count = [0] * n
    reached[source] = 1
    stack = [int(source)]
    while stack:
        u = stack.pop()
        for k in range(succ_ptr[u], succ_ptr[u + 1]):
            if not edge_on[succ_edge[k]]:
                continue
            v = int(succ_dst[k])
            if reached[v]:
                continue
            count[v] += 1
            if not usable[v]:
                continue
            if kind[v] == AND_EX and count[v] < indeg[v]:
                continue
            reached[v] = 1
            stack.append(v)
    return reached


def shortest_distance(succ_ptr, succ_dst, succ_edge, weight, source, target):
    n = len(succ_ptr) - 1
    dist = [math.inf] * n
    done = [False] * n
    dist[source] = 0.0
    heap = [(0.0, int(source))]
    while heap:
        d, u = heapq.heappop(heap)
        if done[u]:
            continue
        done[u] = True
        if u == target:
            return d
        for k in range(succ_ptr[u], succ_ptr[u + 1]):
            v = int(succ_dst[k])
            if done[v]:
                continue
            nd = d + weight[succ_edge[k]]
            if nd < dist[v]:
                dist[v] = nd
                heapq.heappush(heap, (nd, v))
    return dist[target]

"""Bipartite transportation max-flow with exact capacities.

Specialised to the one shape the package needs: source -> left vertices with
the mu weights, left -> right across an allowed cell set with unbounded
capacity, right -> sink with the nu weights.  The maximum flow is then the
largest mass a coupling of (mu, nu) can place on the allowed cells.

Edmonds-Karp on this graph is exact for rational (and correct for float)
capacities and its augmentation count is bounded by the edge structure, not
the capacity values, so termination never depends on the arithmetic.
"""

from __future__ import annotations

from collections import deque
from typing import Sequence


def max_flow_on_cells(
    mu: Sequence,
    nu: Sequence,
    allowed: int,
) -> tuple:
    """Max coupling mass on a cell bitmask, plus a realising partial plan.

    `allowed` is a bitmask over cells (i, j) -> bit i*m + j.  Returns
    (value, plan) where plan[i][j] is the transported mass, supported on
    allowed cells, with row sums <= mu and column sums <= nu.
    """
    n, m = len(mu), len(nu)
    size = n + m + 2
    source, sink = n + m, n + m + 1
    zero = mu[0] - mu[0]

    cap = [dict() for _ in range(size)]
    for i in range(n):
        cap[source][i] = mu[i]
        cap[i][source] = zero
    for j in range(m):
        cap[n + j][sink] = nu[j]
        cap[sink][n + j] = zero
    total = sum(mu) + sum(nu)
    for i in range(n):
        base = i * m
        for j in range(m):
            if allowed >> (base + j) & 1:
                # Effectively infinite: no s-t path can carry more than this.
                cap[i][n + j] = total
                cap[n + j][i] = zero

    flow_value = zero
    while True:
        parent = [-1] * size
        parent[source] = source
        queue = deque([source])
        while queue:
            u = queue.popleft()
            if u == sink:
                break
            for v, c in cap[u].items():
                if parent[v] == -1 and c > 0:
                    parent[v] = u
                    queue.append(v)
        if parent[sink] == -1:
            break
        bottleneck = None
        v = sink
        while v != source:
            u = parent[v]
            c = cap[u][v]
            if bottleneck is None or c < bottleneck:
                bottleneck = c
            v = u
        v = sink
        while v != source:
            u = parent[v]
            cap[u][v] -= bottleneck
            cap[v][u] += bottleneck
            v = u
        flow_value = flow_value + bottleneck

    plan = [[zero] * m for _ in range(n)]
    for i in range(n):
        base = i * m
        for j in range(m):
            if allowed >> (base + j) & 1:
                # Residual on the reverse edge equals the shipped amount.
                plan[i][j] = cap[n + j][i]
    return flow_value, plan

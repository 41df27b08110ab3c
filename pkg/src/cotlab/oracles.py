"""Exhaustive reference solvers used to audit the simplex code.

Vertices of the transportation polytope ``{P >= 0 : P 1 = a, P^T 1 = b}``
are exactly the feasible points supported on a spanning tree of the complete
bipartite graph (the basic solutions of the network).  Enumerating all
spanning trees, solving each tree system by leaf elimination and keeping the
nonnegative solutions lists every vertex; the LP optimum is the best of them.
"""

from __future__ import annotations

from fractions import Fraction
from itertools import combinations
from typing import Sequence


def _is_spanning_tree(edges, m, n) -> bool:
    parent = list(range(m + n))

    def find(a):
        while parent[a] != a:
            parent[a] = parent[parent[a]]
            a = parent[a]
        return a

    for i, j in edges:
        ri, rj = find(i), find(m + j)
        if ri == rj:
            return False
        parent[ri] = rj
    return True  # m + n - 1 edges without a cycle span all nodes


def _solve_tree(edges, a, b):
    """Unique flow on a spanning tree meeting row sums ``a`` and column sums ``b``."""
    ra, cb = list(a), list(b)
    remaining = set(edges)
    flow = {}
    while remaining:
        deg = {}
        for i, j in remaining:
            deg[("r", i)] = deg.get(("r", i), 0) + 1
            deg[("c", j)] = deg.get(("c", j), 0) + 1
        for (i, j) in sorted(remaining):
            if deg[("r", i)] == 1:
                v = ra[i]
            elif deg[("c", j)] == 1:
                v = cb[j]
            else:
                continue
            flow[(i, j)] = v
            ra[i] -= v
            cb[j] -= v
            remaining.discard((i, j))
            break
        else:  # pragma: no cover - a tree always has a leaf
            raise AssertionError("no leaf edge")
    if any(ra) or any(cb):
        return None
    return flow


def transport_vertices(a: Sequence, b: Sequence) -> list:
    """All vertices (as dense ``m x n`` tuples) of the transportation polytope, deduplicated."""
    m, n = len(a), len(b)
    edges = [(i, j) for i in range(m) for j in range(n)]
    seen = set()
    out = []
    for tree in combinations(edges, m + n - 1):
        if not _is_spanning_tree(tree, m, n):
            continue
        flow = _solve_tree(tree, a, b)
        if flow is None or any(v < 0 for v in flow.values()):
            continue
        dense = tuple(tuple(flow.get((i, j), Fraction(0)) for j in range(n)) for i in range(m))
        if dense not in seen:
            seen.add(dense)
            out.append(dense)
    return out


def transport_bruteforce(a: Sequence, b: Sequence, cost: Sequence[Sequence], sense: str = "min") -> tuple:
    """Best ``sum_ij C_ij P_ij`` over all vertices; returns ``(value, vertex)``."""
    best = None
    for P in transport_vertices(a, b):
        v = sum((cost[i][j] * P[i][j] for i in range(len(a)) for j in range(len(b))), Fraction(0))
        if best is None or (v < best[0] if sense == "min" else v > best[0]):
            best = (v, P)
    if best is None:
        raise ValueError("transportation polytope is empty")
    return best

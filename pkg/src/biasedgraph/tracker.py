"""Incremental connected-component bookkeeping for growing graphs.

A union-find structure that, besides connectivity queries, maintains the
handful of aggregate statistics the experiments need after every edge
insertion: component count, number of isolated vertices, number of
two-vertex components, the sum of squared component sizes and the largest
component size.  All counters are exact integers; Python ints never
overflow, so the squared sum stays exact up to n = 10**8 and beyond.

Deletions, rollback and persistence are out of scope.
"""

from __future__ import annotations

import math
from dataclasses import dataclass


@dataclass(frozen=True)
class Snapshot:
    """Observables of the graph after m inserted edges.

    Times are rescaled edge counts: ``t_giant = 2m/n`` (giant-component
    timescale, n/2 edges per unit) and ``t_conn = 2m/(n ln n)``
    (connectivity timescale, natural log).  Fractions are per vertex:
    ``isolated_frac`` is the share of isolated vertices, ``pair_frac`` the
    share of vertices living in components of size 2, ``susceptibility``
    the mean component size seen from a uniform vertex (sum of squared
    component sizes over n) and ``largest_frac`` the relative size of the
    largest component.
    """

    m: int
    t_giant: float
    t_conn: float
    isolated_frac: float
    pair_frac: float
    susceptibility: float
    largest_frac: float
    num_components: int


class ComponentTracker:
    """Union-find over n vertices with O(1)-maintained component statistics.

    Union by size plus path halving; a sequence of unions costs amortized
    near-constant time per operation and O(n) memory.
    """

    __slots__ = (
        "n",
        "parent",
        "size",
        "num_components",
        "num_isolated",
        "num_size2",
        "sum_sq",
        "largest",
    )

    def __init__(self, n: int):
        if n < 1:
            raise ValueError(f"need at least one vertex, got n={n}")
        self.n = n
        self.parent = list(range(n))
        self.size = [1] * n
        self.num_components = n
        self.num_isolated = n
        self.num_size2 = 0
        self.sum_sq = n          # n singletons of size 1
        self.largest = 1

    def find(self, u: int) -> int:
        """Return the representative of u's component."""
        if not 0 <= u < self.n:
            raise IndexError(f"vertex {u} out of range for n={self.n}")
        parent = self.parent
        while parent[u] != u:
            parent[u] = parent[parent[u]]   # path halving
            u = parent[u]
        return u

    def component_size(self, u: int) -> int:
        return self.size[self.find(u)]

    def union(self, u: int, v: int) -> bool:
        """Join the components of u and v.

        Returns True if two distinct components were merged, False if u and
        v were already connected.  All statistics are updated exactly: for a
        merge of sizes a and b the squared sum gains 2ab, and the isolated /
        pair counters move by the obvious deltas.
        """
        ru = self.find(u)
        rv = self.find(v)
        if ru == rv:
            return False
        size = self.size
        a = size[ru]
        b = size[rv]
        if a < b:
            ru, rv = rv, ru
            a, b = b, a
        # rv (smaller) hangs under ru
        self.parent[rv] = ru
        size[ru] = a + b
        self.num_components -= 1
        self.sum_sq += 2 * a * b
        if a == 1:
            self.num_isolated -= 1
        if b == 1:
            self.num_isolated -= 1
        self.num_size2 += (1 if a + b == 2 else 0) - (1 if a == 2 else 0) - (1 if b == 2 else 0)
        if a + b > self.largest:
            self.largest = a + b
        return True

    def observables(self, m: int) -> Snapshot:
        """Snapshot of the tracked statistics after m edges.

        m only enters through the two rescaled times; the structural fields
        come from the current union-find state.
        """
        n = self.n
        logn = math.log(n) if n > 1 else 1.0   # n=1 has no meaningful conn scale
        return Snapshot(
            m=m,
            t_giant=2.0 * m / n,
            t_conn=2.0 * m / (n * logn),
            isolated_frac=self.num_isolated / n,
            pair_frac=2.0 * self.num_size2 / n,
            susceptibility=self.sum_sq / n,
            largest_frac=self.largest / n,
            num_components=self.num_components,
        )

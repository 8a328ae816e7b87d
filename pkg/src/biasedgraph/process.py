"""Biased random graph processes with exact and approximate edge samplers.

Two models on n vertices, both starting from the empty graph and adding one
missing edge per step.  Each missing pair {u, v} carries a weight decided by
whether its endpoints are isolated (degree zero), and the next edge is drawn
with probability proportional to its weight:

* "or" model:  weight 1 if both endpoints are isolated, bias otherwise
  (the bias applies when u or v is already covered);
* "and" model: weight bias if both endpoints are non-isolated, 1 otherwise
  (the bias applies only when u and v are both covered).

At bias = 1 the two models coincide with the uniform random graph process,
and whenever no isolated vertices remain both models continue uniformly.
If every positive-count stratum has weight zero (bias = 0 corner cases) the
step falls back to the uniform distribution over all missing pairs.

The exact sampler stratifies missing pairs into three classes
(isolated-isolated, mixed, neither-isolated), picks a class by
weight x count, then a pair uniformly inside the class, so a step costs
O(1) expected time no matter how large the graph is.

The approximate sampler draws an ordered pair from all n^2 with the class
weights above and skips loops and already-present edges.  For the "and"
model this matches the stepwise construction used in the asymptotic
analysis; for the "or" model it is the symmetric extension (weight 1 only
when both endpoints are isolated), which is a convenience definition here,
not an independently published construction.
"""

from __future__ import annotations

import math
import random
from array import array
from dataclasses import dataclass
from enum import Enum

from .tracker import ComponentTracker, Snapshot

__all__ = [
    "ModelKind",
    "SamplingMode",
    "ModelSpec",
    "CategoryCensus",
    "ProcessState",
    "EdgeCount",
    "GiantFraction",
    "Connected",
    "IsolatedExhausted",
    "CompleteGraphError",
]

# fraction of missing pairs in the densest stratum below which rejection
# sampling is abandoned for an explicit scan of the missing pairs
_ENUMERATION_RATIO = 0.05

_HASH_MULT = 0x9E3779B97F4A7C15
_WORD = (1 << 64) - 1


class CompleteGraphError(RuntimeError):
    """Raised when a step is requested but no missing pair is left."""


class ModelKind(Enum):
    OR = "or"
    AND = "and"


class SamplingMode(Enum):
    EXACT = "exact"
    ORDERED_PAIR = "approx"


@dataclass(frozen=True)
class ModelSpec:
    """Which process to run: model kind, bias strength, sampler flavour."""

    kind: ModelKind
    bias: float
    sampling: SamplingMode = SamplingMode.EXACT

    def __post_init__(self):
        if not isinstance(self.kind, ModelKind):
            raise TypeError(f"kind must be a ModelKind, got {self.kind!r}")
        if not isinstance(self.sampling, SamplingMode):
            raise TypeError(f"sampling must be a SamplingMode, got {self.sampling!r}")
        b = self.bias
        if not (isinstance(b, (int, float)) and math.isfinite(b) and b >= 0):
            raise ValueError(f"bias must be finite and >= 0, got {b!r}")


@dataclass(frozen=True)
class CategoryCensus:
    """Missing-pair counts and weights for the three endpoint strata.

    Counts are exact integers; with i isolated vertices and m edges on n
    vertices they are C(i,2), i(n-i) and C(n-i,2)-m (every existing edge
    lives inside the non-isolated stratum).  total_weight is the weighted
    missing-pair mass the exact sampler normalises by.
    """

    iso_iso: int
    mixed: int
    noniso_noniso: int
    weights: tuple[float, float, float]
    total_weight: float

    @property
    def missing_total(self) -> int:
        return self.iso_iso + self.mixed + self.noniso_noniso


# stop rules for run_until ------------------------------------------------


@dataclass(frozen=True)
class EdgeCount:
    """Stop once the graph holds exactly this many edges."""

    target: int


@dataclass(frozen=True)
class GiantFraction:
    """Stop once the largest component reaches alpha * n vertices."""

    alpha: float


@dataclass(frozen=True)
class Connected:
    """Stop once a single component remains."""


@dataclass(frozen=True)
class IsolatedExhausted:
    """Stop once no isolated vertex remains."""


class _EdgeSet:
    """Open-addressing hash set of edge codes u * n + v (u < v).

    A plain Python set of several million boxed ints costs hundreds of
    megabytes; this table stores raw 64-bit codes in an array('q') at 8
    bytes per slot, kept at most half full.  Code 0 never occurs (u < v
    forces v >= 1) and marks empty slots.
    """

    __slots__ = ("_table", "_mask", "_shift", "_used")

    def __init__(self, bits: int = 10):
        self._table = array("q", bytes(8 << bits))
        self._mask = (1 << bits) - 1
        self._shift = 64 - bits
        self._used = 0

    def __len__(self) -> int:
        return self._used

    def __contains__(self, code: int) -> bool:
        table = self._table
        mask = self._mask
        idx = ((code * _HASH_MULT) & _WORD) >> self._shift
        slot = table[idx]
        while slot:
            if slot == code:
                return True
            idx = (idx + 1) & mask
            slot = table[idx]
        return False

    def add(self, code: int) -> None:
        table = self._table
        mask = self._mask
        idx = ((code * _HASH_MULT) & _WORD) >> self._shift
        slot = table[idx]
        while slot:
            if slot == code:
                return
            idx = (idx + 1) & mask
            slot = table[idx]
        table[idx] = code
        self._used += 1
        if 2 * self._used > mask:
            self._grow()

    def _grow(self) -> None:
        old = self._table
        bits = (self._mask + 1).bit_length() + 1   # double the table
        self._table = array("q", bytes(8 << bits))
        self._mask = (1 << bits) - 1
        self._shift = 64 - bits
        table = self._table
        mask = self._mask
        shift = self._shift
        for code in old:
            if code:
                idx = ((code * _HASH_MULT) & _WORD) >> shift
                while table[idx]:
                    idx = (idx + 1) & mask
                table[idx] = code

    def __iter__(self):
        for code in self._table:
            if code:
                yield code


class ProcessState:
    """Mutable state of one process run: graph, components, partition, RNG.

    Vertices are split into two dense arrays, isolated and non-isolated,
    with a position index so membership updates are O(1) swap-deletes; a
    vertex migrates between the arrays at most once, when its first edge
    arrives.  The RNG is a seeded Mersenne Twister, so runs are
    reproducible given (n, model, seed).
    """

    def __init__(self, n: int, model: ModelSpec, seed: int = 0, initial_edges=()):
        if n < 1:
            raise ValueError(f"need at least one vertex, got n={n}")
        self.n = n
        self.model = model
        self.tracker = ComponentTracker(n)
        self.m = 0
        self.max_edges = n * (n - 1) // 2
        self.rng = random.Random(seed)
        self.attempt_count = 0
        self.iso_list = list(range(n))
        self.noniso_list: list[int] = []
        self._pos = list(range(n))
        self._covered = bytearray(n)
        self._edge_set = _EdgeSet()
        for u, v in initial_edges:
            self.add_edge(u, v)

    # -- graph mutation ----------------------------------------------------

    def add_edge(self, u: int, v: int) -> None:
        """Insert the edge {u, v}, updating partition lists and components."""
        if u == v:
            raise ValueError(f"loop at vertex {u} is not an edge")
        if u > v:
            u, v = v, u
        if u < 0 or v >= self.n:
            raise IndexError(f"pair ({u}, {v}) out of range for n={self.n}")
        code = u * self.n + v
        edge_set = self._edge_set
        if code in edge_set:
            raise ValueError(f"edge ({u}, {v}) already present")
        edge_set.add(code)
        self.m += 1
        covered = self._covered
        if not covered[u]:
            self._cover(u)
        if not covered[v]:
            self._cover(v)
        self.tracker.union(u, v)

    def _cover(self, x: int) -> None:
        # swap-delete from the isolated array, append to the other one
        iso = self.iso_list
        pos = self._pos
        p = pos[x]
        last = iso[-1]
        iso[p] = last
        pos[last] = p
        iso.pop()
        pos[x] = len(self.noniso_list)
        self.noniso_list.append(x)
        self._covered[x] = 1

    def edges(self):
        """Yield the current edges as canonical (min, max) pairs."""
        n = self.n
        for code in self._edge_set:
            yield code // n, code % n

    def has_edge(self, u: int, v: int) -> bool:
        if u > v:
            u, v = v, u
        return u * self.n + v in self._edge_set

    def snapshot(self) -> Snapshot:
        return self.tracker.observables(self.m)

    # -- census and samplers -------------------------------------------------

    def census(self) -> CategoryCensus:
        n = self.n
        i = len(self.iso_list)
        k = n - i
        iso_iso = i * (i - 1) // 2
        mixed = i * k
        noniso = k * (k - 1) // 2 - self.m
        bias = self.model.bias
        if self.model.kind is ModelKind.OR:
            weights = (1.0, bias, bias)
        else:
            weights = (1.0, 1.0, bias)
        total = weights[0] * iso_iso + weights[1] * mixed + weights[2] * noniso
        return CategoryCensus(iso_iso, mixed, noniso, weights, total)

    def sample_edge_exact(self) -> tuple[int, int]:
        """Draw one missing pair with probability proportional to its weight.

        Stratified two-stage draw; does not modify the graph (only the RNG
        advances).  Raises CompleteGraphError when no missing pair is left.
        """
        n = self.n
        m = self.m
        iso = self.iso_list
        nl = self.noniso_list
        i = len(iso)
        k = n - i
        c_ii = i * (i - 1) // 2
        c_mx = i * k
        c_nn = k * (k - 1) // 2 - m
        if c_ii + c_mx + c_nn == 0:
            raise CompleteGraphError(f"all {self.max_edges} edges present")
        bias = self.model.bias
        if self.model.kind is ModelKind.OR:
            p0 = float(c_ii)
            p1 = bias * c_mx
            p2 = bias * c_nn
        else:
            p0 = float(c_ii)
            p1 = float(c_mx)
            p2 = bias * c_nn
        total = p0 + p1 + p2
        if total <= 0.0:
            # every populated stratum has weight zero: uniform over missing
            p0 = float(c_ii)
            p1 = float(c_mx)
            p2 = float(c_nn)
            total = p0 + p1 + p2
        rnd = self.rng.random
        r = rnd() * total
        if r < p0:
            # two distinct isolated vertices; no edge can exist between them
            a = int(rnd() * i)
            if a >= i:
                a = i - 1
            b = int(rnd() * (i - 1))
            if b >= i - 1:
                b = i - 2
            if b >= a:
                b += 1
            u = iso[a]
            v = iso[b]
        elif r < p0 + p1:
            a = int(rnd() * i)
            if a >= i:
                a = i - 1
            b = int(rnd() * k)
            if b >= k:
                b = k - 1
            u = iso[a]
            v = nl[b]
        else:
            u, v = self._draw_noniso_pair(k, c_nn)
        if u > v:
            u, v = v, u
        return u, v

    def _draw_noniso_pair(self, k: int, missing: int) -> tuple[int, int]:
        """Uniform missing pair with both endpoints non-isolated."""
        n = self.n
        nl = self.noniso_list
        edge_set = self._edge_set
        stratum_pairs = k * (k - 1) // 2
        if missing < _ENUMERATION_RATIO * stratum_pairs:
            # nearly complete stratum: rejection would thrash, scan instead
            target = int(self.rng.random() * missing)
            if target >= missing:
                target = missing - 1
            seen = 0
            for ai in range(k - 1):
                u = nl[ai]
                for bi in range(ai + 1, k):
                    v = nl[bi]
                    code = u * n + v if u < v else v * n + u
                    if code not in edge_set:
                        if seen == target:
                            return u, v
                        seen += 1
            raise AssertionError("missing-pair count disagrees with scan")
        rnd = self.rng.random
        while True:
            a = int(rnd() * k)
            if a >= k:
                a = k - 1
            b = int(rnd() * (k - 1))
            if b >= k - 1:
                b = k - 2
            if b >= a:
                b += 1
            u = nl[a]
            v = nl[b]
            code = u * n + v if u < v else v * n + u
            if code not in edge_set:
                return u, v

    def sample_step_approx(self):
        """One ordered-pair attempt; returns the pair, or None when skipped.

        Draws an ordered pair from all n^2 with the model's class weights,
        skipping loops and existing edges.  Every call counts one attempt.
        """
        n = self.n
        iso = self.iso_list
        nl = self.noniso_list
        i = len(iso)
        k = n - i
        if self.m == self.max_edges:
            raise CompleteGraphError(f"all {self.max_edges} edges present")
        bias = self.model.bias
        c_ii = i * i
        c_mx = i * k          # each mixed orientation separately below
        c_nn = k * k
        if self.model.kind is ModelKind.OR:
            p0 = float(c_ii)
            p1 = bias * c_mx
            p2 = bias * c_mx
            p3 = bias * c_nn
        else:
            p0 = float(c_ii)
            p1 = float(c_mx)
            p2 = float(c_mx)
            p3 = bias * c_nn
        total = p0 + p1 + p2 + p3
        if total <= 0.0:
            p0 = float(c_ii)
            p1 = float(c_mx)
            p2 = float(c_mx)
            p3 = float(c_nn)
            total = p0 + p1 + p2 + p3
        rnd = self.rng.random
        r = rnd() * total
        if r < p0:
            first, second, la, lb = iso, iso, i, i
        elif r < p0 + p1:
            first, second, la, lb = iso, nl, i, k
        elif r < p0 + p1 + p2:
            first, second, la, lb = nl, iso, k, i
        else:
            first, second, la, lb = nl, nl, k, k
        a = int(rnd() * la)
        if a >= la:
            a = la - 1
        b = int(rnd() * lb)
        if b >= lb:
            b = lb - 1
        u = first[a]
        v = second[b]
        self.attempt_count += 1
        if u == v:
            return None
        if u > v:
            u, v = v, u
        if u * n + v in self._edge_set:
            return None
        return u, v

    # -- process driver ------------------------------------------------------

    def step(self) -> Snapshot:
        """Advance by one sampler invocation and return fresh observables.

        In exact mode every step adds one edge; in ordered-pair mode a step
        may be a skip, leaving the graph unchanged.
        """
        self.advance()
        return self.tracker.observables(self.m)

    def advance(self) -> None:
        """step() without building a Snapshot; the driver loops use this."""
        if self.model.sampling is SamplingMode.EXACT:
            u, v = self.sample_edge_exact()
            self.add_edge(u, v)
        else:
            pair = self.sample_step_approx()
            if pair is not None:
                self.add_edge(*pair)

    def run_until(self, stop) -> Snapshot:
        """Advance until the stop rule is satisfied; return final observables.

        Raises CompleteGraphError if the graph completes first, ValueError
        for rules that are unsatisfiable from the current state.
        """
        tracker = self.tracker
        advance = self.advance
        if isinstance(stop, EdgeCount):
            if not 0 <= stop.target <= self.max_edges:
                raise ValueError(
                    f"target {stop.target} not in [0, {self.max_edges}] for n={self.n}"
                )
            if stop.target < self.m:
                raise ValueError(f"already past target: m={self.m} > {stop.target}")
            while self.m < stop.target:
                advance()
        elif isinstance(stop, GiantFraction):
            if not 0.0 < stop.alpha <= 1.0:
                raise ValueError(f"alpha must be in (0, 1], got {stop.alpha}")
            goal = stop.alpha * self.n
            while tracker.largest < goal:
                advance()
        elif isinstance(stop, Connected):
            while tracker.num_components > 1:
                advance()
        elif isinstance(stop, IsolatedExhausted):
            while tracker.num_isolated > 0:
                advance()
        else:
            raise TypeError(f"unknown stop rule: {stop!r}")
        return tracker.observables(self.m)

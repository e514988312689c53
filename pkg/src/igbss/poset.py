"""Layered partially ordered sample space for blind source separation.

The sample space has four strata::

    bottom  ->  mixing (a)  ->  source (z)  ->  received (x)

Mixing states of order ``j`` are indexed ``(l, n_1, ..., n_j)`` with strictly
increasing source subscripts, source states ``(n, m)`` and received states
``(l, m)``.  All indices are zero based.

The order relation is the reachability relation of the cover-edge DAG after
the edge-removal rule (``z[n, m]`` is not below ``x[n, m]``) has been applied.
Reachability is stored as one Python integer bitset per state, so ``leq`` is a
shift and a mask.
"""
from __future__ import annotations

import enum
import itertools
from functools import cached_property
from math import comb
from typing import Iterable, NamedTuple

import numpy as np
from scipy import sparse


class Layer(enum.IntEnum):
    BOTTOM = 0
    MIXING = 1
    SOURCE = 2
    RECEIVED = 3


_PREFIX = {Layer.BOTTOM: "bot", Layer.MIXING: "a", Layer.SOURCE: "z", Layer.RECEIVED: "x"}


class StateId(NamedTuple):
    layer: Layer
    index: tuple[int, ...]

    def __str__(self) -> str:
        if self.layer is Layer.BOTTOM:
            return "bot"
        return "%s(%s)" % (_PREFIX[self.layer], ",".join(map(str, self.index)))

    @property
    def order(self) -> int:
        """Interaction order of a mixing state (0 for other layers)."""
        return len(self.index) - 1 if self.layer is Layer.MIXING else 0


BOTTOM = StateId(Layer.BOTTOM, ())


def mixing(l: int, *sources: int) -> StateId:
    return StateId(Layer.MIXING, (l, *sources))


def source(n: int, m: int) -> StateId:
    return StateId(Layer.SOURCE, (n, m))


def received(l: int, m: int) -> StateId:
    return StateId(Layer.RECEIVED, (l, m))


def _enumerate_states(L: int, N: int, M: int, k: int) -> list[StateId]:
    states = [BOTTOM]
    for j in range(1, k + 1):
        for l in range(L):
            for combo in itertools.combinations(range(N), j):
                states.append(mixing(l, *combo))
    states.extend(source(n, m) for n in range(N) for m in range(M))
    states.extend(received(l, m) for l in range(L) for m in range(M))
    return states


class SampleSpace:
    """Immutable layered poset with precomputed reachability.

    Build instances with :func:`build_sample_space`.
    """

    def __init__(self, L: int, N: int, M: int, order: int):
        self.L, self.N, self.M, self.order = L, N, M, order
        self.states: tuple[StateId, ...] = tuple(_enumerate_states(L, N, M, order))
        self.index: dict[StateId, int] = {s: i for i, s in enumerate(self.states)}
        edges = list(self._cover_edges())
        # bottom stays the least element even where edge removal orphans a
        # received state (single-source spaces)
        has_parent = {j for _, j in edges}
        edges.extend((0, j) for j in range(1, len(self.states)) if j not in has_parent)
        self.cover_edges: tuple[tuple[int, int], ...] = tuple(edges)
        self._reach = self._close()

        layers = np.array([s.layer for s in self.states], dtype=np.int8)
        self.layers = layers
        self.mixing_index = np.flatnonzero(layers == Layer.MIXING)
        self.source_index = np.flatnonzero(layers == Layer.SOURCE)
        self.received_index = np.flatnonzero(layers == Layer.RECEIVED)
        # parameter set S = A u Z, kept in enumeration order
        self.param_index = np.concatenate([self.mixing_index, self.source_index])
        n_mix = len(self.mixing_index)
        self.mixing_params = np.arange(n_mix)
        self.source_params = np.arange(n_mix, len(self.param_index))

    # construction -----------------------------------------------------

    def _cover_edges(self) -> Iterable[tuple[int, int]]:
        idx = self.index
        L, M = self.L, self.M
        for s in self.states:
            i = idx[s]
            if s.layer is Layer.BOTTOM:
                for t in self.states:
                    if t.layer is Layer.MIXING:
                        yield i, idx[t]
            elif s.layer is Layer.MIXING:
                for n in s.index[1:]:
                    for m in range(M):
                        yield i, idx[source(n, m)]
            elif s.layer is Layer.SOURCE:
                n, m = s.index
                for l in range(L):
                    # removal rule: z[n, m] is not below x[n, m]
                    if n < L and l == n:
                        continue
                    yield i, idx[received(l, m)]

    def _close(self) -> list[int]:
        children: list[list[int]] = [[] for _ in self.states]
        for i, j in self.cover_edges:
            children[i].append(j)
        reach = [0] * len(self.states)
        # enumeration order is a topological order, so walk it backwards
        for i in range(len(self.states) - 1, -1, -1):
            bits = 1 << i
            for j in children[i]:
                bits |= reach[j]
            reach[i] = bits
        return reach

    # queries ----------------------------------------------------------

    def __len__(self) -> int:
        return len(self.states)

    def __contains__(self, s: object) -> bool:
        return s in self.index

    def __repr__(self) -> str:
        return "SampleSpace(L=%d, N=%d, M=%d, order=%d, |Omega|=%d)" % (
            self.L, self.N, self.M, self.order, len(self))

    @property
    def n_params(self) -> int:
        return len(self.param_index)

    def position(self, s: StateId) -> int:
        try:
            return self.index[s]
        except KeyError:
            raise ValueError("%s is not a state of %r" % (s, self)) from None

    def leq(self, s: StateId, w: StateId) -> bool:
        """Return ``True`` iff ``s`` precedes or equals ``w``."""
        i, j = self.position(s), self.position(w)
        return bool((self._reach[i] >> j) & 1)

    def upset(self, s: StateId) -> frozenset[StateId]:
        return frozenset(self.states[j] for j in self._bits(self._reach[self.position(s)]))

    def downset(self, w: StateId) -> frozenset[StateId]:
        j = self.position(w)
        return frozenset(self.states[i] for i, r in enumerate(self._reach) if (r >> j) & 1)

    def _bits(self, r: int) -> np.ndarray:
        n = len(self.states)
        raw = np.frombuffer(r.to_bytes((n + 7) // 8, "little"), dtype=np.uint8)
        return np.flatnonzero(np.unpackbits(raw, bitorder="little")[:n])

    @cached_property
    def reach(self) -> sparse.csr_matrix:
        """0/1 matrix with ``reach[i, j] = 1`` iff state i precedes state j."""
        rows, cols = [], []
        for i, r in enumerate(self._reach):
            js = self._bits(r)
            rows.append(np.full(len(js), i))
            cols.append(js)
        rows_, cols_ = np.concatenate(rows), np.concatenate(cols)
        n = len(self.states)
        return sparse.csr_matrix((np.ones(len(rows_)), (rows_, cols_)), shape=(n, n))

    @cached_property
    def incidence(self) -> sparse.csr_matrix:
        """Rows of :attr:`reach` restricted to the parameter set S (float)."""
        return self.reach[self.param_index].tocsr()

    def model_matrix(self) -> np.ndarray:
        """Dense model matrix with entries ``F[i, j] = 1`` iff state j precedes state i."""
        return self.reach.T.toarray()

    def dump_edges(self) -> str:
        """Cover edges as text, one ``s -> w`` pair per line."""
        return "".join("%s -> %s\n" % (self.states[i], self.states[j])
                       for i, j in self.cover_edges)


def n_mixing_states(L: int, N: int, k: int) -> int:
    return sum(L * comb(N, j) for j in range(1, k + 1))


def build_sample_space(L: int, N: int, M: int, k: int = 1) -> SampleSpace:
    """Build the layered sample space for L received signals, N sources, M samples
    and mixing interactions up to order ``k``."""
    for name, v in (("N", N), ("M", M), ("k", k)):
        if int(v) != v or v < 1:
            raise ValueError("%s must be a positive integer, got %r" % (name, v))
    if int(L) != L or L < 2:
        raise ValueError("need at least two received signals (L >= 2), got L=%r" % L)
    if k > N:
        raise ValueError("interaction order k=%d exceeds the number of sources N=%d" % (k, N))
    return SampleSpace(int(L), int(N), int(M), int(k))

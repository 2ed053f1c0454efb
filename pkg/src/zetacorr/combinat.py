"""Enumeration of subset pairs, admissible and unrestricted set partitions,
and ordered tripartitions.

All enumerations are deterministic functions of their input so that
floating-point reductions over them are replayable.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass
from functools import lru_cache
from typing import Iterable, NamedTuple, Sequence

from .errors import TooLarge

ALPHA = "alpha"
BETA = "beta"

MAX_TRIPARTITION_N = 6
MAX_PARTITION_SIZE = 8


class Shift(NamedTuple):
    label: int
    value: complex
    side: str


class ShiftSet(tuple):
    """Ordered multiset of labelled complex shifts."""

    def __new__(cls, elements: Iterable[Shift] = ()):
        elems = tuple(elements)
        labels = [e.label for e in elems]
        if len(set(labels)) != len(labels):
            raise ValueError("shift labels must be unique")
        return super().__new__(cls, elems)

    @classmethod
    def from_values(cls, values: Sequence[complex], side: str = ALPHA, start: int = 0) -> "ShiftSet":
        return cls(Shift(start + i, complex(v), side) for i, v in enumerate(values))

    @property
    def values(self) -> tuple:
        return tuple(e.value for e in self)

    @property
    def labels(self) -> tuple:
        return tuple(e.label for e in self)

    def negated(self) -> "ShiftSet":
        return ShiftSet(Shift(e.label, -e.value, e.side) for e in self)

    def __add__(self, other):
        return ShiftSet(tuple(self) + tuple(other))


@dataclass(frozen=True)
class SubsetAssignment:
    S: ShiftSet
    Sbar: ShiftSet
    T: ShiftSet
    Tbar: ShiftSet


@dataclass(frozen=True)
class Tripartition:
    K: tuple
    L: tuple
    M: tuple


# ---------------------------------------------------------------------------
# index-level enumerations (cached, used by the evaluation engines)


@lru_cache(maxsize=None)
def subset_pairs_idx(m: int, n: int) -> tuple:
    """All (S, T) index tuples with S in C(range(m)), T in C(range(n)), |S| = |T|.

    Ordered by size, then lexicographically.
    """
    out = []
    for k in range(min(m, n) + 1):
        for S in itertools.combinations(range(m), k):
            for T in itertools.combinations(range(n), k):
                out.append((S, T))
    return tuple(out)


@lru_cache(maxsize=None)
def matchings_idx(a: int, b: int) -> tuple:
    """Partial matchings between range(a) and range(b) as tuples of (i, j) pairs."""
    out = []
    for k in range(min(a, b) + 1):
        for left in itertools.combinations(range(a), k):
            for right in itertools.permutations(range(b), k):
                out.append(tuple(zip(left, right)))
    return tuple(out)


@lru_cache(maxsize=None)
def set_partitions_idx(k: int) -> tuple:
    """All set partitions of range(k), as tuples of sorted index tuples.

    Generated from restricted growth strings in lexicographic order.
    """
    if k > MAX_PARTITION_SIZE:
        raise TooLarge(f"set partitions of {k} elements exceed guard {MAX_PARTITION_SIZE}")
    if k == 0:
        return ((),)
    out = []

    def rec(i, rgs, nblocks):
        if i == k:
            blocks = [[] for _ in range(nblocks)]
            for idx, b in enumerate(rgs):
                blocks[b].append(idx)
            out.append(tuple(tuple(b) for b in blocks))
            return
        for b in range(nblocks + 1):
            rgs.append(b)
            rec(i + 1, rgs, max(nblocks, b + 1))
            rgs.pop()

    rec(0, [], 0)
    return tuple(out)


# ---------------------------------------------------------------------------
# ShiftSet-level enumerations


def enumerate_subset_pairs(A: ShiftSet, B: ShiftSet) -> list:
    out = []
    for S, T in subset_pairs_idx(len(A), len(B)):
        Sset = ShiftSet(A[i] for i in S)
        Tset = ShiftSet(B[j] for j in T)
        Sbar = ShiftSet(A[i] for i in range(len(A)) if i not in S)
        Tbar = ShiftSet(B[j] for j in range(len(B)) if j not in T)
        out.append(SubsetAssignment(Sset, Sbar, Tset, Tbar))
    return out


def enumerate_admissible_partitions(Sbar: ShiftSet, Tbar: ShiftSet) -> list:
    """Partitions of Sbar+Tbar into singletons and mixed alpha-beta pairs."""
    out = []
    for match in matchings_idx(len(Sbar), len(Tbar)):
        used_a = {i for i, _ in match}
        used_b = {j for _, j in match}
        blocks = [(Sbar[i], Tbar[j]) for i, j in match]
        blocks += [(Sbar[i],) for i in range(len(Sbar)) if i not in used_a]
        blocks += [(Tbar[j],) for j in range(len(Tbar)) if j not in used_b]
        out.append(tuple(blocks))
    return out


def enumerate_set_partitions(W: Sequence) -> list:
    """All Bell(|W|) set partitions of W."""
    W = tuple(W)
    return [tuple(tuple(W[i] for i in block) for block in p) for p in set_partitions_idx(len(W))]


def enumerate_tripartitions(n: int) -> list:
    """All 3^n ordered tripartitions K + L + M of {1..n}."""
    if n > MAX_TRIPARTITION_N:
        raise TooLarge(f"tripartitions of n={n} exceed guard {MAX_TRIPARTITION_N}")
    if n < 0:
        raise ValueError("n must be nonnegative")
    out = []
    for assign in itertools.product(range(3), repeat=n):
        K = tuple(i + 1 for i, a in enumerate(assign) if a == 0)
        L = tuple(i + 1 for i, a in enumerate(assign) if a == 1)
        M = tuple(i + 1 for i, a in enumerate(assign) if a == 2)
        out.append(Tripartition(K, L, M))
    return out

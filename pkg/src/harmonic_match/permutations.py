"""Permutations, integer partitions and standard Young tableaux.

Permutations use 1-based one-line notation: ``Permutation((2, 3, 1))`` sends
1 to 2, 2 to 3 and 3 to 1. Products compose right to left, so
``(s * t)(i) == s(t(i))``.
"""

from __future__ import annotations

import itertools
from functools import lru_cache
from math import factorial
from typing import Iterable, Iterator, Sequence

import numpy as np

Partition = tuple[int, ...]


class Permutation:
    """An element of the symmetric group S_n in one-line notation."""

    __slots__ = ("images", "_hash")

    def __init__(self, images: Iterable[int]):
        images = tuple(int(x) for x in images)
        if sorted(images) != list(range(1, len(images) + 1)):
            raise ValueError(f"not a permutation of 1..{len(images)}: {images}")
        self.images = images
        self._hash = hash(images)

    @classmethod
    def identity(cls, n: int) -> Permutation:
        return cls(range(1, n + 1))

    @classmethod
    def from_zero_based(cls, images: Iterable[int]) -> Permutation:
        return cls(int(x) + 1 for x in images)

    @property
    def n(self) -> int:
        return len(self.images)

    def __call__(self, i: int) -> int:
        return self.images[i - 1]

    def __mul__(self, other: Permutation) -> Permutation:
        if self.n != other.n:
            raise ValueError(f"degree mismatch: {self.n} vs {other.n}")
        return Permutation(self.images[j - 1] for j in other.images)

    def inverse(self) -> Permutation:
        inv = [0] * self.n
        for i, j in enumerate(self.images, start=1):
            inv[j - 1] = i
        return Permutation(inv)

    def extend(self, n: int) -> Permutation:
        """Embed into S_n by fixing every point above the current degree."""
        if n < self.n:
            raise ValueError(f"cannot embed S_{self.n} into S_{n}")
        return Permutation(self.images + tuple(range(self.n + 1, n + 1)))

    def is_identity(self) -> bool:
        return all(i == j for i, j in enumerate(self.images, start=1))

    def to_zero_based(self) -> np.ndarray:
        return np.asarray(self.images, dtype=np.intp) - 1

    def inversions(self) -> int:
        im = self.images
        return sum(1 for a in range(len(im)) for b in range(a + 1, len(im)) if im[a] > im[b])

    def sign(self) -> int:
        return -1 if self.inversions() % 2 else 1

    def __eq__(self, other) -> bool:
        return isinstance(other, Permutation) and self.images == other.images

    def __hash__(self) -> int:
        return self._hash

    def __len__(self) -> int:
        return self.n

    def __iter__(self) -> Iterator[int]:
        return iter(self.images)

    def __repr__(self) -> str:
        return f"Permutation({list(self.images)})"


def compose(second: Permutation, first: Permutation) -> Permutation:
    """Return the product that applies ``first`` and then ``second``."""
    return second * first


def all_permutations(n: int) -> list[Permutation]:
    """All of S_n in lexicographic order of one-line notation."""
    return [Permutation(p) for p in itertools.permutations(range(1, n + 1))]


def contiguous_cycle(i: int, n: int) -> Permutation:
    """The cycle [[i, n]]: n -> i and j -> j + 1 for i <= j < n.

    Left-multiplying S_{n-1} (embedded as the stabiliser of n) by this cycle
    gives exactly the coset of permutations sending n to i.
    """
    if not 1 <= i <= n:
        raise ValueError(f"cycle index {i} out of range 1..{n}")
    images = list(range(1, n + 1))
    for j in range(i, n):
        images[j - 1] = j + 1
    images[n - 1] = i
    return Permutation(images)


def factor_into_adjacent_transpositions(sigma: Permutation) -> list[int]:
    """Write ``sigma`` as a product s_{k1} s_{k2} ... of adjacent transpositions.

    Returns the indices ``[k1, k2, ...]`` where s_k swaps k and k + 1; the
    product is read left to right under the composition convention of
    :class:`Permutation`. The length equals the inversion count.
    """
    work = list(sigma.images)
    right_factors = []
    # bubble sort on positions: work <- work * s_k until sorted
    swapped = True
    while swapped:
        swapped = False
        for k in range(len(work) - 1):
            if work[k] > work[k + 1]:
                work[k], work[k + 1] = work[k + 1], work[k]
                right_factors.append(k + 1)
                swapped = True
    return right_factors[::-1]


def adjacent_transposition(k: int, n: int) -> Permutation:
    if not 1 <= k < n:
        raise ValueError(f"adjacent transposition index {k} out of range 1..{n - 1}")
    images = list(range(1, n + 1))
    images[k - 1], images[k] = k + 1, k
    return Permutation(images)


# --- partitions -------------------------------------------------------------


def check_partition(parts: Sequence[int]) -> Partition:
    parts = tuple(int(p) for p in parts)
    if not parts or any(p < 1 for p in parts):
        raise ValueError(f"partition parts must be positive: {parts}")
    if any(a < b for a, b in zip(parts, parts[1:])):
        raise ValueError(f"partition parts must be nonincreasing: {parts}")
    return parts


@lru_cache(maxsize=None)
def enumerate_partitions(n: int) -> tuple[Partition, ...]:
    """All partitions of ``n`` in reverse-lexicographic order."""
    if n < 1:
        raise ValueError("partitions of n require n >= 1")

    def descend(remaining: int, cap: int) -> Iterator[Partition]:
        if remaining == 0:
            yield ()
            return
        for first in range(min(remaining, cap), 0, -1):
            for rest in descend(remaining - first, first):
                yield (first,) + rest

    return tuple(descend(n, n))


@lru_cache(maxsize=None)
def restrict_partition(lam: Partition) -> tuple[Partition, ...]:
    """Partitions of n - 1 obtained by removing one corner, top row first."""
    out = []
    for r, part in enumerate(lam):
        below = lam[r + 1] if r + 1 < len(lam) else 0
        if part > below:
            child = list(lam)
            child[r] -= 1
            if child[r] == 0:
                child.pop(r)
            if child:
                out.append(tuple(child))
    return tuple(out)


@lru_cache(maxsize=None)
def induce_partition(mu: Partition) -> tuple[Partition, ...]:
    """Partitions of n + 1 obtained by adding one cell, top row first."""
    out = []
    for r in range(len(mu) + 1):
        above = mu[r - 1] if r > 0 else None
        current = mu[r] if r < len(mu) else 0
        if above is None or current < above:
            parent = list(mu) + [0]
            parent[r] += 1
            out.append(tuple(p for p in parent if p > 0))
    return tuple(out)


def removed_row(lam: Partition, mu: Partition) -> int:
    """Row index (0-based) of the cell separating ``mu`` from ``lam``."""
    padded = list(mu) + [0] * (len(lam) - len(mu))
    for r, (a, b) in enumerate(zip(lam, padded)):
        if a != b:
            return r
    raise ValueError(f"{mu} is not obtained from {lam} by removing one cell")


# --- tableaux ---------------------------------------------------------------


@lru_cache(maxsize=None)
def enumerate_tableaux(lam: Partition) -> tuple[tuple[int, ...], ...]:
    """Standard tableaux of shape ``lam`` in last-letter order.

    Each tableau is encoded as the tuple of row indices (0-based) of the
    entries 1..n. Tableaux are grouped by the row holding n, following the
    order of :func:`restrict_partition`, and recursively within each group.
    """
    lam = check_partition(lam)
    if lam == (1,):
        return ((0,),)
    out = []
    for mu in restrict_partition(lam):
        row = removed_row(lam, mu)
        out.extend(t + (row,) for t in enumerate_tableaux(mu))
    return tuple(out)


def tableau_rows(lam: Partition, rows: tuple[int, ...]) -> list[list[int]]:
    """Expand a row-index encoding into explicit rows of entries."""
    filled: list[list[int]] = [[] for _ in lam]
    for entry, r in enumerate(rows, start=1):
        filled[r].append(entry)
    return filled


@lru_cache(maxsize=None)
def dimension(lam: Partition) -> int:
    """Number of standard tableaux of shape ``lam`` (hook length formula)."""
    lam = check_partition(lam)
    n = sum(lam)
    conj = [sum(1 for p in lam if p > c) for c in range(lam[0])]
    hooks = 1
    for r, part in enumerate(lam):
        for c in range(part):
            hooks *= (part - c - 1) + (conj[c] - r - 1) + 1
    return factorial(n) // hooks

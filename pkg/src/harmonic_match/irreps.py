"""Young's orthogonal representation of S_n.

Rows and columns of every matrix are indexed by standard tableaux in
last-letter order (see :func:`~harmonic_match.permutations.enumerate_tableaux`),
which makes the restriction to S_{n-1} block diagonal with blocks ordered as
:func:`~harmonic_match.permutations.restrict_partition`.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from math import sqrt

import numpy as np

from .permutations import (
    Partition,
    Permutation,
    check_partition,
    dimension,
    enumerate_tableaux,
    factor_into_adjacent_transpositions,
    restrict_partition,
)


@dataclass(frozen=True)
class BlockLayout:
    """Placement of the S_{n-1} blocks inside a degree-n irrep.

    ``blocks`` holds ``(mu, offset, size)`` triples in the order of
    :func:`restrict_partition`.
    """

    parent: Partition
    blocks: tuple[tuple[Partition, int, int], ...]

    def block(self, mu: Partition) -> slice:
        for child, offset, size in self.blocks:
            if child == mu:
                return slice(offset, offset + size)
        raise KeyError(f"{mu} is not a restriction of {self.parent}")


def _freeze(a: np.ndarray) -> np.ndarray:
    a.setflags(write=False)
    return a


@lru_cache(maxsize=None)
def _contents(lam: Partition) -> np.ndarray:
    """contents[t, e] = column - row of entry e + 1 in tableau t."""
    tabs = enumerate_tableaux(lam)
    out = np.empty((len(tabs), sum(lam)), dtype=np.int64)
    for t, rows in enumerate(tabs):
        fill = [0] * len(lam)
        for e, r in enumerate(rows):
            out[t, e] = fill[r] - r
            fill[r] += 1
    return _freeze(out)


@lru_cache(maxsize=None)
def adjacent_action(lam: Partition, k: int) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Sparse form of the YOR matrix of s_k = (k, k+1).

    Returns ``(diag, partner, off)`` such that the matrix S satisfies
    ``S[t, t] = diag[t]`` and ``S[partner[t], t] = off[t]`` (``off`` is zero
    when swapping k and k + 1 in tableau t is not standard).
    """
    lam = check_partition(lam)
    n = sum(lam)
    if not 1 <= k < n:
        raise ValueError(f"adjacent transposition index {k} out of range 1..{n - 1}")
    tabs = enumerate_tableaux(lam)
    index = {t: j for j, t in enumerate(tabs)}
    contents = _contents(lam)
    d = len(tabs)
    diag = np.empty(d)
    partner = np.arange(d)
    off = np.zeros(d)
    for t, rows in enumerate(tabs):
        r = int(contents[t, k] - contents[t, k - 1])
        diag[t] = 1.0 / r
        if abs(r) > 1:
            swapped = list(rows)
            swapped[k - 1], swapped[k] = swapped[k], swapped[k - 1]
            partner[t] = index[tuple(swapped)]
            off[t] = sqrt(1.0 - 1.0 / (r * r))
    return _freeze(diag), _freeze(partner), _freeze(off)


def right_multiply_adjacent(M: np.ndarray, lam: Partition, k: int) -> np.ndarray:
    """Return ``M @ yor_adjacent(lam, k)`` in O(d^2)."""
    diag, partner, off = adjacent_action(lam, k)
    return M * diag + M[..., partner] * off


def left_multiply_adjacent(M: np.ndarray, lam: Partition, k: int) -> np.ndarray:
    """Return ``yor_adjacent(lam, k) @ M`` in O(d^2)."""
    diag, partner, off = adjacent_action(lam, k)
    return M * diag[:, None] + M[..., partner, :] * off[:, None]


@lru_cache(maxsize=None)
def yor_adjacent(lam: Partition, k: int) -> np.ndarray:
    """Dense YOR matrix of the adjacent transposition (k, k+1)."""
    lam = check_partition(lam)
    return _freeze(right_multiply_adjacent(np.eye(dimension(lam)), lam, k))


def irrep(lam: Partition, sigma: Permutation) -> np.ndarray:
    """rho_lam(sigma) as a dense orthogonal matrix."""
    lam = check_partition(lam)
    if sum(lam) != sigma.n:
        raise ValueError(f"degree mismatch: partition of {sum(lam)} vs permutation in S_{sigma.n}")
    M = np.eye(dimension(lam))
    for k in factor_into_adjacent_transpositions(sigma):
        M = right_multiply_adjacent(M, lam, k)
    return M


@lru_cache(maxsize=None)
def cycle_irrep(lam: Partition, i: int, top: int | None = None) -> np.ndarray:
    """rho_lam of the contiguous cycle [[i, top]] (``top`` defaults to n).

    [[i, top]] = s_i s_{i+1} ... s_{top-1}; with ``top < n`` this is the
    cycle embedded in S_n as a permutation fixing top + 1, ..., n.
    """
    lam = check_partition(lam)
    n = sum(lam)
    top = n if top is None else top
    if not 1 <= top <= n or not 1 <= i <= top:
        raise ValueError(f"cycle [[{i}, {top}]] out of range for degree {n}")
    M = np.eye(dimension(lam))
    for k in range(i, top):
        M = right_multiply_adjacent(M, lam, k)
    return _freeze(M)


@lru_cache(maxsize=None)
def cycle_irrep_stack(lam: Partition) -> np.ndarray:
    """Array of shape (n, d, d) holding rho_lam([[i, n]]) for i = 1..n."""
    lam = check_partition(lam)
    n = sum(lam)
    return _freeze(np.stack([cycle_irrep(lam, i) for i in range(1, n + 1)]))


@lru_cache(maxsize=None)
def block_layout(lam: Partition) -> BlockLayout:
    lam = check_partition(lam)
    blocks = []
    offset = 0
    for mu in restrict_partition(lam):
        size = dimension(mu)
        blocks.append((mu, offset, size))
        offset += size
    return BlockLayout(lam, tuple(blocks))

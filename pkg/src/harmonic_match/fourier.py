"""Fourier analysis on S_n for graph-matching objectives.

The transform of ``f: S_n -> R`` is ``F(lam) = sum_sigma f(sigma) rho_lam(sigma)``
with rho the Young orthogonal representation, and the inverse is
``f(sigma) = 1/n! sum_lam d_lam tr(rho_lam(sigma)^T F(lam))``.

Function tables are arrays of length n! indexed by the lexicographic order of
:func:`~harmonic_match.permutations.all_permutations`.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache
from math import factorial
from typing import Callable, Mapping, Sequence

import numpy as np

from .irreps import block_layout, cycle_irrep, cycle_irrep_stack, right_multiply_adjacent
from .permutations import (
    Partition,
    Permutation,
    all_permutations,
    dimension,
    enumerate_partitions,
    enumerate_tableaux,
    restrict_partition,
)

ORACLE_LIMIT = 8
PRUNE_TOL = 1e-12


class OracleLimitError(ValueError):
    """Raised when a factorial-cost operation is requested above the oracle limit."""


@dataclass
class FourierCoefficients:
    """Fourier matrices of a function on S_n.

    Partitions missing from ``entries`` stand for zero matrices.
    """

    degree: int
    entries: dict[Partition, np.ndarray] = field(default_factory=dict)

    def __post_init__(self):
        for lam, M in self.entries.items():
            if sum(lam) != self.degree:
                raise ValueError(f"partition {lam} is not a partition of {self.degree}")
            d = dimension(lam)
            if M.shape != (d, d):
                raise ValueError(f"matrix for {lam} has shape {M.shape}, expected {(d, d)}")

    @property
    def support(self) -> list[Partition]:
        return [lam for lam in enumerate_partitions(self.degree) if lam in self.entries]

    def __getitem__(self, lam: Partition) -> np.ndarray:
        lam = tuple(lam)
        if lam in self.entries:
            return self.entries[lam]
        d = dimension(lam)
        return np.zeros((d, d))

    def pruned(self, tol: float = PRUNE_TOL) -> FourierCoefficients:
        """Drop matrices whose max-abs entry is below ``tol``."""
        return FourierCoefficients(
            self.degree,
            {lam: M for lam, M in self.entries.items() if M.size and np.abs(M).max() >= tol},
        )

    def scaled(self, c: float) -> FourierCoefficients:
        return FourierCoefficients(self.degree, {lam: c * M for lam, M in self.entries.items()})

    def __add__(self, other: FourierCoefficients) -> FourierCoefficients:
        if self.degree != other.degree:
            raise ValueError(f"degree mismatch: {self.degree} vs {other.degree}")
        out = dict(self.entries)
        for lam, M in other.entries.items():
            out[lam] = out[lam] + M if lam in out else M
        return FourierCoefficients(self.degree, out)

    def max_abs_diff(self, other: FourierCoefficients) -> float:
        keys = set(self.entries) | set(other.entries)
        return max((float(np.abs(self[k] - other[k]).max()) for k in keys), default=0.0)

    def to_dict(self) -> dict:
        return {
            "degree": self.degree,
            "entries": [
                {"partition": list(lam), "matrix": self.entries[lam].tolist()}
                for lam in self.support
            ],
        }

    @classmethod
    def from_dict(cls, doc: Mapping) -> FourierCoefficients:
        return cls(
            int(doc["degree"]),
            {
                tuple(e["partition"]): np.asarray(e["matrix"], dtype=float)
                for e in doc["entries"]
            },
        )


@dataclass
class GraphChannel:
    """One adjacency matrix of a graph, with a zero diagonal."""

    A: np.ndarray
    label: str = ""

    def __post_init__(self):
        A = np.array(self.A, dtype=float)
        if A.ndim != 2 or A.shape[0] != A.shape[1]:
            raise ValueError(f"adjacency matrix must be square, got shape {A.shape}")
        if not np.all(np.isfinite(A)):
            raise ValueError("adjacency matrix has non-finite entries")
        if np.any(np.diag(A) != 0):
            raise ValueError("adjacency matrix must have a zero diagonal")
        A.setflags(write=False)
        self.A = A

    @property
    def n(self) -> int:
        return self.A.shape[0]


# --- brute force oracle -----------------------------------------------------


@lru_cache(maxsize=None)
def _sjt_swaps(n: int) -> tuple[int, ...]:
    """Adjacent swap positions walking S_n in Steinhaus-Johnson-Trotter order."""
    if n <= 1:
        return ()
    inner = _sjt_swaps(n - 1)
    out = []
    for block in range(factorial(n - 1)):
        sweep = range(n - 1, 0, -1) if block % 2 == 0 else range(1, n)
        out.extend(sweep)
        if block < len(inner):
            # n sits at position 1 after a leftward sweep, at position n after a rightward one
            out.append(inner[block] + (1 if block % 2 == 0 else 0))
    return tuple(out)


@lru_cache(maxsize=None)
def _sjt_lex_ranks(n: int) -> np.ndarray:
    """Lexicographic rank of each permutation visited in SJT order."""
    rank = {p.images: r for r, p in enumerate(all_permutations(n))}
    cur = list(range(1, n + 1))
    out = [rank[tuple(cur)]]
    for k in _sjt_swaps(n):
        cur[k - 1], cur[k] = cur[k], cur[k - 1]
        out.append(rank[tuple(cur)])
    a = np.asarray(out)
    a.setflags(write=False)
    return a


def _check_oracle(n: int, limit: int | None):
    limit = ORACLE_LIMIT if limit is None else limit
    if n > limit:
        raise OracleLimitError(f"n = {n} exceeds the oracle limit {limit} ({factorial(n)} permutations)")


def function_table(f: Callable[[Permutation], float] | Sequence[float] | np.ndarray, n: int) -> np.ndarray:
    """Tabulate ``f`` over S_n in lexicographic order."""
    if callable(f):
        return np.array([f(p) for p in all_permutations(n)], dtype=float)
    table = np.asarray(f, dtype=float)
    if table.shape[-1] != factorial(n):
        raise ValueError(f"function table needs {factorial(n)} entries, got {table.shape[-1]}")
    return table


def brute_fourier_transform(f, n: int, limit: int | None = None) -> FourierCoefficients:
    """Exact transform by summing f(sigma) rho(sigma) over all of S_n.

    Every irrep matrix is obtained from its predecessor in SJT order by one
    sparse adjacent-transposition product.
    """
    _check_oracle(n, limit)
    table = function_table(f, n)
    ranks = _sjt_lex_ranks(n)
    values = table[ranks]
    swaps = _sjt_swaps(n)
    entries = {}
    for lam in enumerate_partitions(n):
        rho = np.eye(dimension(lam))
        acc = values[0] * rho
        for step, k in enumerate(swaps, start=1):
            rho = right_multiply_adjacent(rho, lam, k)
            acc += values[step] * rho
        entries[lam] = acc
    return FourierCoefficients(n, entries)


def irrep_table(lam: Partition, limit: int | None = None) -> np.ndarray:
    """Array of shape (n!, d, d) holding rho_lam(sigma) in lexicographic order."""
    n = sum(lam)
    _check_oracle(n, limit)
    ranks = _sjt_lex_ranks(n)
    d = dimension(lam)
    out = np.empty((len(ranks), d, d))
    rho = np.eye(d)
    out[ranks[0]] = rho
    for step, k in enumerate(_sjt_swaps(n), start=1):
        rho = right_multiply_adjacent(rho, lam, k)
        out[ranks[step]] = rho
    return out


def inverse_fourier_transform(F: FourierCoefficients, sigma: Permutation) -> float:
    from .irreps import irrep

    if sigma.n != F.degree:
        raise ValueError(f"degree mismatch: coefficients of degree {F.degree}, permutation in S_{sigma.n}")
    total = 0.0
    for lam in F.support:
        total += dimension(lam) * float(np.sum(irrep(lam, sigma) * F.entries[lam]))
    return total / factorial(F.degree)


def inverse_fourier_table(F: FourierCoefficients, limit: int | None = None) -> np.ndarray:
    """Values of the inverse transform at every permutation (lexicographic order)."""
    n = F.degree
    _check_oracle(n, limit)
    out = np.zeros(factorial(n))
    for lam in F.support:
        out += dimension(lam) * np.einsum("sij,ij->s", irrep_table(lam, limit), F.entries[lam])
    return out / factorial(n)


# --- graph functions --------------------------------------------------------


def qap_objective(A: np.ndarray, Ap: np.ndarray, sigma: Permutation | np.ndarray) -> float:
    """sum_{i,j} A[i,j] * Ap[sigma(i), sigma(j)]."""
    s = sigma.to_zero_based() if isinstance(sigma, Permutation) else np.asarray(sigma)
    return float(np.sum(A * Ap[np.ix_(s, s)]))


def graph_function_table(A: np.ndarray, limit: int | None = None) -> np.ndarray:
    """Table of f_A(sigma) = A[sigma(n), sigma(n-1)]."""
    n = A.shape[0]
    _check_oracle(n, limit)
    return np.array([A[p(n) - 1, p(n - 1) - 1] for p in all_permutations(n)])


@lru_cache(maxsize=None)
def _trivial_tail_columns(lam: Partition) -> np.ndarray:
    """Tableaux whose entries 1..n-2 all sit in the first row."""
    n = sum(lam)
    cols = [t for t, rows in enumerate(enumerate_tableaux(lam)) if all(r == 0 for r in rows[: n - 2])]
    return np.asarray(cols, dtype=np.intp)


def graph_fourier_transform(channel: GraphChannel | np.ndarray) -> FourierCoefficients:
    """Transform of f_A without summing over S_n.

    {sigma : sigma(n) = i, sigma(n-1) = j} = [[i,n]] [[j',n-1]] S_{n-2} where
    j' is the preimage of j under [[i,n]]. Summing rho over S_{n-2} in the
    adapted basis is (n-2)! times the projector onto tableaux whose first
    n-2 entries fill one row, so only those columns can be nonzero.
    """
    A = channel.A if isinstance(channel, GraphChannel) else np.asarray(channel, dtype=float)
    n = A.shape[0]
    if n < 2:
        raise ValueError("graph functions need n >= 2")
    scale = factorial(n - 2)
    entries = {}
    for lam in enumerate_partitions(n):
        if lam[0] < n - 2:
            continue
        cols = _trivial_tail_columns(lam)
        if cols.size == 0:
            continue
        d = dimension(lam)
        # inner[j'-1] = rho([[j', n-1]])[:, cols]
        inner = np.stack([cycle_irrep(lam, jp, n - 1)[:, cols] for jp in range(1, n)])
        M = np.zeros((d, d))
        block = np.zeros((d, cols.size))
        for i in range(1, n + 1):
            w = np.delete(A[i - 1], i - 1)  # w[j'-1] = A[i, j] for j != i, in j' order
            if not np.any(w):
                continue
            block += cycle_irrep(lam, i) @ np.tensordot(w, inner, axes=1)
        M[:, cols] = scale * block
        entries[lam] = M
    return FourierCoefficients(n, entries).pruned()


def correlation_transform(FA: FourierCoefficients, FAp: FourierCoefficients) -> FourierCoefficients:
    """Transform of f(sigma) = sum_{i,j} A[i,j] A'[sigma(i), sigma(j)].

    With f = 1/(n-2)! sum_pi f_A'(sigma pi) f_A(pi), the transform is
    F_A'(lam) F_A(lam)^T / (n-2)!.
    """
    if FA.degree != FAp.degree:
        raise ValueError(f"degree mismatch: {FA.degree} vs {FAp.degree}")
    n = FA.degree
    scale = 1.0 / factorial(max(n - 2, 0))
    entries = {
        lam: scale * (FAp.entries[lam] @ FA.entries[lam].T)
        for lam in FA.support
        if lam in FAp.entries
    }
    return FourierCoefficients(n, entries).pruned()


def objective_transform(A, Ap) -> FourierCoefficients:
    """Transform of the matching objective between adjacency matrices A and A'."""
    return correlation_transform(graph_fourier_transform(A), graph_fourier_transform(Ap))


# --- coset restriction and reassembly --------------------------------------


def _restriction_targets(F: FourierCoefficients) -> list[Partition]:
    seen = []
    for lam in F.support:
        for mu in restrict_partition(lam):
            if mu not in seen:
                seen.append(mu)
    return [mu for mu in enumerate_partitions(F.degree - 1) if mu in seen]


def coset_restrict_all(F: FourierCoefficients) -> list[FourierCoefficients]:
    """Transforms of tau -> f([[i,n]] tau) on S_{n-1} for every i = 1..n.

    g_i(mu) = sum_{lam in mu up} d_lam / (n d_mu) [rho_lam([[i,n]])^T F(lam)]_mu
    where [.]_mu is the mu diagonal block of the adapted basis.
    """
    n = F.degree
    if n < 2:
        raise ValueError("coset restriction needs n >= 2")
    acc: list[dict[Partition, np.ndarray]] = [{} for _ in range(n)]
    for lam in F.support:
        C = cycle_irrep_stack(lam)
        M = F.entries[lam]
        d_lam = dimension(lam)
        for mu, offset, size in block_layout(lam).blocks:
            sl = slice(offset, offset + size)
            # [C_i^T M]_mu = C_i[:, sl]^T M[:, sl]
            blocks = np.matmul(C[:, :, sl].transpose(0, 2, 1), M[:, sl])
            blocks *= d_lam / (n * size)
            for i in range(n):
                if mu in acc[i]:
                    acc[i][mu] = acc[i][mu] + blocks[i]
                else:
                    acc[i][mu] = blocks[i]
    return [FourierCoefficients(n - 1, parts).pruned() for parts in acc]


def coset_restrict(F: FourierCoefficients, i: int) -> FourierCoefficients:
    n = F.degree
    if not 1 <= i <= n:
        raise ValueError(f"coset index {i} out of range 1..{n}")
    if n < 2:
        raise ValueError("coset restriction needs n >= 2")
    parts: dict[Partition, np.ndarray] = {}
    for lam in F.support:
        C = cycle_irrep(lam, i)
        M = F.entries[lam]
        for mu, offset, size in block_layout(lam).blocks:
            sl = slice(offset, offset + size)
            block = (dimension(lam) / (n * size)) * (C[:, sl].T @ M[:, sl])
            parts[mu] = parts[mu] + block if mu in parts else block
    return FourierCoefficients(n - 1, parts).pruned()


def assemble(parts: Sequence[FourierCoefficients]) -> FourierCoefficients:
    """F(lam) = sum_i rho_lam([[i,n]]) (direct sum over mu of parts[i](mu))."""
    n = len(parts)
    if n < 2:
        raise ValueError("assembly needs at least two coset transforms")
    for p in parts:
        if p.degree != n - 1:
            raise ValueError(f"expected {n} parts of degree {n - 1}, got one of degree {p.degree}")
    present = {mu for p in parts for mu in p.entries}
    entries = {}
    for lam in enumerate_partitions(n):
        layout = block_layout(lam)
        if not any(mu in present for mu, _, _ in layout.blocks):
            continue
        d = dimension(lam)
        M = np.zeros((d, d))
        for i, p in enumerate(parts, start=1):
            direct = np.zeros((d, d))
            touched = False
            for mu, offset, size in layout.blocks:
                if mu in p.entries:
                    direct[offset : offset + size, offset : offset + size] = p.entries[mu]
                    touched = True
            if touched:
                M += cycle_irrep(lam, i) @ direct
        entries[lam] = M
    return FourierCoefficients(n, entries).pruned()


# --- bounds -----------------------------------------------------------------


def nuclear_norm(M) -> float:
    M = np.asarray(M, dtype=float)
    if not np.all(np.isfinite(M)):
        raise ValueError("nuclear norm of a matrix with non-finite entries")
    if M.size == 0:
        return 0.0
    return float(np.linalg.svd(M, compute_uv=False).sum())


def global_bound(F: FourierCoefficients) -> float:
    """(1/n!) sum_lam d_lam ||F(lam)||_*, an upper bound on max_sigma f(sigma)."""
    total = sum(dimension(lam) * nuclear_norm(F.entries[lam]) for lam in F.support)
    return total / factorial(F.degree)

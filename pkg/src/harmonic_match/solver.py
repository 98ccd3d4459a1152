"""Coset-tree search for the quadratic assignment objective.

A node at level k is the left coset ``c S_k`` (``c`` fixes nothing in
particular, S_k fixes k+1..n) together with the transform of
``tau -> f(c tau)`` on S_k. Its children are the cosets ``c [[i,k]] S_{k-1}``.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from math import factorial
from typing import Callable, Sequence

import numpy as np

from .fourier import (
    FourierCoefficients,
    GraphChannel,
    OracleLimitError,
    ORACLE_LIMIT,
    coset_restrict_all,
    global_bound,
    graph_fourier_transform,
    correlation_transform,
    qap_objective,
)
from .permutations import Permutation, all_permutations, contiguous_cycle

logger = logging.getLogger(__name__)

TIE_TOL = 1e-12


@dataclass
class QAPProblem:
    """A (possibly weighted, multi-channel) matching objective.

    ``transforms[d]`` is the transform of channel d's objective; the search
    runs on ``sum_d weights[d] * transforms[d]`` and complete permutations
    are scored directly from the adjacency matrices.
    """

    channels_G: list[np.ndarray]
    channels_Gp: list[np.ndarray]
    weights: np.ndarray
    transforms: list[FourierCoefficients] | None = None

    @classmethod
    def from_channels(cls, channels_G, channels_Gp, weights=None, transforms=None) -> QAPProblem:
        As = [c.A if isinstance(c, GraphChannel) else np.asarray(c, dtype=float) for c in channels_G]
        Aps = [c.A if isinstance(c, GraphChannel) else np.asarray(c, dtype=float) for c in channels_Gp]
        if len(As) != len(Aps) or not As:
            raise ValueError(f"need matching nonempty channel lists, got {len(As)} and {len(Aps)}")
        n = As[0].shape[0]
        for M in As + Aps:
            if M.shape != (n, n):
                raise ValueError(f"all channels must be {n}x{n}, got {M.shape}")
        w = np.ones(len(As)) if weights is None else np.asarray(weights, dtype=float)
        if w.shape != (len(As),):
            raise ValueError(f"{w.size} weights for {len(As)} channels")
        return cls(As, Aps, w, transforms)

    @property
    def n(self) -> int:
        return self.channels_G[0].shape[0]

    @property
    def n_channels(self) -> int:
        return len(self.channels_G)

    def channel_transforms(self) -> list[FourierCoefficients]:
        if self.transforms is None:
            self.transforms = [
                correlation_transform(graph_fourier_transform(A), graph_fourier_transform(Ap))
                for A, Ap in zip(self.channels_G, self.channels_Gp)
            ]
        return self.transforms

    def root_transform(self) -> FourierCoefficients:
        from .learning import combine_transforms

        return combine_transforms(self.weights, self.channel_transforms())

    def score(self, sigma: Permutation) -> float:
        return float(
            sum(w * qap_objective(A, Ap, sigma) for w, A, Ap in zip(self.weights, self.channels_G, self.channels_Gp) if w != 0)
        )


@dataclass
class CosetNode:
    level: int
    prefix: tuple[int, ...]
    F: FourierCoefficients
    coset: Permutation

    @classmethod
    def root(cls, F: FourierCoefficients) -> CosetNode:
        return cls(F.degree, (), F, Permutation.identity(F.degree))

    def child(self, i: int, F: FourierCoefficients) -> CosetNode:
        n = self.coset.n
        step = contiguous_cycle(i, self.level).extend(n)
        return CosetNode(self.level - 1, self.prefix + (i,), F, self.coset * step)

    def leaves(self) -> list[Permutation]:
        """Complete permutations under a level-2 (or level-1) node, in index order."""
        n = self.coset.n
        if self.level == 1:
            return [self.coset]
        if self.level != 2:
            raise ValueError("leaves are enumerated only at level 2")
        return [self.coset * contiguous_cycle(i, 2).extend(n) for i in (1, 2)]

    @property
    def assignment(self) -> dict[int, int]:
        """Vertices of G already fixed by this node, mapped to vertices of G'."""
        return {j: self.coset(j) for j in range(self.level + 1, self.coset.n + 1)}


@dataclass
class SearchBounds:
    child_bounds: np.ndarray
    children: list[FourierCoefficients] = field(repr=False, default_factory=list)


@dataclass
class SolveResult:
    permutation: Permutation
    objective: float
    nodes_visited: int
    proof: str

    def to_dict(self) -> dict:
        return {
            "permutation": list(self.permutation.images),
            "objective": self.objective,
            "nodes_visited": self.nodes_visited,
            "proof": self.proof,
        }


def child_bounds(node: CosetNode) -> SearchBounds:
    """Upper bounds on f over each child coset of ``node``.

    Each bound is the degree-(k-1) bound (1/(k-1)!) sum_mu d_mu ||g_i(mu)||_*
    of the restricted transform g_i.
    """
    if node.level < 2:
        raise ValueError("child bounds need a node at level >= 2")
    children = coset_restrict_all(node.F)
    return SearchBounds(np.array([global_bound(g) for g in children]), children)


def _select(bounds: np.ndarray) -> int:
    """Index of the largest bound; near-ties resolve to the lowest index."""
    best = bounds.max()
    tol = TIE_TOL * max(1.0, abs(best))
    return int(np.flatnonzero(bounds >= best - tol)[0])


def _order(bounds: np.ndarray) -> list[int]:
    """Children by decreasing bound; near-ties keep index order."""
    order = []
    remaining = list(range(len(bounds)))
    while remaining:
        sub = bounds[remaining]
        order.append(remaining.pop(_select(sub)))
    return order


def _best_leaf(problem: QAPProblem, node: CosetNode) -> tuple[Permutation, float]:
    """Best complete permutation under a level-2 node; near-ties go to the lexicographically first."""
    leaves = sorted(node.leaves(), key=lambda p: p.images)
    values = np.array([problem.score(p) for p in leaves])
    k = _select(values)
    return leaves[k], float(values[k])


def _check_problem(problem) -> QAPProblem:
    if isinstance(problem, QAPProblem):
        return problem
    if isinstance(problem, tuple) and len(problem) == 2:
        A, Ap = problem
        return QAPProblem.from_channels([A], [Ap])
    raise TypeError(f"expected a QAPProblem or an (A, A') pair, got {type(problem).__name__}")


def greedy_descent(problem, root: FourierCoefficients | None = None) -> SolveResult:
    """Follow the largest child bound from the root without backtracking."""
    problem = _check_problem(problem)
    n = problem.n
    if n == 1:
        sigma = Permutation.identity(1)
        return SolveResult(sigma, problem.score(sigma), 1, "heuristic")
    node = CosetNode.root(problem.root_transform() if root is None else root)
    visited = 1
    while node.level > 2:
        sb = child_bounds(node)
        i = _select(sb.child_bounds)
        node = node.child(i + 1, sb.children[i])
        visited += 1
    sigma, val = _best_leaf(problem, node)
    return SolveResult(sigma, val, visited, "heuristic")


def branch_and_bound(
    problem,
    root: FourierCoefficients | None = None,
    node_limit: int | None = None,
    rel_tol: float = 1e-9,
) -> SolveResult:
    """Exact depth-first branch and bound over the coset tree.

    The incumbent starts from :func:`greedy_descent`. A child is pruned only
    when its bound falls below the incumbent by more than
    ``rel_tol * max(1, |incumbent|)``, so roundoff in the bounds cannot cut
    away a strictly better permutation.
    """
    problem = _check_problem(problem)
    n = problem.n
    if n == 1:
        sigma = Permutation.identity(1)
        return SolveResult(sigma, problem.score(sigma), 1, "exact")
    F = problem.root_transform() if root is None else root
    start = greedy_descent(problem, F)
    best = [start.permutation, start.objective]
    visited = 0
    truncated = False

    def slack() -> float:
        return rel_tol * max(1.0, abs(best[1]))

    stack = [CosetNode.root(F)]
    while stack:
        if node_limit is not None and visited >= node_limit:
            truncated = True
            break
        node = stack.pop()
        visited += 1
        if node.level == 2:
            sigma, val = _best_leaf(problem, node)
            if val > best[1]:
                best[:] = [sigma, val]
            continue
        sb = child_bounds(node)
        order = _order(sb.child_bounds)
        keep = [i for i in order if sb.child_bounds[i] >= best[1] - slack()]
        # push in reverse so the most promising child is expanded first
        for i in reversed(keep):
            stack.append(node.child(i + 1, sb.children[i]))
    logger.debug("branch and bound visited %d nodes", visited)
    return SolveResult(best[0], best[1], visited, "heuristic" if truncated else "exact")


def brute_force_solve(problem, limit: int | None = None) -> SolveResult:
    """Exhaustive maximisation; ties resolve to the lexicographically first permutation."""
    problem = _check_problem(problem)
    n = problem.n
    limit = ORACLE_LIMIT if limit is None else limit
    if n > limit:
        raise OracleLimitError(f"n = {n} exceeds the oracle limit {limit} ({factorial(n)} permutations)")
    perms = all_permutations(n)
    idx = np.array([p.to_zero_based() for p in perms])
    values = np.zeros(len(perms))
    for w, A, Ap in zip(problem.weights, problem.channels_G, problem.channels_Gp):
        if w != 0:
            values += w * np.einsum("ij,sij->s", A, Ap[idx[:, :, None], idx[:, None, :]])
    best = int(np.argmax(values))
    sigma = perms[best]
    return SolveResult(sigma, problem.score(sigma), len(perms), "exact")

from itertools import permutations as iter_perms

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from harmonic_match.fourier import OracleLimitError, qap_objective
from harmonic_match.permutations import Permutation, all_permutations
from harmonic_match.solver import (
    CosetNode,
    QAPProblem,
    branch_and_bound,
    brute_force_solve,
    child_bounds,
    greedy_descent,
)

from conftest import random_symmetric


def random_problem(n, rng, D=2):
    G = [random_symmetric(n, rng) for _ in range(D)]
    Gp = [random_symmetric(n, rng) for _ in range(D)]
    return QAPProblem.from_channels(G, Gp, rng.uniform(0.1, 1.0, size=D))


def loop_maximum(problem):
    """Plain Python enumeration, independent of the vectorised brute solver."""
    n = problem.n
    best = -np.inf
    for p in iter_perms(range(n)):
        s = np.array(p)
        val = sum(w * np.sum(A * Ap[np.ix_(s, s)]) for w, A, Ap in zip(problem.weights, problem.channels_G, problem.channels_Gp))
        best = max(best, val)
    return best


def walk(node, problem, table, perms, out):
    """Collect (bound, exhaustive max) for every child coset below ``node``."""
    if node.level < 2:
        return
    sb = child_bounds(node)
    for i in range(1, node.level + 1):
        child = node.child(i, sb.children[i - 1])
        fixed = child.assignment
        mask = np.all([perms[:, j - 1] == v - 1 for j, v in fixed.items()], axis=0)
        out.append((sb.child_bounds[i - 1], table[mask].max()))
        if child.level >= 2:
            walk(child, problem, table, perms, out)


def test_problem_validation():
    with pytest.raises(ValueError):
        QAPProblem.from_channels([], [])
    with pytest.raises(ValueError):
        QAPProblem.from_channels([np.zeros((3, 3))], [np.zeros((4, 4))])
    with pytest.raises(ValueError):
        QAPProblem.from_channels([np.zeros((3, 3))], [np.zeros((3, 3))], weights=[1.0, 2.0])
    with pytest.raises(TypeError):
        greedy_descent("not a problem")


def test_score_matches_objective(rng):
    p = random_problem(5, rng)
    sigma = Permutation([3, 1, 5, 2, 4])
    expected = sum(w * qap_objective(A, Ap, sigma) for w, A, Ap in zip(p.weights, p.channels_G, p.channels_Gp))
    assert p.score(sigma) == pytest.approx(expected)


def test_coset_node_bookkeeping(rng):
    p = random_problem(4, rng)
    root = CosetNode.root(p.root_transform())
    assert root.level == 4 and root.assignment == {}
    sb = child_bounds(root)
    child = root.child(2, sb.children[1])
    assert child.assignment == {4: 2}
    leaves = child.child(3, child_bounds(child).children[2]).leaves()
    assert len(leaves) == 2
    assert all(s(4) == 2 for s in leaves)
    with pytest.raises(ValueError):
        root.leaves()


@pytest.mark.parametrize("n", [4, 5, 6])
def test_every_bound_dominates_its_coset(n, rng):
    p = random_problem(n, rng)
    perms = np.array([q.to_zero_based() for q in all_permutations(n)])
    table = np.array([p.score(q) for q in all_permutations(n)])
    out = []
    walk(CosetNode.root(p.root_transform()), p, table, perms, out)
    bounds, maxima = np.array(out).T
    assert np.all(bounds >= maxima - 1e-9 * np.maximum(1, np.abs(maxima)))


@given(st.integers(2, 6), st.integers(0, 2**31))
def test_branch_and_bound_is_exact(n, seed):
    rng = np.random.default_rng(seed)
    p = random_problem(n, rng, D=1 + seed % 3)
    exact = branch_and_bound(p)
    brute = brute_force_solve(p)
    assert exact.proof == "exact"
    assert exact.objective == pytest.approx(brute.objective, rel=1e-9, abs=1e-12)
    assert p.score(exact.permutation) == pytest.approx(exact.objective)


@pytest.mark.parametrize("seed", range(3))
def test_brute_solver_matches_plain_enumeration(seed):
    p = random_problem(5, np.random.default_rng(seed))
    assert brute_force_solve(p).objective == pytest.approx(loop_maximum(p))


def test_brute_tie_breaks_to_lexicographically_first():
    Z = np.zeros((4, 4))
    res = brute_force_solve((Z, Z))
    assert res.permutation.is_identity()
    assert res.nodes_visited == 24


def test_brute_refused_above_limit():
    Z = np.zeros((9, 9))
    with pytest.raises(OracleLimitError):
        brute_force_solve((Z, Z))
    with pytest.raises(OracleLimitError):
        brute_force_solve((np.zeros((5, 5)), np.zeros((5, 5))), limit=4)


def test_greedy_recovers_planted_permutation_on_isomorphic_graphs(rng):
    n = 7
    A = random_symmetric(n, rng)
    sigma = Permutation.from_zero_based(rng.permutation(n))
    s = sigma.to_zero_based()
    Ap = np.empty_like(A)
    Ap[np.ix_(s, s)] = A  # Ap[sigma(i), sigma(j)] = A[i, j]
    res = branch_and_bound((A, Ap))
    assert res.objective == pytest.approx(np.sum(A * A))
    assert res.permutation == sigma


def test_greedy_visits_one_node_per_level(rng):
    res = greedy_descent(random_problem(6, rng))
    assert res.nodes_visited == 5
    assert res.proof == "heuristic"


def test_node_limit_reports_heuristic(rng):
    p = random_problem(6, rng)
    res = branch_and_bound(p, node_limit=2)
    assert res.proof == "heuristic"
    assert res.nodes_visited == 2
    assert res.objective >= greedy_descent(p).objective - 1e-12


def test_small_degrees():
    one = branch_and_bound((np.zeros((1, 1)), np.zeros((1, 1))))
    assert one.permutation == Permutation([1])
    A = np.array([[0.0, 1.0], [2.0, 0.0]])
    Ap = np.array([[0.0, 2.0], [1.0, 0.0]])
    assert branch_and_bound((A, Ap)).permutation == Permutation([2, 1])
    assert greedy_descent((A, Ap)).permutation == Permutation([2, 1])


def test_solve_result_document(rng):
    doc = greedy_descent(random_problem(4, rng)).to_dict()
    assert set(doc) == {"permutation", "objective", "nodes_visited", "proof"}
    assert sorted(doc["permutation"]) == [1, 2, 3, 4]


def test_two_vertex_tie_returns_identity():
    # both permutations score 2; the lowest-index child wins the tie
    A = np.array([[0.0, 1.0], [1.0, 0.0]])
    for solve in (greedy_descent, branch_and_bound, brute_force_solve):
        res = solve((A, A))
        assert res.objective == pytest.approx(2.0)
        assert res.permutation.is_identity()


def test_constant_objective_is_deterministic():
    n = 5
    A = np.ones((n, n)) - np.eye(n)
    first = greedy_descent((A, A))
    assert first.objective == pytest.approx(n * (n - 1))
    assert greedy_descent((A, A)).permutation == first.permutation

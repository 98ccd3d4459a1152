import json

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from harmonic_match.fourier import coset_restrict_all, global_bound, objective_transform
from harmonic_match.instances import make_shear_suite, synthesize_pair
from harmonic_match.learning import (
    BoundCache,
    LevelBounds,
    TrainConfig,
    WeightVector,
    accuracy_rows,
    build_bound_cache,
    combine_transforms,
    comparisons_per_example,
    cross_validate,
    evaluate,
    hinge_loss,
    instance_cache,
    residual_step,
    sgd_step,
    solve_instance,
    train,
    vertex_accuracy,
    weights_document,
    weights_from_document,
)
from harmonic_match.permutations import Permutation, contiguous_cycle

from conftest import permutations, random_symmetric


def toy_cache():
    # one example, one level with three children; child 2 is correct
    b = np.array([[1.0, 0.0], [0.5, 0.5], [0.0, 2.0]])
    return BoundCache([[LevelBounds(3, b, 2)]])


@given(permutations(min_n=2, max_n=7))
def test_residual_path_reconstructs_permutation(sigma):
    n = sigma.n
    coset = Permutation.identity(n)
    tau = sigma
    for k in range(n, 1, -1):
        i, tau = residual_step(tau, k)
        coset = coset * contiguous_cycle(i, k).extend(n)
    assert coset == sigma


def test_weight_vector_validation():
    assert np.allclose(WeightVector.uniform(4).omega, 0.25)
    for bad in ([-1.0], [np.nan], [[1.0]]):
        with pytest.raises(ValueError):
            WeightVector(bad)
    with pytest.raises(ValueError):
        WeightVector([1.0, 2.0], ["a"])


def test_train_config_validation():
    for kwargs in ({"nu": -1}, {"decay": 0}, {"decay": 1.5}, {"eta0": 0}, {"margin": -1}, {"epochs": -1}):
        with pytest.raises(ValueError):
            TrainConfig(**kwargs)
    assert TrainConfig().to_dict()["epochs"] == 200


def test_combine_transforms_is_linear(rng):
    F1 = objective_transform(random_symmetric(5, rng), random_symmetric(5, rng))
    F2 = objective_transform(random_symmetric(5, rng), random_symmetric(5, rng))
    C = combine_transforms([2.0, -1.0], [F1, F2])
    assert C.max_abs_diff(F1.scaled(2.0) + F2.scaled(-1.0)) <= 1e-12
    with pytest.raises(ValueError):
        combine_transforms([1.0], [F1, F2])
    with pytest.raises(ValueError):
        combine_transforms([], [])


def test_hinge_loss_by_hand():
    cache = toy_cache()
    # child 1: [1, 0] - [0.5, 0.5] = [0.5, -0.5]; child 3: [-0.5, 1.5]
    w = np.array([1.0, 1.0])
    assert hinge_loss(w, cache, margin=1.0) == pytest.approx(1.0 + 2.0)
    assert hinge_loss(np.array([0.0, 0.0]), cache, margin=0.0) == 0.0
    assert hinge_loss(WeightVector([2.0, 0.0]), cache, margin=0.5) == pytest.approx(1.5 + 0.0)


def test_terms_layout():
    diffs, owners, keys = toy_cache().terms()
    assert keys == [(0, 3, 1), (0, 3, 3)]
    assert np.allclose(diffs, [[0.5, -0.5], [-0.5, 1.5]])
    assert list(owners) == [0, 0]


def test_sgd_step_moves_against_violated_terms():
    cache = toy_cache()
    cfg = TrainConfig(nu=0.0)
    w = sgd_step(np.array([1.0, 1.0]), (0, 3, 3), cache, cfg, eta=0.1)
    assert np.allclose(w, [1.05, 0.85])
    # projection onto w >= 0
    w = sgd_step(np.array([0.0, 0.01]), (0, 3, 3), cache, cfg, eta=1.0)
    assert np.allclose(w, [0.5, 0.0])
    with pytest.raises(ValueError):
        sgd_step(np.ones(2), (0, 3, 2), cache, cfg, eta=0.1)


def test_comparisons_per_example():
    assert comparisons_per_example(15) == 105


@pytest.fixture(scope="module")
def small_suite():
    return make_shear_suite(6, [0.2], 6, channels="delaunay,dist2,uninf1", noise=0.01, seed=3)[0.2]


def test_bound_cache_shape_and_soundness(small_suite):
    inst = small_suite[0]
    levels = instance_cache(inst)
    n, D = inst.n, inst.D
    assert [lb.level for lb in levels] == list(range(n, 1, -1))
    assert all(lb.b.shape == (lb.level, D) for lb in levels)
    assert sum(lb.level - 1 for lb in levels) == comparisons_per_example(n)
    # each correct-child bound dominates f_d(sigma*) for every channel
    for d, (G, Gp) in enumerate(zip(inst.channels_G, inst.channels_Gp)):
        value = float(np.sum(G.A * Gp.A[np.ix_(inst.ground_truth.to_zero_based(), inst.ground_truth.to_zero_based())]))
        for lb in levels:
            assert lb.b[lb.correct - 1, d] >= value - 1e-9


def test_surrogate_dominates_combined_bound(small_suite):
    """Convexity: bound of sum_d w_d F_d <= sum_d w_d bound(F_d) for w >= 0."""
    inst = small_suite[1]
    Fs = [objective_transform(a.A, b.A) for a, b in zip(inst.channels_G, inst.channels_Gp)]
    levels = build_bound_cache(Fs, inst.ground_truth)
    rng = np.random.default_rng(0)
    parts = [coset_restrict_all(F) for F in Fs]
    for _ in range(10):
        w = rng.exponential(size=len(Fs))
        for i in range(inst.n):
            combined = global_bound(combine_transforms(w, [p[i] for p in parts]))
            assert combined <= levels[0].b[i] @ w + 1e-9


def test_bound_cache_validation(small_suite):
    Fs = [objective_transform(a.A, b.A) for a, b in zip(small_suite[0].channels_G, small_suite[0].channels_Gp)]
    with pytest.raises(ValueError):
        build_bound_cache(Fs, None)
    with pytest.raises(ValueError):
        build_bound_cache(Fs, Permutation([1, 2]))


def test_training_is_deterministic_and_nonnegative(small_suite):
    cache = BoundCache([instance_cache(i) for i in small_suite])
    cfg = TrainConfig(epochs=20, seed=5)
    a, b = train(cache, cfg), train(cache, cfg)
    assert np.array_equal(a.weights.omega, b.weights.omega)
    assert a.trace == b.trace
    assert len(a.trace) == 20
    assert np.all(a.weights.omega >= 0)
    assert hinge_loss(a.weights, cache) <= hinge_loss(WeightVector.uniform(cache.D), cache)


def test_single_channel_weight_stays_positive(small_suite):
    levels = [[LevelBounds(lb.level, lb.b[:, :1], lb.correct) for lb in instance_cache(i)] for i in small_suite]
    res = train(BoundCache(levels), TrainConfig(epochs=10))
    assert res.weights.D == 1
    assert res.weights.omega[0] > 0


def test_train_rejects_empty_and_ragged():
    with pytest.raises(ValueError):
        train(BoundCache([]))
    bad = BoundCache([[LevelBounds(2, np.ones((2, 2)), 1)], [LevelBounds(2, np.ones((2, 3)), 1)]])
    with pytest.raises(ValueError):
        train(bad)


def test_vertex_accuracy():
    assert vertex_accuracy(Permutation([1, 2, 3, 4]), Permutation([1, 2, 4, 3])) == 0.5
    with pytest.raises(ValueError):
        vertex_accuracy(Permutation([1]), Permutation([1, 2]))


def test_noiseless_rigid_instance_is_solved_exactly():
    rng = np.random.default_rng(4)
    inst = synthesize_pair(rng.uniform(size=(6, 2)), rotation=0.7, translation=(1.0, -2.0), channels="dist3", seed=9)
    res = solve_instance(inst, mode="exact")
    assert res.permutation == inst.ground_truth
    assert solve_instance(inst, mode="brute").objective == pytest.approx(res.objective)
    with pytest.raises(ValueError):
        solve_instance(inst, mode="annealing")


def test_evaluate_and_cross_validate(small_suite):
    ev = evaluate(WeightVector.uniform(small_suite[0].D), small_suite)
    assert len(ev.accuracies) == len(small_suite)
    assert 0.0 <= ev.mean <= 1.0
    cv = cross_validate(small_suite, folds=3, cfg=TrainConfig(epochs=10), offset=0.2)
    assert len(cv.folds) == 3
    assert sorted(m for f in cv.folds for m in f.test_idx) == list(range(len(small_suite)))
    rows = accuracy_rows([cv])
    assert [r["mode"] for r in rows] == ["learned", "uniform"]
    assert rows[0]["n_instances"] == len(small_suite)
    assert set(cv.mean_weights()) == set(small_suite[0].labels)
    with pytest.raises(ValueError):
        cross_validate(small_suite, folds=10)


def test_cross_validation_is_reproducible(small_suite):
    cfg = TrainConfig(epochs=5, seed=11)
    a = cross_validate(small_suite, folds=2, cfg=cfg)
    b = cross_validate(small_suite, folds=2, cfg=cfg)
    assert [f.test_idx for f in a.folds] == [f.test_idx for f in b.folds]
    assert a.accuracy_record() == b.accuracy_record()


def test_weights_document_round_trip(small_suite):
    cache = BoundCache([instance_cache(i) for i in small_suite])
    res = train(cache, TrainConfig(epochs=3), small_suite[0].labels)
    doc = json.loads(json.dumps(weights_document(res)))
    assert set(doc) == {"labels", "omega", "config", "seed", "trace"}
    wv = weights_from_document(doc)
    assert np.array_equal(wv.omega, res.weights.omega)
    assert wv.labels == small_suite[0].labels

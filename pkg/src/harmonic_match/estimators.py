"""scikit-learn style front ends.

``X`` is a sequence of :class:`~harmonic_match.instances.MatchingInstance`
and ``y`` (optional) a sequence of ground-truth permutations; predictions are
permutations and ``score`` is mean vertex accuracy.
"""

from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator
from sklearn.utils.validation import check_is_fitted

from .learning import (
    BoundCache,
    TrainConfig,
    WeightVector,
    hinge_loss,
    instance_cache,
    solve_instance,
    train,
    vertex_accuracy,
)
from .validation import check_instances, check_targets, check_weights


class FourierQAPSolver(BaseEstimator):
    """Coset-tree search with fixed channel weights.

    Parameters
    ----------
    mode : {"greedy", "exact", "brute"}
        No-backtracking descent, branch and bound, or exhaustive search.
    weights : array-like of shape (D,), optional
        Channel weights; uniform when omitted.
    node_limit : int, optional
        Cap on nodes expanded in exact mode.
    """

    def __init__(self, mode="greedy", weights=None, node_limit=None):
        self.mode = mode
        self.weights = weights
        self.node_limit = node_limit

    def fit(self, X, y=None):
        X = check_instances(X)
        self.n_channels_ = X[0].D
        self.weights_ = (
            np.full(self.n_channels_, 1.0 / self.n_channels_)
            if self.weights is None
            else check_weights(self.weights, self.n_channels_)
        )
        return self

    def _weights_for(self, X):
        if hasattr(self, "weights_"):
            return self.weights_
        return None if self.weights is None else check_weights(self.weights, X[0].D)

    def solve(self, X):
        """Full :class:`SolveResult` records for each instance."""
        X = check_instances(X, n_channels=getattr(self, "n_channels_", None))
        w = self._weights_for(X)
        return [solve_instance(inst, w, self.mode, self.node_limit) for inst in X]

    def predict(self, X):
        return [r.permutation for r in self.solve(X)]

    def score(self, X, y=None):
        X = check_targets(X, y)
        preds = self.predict(X)
        return float(np.mean([vertex_accuracy(p, inst.ground_truth) for p, inst in zip(preds, X)]))


class FourierMatchingLearner(BaseEstimator):
    """Learns channel weights so the correct coset wins at every tree level.

    Parameters
    ----------
    nu : float
        Strength of the squared-norm regulariser.
    eta0, decay : float
        Step length ``eta0 * decay ** epoch``.
    epochs : int
        Passes over the sibling comparisons.
    margin : float
        Required gap between the correct child's bound and each sibling's.
    random_state : int
        Seed for term sampling.
    mode : {"greedy", "exact"}
        Search used by :meth:`predict`.
    """

    def __init__(self, nu=1e-3, eta0=0.1, decay=0.95, epochs=200, margin=1.0, random_state=0, mode="greedy"):
        self.nu = nu
        self.eta0 = eta0
        self.decay = decay
        self.epochs = epochs
        self.margin = margin
        self.random_state = random_state
        self.mode = mode

    def _config(self) -> TrainConfig:
        return TrainConfig(self.nu, self.eta0, self.decay, self.epochs, self.margin, self.random_state)

    def fit(self, X, y=None):
        X = check_targets(X, y)
        check_instances(X)
        cache = BoundCache([instance_cache(inst) for inst in X])
        result = train(cache, self._config(), X[0].labels)
        self.weights_ = result.weights.omega
        self.labels_ = X[0].labels
        self.n_channels_ = X[0].D
        self.trace_ = result.trace
        self.config_ = result.config
        return self

    @property
    def weight_vector_(self) -> WeightVector:
        check_is_fitted(self, "weights_")
        return WeightVector(self.weights_, list(self.labels_))

    def predict(self, X):
        check_is_fitted(self, "weights_")
        X = check_instances(X, n_channels=self.n_channels_)
        return [solve_instance(inst, self.weights_, self.mode).permutation for inst in X]

    def score(self, X, y=None):
        X = check_targets(X, y)
        preds = self.predict(X)
        return float(np.mean([vertex_accuracy(p, inst.ground_truth) for p, inst in zip(preds, X)]))

    def loss(self, X, y=None) -> float:
        """Sibling hinge loss of the fitted weights on ``X``."""
        check_is_fitted(self, "weights_")
        X = check_targets(X, y)
        return hinge_loss(self.weights_, BoundCache([instance_cache(inst) for inst in X]), self.margin)

"""Input checks shared by the estimators and the CLI."""

from __future__ import annotations

from typing import Sequence

import numpy as np

from .instances import MatchingInstance
from .permutations import Permutation


def check_instances(X, require_ground_truth: bool = False, n_channels: int | None = None) -> list[MatchingInstance]:
    """Validate a batch of matching instances and return it as a list."""
    if isinstance(X, MatchingInstance):
        X = [X]
    X = list(X)
    if not X:
        raise ValueError("expected at least one matching instance")
    for k, inst in enumerate(X):
        if not isinstance(inst, MatchingInstance):
            raise TypeError(f"item {k} is a {type(inst).__name__}, not a MatchingInstance")
        if require_ground_truth and inst.ground_truth is None:
            raise ValueError(f"instance {k} has no ground-truth permutation")
    D = X[0].D if n_channels is None else n_channels
    for k, inst in enumerate(X):
        if inst.D != D:
            raise ValueError(f"instance {k} has {inst.D} channels, expected {D}")
    return X


def check_permutation(sigma, n: int | None = None) -> Permutation:
    if not isinstance(sigma, Permutation):
        sigma = Permutation(np.asarray(sigma).ravel().tolist())
    if n is not None and sigma.n != n:
        raise ValueError(f"permutation of degree {sigma.n}, expected {n}")
    return sigma


def check_targets(X: Sequence[MatchingInstance], y) -> list[MatchingInstance]:
    """Attach explicit targets ``y`` as ground truth, or require it on ``X``."""
    if y is None:
        return check_instances(X, require_ground_truth=True)
    X = check_instances(X)
    y = list(y)
    if len(y) != len(X):
        raise ValueError(f"{len(y)} targets for {len(X)} instances")
    return [inst.with_ground_truth(check_permutation(s, inst.n)) for inst, s in zip(X, y)]


def check_weights(weights, D: int) -> np.ndarray:
    w = np.asarray(weights, dtype=float)
    if w.shape != (D,):
        raise ValueError(f"expected {D} channel weights, got shape {w.shape}")
    if not np.all(np.isfinite(w)) or np.any(w < 0):
        raise ValueError("channel weights must be finite and nonnegative")
    return w

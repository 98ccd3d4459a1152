"""Learning per-channel weights for the coset-tree search.

The combined objective is ``f_w = sum_d w_d f_d``. Along the correct path of
each training example we cache, per level, child and channel, the bound
``b[k][i][d]`` of channel d restricted to child coset i. By convexity of the
nuclear norm, ``sum_d w_d b[k][i][d]`` bounds the combined child bound for any
``w >= 0``, and training pushes that surrogate for the correct child above
every sibling by a margin.
"""

from __future__ import annotations

import logging
from dataclasses import asdict, dataclass, field
from typing import Iterable, Sequence

import numpy as np

from .fourier import FourierCoefficients, coset_restrict_all, global_bound
from .permutations import Partition, Permutation, contiguous_cycle

logger = logging.getLogger(__name__)


def combine_transforms(weights: Iterable[float], transforms: Sequence[FourierCoefficients]) -> FourierCoefficients:
    """Entrywise sum_d w_d F_d; partitions that cancel to zero are dropped."""
    weights = [float(w) for w in weights]
    if len(weights) != len(transforms):
        raise ValueError(f"{len(weights)} weights for {len(transforms)} transforms")
    if not transforms:
        raise ValueError("no transforms to combine")
    n = transforms[0].degree
    entries: dict[Partition, np.ndarray] = {}
    for w, F in zip(weights, transforms):
        if F.degree != n:
            raise ValueError(f"degree mismatch: {F.degree} vs {n}")
        if w == 0.0:
            continue
        for lam, M in F.entries.items():
            entries[lam] = entries[lam] + w * M if lam in entries else w * M
    return FourierCoefficients(n, entries).pruned()


@dataclass
class WeightVector:
    omega: np.ndarray
    labels: list[str] = field(default_factory=list)

    def __post_init__(self):
        self.omega = np.asarray(self.omega, dtype=float)
        if self.omega.ndim != 1:
            raise ValueError("weights must be a vector")
        if not np.all(np.isfinite(self.omega)):
            raise ValueError("weights must be finite")
        if np.any(self.omega < 0):
            raise ValueError("weights must be nonnegative")
        if self.labels and len(self.labels) != self.omega.size:
            raise ValueError(f"{len(self.labels)} labels for {self.omega.size} weights")

    @classmethod
    def uniform(cls, D: int, labels=None) -> WeightVector:
        return cls(np.full(D, 1.0 / D), list(labels or []))

    @property
    def D(self) -> int:
        return self.omega.size


@dataclass
class TrainConfig:
    nu: float = 1e-3
    eta0: float = 0.1
    decay: float = 0.95
    epochs: int = 200
    margin: float = 1.0
    seed: int = 0

    def __post_init__(self):
        if self.nu < 0:
            raise ValueError("nu must be >= 0")
        if not 0 < self.decay <= 1:
            raise ValueError("decay must lie in (0, 1]")
        if self.eta0 <= 0:
            raise ValueError("eta0 must be > 0")
        if self.margin < 0:
            raise ValueError("margin must be >= 0")
        if self.epochs < 0:
            raise ValueError("epochs must be >= 0")

    def to_dict(self) -> dict:
        return asdict(self)


@dataclass
class LevelBounds:
    """Child bounds at one level of the correct path.

    ``b[i - 1, d]`` is channel d's bound on child coset i; ``correct`` is the
    1-based index of the child containing the ground truth.
    """

    level: int
    b: np.ndarray
    correct: int


@dataclass
class BoundCache:
    """Per-example list of :class:`LevelBounds`, root level first."""

    examples: list[list[LevelBounds]]

    @property
    def M(self) -> int:
        return len(self.examples)

    @property
    def D(self) -> int:
        return self.examples[0][0].b.shape[1] if self.examples and self.examples[0] else 0

    def terms(self) -> tuple[np.ndarray, np.ndarray, list[tuple[int, int, int]]]:
        """Flattened sibling comparisons.

        Returns ``(diffs, example_index, keys)`` where ``diffs[t] = b_i - b_i*``
        for term t and ``keys[t] = (m, level, i)``.
        """
        diffs, owners, keys = [], [], []
        for m, levels in enumerate(self.examples):
            for lb in levels:
                star = lb.b[lb.correct - 1]
                for i in range(1, lb.level + 1):
                    if i == lb.correct:
                        continue
                    diffs.append(lb.b[i - 1] - star)
                    owners.append(m)
                    keys.append((m, lb.level, i))
        D = self.D
        return (
            np.asarray(diffs, dtype=float).reshape(-1, D),
            np.asarray(owners, dtype=np.intp),
            keys,
        )

    def level(self, m: int, k: int) -> LevelBounds:
        for lb in self.examples[m]:
            if lb.level == k:
                return lb
        raise KeyError(f"example {m} has no cached level {k}")

    @classmethod
    def merge(cls, caches: Iterable[BoundCache]) -> BoundCache:
        return cls([ex for c in caches for ex in c.examples])


def residual_step(tau: Permutation, k: int) -> tuple[int, Permutation]:
    """Correct child of residual ``tau`` in S_k and the next residual in S_{k-1}."""
    i_star = tau(k)
    nxt = contiguous_cycle(i_star, k).inverse() * tau
    return i_star, Permutation(nxt.images[: k - 1])


def build_bound_cache(transforms: Sequence[FourierCoefficients], sigma_star: Permutation) -> list[LevelBounds]:
    """Walk the correct path from the root down to level 2 recording child bounds."""
    if sigma_star is None:
        raise ValueError("bound cache needs a ground-truth permutation")
    n = transforms[0].degree
    if n < 2:
        raise ValueError("bound cache needs n >= 2")
    if sigma_star.n != n:
        raise ValueError(f"ground truth in S_{sigma_star.n} for transforms of degree {n}")
    Fs = list(transforms)
    tau = sigma_star
    levels = []
    for k in range(n, 1, -1):
        parts = [coset_restrict_all(F) for F in Fs]
        b = np.array([[global_bound(parts[d][i]) for d in range(len(Fs))] for i in range(k)])
        i_star, tau_next = residual_step(tau, k)
        levels.append(LevelBounds(k, b, i_star))
        Fs = [p[i_star - 1] for p in parts]
        tau = tau_next
    return levels


def hinge_loss(omega, cache: BoundCache, margin: float = 1.0) -> float:
    """sum over examples, levels and wrong siblings of [B_w(i) - B_w(i*) + margin]_+."""
    w = np.asarray(omega.omega if isinstance(omega, WeightVector) else omega, dtype=float)
    diffs, _, _ = cache.terms()
    return float(np.maximum(0.0, diffs @ w + margin).sum())


def comparisons_per_example(n: int) -> int:
    """Sibling comparisons on one root-to-leaf path: sum_{k=2}^n (k - 1)."""
    return n * (n - 1) // 2


def sgd_step(omega, term: tuple[int, int, int], cache: BoundCache, cfg: TrainConfig, eta: float) -> np.ndarray:
    """One projected subgradient step on the sampled term ``(m, level, i)``."""
    w = np.array(omega.omega if isinstance(omega, WeightVector) else omega, dtype=float)
    m, k, i = term
    lb = cache.level(m, k)
    if i == lb.correct:
        raise ValueError("sampled term must be a wrong sibling")
    diff = lb.b[i - 1] - lb.b[lb.correct - 1]
    reg = cfg.nu / (cache.M * comparisons_per_example(cache.examples[m][0].level))
    if diff @ w + cfg.margin > 0:
        w = w - eta * (diff + reg * w)
    else:
        w = w - eta * reg * w
    return np.maximum(w, 0.0)


@dataclass
class TrainResult:
    weights: WeightVector
    trace: list[float]
    config: TrainConfig


def train(cache: BoundCache, cfg: TrainConfig | None = None, labels=None) -> TrainResult:
    """Projected stochastic subgradient descent on the sibling hinge loss.

    Each epoch draws as many uniformly random terms as there are terms in
    total; the step length is ``eta0 * decay ** epoch``.
    """
    cfg = cfg or TrainConfig()
    if cache.M < 1:
        raise ValueError("training needs at least one example")
    D = cache.D
    for ex in cache.examples:
        for lb in ex:
            if lb.b.shape[1] != D:
                raise ValueError("examples disagree on the number of channels")
    diffs, owners, _ = cache.terms()
    n_per = np.array([comparisons_per_example(ex[0].level) for ex in cache.examples])
    reg = cfg.nu / (cache.M * n_per[owners])
    w = np.full(D, 1.0 / D)
    rng = np.random.default_rng(cfg.seed)
    trace = []
    N = len(diffs)
    for epoch in range(cfg.epochs):
        eta = cfg.eta0 * cfg.decay**epoch
        picks = rng.integers(0, N, size=N)
        for t in picks:
            diff = diffs[t]
            shrink = 1.0 - eta * reg[t]
            if diff @ w + cfg.margin > 0:
                w = shrink * w - eta * diff
            else:
                w = shrink * w
            np.maximum(w, 0.0, out=w)
        trace.append(float(np.maximum(0.0, diffs @ w + cfg.margin).sum()))
    return TrainResult(WeightVector(w, list(labels or [])), trace, cfg)


def vertex_accuracy(sigma_hat: Permutation, sigma_star: Permutation) -> float:
    if sigma_hat.n != sigma_star.n:
        raise ValueError("permutations of different degree")
    return sum(a == b for a, b in zip(sigma_hat.images, sigma_star.images)) / sigma_star.n


# --- evaluation -------------------------------------------------------------


def instance_problem(inst, weights=None):
    """QAPProblem for an instance, with channel transforms memoised on the instance."""
    from .solver import QAPProblem

    problem = QAPProblem.from_channels(inst.channels_G, inst.channels_Gp, weights, inst._memo.get("transforms"))
    inst._memo["transforms"] = problem.channel_transforms()
    return problem


def instance_cache(inst) -> list[LevelBounds]:
    """Bound cache along the instance's ground-truth path (memoised)."""
    if inst.ground_truth is None:
        raise ValueError("training instance has no ground truth")
    key = ("bounds", inst.ground_truth.images)
    if key not in inst._memo:
        inst._memo[key] = build_bound_cache(instance_problem(inst).channel_transforms(), inst.ground_truth)
    return inst._memo[key]


def solve_instance(inst, weights=None, mode: str = "greedy", node_limit: int | None = None, oracle_limit: int | None = None):
    from .solver import branch_and_bound, brute_force_solve, greedy_descent

    problem = instance_problem(inst, weights)
    if mode == "greedy":
        return greedy_descent(problem)
    if mode == "exact":
        return branch_and_bound(problem, node_limit=node_limit)
    if mode == "brute":
        return brute_force_solve(problem, oracle_limit)
    raise ValueError(f"unknown solve mode {mode!r}; expected greedy, exact or brute")


@dataclass
class EvalResult:
    accuracies: list[float]
    permutations: list[Permutation]

    @property
    def mean(self) -> float:
        return float(np.mean(self.accuracies)) if self.accuracies else float("nan")

    @property
    def std(self) -> float:
        return float(np.std(self.accuracies)) if self.accuracies else float("nan")


def evaluate(weights, instances, mode: str = "greedy") -> EvalResult:
    """Vertex accuracy of the search under ``weights`` on each instance."""
    w = weights.omega if isinstance(weights, WeightVector) else weights
    accs, perms = [], []
    for inst in instances:
        if inst.ground_truth is None:
            raise ValueError("evaluation needs ground truth on every instance")
        res = solve_instance(inst, w, mode)
        perms.append(res.permutation)
        accs.append(vertex_accuracy(res.permutation, inst.ground_truth))
    return EvalResult(accs, perms)


@dataclass
class FoldResult:
    fold: int
    train_idx: list[int]
    test_idx: list[int]
    weights: WeightVector
    learned: EvalResult
    uniform: EvalResult
    trace: list[float]


@dataclass
class CVResult:
    folds: list[FoldResult]
    labels: list[str]
    offset: object = None

    @property
    def learned_accuracy(self) -> float:
        return float(np.mean([a for f in self.folds for a in f.learned.accuracies]))

    @property
    def uniform_accuracy(self) -> float:
        return float(np.mean([a for f in self.folds for a in f.uniform.accuracies]))

    def accuracy_record(self) -> dict:
        learned = [a for f in self.folds for a in f.learned.accuracies]
        uniform = [a for f in self.folds for a in f.uniform.accuracies]
        return {
            "offset": self.offset,
            "learned_mean": float(np.mean(learned)),
            "learned_std": float(np.std(learned)),
            "uniform_mean": float(np.mean(uniform)),
            "uniform_std": float(np.std(uniform)),
            "n_instances": len(learned),
        }

    def mean_weights(self) -> dict[str, float]:
        W = np.array([f.weights.omega for f in self.folds])
        return dict(zip(self.labels, W.mean(axis=0).tolist()))


def cross_validate(instances, folds: int = 10, cfg: TrainConfig | None = None, mode: str = "greedy", offset=None) -> CVResult:
    """K-fold train/test split: learn weights on k-1 folds, score the held-out fold."""
    from sklearn.model_selection import KFold

    cfg = cfg or TrainConfig()
    M = len(instances)
    if M < folds:
        raise ValueError(f"{folds} folds need at least {folds} instances, got {M}")
    labels = instances[0].labels
    D = instances[0].D
    caches = [instance_cache(inst) for inst in instances]
    splitter = KFold(n_splits=folds, shuffle=True, random_state=np.random.default_rng([cfg.seed, 1]).integers(2**31))
    out = []
    for f, (tr, te) in enumerate(splitter.split(np.arange(M))):
        result = train(BoundCache([caches[m] for m in tr]), cfg, labels)
        test = [instances[m] for m in te]
        out.append(
            FoldResult(
                f,
                tr.tolist(),
                te.tolist(),
                result.weights,
                evaluate(result.weights, test, mode),
                evaluate(WeightVector.uniform(D), test, mode),
                result.trace,
            )
        )
        logger.info("fold %d: learned %.3f uniform %.3f", f, out[-1].learned.mean, out[-1].uniform.mean)
    return CVResult(out, labels, offset)


def weights_document(result: TrainResult, labels=None) -> dict:
    return {
        "labels": list(labels if labels is not None else result.weights.labels),
        "omega": result.weights.omega.tolist(),
        "config": result.config.to_dict(),
        "seed": result.config.seed,
        "trace": list(result.trace),
    }


def weights_from_document(doc: dict) -> WeightVector:
    return WeightVector(np.asarray(doc["omega"], dtype=float), list(doc.get("labels", [])))


def accuracy_rows(results: Sequence[CVResult]) -> list[dict]:
    """Rows ``offset, mode, mean_acc, std_acc, n_instances`` for learned and uniform weights."""
    rows = []
    for cv in results:
        rec = cv.accuracy_record()
        rows.append({"offset": cv.offset, "mode": "learned", "mean_acc": rec["learned_mean"], "std_acc": rec["learned_std"], "n_instances": rec["n_instances"]})
        rows.append({"offset": cv.offset, "mode": "uniform", "mean_acc": rec["uniform_mean"], "std_acc": rec["uniform_std"], "n_instances": rec["n_instances"]})
    return rows

"""
Test statistics, analytic power results, and the permutation test.

The accuracy statistic counts correct test-set predictions; the embedding
statistic is a linear-kernel MMD between feature means. The analytic side
gives the closed-form power of the accuracy test, the surrogate objective it
minimizes, and an exact Poisson-binomial oracle for the statistic's null/alt
distributions. All statistics are pure functions; the permutation loop draws
one independent RNG substream per permutation index.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np
from scipy.special import ndtr, ndtri

from .hdgm import LabeledDataset
from .pipeline import TrainedTest, predict_labels

TIE_RULES = ("paper_strict", "plus_one")


@dataclass
class TestOutcome:
    """Result of one two-sample test: statistic, permutations, decision."""

    observed: float
    perms: np.ndarray
    p_value: float
    reject: bool
    alpha: float
    tie_rule: str
    seed: int | None = None

    @property
    def n_perm(self) -> int:
        return len(self.perms)

    def to_dict(self) -> dict:
        return {
            "observed": self.observed,
            "p_value": self.p_value,
            "reject": bool(self.reject),
            "alpha": self.alpha,
            "n_perm": self.n_perm,
            "tie_rule": self.tie_rule,
            "seed": self.seed,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict())


@dataclass
class PowerInputs:
    """Arguments of the closed-form power: inability, test size, level."""

    epsilon: float
    n_te: int
    alpha: float

    def __post_init__(self):
        if not 0.0 < self.epsilon < 0.5:
            raise ValueError(f"epsilon must lie in (0, 1/2), got {self.epsilon}")
        if not 0.0 < self.alpha < 1.0:
            raise ValueError(f"alpha must lie in (0, 1), got {self.alpha}")
        if self.n_te < 1:
            raise ValueError(f"n_te must be positive, got {self.n_te}")


def _as_rows(arr) -> np.ndarray:
    """Coerce to (n, d) float64; 1-D input becomes a single column."""
    arr = np.asarray(arr, dtype=np.float64)
    if arr.ndim == 1:
        return arr[:, None]
    if arr.ndim != 2:
        raise ValueError(f"expected 1-D or 2-D samples, got shape {arr.shape}")
    return arr


def accuracy_statistic(t: TrainedTest, test: LabeledDataset) -> float:
    """Fraction of test rows whose argmax prediction equals the label."""
    if len(test) == 0:
        raise ValueError("empty test set")
    preds = predict_labels(t, test.points)
    return float(np.mean(preds == test.labels))


def embedding_statistic(
    features_x: np.ndarray, features_y: np.ndarray, norm: str = "squared_l2"
) -> float:
    """Difference between mean feature vectors of the two samples.

    ``squared_l2`` returns ||mean(features_x) - mean(features_y)||_2^2 (a
    linear-kernel MMD); ``abs_1d`` requires single-column features and
    returns |mean - mean|.
    """
    fx = _as_rows(features_x)
    fy = _as_rows(features_y)
    if fx.shape[1] != fy.shape[1]:
        raise ValueError(f"feature widths differ: {fx.shape[1]} vs {fy.shape[1]}")
    diff = fx.mean(axis=0) - fy.mean(axis=0)
    if norm == "squared_l2":
        return float(diff @ diff)
    if norm == "abs_1d":
        if fx.shape[1] != 1:
            raise ValueError("abs_1d requires single-column features")
        return float(abs(diff[0]))
    raise ValueError(f"unknown norm {norm!r}")


def null_threshold(n_te: int, alpha: float) -> float:
    """(1-alpha) quantile of the normal null: 1/2 + ndtri(1-alpha)/sqrt(4 n_te)."""
    return 0.5 + ndtri(1.0 - alpha) / np.sqrt(4.0 * n_te)


def theoretical_power(inp: PowerInputs) -> float:
    """Closed-form power of the accuracy test at inability ``epsilon``.

    Evaluates Phi(((1/2 - eps) sqrt(n_te) - Phi^{-1}(1-alpha)/2)
    / sqrt(eps - eps^2)) with double-precision normal CDF/inverse-CDF.
    """
    eps = inp.epsilon
    num = (0.5 - eps) * np.sqrt(inp.n_te) - ndtri(1.0 - inp.alpha) / 2.0
    den = np.sqrt(eps - eps * eps)
    return float(ndtr(num / den))


def objective_j(epsilon: float) -> float:
    """Surrogate objective eps / (1 - eps); minimizing it maximizes power."""
    if not 0.0 < epsilon < 0.5:
        raise ValueError(f"epsilon must lie in (0, 1/2), got {epsilon}")
    return epsilon / (1.0 - epsilon)


def epsilon_hat(t: TrainedTest, ds: LabeledDataset) -> float:
    """Empirical inability: half the misclassification rate, in [0, 1/2].

    Computed as (1 - accuracy)/2 so the algebraic identity with
    :func:`accuracy_statistic` holds to the last bit.
    """
    t_hat = accuracy_statistic(t, ds)
    return min(max(0.5 * (1.0 - t_hat), 0.0), 0.5)


def poisson_binomial_pmf(p) -> np.ndarray:
    """Exact pmf of a sum of independent Bernoulli(p_i) variables.

    Dynamic programming over the Bernoulli convolution; output has length
    ``len(p) + 1`` and sums to 1 within 1e-12.
    """
    p = np.asarray(p, dtype=np.float64).ravel()
    if p.size and (p.min() < 0.0 or p.max() > 1.0):
        raise ValueError("probabilities must lie in [0, 1]")
    pmf = np.ones(1)
    for pi in p:
        nxt = np.zeros(len(pmf) + 1)
        nxt[:-1] = pmf * (1.0 - pi)
        nxt[1:] += pmf * pi
        pmf = nxt
    return pmf


def permutation_test(
    stat_fn,
    x: np.ndarray,
    y: np.ndarray,
    n_perm: int = 100,
    alpha: float = 0.05,
    tie_rule: str = "plus_one",
    rng_seed: int = 0,
) -> TestOutcome:
    """Permutation test of ``stat_fn(x, y)`` against pooled reshuffles.

    Each permutation reshuffles the pooled rows into halves of the original
    sizes and recomputes the statistic; permutation ``i`` uses its own RNG
    substream derived from ``rng_seed``, so results do not depend on
    evaluation order.

    ``tie_rule`` fixes the p-value convention:

    - ``plus_one``: p = (1 + #{perm >= observed}) / (n_perm + 1); exact
      finite-sample validity even for discrete statistics (the default).
    - ``paper_strict``: p = #{perm > observed} / n_perm.

    Rejects when p <= alpha.
    """
    if n_perm < 1:
        raise ValueError("n_perm must be >= 1")
    if tie_rule not in TIE_RULES:
        raise ValueError(f"tie_rule must be one of {TIE_RULES}")
    x = _as_rows(x)
    y = _as_rows(y)
    if x.shape[0] == 0 or y.shape[0] == 0:
        raise ValueError("x and y must be nonempty")

    observed = float(stat_fn(x, y))
    pooled = np.vstack([x, y])
    n_x = x.shape[0]
    streams = np.random.SeedSequence(rng_seed).spawn(n_perm)
    perms = np.empty(n_perm)
    for i, stream in enumerate(streams):
        rng = np.random.default_rng(stream)
        idx = rng.permutation(pooled.shape[0])
        perms[i] = stat_fn(pooled[idx[:n_x]], pooled[idx[n_x:]])

    if tie_rule == "paper_strict":
        p_value = float(np.count_nonzero(perms > observed)) / n_perm
    else:
        p_value = (1.0 + np.count_nonzero(perms >= observed)) / (n_perm + 1.0)
    return TestOutcome(
        observed=observed,
        perms=perms,
        p_value=p_value,
        reject=bool(p_value <= alpha),
        alpha=alpha,
        tie_rule=tie_rule,
        seed=rng_seed,
    )

"""
Self-contained property suites: gradient correctness, analytic-power
agreement with simulation, the Poisson-binomial oracle, and permutation
p-value validity under an exchangeable null. Each check returns
(name, passed, detail) so callers can print one line per check.
"""

from __future__ import annotations

import numpy as np
from scipy.special import ndtr, ndtri
from scipy.stats import kstest

from .nn import MlpModel, backward, bce_loss, forward, init_mlp, mse_loss, softmax
from .stats import (
    PowerInputs,
    null_threshold,
    permutation_test,
    poisson_binomial_pmf,
    theoretical_power,
)


def finite_difference_grads(model: MlpModel, batch, loss_kind, targets,
                            step: float = 1e-5) -> list:
    """Central finite differences of the loss w.r.t. every parameter."""

    def loss_at() -> float:
        out, _ = forward(model, batch)
        if loss_kind == "mse":
            return mse_loss(out, targets)
        return bce_loss(softmax(out)[:, 1], targets)

    grads = []
    for layer in model.layers:
        pair = []
        for param in (layer.weights, layer.bias):
            g = np.zeros_like(param)
            flat = param.ravel()
            gflat = g.ravel()
            for j in range(flat.size):
                orig = flat[j]
                flat[j] = orig + step
                hi = loss_at()
                flat[j] = orig - step
                lo = loss_at()
                flat[j] = orig
                gflat[j] = (hi - lo) / (2.0 * step)
            pair.append(g)
        grads.append(tuple(pair))
    return grads


def max_relative_gradient_error(model, batch, loss_kind, targets) -> float:
    """Worst-case relative disagreement, analytic vs finite differences."""
    out, cache = forward(model, batch)
    analytic = backward(model, cache, loss_kind, targets)
    numeric = finite_difference_grads(model, batch, loss_kind, targets)
    worst = 0.0
    for (aw, ab), (nw, nb) in zip(analytic, numeric):
        for a, n in ((aw, nw), (ab, nb)):
            denom = np.maximum(np.maximum(np.abs(a), np.abs(n)), 1.0)
            worst = max(worst, float(np.max(np.abs(a - n) / denom)))
    return worst


def check_gradients(n_seeds: int = 10, tol: float = 1e-5):
    """Analytic vs central-FD gradients on random small networks."""
    worst = 0.0
    for seed in range(n_seeds):
        rng = np.random.default_rng(1000 + seed)
        n_layers = int(rng.integers(1, 4))
        widths = [int(rng.integers(2, 9)) for _ in range(n_layers + 1)]
        loss_kind = "mse" if seed % 2 == 0 else "cross_entropy"
        acts = [str(rng.choice(["relu", "sigmoid", "identity"])) for _ in range(n_layers)]
        if loss_kind == "cross_entropy":
            widths[-1] = 2
            acts[-1] = "identity"
        model = init_mlp(widths, acts, rng_seed=2000 + seed)
        batch = rng.standard_normal((5, widths[0]))
        if loss_kind == "mse":
            targets = rng.standard_normal((5, widths[-1]))
        else:
            targets = rng.integers(0, 2, size=5)
        worst = max(worst, max_relative_gradient_error(model, batch, loss_kind, targets))
    return "gradient_vs_finite_difference", worst < tol, f"max rel err {worst:.3g}"


def simulated_accuracy_power(epsilon: float, n_te: int, alpha: float,
                             sims: int = 100_000, rng_seed: int = 0) -> float:
    """Monte-Carlo power of the normal-threshold accuracy test.

    The statistic is a mean of n_te Bernoulli(1 - epsilon) draws; reject when
    it exceeds the null threshold 1/2 + ndtri(1-alpha)/sqrt(4 n_te).
    """
    rng = np.random.default_rng(rng_seed)
    t_hat = rng.binomial(n_te, 1.0 - epsilon, size=sims) / n_te
    return float(np.mean(t_hat > null_threshold(n_te, alpha)))


def check_theorem_power(sims: int = 100_000, tol: float = 0.02):
    """Closed-form power vs Bernoulli Monte-Carlo over a small grid."""
    worst = 0.0
    for epsilon in (0.3, 0.4, 0.45):
        for n_te in (100, 400):
            theory = theoretical_power(PowerInputs(epsilon, n_te, 0.05))
            sim = simulated_accuracy_power(epsilon, n_te, 0.05, sims=sims)
            worst = max(worst, abs(theory - sim))
    # Degenerate-inability limit: power collapses to the level alpha.
    limit = theoretical_power(PowerInputs(0.5 - 1e-12, 1000, 0.05))
    ok = worst < tol and abs(limit - 0.05) < 1e-6
    return "theorem_power_vs_simulation", ok, (
        f"max |theory - sim| {worst:.4f}; eps->1/2 limit {limit:.8f}"
    )


def check_poisson_binomial():
    """DP pmf normalization, the Binomial special case, and the normal
    approximation at n=200, p=0.7."""
    n, p = 200, 0.7
    pmf = poisson_binomial_pmf(np.full(n, p))
    norm_gap = abs(pmf.sum() - 1.0)

    from scipy.stats import binom

    binom_gap = float(np.max(np.abs(pmf - binom.pmf(np.arange(n + 1), n, p))))

    cdf = np.cumsum(pmf)
    ks = np.arange(n + 1)
    normal_cdf = ndtr((ks - n * p) / np.sqrt(n * p * (1 - p)))
    sup = float(np.max(np.abs(cdf - normal_cdf)))
    ok = norm_gap < 1e-12 and binom_gap < 1e-12 and sup < 0.05
    return "poisson_binomial_oracle", ok, (
        f"sum gap {norm_gap:.2e}; binomial gap {binom_gap:.2e}; normal sup {sup:.4f}"
    )


def check_permutation_validity(n_trials: int = 500, n_perm: int = 99,
                               alpha: float = 0.05, rng_seed: int = 0):
    """Exchangeable-null p-values: rejection rate near alpha, near-uniform."""

    def mean_diff(a, b):
        return abs(float(a.mean() - b.mean()))

    rng = np.random.default_rng(rng_seed)
    p_values = np.empty(n_trials)
    for i in range(n_trials):
        x = rng.standard_normal((20, 1))
        y = rng.standard_normal((20, 1))
        out = permutation_test(
            mean_diff, x, y, n_perm=n_perm, alpha=alpha,
            tie_rule="plus_one", rng_seed=int(rng.integers(2**31)),
        )
        p_values[i] = out.p_value
    reject_rate = float(np.mean(p_values <= alpha))
    ks_stat = float(kstest(p_values, "uniform").statistic)
    ok = 0.01 <= reject_rate <= 0.10 and ks_stat < 0.10
    return "permutation_null_validity", ok, (
        f"reject rate {reject_rate:.3f}; KS-from-uniform {ks_stat:.3f}"
    )


def check_type1_closed_form():
    """Null-exceedance probability of the normal threshold equals alpha."""
    worst = 0.0
    for n_te in (50, 200, 1000):
        for alpha in (0.01, 0.05, 0.2):
            t_alpha = null_threshold(n_te, alpha)
            exceed = 1.0 - ndtr((t_alpha - 0.5) * np.sqrt(4.0 * n_te))
            worst = max(worst, abs(exceed - alpha))
    return "type1_closed_form", worst < 1e-10, f"max |Pr - alpha| {worst:.2e}"


ALL_CHECKS = (
    check_gradients,
    check_theorem_power,
    check_poisson_binomial,
    check_permutation_validity,
    check_type1_closed_form,
)


def run_all_checks(quick: bool = False):
    """Run every suite; returns a list of (name, passed, detail)."""
    results = []
    for fn in ALL_CHECKS:
        if quick and fn is check_theorem_power:
            results.append(fn(sims=20_000, tol=0.03))
        elif quick and fn is check_permutation_validity:
            results.append(fn(n_trials=200))
        else:
            results.append(fn())
    return results

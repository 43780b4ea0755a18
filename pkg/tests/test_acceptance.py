"""Acceptance suite: every criterion runs at its stated tolerance and prints
one [PASS]/[FAIL] line (run with ``pytest -s`` to watch them live).

The Monte-Carlo criteria use the benchmark defaults (seed 7, significance
0.05, 100 permutations) and two worker processes; the full module takes
roughly 15-25 minutes on two cores, dominated by the Gaussian-mixture
power/type-I cells.
"""

import time

import numpy as np
import pytest
from scipy.special import ndtr
from scipy.stats import binom, kstest

from sslc2st import bench
from sslc2st.checks import (
    check_gradients,
    simulated_accuracy_power,
)
from sslc2st.hdgm import LabeledDataset
from sslc2st.nn import init_mlp
from sslc2st.pipeline import TrainedTest
from sslc2st.stats import (
    PowerInputs,
    accuracy_statistic,
    epsilon_hat,
    permutation_test,
    poisson_binomial_pmf,
    theoretical_power,
)

SEED = 7
JOBS = 2


def report(name: str, ok: bool, detail: str) -> None:
    print(f"\n[{'PASS' if ok else 'FAIL'}] {name}: {detail}")
    assert ok, f"{name}: {detail}"


def power_cell(method, hypothesis, n_total, trials, dataset="hdgm-hard",
               unlabeled_fraction=1.0):
    cfg = bench.make_config(
        dataset=dataset, hypothesis=hypothesis, d=10, n_total=n_total,
        method=method, trials=trials, seed=SEED,
        unlabeled_fraction=unlabeled_fraction,
    )
    return bench.estimate(cfg, jobs=JOBS).rate


def test_gradient_correctness():
    start = time.monotonic()
    name, ok, detail = check_gradients(n_seeds=10, tol=1e-5)
    elapsed = time.monotonic() - start
    report("gradient correctness", ok and elapsed < 10.0,
           f"{detail}; runtime {elapsed:.2f}s (< 10 s)")


def test_theorem1_reproduction():
    start = time.monotonic()
    worst = 0.0
    lines = []
    for eps in (0.3, 0.4, 0.45):
        for n_te in (100, 400):
            theory = theoretical_power(PowerInputs(eps, n_te, 0.05))
            sim = simulated_accuracy_power(eps, n_te, 0.05, sims=100_000,
                                           rng_seed=SEED)
            gap = abs(theory - sim)
            worst = max(worst, gap)
            lines.append(f"eps={eps} n_te={n_te}: |{theory:.4f}-{sim:.4f}|={gap:.4f}")
    limit = theoretical_power(PowerInputs(0.5 - 1e-12, 1000, 0.05))
    elapsed = time.monotonic() - start
    ok = worst <= 0.02 and abs(limit - 0.05) < 1e-6 and elapsed < 60.0
    report("theorem-1 power vs Monte-Carlo", ok,
           "; ".join(lines) + f"; eps->1/2 limit {limit:.8f}; runtime {elapsed:.1f}s")


def test_poisson_binomial_oracle():
    n, p = 200, 0.7
    pmf = poisson_binomial_pmf(np.full(n, p))
    sum_gap = abs(pmf.sum() - 1.0)
    binom_gap = float(np.max(np.abs(pmf - binom.pmf(np.arange(n + 1), n, p))))
    cdf = np.cumsum(pmf)
    normal_cdf = ndtr((np.arange(n + 1) - n * p) / np.sqrt(n * p * (1 - p)))
    sup = float(np.max(np.abs(cdf - normal_cdf)))
    rng = np.random.default_rng(SEED)
    random_sum_gap = max(
        abs(poisson_binomial_pmf(rng.uniform(0, 1, size=50)).sum() - 1.0)
        for _ in range(5)
    )
    ok = sum_gap < 1e-12 and random_sum_gap < 1e-12 and binom_gap < 1e-12 and sup < 0.05
    report("poisson-binomial oracle", ok,
           f"sum gap {sum_gap:.1e}; binomial gap {binom_gap:.1e}; "
           f"normal sup-CDF {sup:.4f} (< 0.05)")


def test_permutation_validity():
    def mean_diff(a, b):
        return abs(float(a.mean() - b.mean()))

    rng = np.random.default_rng(SEED)
    p_values = np.empty(500)
    for i in range(500):
        x = rng.standard_normal((20, 1))
        y = rng.standard_normal((20, 1))
        out = permutation_test(mean_diff, x, y, n_perm=99, alpha=0.05,
                               tie_rule="plus_one",
                               rng_seed=int(rng.integers(2**31)))
        p_values[i] = out.p_value
    reject_rate = float(np.mean(p_values <= 0.05))
    ks = float(kstest(p_values, "uniform").statistic)

    # exhaustive-enumeration oracle on the 4-point worked example
    import itertools

    pooled = np.array([0.0, 1.0, 10.0, 11.0])
    obs = (pooled[[0, 1]].mean() - pooled[[2, 3]].mean()) ** 2
    stats_all = []
    for combo in itertools.combinations(range(4), 2):
        mask = np.zeros(4, dtype=bool)
        mask[list(combo)] = True
        stats_all.append((pooled[mask].mean() - pooled[~mask].mean()) ** 2)
    p_exact = np.count_nonzero(np.array(stats_all) >= obs) / 6.0

    ok = 0.01 <= reject_rate <= 0.10 and ks < 0.10 and p_exact == pytest.approx(2 / 6)
    report("permutation validity", ok,
           f"H0 reject rate {reject_rate:.3f} in [0.01, 0.10]; KS {ks:.3f} (< 0.10); "
           f"enumeration oracle p = {p_exact:.4f} (= 2/6)")


def test_type1_control_end_to_end():
    rates = {}
    for method in ("c2st", "ssl-c2st"):
        rates[method] = power_cell(method, "H0", 2000, trials=100)
    ok = all(rate <= 0.11 for rate in rates.values())
    report("type-I control (HDGM-S, d=10, N=2000)", ok,
           "; ".join(f"{m}: {r:.3f}" for m, r in rates.items()) + " (<= 0.11)")


def test_power_ordering_hdgm_hard():
    c2st = power_cell("c2st", "H1", 4000, trials=60)
    ssl = power_cell("ssl-c2st", "H1", 4000, trials=60)
    ssl_big = power_cell("ssl-c2st", "H1", 8000, trials=50)
    ok = (
        ssl - c2st >= 0.10
        and abs(ssl - 0.50) <= 0.20
        and abs(c2st - 0.29) <= 0.20
        and ssl_big >= 0.85
    )
    report("power ordering (HDGM-Hard, d=10)", ok,
           f"N=4000: ssl {ssl:.3f} vs c2st {c2st:.3f} (gap {ssl - c2st:+.3f} >= 0.10, "
           f"bands 0.50/0.29 +-0.20); N=8000: ssl {ssl_big:.3f} (>= 0.85)")


def test_easy_saturation():
    start = time.monotonic()
    rate = power_cell("ssl-c2st", "H1", 100, trials=100, dataset="hdgm-easy")
    elapsed = time.monotonic() - start
    ok = rate >= 0.97 and elapsed < 300.0
    report("HDGM-Easy saturation (N=100)", ok,
           f"ssl-c2st power {rate:.3f} (= 1.00 +- 0.03); runtime {elapsed:.0f}s (< 5 min)")


def test_unlabeled_data_sweep():
    rates = [
        power_cell("ssl-c2st", "H1", 4000, trials=50, unlabeled_fraction=frac)
        for frac in (0.0, 0.5, 1.0)
    ]
    inversions = [max(0.0, a - b) for a, b in zip(rates, rates[1:])]
    ok = sum(v > 0 for v in inversions) <= 1 and all(v <= 0.05 for v in inversions)
    report("power vs unlabeled fraction", ok,
           f"fractions (0, 0.5, 1.0) -> powers {[f'{r:.3f}' for r in rates]}; "
           f"non-decreasing up to one inversion <= 0.05")


def test_inability_accuracy_identity():
    rng = np.random.default_rng(SEED)
    checked = 0
    for i in range(100):
        d = int(rng.integers(2, 6))
        model = init_mlp((d, int(rng.integers(2, 8)), 2),
                         ["relu", "identity"], rng_seed=1000 + i)
        t = TrainedTest(model=model, provenance="c2st")
        n = int(rng.integers(2, 40))
        ds = LabeledDataset(rng.standard_normal((n, d)), rng.integers(0, 2, size=n))
        t_hat = accuracy_statistic(t, ds)
        assert epsilon_hat(t, ds) == (1.0 - t_hat) / 2.0
        checked += 1
    report("identity eps-hat = (1 - t-hat)/2", checked == 100,
           f"exact on {checked}/100 random (model, dataset) pairs")

"""
Closed-form power of the accuracy test, checked against simulation.

The power depends on three numbers: the classifier's inability eps (half its
misclassification rate), the test-set size, and the significance level. As
eps approaches 1/2 the power collapses to the level alpha; as the test set
grows it climbs to 1 for any eps < 1/2.
"""

import numpy as np

from sslc2st import PowerInputs, theoretical_power
from sslc2st.checks import simulated_accuracy_power
from sslc2st.stats import null_threshold

alpha = 0.05

print("power table (alpha = 0.05)")
print(f"{'eps':>6} {'n_te=100':>10} {'n_te=400':>10} {'n_te=1600':>10}")
for eps in (0.30, 0.40, 0.45, 0.48):
    row = [theoretical_power(PowerInputs(eps, n, alpha)) for n in (100, 400, 1600)]
    print(f"{eps:>6.2f} " + " ".join(f"{p:>10.4f}" for p in row))

print("\ncross-check against Bernoulli simulation (100k draws per cell)")
for eps in (0.4, 0.45):
    theory = theoretical_power(PowerInputs(eps, 400, alpha))
    sim = simulated_accuracy_power(eps, 400, alpha, sims=100_000, rng_seed=0)
    print(f"eps={eps}: theory {theory:.4f} vs simulated {sim:.4f}")

print(f"\nnull rejection threshold at n_te=400: {null_threshold(400, alpha):.4f}")
print("eps -> 1/2 limit:",
      f"{theoretical_power(PowerInputs(0.5 - 1e-12, 400, alpha)):.6f} (= alpha)")

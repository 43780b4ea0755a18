"""
The statistic's null and alternative distributions, exactly.

Under H0 the count of correct test predictions is Binomial(n, 1/2); under H1
it is a Poisson-binomial sum of unequal Bernoullis. The exact dynamic-program
pmf shows how quickly the normal approximation used by the closed-form power
becomes accurate.
"""

import numpy as np
from scipy.special import ndtr

from sslc2st import poisson_binomial_pmf

n = 200
rng = np.random.default_rng(0)

# heterogeneous per-point accuracies around 0.7
p = np.clip(rng.normal(0.7, 0.1, size=n), 0.05, 0.95)
pmf = poisson_binomial_pmf(p)
mean, var = p.sum(), (p * (1 - p)).sum()

print(f"n = {n}, mean accuracy {p.mean():.3f}")
print(f"pmf sums to 1 within {abs(pmf.sum() - 1.0):.2e}")
print(f"exact mean {sum(k * q for k, q in enumerate(pmf)):.3f} vs sum(p) {mean:.3f}")

cdf = np.cumsum(pmf)
normal = ndtr((np.arange(n + 1) - mean) / np.sqrt(var))
print(f"sup |exact CDF - normal CDF| = {np.max(np.abs(cdf - normal)):.4f}")

print("\ncentral pmf mass (k, exact, normal-increment):")
lo, hi = int(mean) - 3, int(mean) + 4
normal_inc = np.diff(ndtr((np.arange(n + 2) - 0.5 - mean) / np.sqrt(var)))
for k in range(lo, hi):
    print(f"  {k:>4} {pmf[k]:.5f} {normal_inc[k]:.5f}")

"""Permutation two-sample testing with the maximum mean discrepancy.

Three scenarios on 2-d samples: identical distributions, a location
shift, and a dependence flip that leaves both marginals untouched. The
last one is what plain per-coordinate tests miss and the joint MMD
catches.
"""

import numpy as np

from vineshift import MmdConfig, mmd_statistic, permutation_test
from vineshift.mmd import median_heuristic

rng = np.random.default_rng(3)
n = 300
cfg = MmdConfig(permutations=500, alpha=0.05, seed=0)


def correlated(n, rho):
    z1 = rng.standard_normal(n)
    z2 = rho * z1 + np.sqrt(1 - rho * rho) * rng.standard_normal(n)
    return np.column_stack([z1, z2])


X = correlated(n, 0.7)

cases = {
    "same distribution": correlated(n, 0.7),
    "mean shift +1.5 in x0": correlated(n, 0.7) + np.array([1.5, 0.0]),
    "dependence flip rho -> -0.7": correlated(n, -0.7),
}

print(f"n = {n} per sample, {cfg.permutations} permutations, alpha = {cfg.alpha}")
print(f"median-heuristic bandwidth for the null case: "
      f"{median_heuristic(X, cases['same distribution']):.3f}")
print()

for name, Y in cases.items():
    res = permutation_test(X, Y, cfg)
    verdict = "REJECT" if res.rejected else "accept"
    print(f"{name:<28} mmd^2 = {res.statistic:9.5f}   p = {res.p_value:.4f}   {verdict}")

print()
print("unbiased statistic can dip below zero under the null:")
stats = [mmd_statistic(rng.standard_normal((80, 1)),
                       rng.standard_normal((80, 1)), 1.0) for _ in range(5)]
print("  " + "  ".join(f"{s:+.5f}" for s in stats))

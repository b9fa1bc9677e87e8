import numpy as np

from qsvmbench import paired_bootstrap

rng = np.random.default_rng(3)
y = (rng.uniform(size=238) < 0.3).astype(int)

# Classifier A recovers most positives, B predicts the majority class only
a = np.where(rng.uniform(size=238) < 0.85, y, 1 - y)
b = np.zeros_like(y)

res = paired_bootstrap(y, a, b, resamples=10_000, seed=42)
print(f"delta F1 = {res.delta_observed:.3f}, 95% CI [{res.ci_lo:.3f}, {res.ci_hi:.3f}]")
print(f"one-sided p = {res.p_value:.2e} (smallest possible {1 / 10_001:.2e}), "
      f"two-sided p = {res.p_value_two_sided:.2e}")

# Resamples come from a counter-based stream, so threading changes nothing
same = paired_bootstrap(y, a, b, resamples=10_000, seed=42, threads=4)
print("identical with 4 threads:", same == res)

# Identical prediction vectors: every resampled difference is zero
print("p for identical classifiers:", paired_bootstrap(y, a, a, 1000).p_value)

"""Small statistical helpers shared by the diagnostics."""
from dataclasses import dataclass

import numpy as np
from scipy import stats

__all__ = ["Estimate", "wilson", "bootstrap_mean", "standard_error"]


@dataclass(frozen=True)
class Estimate:
    """Point estimate with a confidence interval."""

    value: float
    lo: float
    hi: float
    level: float = 0.95

    def overlaps(self, other):
        return not (self.hi < other.lo or other.hi < self.lo)

    def to_dict(self):
        return {"value": self.value, "lo": self.lo, "hi": self.hi, "level": self.level}


def wilson(successes, trials, level=0.95):
    """Wilson score interval for a binomial proportion."""
    if trials == 0:
        return Estimate(float("nan"), 0.0, 1.0, level)
    ci = stats.binomtest(int(successes), int(trials)).proportion_ci(confidence_level=level, method="wilson")
    p = successes / trials
    # the score interval always covers p, up to rounding at the endpoints
    return Estimate(p, min(float(ci.low), p), max(float(ci.high), p), level)


def bootstrap_mean(values, rng, level=0.95, n_resamples=1000):
    """Basic bootstrap interval for the mean of ``values``."""
    values = np.asarray(values, dtype=float)
    m = float(values.mean())
    if values.size < 2 or np.all(values == values[0]):
        return Estimate(m, m, m, level)
    res = stats.bootstrap(
        (values,), np.mean, n_resamples=n_resamples, confidence_level=level,
        method="basic", random_state=rng.generator, vectorized=True,
    )
    lo, hi = float(res.confidence_interval.low), float(res.confidence_interval.high)
    return Estimate(m, min(lo, m), max(hi, m), level)


def standard_error(sum_x, sum_x2, n):
    """Standard error of a sample mean from running sums."""
    mean = sum_x / n
    var = np.maximum(sum_x2 / n - mean * mean, 0.0) * n / (n - 1)
    return np.sqrt(var / n)

"""Finite-time evidence for recurrence, nullity and non-confinement.

None of these experiments proves an infinite-time statement; each compares
configurations or follows a trend that the classification predicts.
"""
# %%
import numpy as np

from ellipticwalk import RngStream, WalkSpec
from ellipticwalk.diagnostics import (
    lyapunov_experiment,
    non_confinement_check,
    occupation_experiment,
    return_probability_experiment,
)

recurrent, transient = WalkSpec(2, 2.0, 1.0), WalkSpec(2, 1.0, 2.0)

# %% Reach B_5 before leaving B_200, from radius 20.
for name, spec in (("recurrent", recurrent), ("transient", transient)):
    rep = return_probability_experiment(spec, 5.0, 200.0, 20.0, 500, 10**5, RngStream(1), track_tail=False)
    p = rep.statistics["p_hit_before_exit"]
    print(f"{name}: {p.value:.3f} [{p.lo:.3f}, {p.hi:.3f}]")

# %% Time spent in B_10 shrinks as a fraction of elapsed time.
rep = occupation_experiment(recurrent, 10.0, [10**3, 10**4, 10**5], 100, RngStream(2))
for n, est in rep.statistics["mean_fraction"].items():
    print(f"n={n:>6}: {est.value:.4f} [{est.lo:.4f}, {est.hi:.4f}]")

# %% Displacement 10 is reached quickly by almost every walk.
rep = non_confinement_check(WalkSpec(3, 1.0, 1.0), 10.0, 10**4, 500, RngStream(3))
print({n: round(e.value, 4) for n, e in rep.statistics["p_hat"].items()})

# %% One-dimensional walk with jumps +-2 left of 0 and +-1 right of it.
rep = lyapunov_experiment(None, np.linspace(-30, 30, 61))
print("largest |x| with positive drift:", rep.statistics["largest_abs_x_positive_drift"])

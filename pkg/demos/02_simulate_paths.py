"""Sample paths and plot-ready data.

Simulates two planar walks that differ only in which semi-axis is longer, then writes
``step,x1,x2,t_norm`` files suitable for colouring a path by time.
"""
# %%
import os
import tempfile

import numpy as np

from ellipticwalk import RngStream, WalkSpec, simulate
from ellipticwalk.cli import main

# %%
radial_long = WalkSpec(2, a=2.0, b=1.0)
transverse_long = WalkSpec(2, a=1.0, b=2.0)
for spec in (radial_long, transverse_long):
    tr = simulate(spec, n_steps=100_000, rng=RngStream(2024), thin=100)
    r = tr.radii
    print(f"a={spec.a} b={spec.b}: final |X| = {r[-1]:8.1f}, "
          f"fraction of kept points within 20 of 0 = {np.mean(r <= 20):.3f}")

# %% [markdown]
# The same through the command line: a trajectory file, its manifest, and plot data.

# %%
work = tempfile.mkdtemp()
traj = os.path.join(work, "paths.csv")
main(["simulate", "--dim", "2", "--a", "1", "--b", "2", "--steps", "20000", "--walks", "2",
      "--seed", "7", "--thin", "10", "--out", traj])
main(["plotdata", "--input", traj, "--out", os.path.join(work, "plot.csv"), "--walk-id", "0"])
print(sorted(os.listdir(work)))
print(open(os.path.join(work, "plot.csv")).read().splitlines()[:3])

"""Which elliptic walks come back?

A walk whose increments are uniform on an ellipsoid with radial semi-axis a*sqrt(d)
and transverse semi-axes b*sqrt(d) has zero drift everywhere, yet whether it returns
to a neighbourhood of the origin depends on the shape of the ellipsoid.
"""
# %%
import math

import numpy as np

from ellipticwalk import WalkSpec, classify_elliptic, classify_tilted, sigma_sq, uv_constants

# %% [markdown]
# The limiting covariance along the ray through x is a^2 on the radial axis and b^2
# across it.  Its radial part U and trace V decide the verdict through 2U - V.

# %%
spec = WalkSpec(dim=2, a=1.0, b=2.0)
print(sigma_sq(np.array([0.6, 0.8]), spec))
print(uv_constants(spec))

# %%
for d, a, b in [(2, 1, 2), (2, 2, 1), (2, 1, 1), (3, 1, 1), (3, 2, 1), (5, 2, 1)]:
    v = classify_elliptic(d, a, b)
    print(f"d={d} a={a} b={b}: {v.kind.value:18s} margin 2U-V = {v.margin:+.2f}")

# %% [markdown]
# Turning the ellipsoid by alpha relative to the radial direction moves the verdict.
# At alpha = pi/4 the planar walk with a=2, b=1 sits exactly on the boundary.

# %%
for alpha in np.linspace(0, math.pi, 9)[:-1]:
    v = classify_tilted(2, 2.0, 1.0, float(alpha))
    print(f"alpha={alpha:.3f}: {v.kind.value}")

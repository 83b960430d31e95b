"""Radial increments far from the origin.

The norm R_n = |X_n| has mean increment close to (V - U) / 2r and mean squared
increment close to U.  Exact values come from a one-dimensional quadrature and are
compared with Monte Carlo estimates.
"""
# %%
from ellipticwalk import RngStream, WalkSpec, exact_radial_moments_quadrature, predicted_radial_moments
from ellipticwalk.estimators import estimate_radial_moments

spec = WalkSpec(2, a=1.0, b=2.0)

# %%
print(f"{'r':>8} {'2r mu1':>10} {'mu2':>10}   prediction (4, 1)")
for r in (1.0, 10.0, 100.0, 1e3, 1e4):
    mu1, mu2 = exact_radial_moments_quadrature(r, spec)
    print(f"{r:8.0f} {2 * r * mu1:10.6f} {mu2:10.6f}")

# %%
rows = estimate_radial_moments(spec, [10.0, 100.0, 1000.0], 10**6, RngStream(3))
for row in rows:
    p = predicted_radial_moments(row.r, spec)
    print(f"r={row.r:6.0f}: mu2_hat = {row.mu2_hat:.4f} +/- {row.se_mu2:.4f}, "
          f"2r mu1_hat = {2 * row.r * row.mu1_hat:.3f} (asymptote {2 * row.r * p.mu1:.1f})")

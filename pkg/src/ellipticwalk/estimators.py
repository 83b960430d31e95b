"""Monte Carlo estimates of increment and radial-increment moments."""
import math
from dataclasses import dataclass

import numpy as np

from .kernels import Kernel, draw_driving
from .sphere import tilted_frame_to, unit_hat
from .stats import Estimate, bootstrap_mean, standard_error

__all__ = [
    "MomentReport",
    "RadialMomentRow",
    "increments_at",
    "radial_increments",
    "estimate_increment_moments",
    "estimate_radial_moments",
]

MIN_SAMPLES = 1000
_CHUNK = 100_000
_N_BATCHES = 1000


def increments_at(spec, x, driving):
    """Vectorized increments at a fixed state ``x``, one per row of ``driving``."""
    x = np.asarray(x, dtype=float)
    d = spec.dim
    u = unit_hat(x)
    k = spec.kernel
    if k is Kernel.PARAMETRIZED_2D:
        perp = np.array([-u[1], u[0]])
        s2 = math.sqrt(2.0)
        return s2 * spec.a * np.cos(driving)[:, None] * u + s2 * spec.b * np.sin(driving)[:, None] * perp
    if k is Kernel.CUSTOM_1D:
        law = spec.custom.law_at(float(x[0]))
        idx = np.searchsorted(np.cumsum(law.probs)[:-1], driving, side="right")
        return np.asarray(law.values)[idx][:, None]
    z = driving / np.linalg.norm(driving, axis=1, keepdims=True)
    sd = math.sqrt(d)
    if k is Kernel.ELLIPTIC:
        return spec.b * sd * z + (spec.a - spec.b) * sd * (z @ u)[:, None] * u
    q = tilted_frame_to(u, spec.alpha)
    diag = np.full(d, spec.b)
    diag[0] = spec.a
    return (sd * z * diag) @ q.T


def radial_increments(spec, r, driving):
    """``R_1 - R_0`` from radius ``r`` via the norm recursion, one per driving row."""
    a, b, d = spec.a, spec.b, spec.dim
    if spec.kernel is Kernel.CUSTOM_1D:
        raise ValueError("the custom kernel has no radial recursion")
    if spec.kernel is Kernel.PARAMETRIZED_2D:
        z1 = np.cos(driving)
        z2 = np.sin(driving)
    else:
        nrm = np.linalg.norm(driving, axis=1)
        z1 = driving[:, 0] / nrm
        z2 = driving[:, 1] / nrm if d > 1 else np.zeros_like(z1)
    s = math.sqrt(d) * (a * z1 * math.cos(spec.alpha) + b * z2 * math.sin(spec.alpha))
    lin = 2.0 * r * s + d * ((a * a - b * b) * z1 * z1 + b * b)
    return lin / (np.sqrt(np.maximum(r * r + lin, 0.0)) + r)


@dataclass(frozen=True)
class MomentReport:
    """Empirical moments of the increment at a fixed state.

    ``cov_hat`` is the raw second-moment matrix ``E[D D^T]`` (not centred), matching
    the covariance of a zero-drift increment.
    """

    x: np.ndarray
    n_samples: int
    mean_hat: np.ndarray
    cov_hat: np.ndarray
    mu1_hat: float
    mu2_hat: float
    se_mean: np.ndarray
    se_cov: np.ndarray
    se_mu1: float
    se_mu2: float
    origin_convention: bool = False
    ci_mu2: Estimate | None = None

    def to_dict(self):
        return {
            "x": self.x.tolist(),
            "n_samples": self.n_samples,
            "mean_hat": self.mean_hat.tolist(),
            "cov_hat": self.cov_hat.tolist(),
            "mu1_hat": self.mu1_hat,
            "mu2_hat": self.mu2_hat,
            "se_mean": self.se_mean.tolist(),
            "se_cov": self.se_cov.tolist(),
            "se_mu1": self.se_mu1,
            "se_mu2": self.se_mu2,
            "ci_mu2": None if self.ci_mu2 is None else self.ci_mu2.to_dict(),
            "direction_at_origin": "e1" if self.origin_convention else None,
        }


def estimate_increment_moments(spec, x, n_samples, rng, bootstrap=False):
    """Sample mean and second-moment matrix of the increment at ``x``.

    Also returns the radial moments ``mu1_hat = mean(|x + D| - |x|)`` and
    ``mu2_hat = mean((|x + D| - |x|)^2)`` with standard errors.  At ``x = 0`` the
    direction of the state is taken to be ``e1``.
    """
    if n_samples < MIN_SAMPLES:
        raise ValueError(f"n_samples must be at least {MIN_SAMPLES}")
    x = np.asarray(x, dtype=float)
    if x.shape != (spec.dim,):
        raise ValueError("x has the wrong dimension")
    d = spec.dim
    r = float(np.linalg.norm(x))
    s1 = np.zeros(d)
    s2 = np.zeros(d)
    c1 = np.zeros((d, d))
    c2 = np.zeros((d, d))
    h = np.zeros(4)  # sums of h, h^2, h^3, h^4
    batch_h2 = []
    done = 0
    while done < n_samples:
        m = min(_CHUNK, n_samples - done)
        inc = increments_at(spec, x, draw_driving(spec, m, rng))
        s1 += inc.sum(axis=0)
        s2 += (inc * inc).sum(axis=0)
        outer = inc[:, :, None] * inc[:, None, :]
        c1 += outer.sum(axis=0)
        c2 += (outer * outer).sum(axis=0)
        nrm = np.linalg.norm(x + inc, axis=1)
        # |x + D| - |x| = (2<x, D> + |D|^2) / (|x + D| + |x|), free of cancellation
        hh = (2.0 * (inc @ x) + (inc * inc).sum(axis=1)) / (nrm + r)
        h += [hh.sum(), (hh**2).sum(), (hh**3).sum(), (hh**4).sum()]
        if bootstrap:
            batch_h2.append(hh * hh)
        done += m
    n = n_samples
    mu1 = h[0] / n
    mu2 = h[1] / n
    ci = None
    if bootstrap:
        allh2 = np.concatenate(batch_h2)
        nb = min(_N_BATCHES, n)
        means = allh2[: (n // nb) * nb].reshape(nb, -1).mean(axis=1)
        # batch means share the overall mean; the interval is for mu2 itself
        bs = bootstrap_mean(means, rng)
        ci = Estimate(float(mu2), min(bs.lo, mu2), max(bs.hi, mu2), bs.level)
    return MomentReport(
        x=x.copy(),
        n_samples=n,
        mean_hat=s1 / n,
        cov_hat=c1 / n,
        mu1_hat=float(mu1),
        mu2_hat=float(mu2),
        se_mean=standard_error(s1, s2, n),
        se_cov=standard_error(c1, c2, n),
        se_mu1=float(standard_error(h[0], h[1], n)),
        se_mu2=float(standard_error(h[1], h[3], n)),
        origin_convention=(r == 0.0),
        ci_mu2=ci,
    )


@dataclass(frozen=True)
class RadialMomentRow:
    r: float
    n_samples: int
    mu1_hat: float
    mu2_hat: float
    se_mu1: float
    se_mu2: float

    def to_dict(self):
        return dict(self.__dict__)


def estimate_radial_moments(spec, radii, n_samples, rng):
    """Per-radius estimates of ``mu1`` and ``mu2`` from the norm recursion alone."""
    radii = [float(r) for r in radii]
    if any(r <= 0 for r in radii):
        raise ValueError("radii must be positive")
    if radii != sorted(radii):
        raise ValueError("radii must be sorted ascending")
    if n_samples < MIN_SAMPLES:
        raise ValueError(f"n_samples must be at least {MIN_SAMPLES}")
    rows = []
    for r in radii:
        h = np.zeros(4)
        done = 0
        while done < n_samples:
            m = min(_CHUNK, n_samples - done)
            hh = radial_increments(spec, r, draw_driving(spec, m, rng))
            h += [hh.sum(), (hh**2).sum(), (hh**3).sum(), (hh**4).sum()]
            done += m
        n = n_samples
        rows.append(
            RadialMomentRow(
                r, n, h[0] / n, h[1] / n,
                float(standard_error(h[0], h[1], n)), float(standard_error(h[1], h[3], n)),
            )
        )
    return rows

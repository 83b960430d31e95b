"""Closed-form increment covariances, the (U, V) constants, and radial moments.

The radial increment ``R_1 - R_0`` of an ellipsoid walk depends on the driving
direction only through ``t = <e1, z>``, whose density on ``[-1, 1]`` is
``(1 - t^2)^((d-3)/2) / B(1/2, (d-1)/2)``.  The exact radial moments are therefore
one-dimensional Gauss-Jacobi integrals.
"""
import enum
import math
from dataclasses import dataclass

import numpy as np
from scipy import integrate, special

from .kernels import Kernel, WalkSpec
from .sphere import tilted_frame_to

__all__ = [
    "EpsDecay",
    "UVConstants",
    "RadialMomentPrediction",
    "QuadratureError",
    "sigma_sq",
    "uv_constants",
    "predicted_radial_moments",
    "t_marginal_density",
    "exact_radial_moments_quadrature",
]


class EpsDecay(str, enum.Enum):
    """How fast the covariance approaches its limit along rays."""

    IDENTICALLY_ZERO = "zero"
    POLYNOMIAL = "polynomial"
    UNKNOWN = "unknown"


@dataclass(frozen=True)
class UVConstants:
    """Radial variance ``U`` and total variance ``V`` of the limiting covariance.

    ``delta0`` is the polynomial decay exponent when ``eps_decay`` is ``POLYNOMIAL``.
    """

    U: float
    V: float
    eps_decay: EpsDecay = EpsDecay.UNKNOWN
    delta0: float | None = None

    def __post_init__(self):
        object.__setattr__(self, "eps_decay", EpsDecay(self.eps_decay))
        if not (self.U > 0):
            raise ValueError(f"U must be positive, got {self.U}")
        # Cauchy-Schwarz allows rounding-level excess only
        if self.V < self.U * (1 - 1e-12):
            raise ValueError(f"need U <= V, got U={self.U}, V={self.V}")
        if self.eps_decay is EpsDecay.POLYNOMIAL and not (self.delta0 and self.delta0 > 0):
            raise ValueError("polynomial decay needs delta0 > 0")


@dataclass(frozen=True)
class RadialMomentPrediction:
    r: float
    mu1: float
    mu2: float
    delta: float = 1.0

    @property
    def error_scale(self):
        """Order of the neglected terms, ``r^-delta`` (no constant attached)."""
        return self.r ** (-self.delta)


class QuadratureError(RuntimeError):
    pass


def sigma_sq(u, spec):
    """Limiting increment covariance in direction ``u``.

    Examples
    --------
    >>> import numpy as np
    >>> sigma_sq(np.array([1.0, 0.0]), WalkSpec(2, 1.0, 2.0)).tolist()
    [[1.0, 0.0], [0.0, 4.0]]
    """
    u = np.asarray(u, dtype=float)
    if u.shape != (spec.dim,):
        raise ValueError("u has the wrong dimension")
    if spec.kernel in (Kernel.ELLIPTIC, Kernel.PARAMETRIZED_2D):
        uu = np.outer(u, u)
        return spec.a**2 * uu + spec.b**2 * (np.eye(spec.dim) - uu)
    if spec.kernel is Kernel.TILTED:
        q = tilted_frame_to(u, spec.alpha)
        d2 = np.full(spec.dim, spec.b**2)
        d2[0] = spec.a**2
        m = (q * d2) @ q.T
        return 0.5 * (m + m.T)
    raise ValueError(f"no closed-form covariance for kernel {spec.kernel.value!r}")


def uv_constants(spec):
    """``(U, V)`` for a built-in ellipsoid kernel; the discrepancy ``eps`` is identically zero."""
    a2, b2, d = spec.a**2, spec.b**2, spec.dim
    if spec.kernel is Kernel.CUSTOM_1D:
        raise ValueError("U and V are not defined for the 1-D custom kernel")
    V = a2 + (d - 1) * b2
    if spec.kernel is Kernel.TILTED:
        c, s = math.cos(spec.alpha), math.sin(spec.alpha)
        U = a2 * c * c + b2 * s * s
    else:
        U = a2
    return UVConstants(U, V, EpsDecay.IDENTICALLY_ZERO)


def predicted_radial_moments(r, spec):
    """Leading-order radial drift ``(V - U) / 2r`` and second moment ``U``."""
    if not r > 0:
        raise ValueError("r must be positive")
    uv = uv_constants(spec)
    return RadialMomentPrediction(float(r), (uv.V - uv.U) / (2.0 * r), uv.U)


def t_marginal_density(t, dim):
    """Density of the first coordinate of a uniform point on the sphere in ``R^dim``."""
    if dim < 2:
        raise ValueError("dim must be >= 2")
    t = np.asarray(t, dtype=float)
    c = 1.0 / special.beta(0.5, 0.5 * (dim - 1))
    return c * (1.0 - t * t) ** (0.5 * (dim - 3))


def _radial_increment(t, r, a, b, d):
    # ||x + D||-||x|| with the r^2 cancellation removed analytically
    lin = 2.0 * a * math.sqrt(d) * r * t + d * ((a * a - b * b) * t * t + b * b)
    return lin / (np.sqrt(np.maximum(r * r + lin, 0.0)) + r)


def _gauss_jacobi(f, beta, n):
    x, w = special.roots_jacobi(n, beta, beta)
    return np.dot(w, f(x))


def exact_radial_moments_quadrature(r, spec, quad_points=128, tol=1e-8):
    """Exact ``(mu1, mu2)`` at radius ``r`` by quadrature against the t-marginal.

    A Gauss-Jacobi rule with weight ``(1 - t^2)^((d-3)/2)`` is compared with the rule
    of twice the size; if they disagree by more than ``tol`` the computation falls back
    to adaptive algebraic-weight quadrature.

    Raises
    ------
    QuadratureError
        If no rule reaches ``tol``.
    """
    if spec.kernel not in (Kernel.ELLIPTIC, Kernel.PARAMETRIZED_2D):
        raise ValueError("quadrature moments are implemented for the elliptic law only")
    if spec.dim < 2:
        raise ValueError("dim must be >= 2")
    if quad_points < 64:
        raise ValueError("quad_points must be >= 64")
    if r < 0:
        raise ValueError("r must be non-negative")
    a, b, d = spec.a, spec.b, spec.dim
    beta = 0.5 * (d - 3)
    norm = special.beta(0.5, 0.5 * (d - 1))

    def f1(t):
        return _radial_increment(t, r, a, b, d)

    def f2(t):
        return _radial_increment(t, r, a, b, d) ** 2

    out = []
    for f in (f1, f2):
        lo = _gauss_jacobi(f, beta, quad_points) / norm
        hi = _gauss_jacobi(f, beta, 2 * quad_points) / norm
        if abs(hi - lo) <= tol:
            out.append(hi)
            continue
        val, err = integrate.quad(f, -1.0, 1.0, weight="alg", wvar=(beta, beta), limit=500, epsabs=1e-13, epsrel=1e-12)
        if err / norm > tol:
            raise QuadratureError(f"quadrature did not converge at r={r}: error estimate {err / norm:.3g}")
        out.append(val / norm)
    return out[0], out[1]

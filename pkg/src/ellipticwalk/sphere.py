"""Unit-sphere sampling and the orthonormal frames that orient increment ellipsoids."""
import numpy as np

__all__ = [
    "UNIT_TOL",
    "unit_hat",
    "sample_unit_sphere",
    "sample_unit_sphere_batch",
    "frame_to",
    "tilted_frame_to",
    "planar_rotation",
    "ellipse_point_2d",
]

UNIT_TOL = 1e-12
# Below this distance from e1 the reflection through (e1 - target) is ill-conditioned.
_NEAR_E1 = 1e-8


def unit_hat(x):
    """Direction of ``x``; the zero vector maps to ``e1``."""
    x = np.asarray(x, dtype=float)
    if x.ndim != 1 or x.size == 0:
        raise ValueError("expected a non-empty 1-D vector")
    r = np.linalg.norm(x)
    if r == 0.0:
        e1 = np.zeros_like(x)
        e1[0] = 1.0
        return e1
    return x / r


def _normalize_rows(g):
    norms = np.linalg.norm(g, axis=-1, keepdims=True)
    return g / norms


def sample_unit_sphere(dim, rng):
    """Draw one point uniformly from the unit sphere in ``R^dim``.

    A vector of independent standard normals is normalized; in one dimension this
    yields ``+1`` or ``-1`` with equal probability.

    Parameters
    ----------
    dim : int
        Ambient dimension, at least 1.
    rng : RngStream

    Returns
    -------
    ndarray of shape (dim,)
    """
    return sample_unit_sphere_batch(dim, 1, rng)[0]


def sample_unit_sphere_batch(dim, n, rng):
    """Draw ``n`` independent uniform points on the unit sphere, shape ``(n, dim)``."""
    if int(dim) != dim or dim < 1:
        raise ValueError(f"dim must be a positive integer, got {dim}")
    dim = int(dim)
    g = rng.standard_normal((n, dim))
    norms = np.linalg.norm(g, axis=1)
    # An all-zero Gaussian row has probability zero but would produce NaNs.
    bad = norms == 0.0
    while bad.any():
        g[bad] = rng.standard_normal((int(bad.sum()), dim))
        norms = np.linalg.norm(g, axis=1)
        bad = norms == 0.0
    return g / norms[:, None]


def _check_unit(target):
    target = np.asarray(target, dtype=float)
    if target.ndim != 1 or target.size == 0:
        raise ValueError("target must be a non-empty 1-D vector")
    if abs(np.linalg.norm(target) - 1.0) > UNIT_TOL:
        raise ValueError(f"target must have unit norm, got norm {np.linalg.norm(target)!r}")
    return target


def frame_to(target):
    """Orthogonal matrix ``Q`` with ``Q @ e1 == target``.

    ``Q`` is the Householder reflection through ``e1 - target``.  Near ``e1`` the
    reflection through ``e1 + target`` composed with ``diag(-1, 1, ..., 1)`` is used
    instead, which is exactly the identity at ``target == e1``.
    """
    t = _check_unit(target)
    d = t.size
    e1 = np.zeros(d)
    e1[0] = 1.0
    v = e1 - t
    nv = np.linalg.norm(v)
    if nv <= UNIT_TOL:
        return np.eye(d)
    if nv < _NEAR_E1:
        w = e1 + t
        h = np.eye(d) - 2.0 * np.outer(w, w) / np.dot(w, w)
        h[:, 0] *= -1.0
        return h
    return np.eye(d) - 2.0 * np.outer(v, v) / (nv * nv)


def planar_rotation(dim, angle):
    """Rotation by ``angle`` in the (e1, e2)-plane of ``R^dim``; sends e1 to e_angle."""
    if dim < 2:
        raise ValueError("a planar rotation needs dim >= 2")
    r = np.eye(dim)
    c, s = np.cos(angle), np.sin(angle)
    r[0, 0], r[0, 1] = c, -s
    r[1, 0], r[1, 1] = s, c
    return r


def tilted_frame_to(target, alpha):
    """Orthogonal ``Q`` sending ``e_alpha = e1 cos(alpha) + e2 sin(alpha)`` to ``target``.

    Built as ``frame_to(target) @ R(-alpha)``, where ``R`` rotates the (e1, e2)-plane.
    """
    t = _check_unit(target)
    if t.size < 2:
        raise ValueError("a tilted frame needs dim >= 2")
    if not (0.0 <= alpha < np.pi):
        raise ValueError(f"alpha must lie in [0, pi), got {alpha}")
    if alpha == 0.0:
        return frame_to(t)
    return frame_to(t) @ planar_rotation(t.size, -alpha)


def ellipse_point_2d(x, a, b, phi):
    """Point of the ellipse centred at ``x`` with parameter ``phi``.

    Semi-axes ``sqrt(2) a`` along ``x`` and ``sqrt(2) b`` along ``x_perp = (-x2, x1)``;
    at the origin the axes are ``e1`` and ``e2``.
    """
    x = np.asarray(x, dtype=float)
    if x.shape != (2,):
        raise ValueError("x must be a 2-vector")
    if not (a > 0 and b > 0):
        raise ValueError("a and b must be positive")
    if not (-np.pi < phi <= np.pi):
        raise ValueError(f"phi must lie in (-pi, pi], got {phi}")
    u = unit_hat(x)
    perp = np.array([-u[1], u[0]])
    s2 = np.sqrt(2.0)
    return x + s2 * a * u * np.cos(phi) + s2 * b * perp * np.sin(phi)

"""Walk models, single-step increment laws, and trajectory simulation.

Four kernels are provided:

``ELLIPTIC``
    increments ``H_u z`` on an ellipsoid with semi-axis ``a sqrt(d)`` along the
    current direction ``u`` and ``b sqrt(d)`` transversally, ``z`` uniform on the
    sphere.
``TILTED``
    the same ellipsoid with its distinguished axis turned by a fixed angle alpha
    away from the radial direction.
``PARAMETRIZED_2D``
    the planar walk driven by a uniform ellipse parameter phi.
``CUSTOM_1D``
    a user-specified, piecewise-constant family of finite jump laws on the line.
"""
import enum
import math
from collections.abc import Iterator
from dataclasses import dataclass, field

import numpy as np

from . import _engine
from .rng import RngStream
from .sphere import UNIT_TOL, sample_unit_sphere, tilted_frame_to, unit_hat

__all__ = [
    "Kernel",
    "JumpLaw",
    "Custom1DParams",
    "DEFAULT_CUSTOM_1D",
    "WalkSpec",
    "Trajectory",
    "WalkOverflowError",
    "elliptic_step",
    "tilted_step",
    "parametrized_2d_step",
    "radial_step",
    "custom_1d_step",
    "increment_bound",
    "draw_driving",
    "advance",
    "iter_chunks",
    "simulate",
    "radial_path",
]


class Kernel(str, enum.Enum):
    ELLIPTIC = "elliptic"
    PARAMETRIZED_2D = "parametrized2d"
    TILTED = "tilted"
    CUSTOM_1D = "custom1d"


class WalkOverflowError(OverflowError):
    """A position left the representable range of float64."""

    def __init__(self, step, message=None):
        self.step = step
        super().__init__(message or f"position overflowed at step {step}")


@dataclass(frozen=True)
class JumpLaw:
    """Finitely supported jump distribution."""

    values: tuple
    probs: tuple

    def __post_init__(self):
        values = tuple(float(v) for v in self.values)
        probs = tuple(float(p) for p in self.probs)
        if len(values) == 0 or len(values) != len(probs):
            raise ValueError("values and probs must be non-empty and of equal length")
        if any(p < 0 for p in probs) or not math.isclose(sum(probs), 1.0, abs_tol=1e-12):
            raise ValueError("probs must be non-negative and sum to 1")
        if not all(math.isfinite(v) for v in values):
            raise ValueError("jump values must be finite")
        object.__setattr__(self, "values", values)
        object.__setattr__(self, "probs", probs)

    @classmethod
    def symmetric(cls, c):
        """Jump ``+c`` or ``-c`` with probability 1/2 each."""
        return cls((-c, c), (0.5, 0.5))

    @property
    def mean(self):
        return math.fsum(v * p for v, p in zip(self.values, self.probs))

    @property
    def second_moment(self):
        return math.fsum(v * v * p for v, p in zip(self.values, self.probs))


@dataclass(frozen=True)
class Custom1DParams:
    """Position-dependent jump laws on the real line.

    ``laws[j]`` governs positions in ``[edges[j-1], edges[j])`` (with
    ``edges[-1] = -inf`` and ``edges[len(edges)] = +inf``).  Every law must have zero
    mean and second moment at least ``variance_floor``; otherwise construction fails.
    """

    edges: tuple
    laws: tuple
    variance_floor: float = 1.0

    def __post_init__(self):
        edges = tuple(float(e) for e in self.edges)
        laws = tuple(self.laws)
        if len(laws) != len(edges) + 1:
            raise ValueError("need exactly len(edges) + 1 jump laws")
        if any(e2 <= e1 for e1, e2 in zip(edges, edges[1:])):
            raise ValueError("edges must be strictly increasing")
        if self.variance_floor <= 0:
            raise ValueError("variance_floor must be positive")
        for j, law in enumerate(laws):
            if not isinstance(law, JumpLaw):
                raise TypeError("laws must be JumpLaw instances")
            if abs(law.mean) > 1e-12:
                raise ValueError(f"jump law {j} has non-zero mean {law.mean}")
            if law.second_moment < self.variance_floor:
                raise ValueError(
                    f"jump law {j} has second moment {law.second_moment} "
                    f"below the floor {self.variance_floor}"
                )
        object.__setattr__(self, "edges", edges)
        object.__setattr__(self, "laws", laws)

    def law_at(self, x):
        j = int(np.searchsorted(np.asarray(self.edges), x, side="right"))
        return self.laws[j]

    @property
    def max_jump(self):
        return max(abs(v) for law in self.laws for v in law.values)

    def packed(self):
        """Arrays consumed by the compiled stepper."""
        m = max(len(law.values) for law in self.laws)
        values = np.zeros((len(self.laws), m))
        cum = np.ones((len(self.laws), m))
        counts = np.zeros(len(self.laws), dtype=np.int64)
        for j, law in enumerate(self.laws):
            k = len(law.values)
            values[j, :k] = law.values
            cum[j, :k] = np.cumsum(law.probs)
            counts[j] = k
        return np.asarray(self.edges, dtype=float), values, cum, counts


# Jump +-1 on [0, inf), +-2 on (-inf, 0): non-homogeneous but satisfies the 1-D hypotheses.
DEFAULT_CUSTOM_1D = Custom1DParams(edges=(0.0,), laws=(JumpLaw.symmetric(2.0), JumpLaw.symmetric(1.0)))


@dataclass(frozen=True)
class WalkSpec:
    """Full parametrization of a walk model.

    Parameters
    ----------
    dim : int
    a, b : float
        Radial and transverse semi-axis scales (ignored by ``CUSTOM_1D``).
    alpha : float
        Tilt angle in ``[0, pi)``; only meaningful for ``TILTED``.
    kernel : Kernel
    custom : Custom1DParams, optional
        Jump laws for ``CUSTOM_1D``; defaults to :data:`DEFAULT_CUSTOM_1D`.
    """

    dim: int
    a: float = 1.0
    b: float = 1.0
    alpha: float = 0.0
    kernel: Kernel = Kernel.ELLIPTIC
    custom: Custom1DParams | None = None

    def __post_init__(self):
        kernel = Kernel(self.kernel)
        object.__setattr__(self, "kernel", kernel)
        if int(self.dim) != self.dim or self.dim < 1:
            raise ValueError(f"dim must be a positive integer, got {self.dim}")
        object.__setattr__(self, "dim", int(self.dim))
        if not (self.a > 0 and self.b > 0) or not (math.isfinite(self.a) and math.isfinite(self.b)):
            raise ValueError("a and b must be positive and finite")
        object.__setattr__(self, "a", float(self.a))
        object.__setattr__(self, "b", float(self.b))
        if not (0.0 <= self.alpha < math.pi):
            raise ValueError(f"alpha must lie in [0, pi), got {self.alpha}")
        object.__setattr__(self, "alpha", float(self.alpha))
        if kernel is Kernel.PARAMETRIZED_2D and self.dim != 2:
            raise ValueError("the parametrized kernel is planar (dim = 2)")
        if kernel is Kernel.TILTED and self.dim < 2:
            raise ValueError("the tilted kernel needs dim >= 2")
        if kernel is Kernel.CUSTOM_1D:
            if self.dim != 1:
                raise ValueError("the custom kernel lives on the line (dim = 1)")
            if self.custom is None:
                object.__setattr__(self, "custom", DEFAULT_CUSTOM_1D)
        if kernel is not Kernel.TILTED and self.alpha != 0.0:
            raise ValueError("alpha is only supported by the tilted kernel")

    @property
    def is_radial_markov(self):
        """The norm process is itself Markov (true for every built-in planar/ellipsoid kernel)."""
        return self.kernel is not Kernel.CUSTOM_1D

    def scaled(self, lam):
        """Same model with both semi-axes multiplied by ``lam``."""
        return WalkSpec(self.dim, lam * self.a, lam * self.b, self.alpha, self.kernel, self.custom)

    def to_dict(self):
        out = {"dim": self.dim, "a": self.a, "b": self.b, "alpha": self.alpha, "kernel": self.kernel.value}
        if self.kernel is Kernel.CUSTOM_1D:
            out["custom"] = {
                "edges": list(self.custom.edges),
                "laws": [{"values": list(l.values), "probs": list(l.probs)} for l in self.custom.laws],
                "variance_floor": self.custom.variance_floor,
            }
        return out

    @classmethod
    def from_dict(cls, d):
        custom = None
        if d.get("custom") is not None:
            c = d["custom"]
            custom = Custom1DParams(
                edges=tuple(c["edges"]),
                laws=tuple(JumpLaw(tuple(l["values"]), tuple(l["probs"])) for l in c["laws"]),
                variance_floor=c.get("variance_floor", 1.0),
            )
        return cls(d["dim"], d.get("a", 1.0), d.get("b", 1.0), d.get("alpha", 0.0), Kernel(d["kernel"]), custom)


def increment_bound(spec):
    """Deterministic upper bound on the increment norm."""
    if spec.kernel is Kernel.CUSTOM_1D:
        return spec.custom.max_jump
    return math.sqrt(spec.dim) * max(spec.a, spec.b)


@dataclass(frozen=True)
class Trajectory:
    """Positions ``X_0, ..., X_n`` of one walk.  ``positions`` is read-only."""

    spec: WalkSpec
    seed: int
    positions: np.ndarray
    stream_id: int = 0
    thin: int = 1
    n_steps: int = field(default=-1)

    def __post_init__(self):
        pos = np.array(self.positions, dtype=float, copy=True)
        if pos.ndim != 2 or pos.shape[1] != self.spec.dim:
            raise ValueError("positions must have shape (n + 1, dim)")
        pos.setflags(write=False)
        object.__setattr__(self, "positions", pos)
        if self.n_steps < 0:
            object.__setattr__(self, "n_steps", (pos.shape[0] - 1) * self.thin)

    @property
    def step_count(self):
        return self.n_steps

    @property
    def steps(self):
        return np.arange(self.positions.shape[0]) * self.thin

    @property
    def radii(self):
        return np.linalg.norm(self.positions, axis=1)

    @property
    def increments(self):
        if self.thin != 1:
            raise ValueError("increments are undefined for a thinned trajectory")
        return np.diff(self.positions, axis=0)


def _check_vec(x, dim, name="x"):
    x = np.asarray(x, dtype=float)
    if x.shape != (dim,):
        raise ValueError(f"{name} must have shape ({dim},), got {x.shape}")
    return x


def _check_zeta(zeta, dim):
    zeta = _check_vec(zeta, dim, "zeta")
    if abs(np.linalg.norm(zeta) - 1.0) > UNIT_TOL:
        raise ValueError("zeta must be a unit vector")
    return zeta


def elliptic_step(x, spec, zeta):
    """Next position ``x + b sqrt(d) z + (a - b) sqrt(d) u <u, z>`` with ``u`` the direction of ``x``."""
    if spec.kernel is not Kernel.ELLIPTIC:
        raise ValueError("elliptic_step needs an elliptic spec")
    d = spec.dim
    x = _check_vec(x, d)
    zeta = _check_zeta(zeta, d)
    u = unit_hat(x)
    sd = math.sqrt(d)
    return x + spec.b * sd * zeta + (spec.a - spec.b) * sd * u * np.dot(u, zeta)


def tilted_step(x, spec, zeta):
    """Next position ``x + Q D z`` with ``Q`` the tilted frame sending ``e_alpha`` to ``u``."""
    if spec.kernel is not Kernel.TILTED:
        raise ValueError("tilted_step needs a tilted spec")
    d = spec.dim
    x = _check_vec(x, d)
    zeta = _check_zeta(zeta, d)
    q = tilted_frame_to(unit_hat(x), spec.alpha)
    diag = np.full(d, spec.b)
    diag[0] = spec.a
    return x + q @ (math.sqrt(d) * diag * zeta)


def parametrized_2d_step(x, spec, phi):
    """Next planar position for ellipse parameter ``phi`` in ``(-pi, pi]``."""
    from .sphere import ellipse_point_2d

    if spec.kernel is not Kernel.PARAMETRIZED_2D:
        raise ValueError("parametrized_2d_step needs a parametrized spec")
    return ellipse_point_2d(x, spec.a, spec.b, phi)


def radial_step(r, spec, t, s=None):
    """Next radius of an ellipsoid walk given ``t = <e1, z>``.

    Returns ``sqrt(r^2 + 2 a sqrt(d) r t + (a^2 - b^2) d t^2 + b^2 d)``.  For the tilted
    kernel pass ``s = <e2, z>`` as well; the radial increment component becomes
    ``sqrt(d) (a t cos(alpha) + b s sin(alpha))``.
    """
    if r < 0:
        raise ValueError("r must be non-negative")
    if abs(t) > 1.0:
        raise ValueError("t must lie in [-1, 1]")
    if spec.kernel is Kernel.CUSTOM_1D:
        raise ValueError("the custom kernel has no radial recursion")
    d, a, b = spec.dim, spec.a, spec.b
    sd = math.sqrt(d)
    if spec.kernel is Kernel.TILTED and spec.alpha != 0.0:
        if s is None:
            raise ValueError("the tilted recursion needs s = <e2, z>")
        radial = sd * (a * t * math.cos(spec.alpha) + b * s * math.sin(spec.alpha))
    else:
        radial = a * sd * t
    arg = r * r + 2.0 * r * radial + (a * a - b * b) * d * t * t + b * b * d
    return math.sqrt(max(arg, 0.0))


def custom_1d_step(x, kernel_params, rng):
    """One step of a :class:`Custom1DParams` walk from position ``x``."""
    law = kernel_params.law_at(x)
    u = rng.random()
    k = int(np.searchsorted(np.cumsum(law.probs)[:-1], u, side="right"))
    return x + law.values[k]


# ---------------------------------------------------------------------------
# Chunked simulation.  A chunk of m steps consumes exactly the draws that m
# single steps would, so paths do not depend on chunk size.


def draw_driving(spec, m, rng):
    """Random inputs for ``m`` steps: Gaussian rows, or uniforms for the planar/1-D kernels."""
    if spec.kernel is Kernel.PARAMETRIZED_2D:
        return math.pi - 2.0 * math.pi * rng.random(m)
    if spec.kernel is Kernel.CUSTOM_1D:
        return rng.random(m)
    return rng.standard_normal((m, spec.dim))


def advance(spec, x, driving, out=None):
    """Advance state ``x`` (modified in place) through one chunk of driving draws."""
    m = driving.shape[0]
    if out is None:
        out = np.empty((m, spec.dim))
    k = spec.kernel
    if k is Kernel.ELLIPTIC:
        _engine.advance_elliptic(x, spec.a, spec.b, driving, out)
    elif k is Kernel.TILTED:
        _engine.advance_tilted(x, spec.a, spec.b, spec.alpha, driving, out)
    elif k is Kernel.PARAMETRIZED_2D:
        _engine.advance_param2d(x, spec.a, spec.b, driving, out)
    else:
        _engine.advance_custom1d(x, *spec.custom.packed(), driving, out)
    return out


def _chunk_sizes(n, first=1024, cap=1 << 16):
    size = first
    done = 0
    while done < n:
        m = min(size, n - done)
        yield m
        done += m
        size = min(2 * size, cap)


def iter_chunks(spec, start, n_steps, rng, chunk=1 << 16):
    """Yield ``(first_step, positions)`` blocks covering steps ``1..n_steps``.

    Memory stays bounded by ``chunk`` positions, so arbitrarily long walks can be
    streamed to disk.

    Raises
    ------
    WalkOverflowError
        As soon as a non-finite position appears.
    """
    x = np.array(_check_vec(start, spec.dim, "start"), dtype=float, copy=True)
    step = 1
    for m in _chunk_sizes(n_steps, first=min(1024, chunk), cap=chunk):
        block = advance(spec, x, draw_driving(spec, m, rng))
        if not np.isfinite(x).all() or not np.isfinite(block).all():
            bad = int(np.argmin(np.isfinite(block).all(axis=1)))
            raise WalkOverflowError(step + bad)
        yield step, block
        step += m


def simulate(spec, start=None, n_steps=1, rng=None, thin=1):
    """Simulate one walk and return its :class:`Trajectory`.

    Parameters
    ----------
    spec : WalkSpec
    start : array_like, optional
        Starting point; the origin by default.
    n_steps : int
    rng : RngStream
    thin : int
        Keep every ``thin``-th position (``X_0`` is always kept).
    """
    if n_steps < 1 or int(n_steps) != n_steps:
        raise ValueError("n_steps must be a positive integer")
    if thin < 1:
        raise ValueError("thin must be >= 1")
    if rng is None:
        raise ValueError("an RngStream is required")
    start = np.zeros(spec.dim) if start is None else _check_vec(start, spec.dim, "start")
    kept = [start[None, :]]
    for first, block in iter_chunks(spec, start, int(n_steps), rng):
        steps = np.arange(first, first + block.shape[0])
        kept.append(block[steps % thin == 0])
    return Trajectory(spec, rng.seed, np.concatenate(kept), rng.stream_id, thin, int(n_steps))


def radial_path(spec, r0, n_steps, rng, chunk=1 << 16):
    """Yield blocks of radii ``R_1, R_2, ...`` from the norm recursion alone.

    Consumes the same draws as :func:`simulate`.  The radii have the law of the norm
    of the full-space walk; for the tilted and planar kernels they also coincide
    pathwise with it.  The elliptic full-space stepper uses the frame-free form, whose
    radial input is ``<u, z>`` rather than ``<e1, z>``, so there the coupling is in law.
    """
    if not spec.is_radial_markov:
        raise ValueError("the norm of this kernel is not a Markov chain")
    r = float(r0)
    for m in _chunk_sizes(n_steps, first=min(1024, chunk), cap=chunk):
        drv = draw_driving(spec, m, rng)
        out = np.empty(m)
        if spec.kernel is Kernel.PARAMETRIZED_2D:
            r = _engine.radial_chunk_phi(r, spec.a, spec.b, drv, out)
        else:
            r = _engine.radial_chunk(r, spec.a, spec.b, spec.alpha, drv, out)
        yield out

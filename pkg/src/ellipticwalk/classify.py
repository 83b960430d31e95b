"""Recurrence / transience verdicts from the sign of ``2U - V``."""
import enum
import math
from dataclasses import asdict, dataclass

from .kernels import Kernel, WalkSpec
from .moments import EpsDecay, UVConstants, uv_constants

__all__ = [
    "Kind",
    "Criterion",
    "Verdict",
    "CRITICAL_RTOL",
    "classify_uv",
    "classify_elliptic",
    "classify_tilted",
    "classify_1d",
    "classify_spec",
    "custom_1d_assumptions_ok",
]

CRITICAL_RTOL = 1e-12


class Kind(str, enum.Enum):
    TRANSIENT = "Transient"
    RECURRENT = "Recurrent"
    CRITICAL_RECURRENT = "CriticalRecurrent"
    INDETERMINATE = "Indeterminate"

    @property
    def is_recurrent(self):
        return self in (Kind.RECURRENT, Kind.CRITICAL_RECURRENT)


class Criterion(str, enum.Enum):
    THEOREM_UV = "TheoremUV"
    COROLLARY_ELLIPTIC = "CorollaryElliptic"
    TILTED_CRITERION = "TiltedCriterion"
    ONE_DIMENSIONAL = "OneDimensional"


@dataclass(frozen=True)
class Verdict:
    kind: Kind
    U: float
    V: float
    margin: float
    criterion_used: Criterion

    def to_dict(self):
        d = asdict(self)
        d["kind"] = self.kind.value
        d["criterion_used"] = self.criterion_used.value
        return d


def _sign(margin, scale):
    if abs(margin) <= CRITICAL_RTOL * scale:
        return 0
    return 1 if margin > 0 else -1


def classify_uv(uv):
    """Verdict for raw ``(U, V)`` constants.

    ``2U < V`` is transient, ``2U > V`` recurrent.  On the boundary the walk is
    recurrent only if the covariance discrepancy is known to decay polynomially (or
    vanish); otherwise the verdict is ``Indeterminate``.
    """
    if not isinstance(uv, UVConstants):
        raise TypeError("expected UVConstants")
    margin = 2.0 * uv.U - uv.V
    sgn = _sign(margin, uv.V)
    if sgn < 0:
        kind = Kind.TRANSIENT
    elif sgn > 0:
        kind = Kind.RECURRENT
    elif uv.eps_decay is EpsDecay.UNKNOWN:
        kind = Kind.INDETERMINATE
    else:
        kind = Kind.CRITICAL_RECURRENT
    return Verdict(kind, uv.U, uv.V, margin, Criterion.THEOREM_UV)


def classify_1d(assumptions_ok):
    """One-dimensional zero-drift walks with bounded p > 2 moments are recurrent."""
    kind = Kind.RECURRENT if assumptions_ok else Kind.INDETERMINATE
    return Verdict(kind, math.nan, math.nan, math.nan, Criterion.ONE_DIMENSIONAL)


def classify_elliptic(dim, a, b):
    """Transient iff ``a^2 < (d - 1) b^2``; critical on equality."""
    if not (a > 0 and b > 0):
        raise ValueError("a and b must be positive")
    if dim < 2:
        # the line: bounded symmetric jumps of size a, always covered by the 1-D result
        return classify_1d(True)
    U = a * a
    V = a * a + (dim - 1) * b * b
    margin = a * a - (dim - 1) * b * b
    sgn = _sign(margin, V)
    kind = Kind.TRANSIENT if sgn < 0 else (Kind.RECURRENT if sgn > 0 else Kind.CRITICAL_RECURRENT)
    return Verdict(kind, U, V, margin, Criterion.COROLLARY_ELLIPTIC)


def classify_tilted(dim, a, b, alpha):
    """Transient iff ``(a^2 - b^2) cos(2 alpha) < (d - 2) b^2``."""
    if dim < 2:
        raise ValueError("the tilted model needs dim >= 2")
    if not (a > 0 and b > 0):
        raise ValueError("a and b must be positive")
    if not (0.0 <= alpha < math.pi):
        raise ValueError("alpha must lie in [0, pi)")
    c, s = math.cos(alpha), math.sin(alpha)
    U = a * a * c * c + b * b * s * s
    V = a * a + (dim - 1) * b * b
    margin = (a * a - b * b) * math.cos(2.0 * alpha) - (dim - 2) * b * b
    sgn = _sign(margin, V)
    kind = Kind.TRANSIENT if sgn < 0 else (Kind.RECURRENT if sgn > 0 else Kind.CRITICAL_RECURRENT)
    return Verdict(kind, U, V, margin, Criterion.TILTED_CRITERION)


def custom_1d_assumptions_ok(params):
    """Bounded jumps, zero mean and a variance floor hold by construction of the params."""
    from .kernels import Custom1DParams

    return isinstance(params, Custom1DParams) and math.isfinite(params.max_jump)


def classify_spec(spec):
    """Dispatch a :class:`WalkSpec` to the matching criterion."""
    if spec.kernel is Kernel.CUSTOM_1D:
        return classify_1d(custom_1d_assumptions_ok(spec.custom))
    if spec.kernel is Kernel.TILTED:
        return classify_tilted(spec.dim, spec.a, spec.b, spec.alpha)
    return classify_elliptic(spec.dim, spec.a, spec.b)

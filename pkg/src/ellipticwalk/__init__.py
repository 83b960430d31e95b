"""Zero-drift non-homogeneous random walks: elliptic walk simulation, exact
recurrence classification, and Monte Carlo diagnostics."""
__version__ = "0.1.0"

from .classify import Kind, Verdict, classify_1d, classify_elliptic, classify_spec, classify_tilted, classify_uv
from .kernels import (
    DEFAULT_CUSTOM_1D,
    Custom1DParams,
    JumpLaw,
    Kernel,
    Trajectory,
    WalkSpec,
    elliptic_step,
    parametrized_2d_step,
    radial_step,
    simulate,
    tilted_step,
)
from .moments import EpsDecay, UVConstants, exact_radial_moments_quadrature, predicted_radial_moments, sigma_sq, uv_constants
from .rng import RngStream
from .sphere import frame_to, sample_unit_sphere, tilted_frame_to

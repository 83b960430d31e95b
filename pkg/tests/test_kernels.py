import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from ellipticwalk.estimators import increments_at
from ellipticwalk.kernels import (
    DEFAULT_CUSTOM_1D,
    Custom1DParams,
    JumpLaw,
    Kernel,
    WalkOverflowError,
    WalkSpec,
    advance,
    custom_1d_step,
    draw_driving,
    elliptic_step,
    increment_bound,
    iter_chunks,
    parametrized_2d_step,
    radial_path,
    radial_step,
    simulate,
    tilted_step,
)
from ellipticwalk.rng import RngStream
from ellipticwalk.sphere import frame_to, sample_unit_sphere, unit_hat

S2 = math.sqrt(2.0)


def unit(v):
    v = np.asarray(v, dtype=float)
    return v / np.linalg.norm(v)


# ---------------------------------------------------------------- spec validation


@pytest.mark.parametrize(
    "kwargs",
    [
        dict(dim=0),
        dict(dim=2, a=0.0),
        dict(dim=2, b=-1.0),
        dict(dim=3, kernel=Kernel.PARAMETRIZED_2D),
        dict(dim=1, kernel=Kernel.TILTED),
        dict(dim=2, kernel=Kernel.CUSTOM_1D),
        dict(dim=2, alpha=0.5),
        dict(dim=2, alpha=4.0, kernel=Kernel.TILTED),
    ],
)
def test_invalid_specs_rejected(kwargs):
    with pytest.raises(ValueError):
        WalkSpec(**kwargs)


def test_spec_round_trips_through_dict():
    for spec in [WalkSpec(3, 2.0, 0.5), WalkSpec(2, 1, 2, 0.3, Kernel.TILTED), WalkSpec(1, kernel=Kernel.CUSTOM_1D)]:
        assert WalkSpec.from_dict(spec.to_dict()) == spec


# ---------------------------------------------------------------- elliptic


def test_equal_axes_give_fixed_length():
    spec = WalkSpec(3, 1.5, 1.5)
    x = np.array([0.3, -2.0, 1.0])
    z = unit([1.0, 2.0, -0.5])
    inc = elliptic_step(x, spec, z) - x
    assert np.allclose(inc, 1.5 * math.sqrt(3) * z, atol=1e-14)
    assert abs(np.linalg.norm(inc) - 1.5 * math.sqrt(3)) <= 1e-14


def test_radial_driver_gives_radial_axis():
    spec = WalkSpec(4, 0.8, 2.5)
    x = np.array([7.0, 0, 0, 0])
    inc = elliptic_step(x, spec, np.array([1.0, 0, 0, 0])) - x
    assert np.allclose(inc, [0.8 * 2.0, 0, 0, 0], atol=1e-14)


def test_hand_computed_planar_step():
    # x_hat = (0.6, 0.8), <x_hat, z> = 0.6
    spec = WalkSpec(2, 1.0, 2.0)
    x = np.array([3.0, 4.0])
    inc = elliptic_step(x, spec, np.array([1.0, 0.0])) - x
    assert np.allclose(inc, S2 * np.array([1.64, -0.48]), atol=1e-14)


def test_elliptic_rejects_mismatch():
    spec = WalkSpec(2, 1, 2)
    with pytest.raises(ValueError):
        elliptic_step(np.zeros(3), spec, unit([1, 0, 0]))
    with pytest.raises(ValueError):
        elliptic_step(np.zeros(2), spec, np.array([1.0, 1.0]))
    with pytest.raises(ValueError):
        elliptic_step(np.zeros(2), WalkSpec(2, kernel=Kernel.PARAMETRIZED_2D), unit([1, 0]))


@given(
    st.integers(1, 7), st.floats(0.1, 5), st.floats(0.1, 5),
    st.integers(0, 2**32), st.floats(0, 1e4),
)
@settings(max_examples=200, deadline=None)
def test_increment_on_ellipsoid_and_bounded(dim, a, b, seed, scale):
    spec = WalkSpec(dim, a, b)
    g = np.random.default_rng(seed)
    x = scale * g.standard_normal(dim)
    z = unit(g.standard_normal(dim))
    inc = elliptic_step(x, spec, z) - x
    assert np.linalg.norm(inc) <= math.sqrt(dim) * max(a, b) + 1e-9
    q = frame_to(unit_hat(x))
    diag = np.full(dim, b)
    diag[0] = a
    w = (q.T @ inc) / (math.sqrt(dim) * diag)
    assert abs(np.linalg.norm(w) - 1.0) <= 1e-10


# ---------------------------------------------------------------- tilted


def test_tilted_zero_angle_is_elliptic_in_rotated_driver():
    # Q D z = H (Q z): same point, driver mapped through the frame
    e, t = WalkSpec(3, 2.0, 0.7), WalkSpec(3, 2.0, 0.7, 0.0, Kernel.TILTED)
    x = np.array([1.0, -3.0, 2.0])
    z = unit([0.2, 0.9, -0.4])
    q = frame_to(unit_hat(x))
    assert np.allclose(tilted_step(x, t, z), elliptic_step(x, e, q @ z), atol=1e-12)


@given(st.integers(2, 6), st.floats(0.1, 4), st.floats(0.1, 4), st.floats(0, math.pi, exclude_max=True),
       st.integers(0, 2**32))
@settings(max_examples=150, deadline=None)
def test_tilted_radial_component(dim, a, b, alpha, seed):
    spec = WalkSpec(dim, a, b, alpha, Kernel.TILTED)
    g = np.random.default_rng(seed)
    x = 10 * g.standard_normal(dim)
    z = unit(g.standard_normal(dim))
    inc = tilted_step(x, spec, z) - x
    want = math.sqrt(dim) * (a * z[0] * math.cos(alpha) + b * z[1] * math.sin(alpha))
    assert abs(inc @ unit_hat(x) - want) <= 1e-10


def test_tilted_radial_variance(rng):
    a, b, alpha = 2.0, 1.0, 0.9
    spec = WalkSpec(3, a, b, alpha, Kernel.TILTED)
    x = np.array([3.0, -1.0, 2.0])
    u = unit_hat(x)
    n = 10**6
    s = increments_at(spec, x, draw_driving(spec, n, rng)) @ u
    s2 = s * s
    want = a * a * math.cos(alpha) ** 2 + b * b * math.sin(alpha) ** 2
    assert abs(s2.mean() - want) <= 5 * s2.std(ddof=1) / math.sqrt(n)


# ---------------------------------------------------------------- planar parametrization


def test_parametrized_quarter_turn():
    spec = WalkSpec(2, 1.0, 3.0, kernel=Kernel.PARAMETRIZED_2D)
    assert np.allclose(parametrized_2d_step(np.array([5.0, 0.0]), spec, np.pi / 2), [5.0, 3 * S2], atol=1e-14)


def test_parametrized_origin_uses_fixed_axes():
    spec = WalkSpec(2, 1.0, 3.0, kernel=Kernel.PARAMETRIZED_2D)
    assert np.allclose(parametrized_2d_step(np.zeros(2), spec, 0.4), [S2 * math.cos(0.4), 3 * S2 * math.sin(0.4)])


@given(st.floats(-50, 50), st.floats(-50, 50), st.floats(-math.pi, math.pi, exclude_min=True))
@settings(max_examples=100, deadline=None)
def test_parametrized_matches_elliptic_driver(x1, x2, phi):
    a, b = 0.6, 1.7
    x = np.array([x1, x2])
    u = unit_hat(x)
    perp = np.array([-u[1], u[0]])
    z = math.cos(phi) * u + math.sin(phi) * perp
    z /= np.linalg.norm(z)
    p = parametrized_2d_step(x, WalkSpec(2, a, b, kernel=Kernel.PARAMETRIZED_2D), phi)
    e = elliptic_step(x, WalkSpec(2, a, b), z)
    assert np.allclose(p, e, atol=1e-10)


# ---------------------------------------------------------------- radial recursion


def test_radial_step_at_origin():
    spec = WalkSpec(3, 2.0, 0.5)
    t = 0.3
    assert radial_step(0.0, spec, t) == pytest.approx(math.sqrt((4 - 0.25) * 3 * t * t + 0.25 * 3), abs=1e-15)


def test_radial_step_equal_axes():
    spec = WalkSpec(2, 1.2, 1.2)
    r, t = 4.0, -0.7
    want = math.sqrt(r * r + 2 * 1.2 * S2 * r * t + 1.44 * 2)
    assert radial_step(r, spec, t) == pytest.approx(want, abs=1e-14)


def test_radial_step_rejects_bad_t():
    with pytest.raises(ValueError):
        radial_step(1.0, WalkSpec(2), 1.5)


def test_radial_coupled_with_full_space():
    spec = WalkSpec(3, 1.0, 2.0)
    rng = RngStream(5)
    x = np.zeros(3)
    r = 0.0
    for _ in range(2000):
        z = sample_unit_sphere(3, rng)
        t = float(unit_hat(x) @ z)
        x = elliptic_step(x, spec, z)
        r = radial_step(r, spec, min(1.0, max(-1.0, t)))
        assert abs(np.linalg.norm(x) - r) <= 1e-9 * max(1.0, r)


@pytest.mark.parametrize(
    "spec",
    [WalkSpec(2, 0.5, 1.5, 1.1, Kernel.TILTED), WalkSpec(2, 2.0, 1.0, kernel=Kernel.PARAMETRIZED_2D)],
)
def test_compiled_radial_path_couples_pathwise(spec):
    # tilted and planar steppers feed the radial recursion the same driver coordinates
    n = 5000
    path = simulate(spec, np.array([3.0, 1.0]), n, RngStream(9))
    radii = np.concatenate(list(radial_path(spec, math.hypot(3.0, 1.0), n, RngStream(9))))
    assert np.abs(path.radii[1:] - radii).max() <= 1e-6


# ---------------------------------------------------------------- simulate


def test_first_step_uses_first_driver():
    spec = WalkSpec(3, 1.0, 2.0)
    tr = simulate(spec, None, 1, RngStream(42))
    z = sample_unit_sphere(3, RngStream(42))
    assert np.array_equal(tr.positions[0], np.zeros(3))
    assert np.allclose(tr.positions[1], elliptic_step(np.zeros(3), spec, z), atol=1e-15)


@pytest.mark.parametrize(
    "spec",
    [
        WalkSpec(3, 1.0, 2.0),
        WalkSpec(3, 1.0, 2.0, 0.6, Kernel.TILTED),
        WalkSpec(2, 1.0, 2.0, kernel=Kernel.PARAMETRIZED_2D),
        WalkSpec(1, kernel=Kernel.CUSTOM_1D),
    ],
)
def test_compiled_engine_matches_python_steps(spec):
    # 3000 steps spans several chunk boundaries
    n = 3000
    tr = simulate(spec, None, n, RngStream(3))
    drv = draw_driving(spec, n, RngStream(3))
    x = np.zeros(spec.dim)
    for i in range(n):
        if spec.kernel is Kernel.ELLIPTIC:
            x = elliptic_step(x, spec, drv[i] / np.linalg.norm(drv[i]))
        elif spec.kernel is Kernel.TILTED:
            x = tilted_step(x, spec, drv[i] / np.linalg.norm(drv[i]))
        elif spec.kernel is Kernel.PARAMETRIZED_2D:
            x = parametrized_2d_step(x, spec, drv[i])
        else:
            law = spec.custom.law_at(x[0])
            k = int(np.searchsorted(np.cumsum(law.probs)[:-1], drv[i], side="right"))
            x = x + law.values[k]
        assert np.allclose(tr.positions[i + 1], x, rtol=1e-11, atol=1e-9), i


def test_same_seed_same_trajectory():
    spec = WalkSpec(2, 1.0, 2.0)
    t1 = simulate(spec, None, 5000, RngStream(7, 3))
    t2 = simulate(spec, None, 5000, RngStream(7, 3))
    assert t1.positions.tobytes() == t2.positions.tobytes()
    t3 = simulate(spec, None, 5000, RngStream(7, 4))
    assert not np.array_equal(t1.positions, t3.positions)


def test_trajectory_invariants():
    spec = WalkSpec(4, 0.5, 1.5)
    start = np.array([1.0, 2.0, -1.0, 0.5])
    tr = simulate(spec, start, 2000, RngStream(1))
    assert np.array_equal(tr.positions[0], start)
    assert tr.step_count == 2000 and tr.positions.shape == (2001, 4)
    assert np.linalg.norm(tr.increments, axis=1).max() <= increment_bound(spec) + 1e-9
    assert not tr.positions.flags.writeable


def test_thinning_keeps_every_kth_position():
    spec = WalkSpec(2, 1.0, 2.0)
    full = simulate(spec, None, 1000, RngStream(2))
    thin = simulate(spec, None, 1000, RngStream(2), thin=10)
    assert thin.positions.shape[0] == 101
    assert np.array_equal(thin.positions, full.positions[::10])
    assert np.array_equal(thin.steps, np.arange(0, 1001, 10))


def test_chunked_stream_matches_simulate():
    spec = WalkSpec(3, 2.0, 1.0)
    tr = simulate(spec, None, 70_000, RngStream(8))
    blocks = [b for _, b in iter_chunks(spec, np.zeros(3), 70_000, RngStream(8), chunk=4096)]
    assert np.array_equal(np.concatenate(blocks), tr.positions[1:])


def test_overflow_is_reported():
    spec = WalkSpec(2, 1e308, 1e308)
    with pytest.raises(WalkOverflowError) as info:
        simulate(spec, None, 2000, RngStream(1))
    assert info.value.step >= 1


def test_diffusive_scaling(rng):
    # E|X_n|^2 = n V by orthogonality of martingale increments; V = 2 for a = b = 1, d = 2
    spec = WalkSpec(2, 1.0, 1.0)
    n, walks = 10**5, 500
    vals = []
    for w in range(walks):
        x = np.zeros(2)
        for _, block in iter_chunks(spec, x, n, RngStream(rng.seed, w)):
            pass
        vals.append(np.sum(block[-1] ** 2) / n)
    assert abs(np.mean(vals) - 2.0) <= 0.2


# ---------------------------------------------------------------- custom 1-D


def test_default_kernel_support():
    for x, support in [(5.0, {4.0, 6.0}), (-5.0, {-7.0, -3.0})]:
        rng = RngStream(3)
        outs = [custom_1d_step(x, DEFAULT_CUSTOM_1D, rng) for _ in range(4000)]
        assert set(outs) == support
        assert abs(np.mean([o == min(support) for o in outs]) - 0.5) <= 3 * math.sqrt(0.25 / 4000)


@pytest.mark.parametrize("x", [-3.0, -0.5, 0.0, 2.0, 100.0])
def test_custom_zero_mean(x, rng):
    spec = WalkSpec(1, kernel=Kernel.CUSTOM_1D)
    inc = increments_at(spec, np.array([x]), draw_driving(spec, 10**6, rng))[:, 0]
    assert abs(inc.mean()) <= 5 * inc.std(ddof=1) / 1000
    assert np.mean(inc**2) >= 1.0 - 5 * 1e-3


def test_custom_params_validation():
    with pytest.raises(ValueError):
        Custom1DParams((0.0,), (JumpLaw((1.0, -2.0), (0.5, 0.5)), JumpLaw.symmetric(1.0)))
    with pytest.raises(ValueError):
        Custom1DParams((0.0,), (JumpLaw.symmetric(0.5), JumpLaw.symmetric(1.0)))
    with pytest.raises(ValueError):
        Custom1DParams((0.0,), (JumpLaw.symmetric(1.0),))
    with pytest.raises(ValueError):
        JumpLaw((1.0, -1.0), (0.5, 0.4))
    three = JumpLaw((-2.0, 0.0, 1.0), (0.25, 0.25, 0.5))
    params = Custom1DParams((-10.0, 10.0), (JumpLaw.symmetric(3.0), three, JumpLaw.symmetric(1.0)))
    assert params.law_at(0.0) is three and params.law_at(10.0).values == (-1.0, 1.0)


def test_advance_accepts_preallocated_output():
    spec = WalkSpec(2, 1, 2)
    x = np.zeros(2)
    out = np.empty((10, 2))
    res = advance(spec, x, draw_driving(spec, 10, RngStream(0)), out)
    assert res is out and np.array_equal(out[-1], x)

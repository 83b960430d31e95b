"""Statistical experiments on simulated walks.

Finite simulations cannot certify recurrence; each experiment here produces
estimates meant to be compared across models (recurrent against transient) or
followed as a trend in time.
"""
import enum
import math
from dataclasses import dataclass, field
from fractions import Fraction

import mpmath
import numpy as np

from .kernels import DEFAULT_CUSTOM_1D, Custom1DParams, Kernel, Trajectory, WalkSpec, iter_chunks, radial_path
from .parallel import map_walks
from .rng import RngStream
from .stats import Estimate, bootstrap_mean, wilson

__all__ = [
    "Experiment",
    "DiagnosticReport",
    "radius_blocks",
    "return_probability_experiment",
    "occupation_fraction",
    "occupation_experiment",
    "non_confinement_check",
    "lyapunov_drift_1d",
    "lyapunov_drift_sign_exact",
    "lyapunov_experiment",
]

DEFAULT_STEP_CAP = 1_000_000


class Experiment(str, enum.Enum):
    RETURN_PROBABILITY = "ReturnProbability"
    OCCUPATION_FRACTION = "OccupationFraction"
    NON_CONFINEMENT = "NonConfinement"
    LYAPUNOV_DRIFT = "LyapunovDrift"


@dataclass
class DiagnosticReport:
    experiment: Experiment
    statistics: dict = field(default_factory=dict)
    config: dict = field(default_factory=dict)
    series: dict = field(default_factory=dict)

    def to_dict(self):
        def conv(v):
            if isinstance(v, Estimate):
                return v.to_dict()
            if isinstance(v, np.ndarray):
                return v.tolist()
            if isinstance(v, (np.floating, np.integer)):
                return v.item()
            if isinstance(v, dict):
                return {k: conv(x) for k, x in v.items()}
            if isinstance(v, (list, tuple)):
                return [conv(x) for x in v]
            return v

        return {
            "experiment": self.experiment.value,
            "statistics": conv(self.statistics),
            "series": conv(self.series),
            "config": conv(self.config),
        }


def _stream(rng, w):
    return RngStream(rng.seed, w)


def radius_blocks(spec, start, n_steps, rng):
    """Blocks of ``|X_1|, |X_2|, ...`` using the cheapest exact route for the kernel."""
    start = np.asarray(start, dtype=float)
    if spec.is_radial_markov:
        yield from radial_path(spec, float(np.linalg.norm(start)), n_steps, rng)
    else:
        for _, block in iter_chunks(spec, start, n_steps, rng):
            yield np.linalg.norm(block, axis=1)


def _start_at_radius(spec, radius):
    x = np.zeros(spec.dim)
    x[0] = radius
    return x


def _first_index(mask):
    idx = np.flatnonzero(mask)
    return int(idx[0]) if idx.size else -1


def _race_walk(spec, r, R, start_radius, step_cap, rng, track_tail):
    """Returns (outcome, tau_r): outcome 1 = B_r reached before leaving B_R,
    0 = left B_R first, -1 = neither within the cap.  tau_r = -1 if not reached."""
    if start_radius <= r:
        return 1, 0
    if start_radius > R:
        outcome = 0
        if not track_tail:
            return 0, -1
    else:
        outcome = None
    step = 0
    for block in radius_blocks(spec, _start_at_radius(spec, start_radius), step_cap, rng):
        if outcome is None:
            hit = _first_index(block <= r)
            out = _first_index(block > R)
            if hit >= 0 and (out < 0 or hit < out):
                return 1, step + hit + 1
            if out >= 0:
                outcome = 0
                if not track_tail:
                    return 0, -1
                hit = _first_index(block[out:] <= r)
                if hit >= 0:
                    return 0, step + out + hit + 1
        else:
            hit = _first_index(block <= r)
            if hit >= 0:
                return outcome, step + hit + 1
        step += block.size
    return (-1 if outcome is None else outcome), -1


def _tail_grid(step_cap):
    top = int(math.log10(step_cap))
    grid = sorted({int(v) for v in np.logspace(0, top, 4 * top + 1)} | {step_cap})
    return [m for m in grid if m <= step_cap]


def return_probability_experiment(
    spec, r, R, start_radius, n_walks, step_cap=DEFAULT_STEP_CAP, rng=None, track_tail=True, threads=None,
):
    """Probability of reaching ``B_r`` before leaving ``B_R``, and the tail of ``tau_r``.

    Walks start at distance ``start_radius`` from the origin.  Walk ``w`` uses
    stream ``(rng.seed, w)``.  Walks deciding neither event within ``step_cap``
    steps are counted as censored and excluded from the probability denominator.
    With ``track_tail`` a walk that leaves ``B_R`` keeps running until it hits
    ``B_r`` or reaches the cap, so ``P[tau_r >= m]`` is estimated up to the cap.
    """
    if not (0 < r < R):
        raise ValueError("need 0 < r < R")
    if start_radius < 0 or n_walks < 1 or step_cap < 1:
        raise ValueError("start_radius >= 0, n_walks >= 1 and step_cap >= 1 are required")
    if rng is None:
        raise ValueError("an RngStream is required")

    def one(w):
        return _race_walk(spec, r, R, start_radius, step_cap, _stream(rng, w), track_tail)

    res = map_walks(one, n_walks, threads)
    outcome = np.array([o for o, _ in res])
    tau = np.array([t for _, t in res], dtype=np.int64)
    hits = int((outcome == 1).sum())
    censored = int((outcome == -1).sum())
    decided = n_walks - censored
    stats_ = {
        "p_hit_before_exit": wilson(hits, decided),
        "p_hit_within_cap": wilson(int((tau >= 0).sum()), n_walks),
        "hits": hits,
        "exits": int((outcome == 0).sum()),
        "censored": censored,
    }
    series = {}
    if track_tail:
        grid = _tail_grid(step_cap)
        surv = []
        for m in grid:
            k = int(((tau < 0) | (tau >= m)).sum())
            surv.append(wilson(k, n_walks))
        series = {"m": grid, "tail": surv}
        stats_["tail_exponent"] = _fit_exponent(grid, [s.value for s in surv])
    cfg = {"spec": spec.to_dict(), "r": r, "R": R, "start_radius": start_radius, "n_walks": n_walks,
           "step_cap": step_cap, "seed": rng.seed, "track_tail": track_tail}
    return DiagnosticReport(Experiment.RETURN_PROBABILITY, stats_, cfg, series)


def _fit_exponent(m, s):
    # descriptive log-log slope of the upper half of the tail
    m = np.asarray(m, dtype=float)
    s = np.asarray(s, dtype=float)
    keep = (m >= math.sqrt(m[-1])) & (s > 0)
    if keep.sum() < 2:
        return float("nan")
    slope = np.polyfit(np.log(m[keep]), np.log(s[keep]), 1)[0]
    return float(-slope)


def occupation_fraction(traj, radius, checkpoints):
    """``[(n, #{k < n : |X_k| <= radius} / n) for n in checkpoints]``."""
    if not isinstance(traj, Trajectory):
        raise TypeError("expected a Trajectory")
    if traj.thin != 1:
        raise ValueError("occupation needs an unthinned trajectory")
    inside = np.concatenate([[0], np.cumsum(traj.radii <= radius)])
    out = []
    for n in checkpoints:
        n = int(n)
        if not (1 <= n <= traj.positions.shape[0]):
            raise ValueError(f"checkpoint {n} outside 1..{traj.positions.shape[0]}")
        out.append((n, inside[n] / n))
    return out


def _occupation_walk(spec, radius, checkpoints, start, rng):
    n_max = checkpoints[-1]
    counts = np.empty(len(checkpoints), dtype=np.int64)
    inside = int(np.linalg.norm(start) <= radius)  # k = 0
    done = 1  # number of indices k already counted
    ci = 0
    for block in radius_blocks(spec, start, n_max - 1, rng) if n_max > 1 else ():
        cum = np.cumsum(block <= radius)
        while ci < len(checkpoints) and checkpoints[ci] <= done + block.size:
            j = checkpoints[ci] - done
            counts[ci] = inside + (cum[j - 1] if j > 0 else 0)
            ci += 1
        inside += int(cum[-1])
        done += block.size
    while ci < len(checkpoints):
        counts[ci] = inside
        ci += 1
    return counts


def occupation_experiment(spec, radius, checkpoints, n_walks, rng, start=None, threads=None):
    """Mean fraction of time spent in ``B_radius`` up to each checkpoint, over walks."""
    checkpoints = sorted(int(c) for c in checkpoints)
    if checkpoints[0] < 1:
        raise ValueError("checkpoints must be positive")
    start = np.zeros(spec.dim) if start is None else np.asarray(start, dtype=float)

    def one(w):
        return _occupation_walk(spec, radius, checkpoints, start, _stream(rng, w))

    counts = np.array(map_walks(one, n_walks, threads))
    frac = counts / np.asarray(checkpoints, dtype=float)
    boot_rng = RngStream(rng.seed, n_walks)
    means = [bootstrap_mean(frac[:, j], boot_rng) for j in range(len(checkpoints))]
    monotone = np.all(np.diff(frac, axis=1) <= 0, axis=1)
    stats_ = {
        "mean_fraction": dict(zip(map(str, checkpoints), means)),
        "fraction_monotone_runs": float(monotone.mean()),
    }
    cfg = {"spec": spec.to_dict(), "radius": radius, "checkpoints": checkpoints, "n_walks": n_walks,
           "seed": rng.seed, "start": start.tolist()}
    return DiagnosticReport(Experiment.OCCUPATION_FRACTION, stats_, cfg, {"n": checkpoints, "per_walk": frac})


def _first_passage_walk(spec, x, n, start, rng):
    if x <= 0:
        return 0
    for first, block in iter_chunks(spec, start, n, rng):
        k = _first_index(np.linalg.norm(block - start, axis=1) >= x)
        if k >= 0:
            return first + k
    return -1


def non_confinement_check(spec, x_threshold, n, n_walks, rng, n_grid=None, start=None, threads=None):
    """Fraction of walks whose displacement ``max_{l <= n} |X_l - X_0|`` reaches ``x``.

    Reported on a grid of horizons, together with the descriptive constant
    ``(1 - p(n)) n / (1 + x)^2`` whose boundedness in ``n`` is the expected shape.
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    grid = sorted({int(v) for v in (n_grid or _horizon_grid(n))})
    if grid[-1] > n:
        raise ValueError("grid horizons cannot exceed n")
    start = np.zeros(spec.dim) if start is None else np.asarray(start, dtype=float)

    def one(w):
        return _first_passage_walk(spec, x_threshold, n, start, _stream(rng, w))

    t = np.array(map_walks(one, n_walks, threads))
    reached = t >= 0
    p = [wilson(int((reached & (t <= m)).sum()), n_walks) for m in grid]
    c = [(1.0 - e.value) * m / (1.0 + x_threshold) ** 2 for e, m in zip(p, grid)]
    stats_ = {"p_hat": dict(zip(map(str, grid), p)), "c_hat": max(c), "c_by_n": dict(zip(map(str, grid), c))}
    cfg = {"spec": spec.to_dict(), "x": x_threshold, "n": n, "n_walks": n_walks, "seed": rng.seed,
           "start": start.tolist()}
    return DiagnosticReport(Experiment.NON_CONFINEMENT, stats_, cfg, {"n": grid, "first_passage": t})


def _horizon_grid(n):
    grid = [10**k for k in range(1, int(math.log10(n)) + 1) if 10**k <= n]
    return grid + [n] if not grid or grid[-1] != n else grid


def _kernel_params(kernel):
    if isinstance(kernel, WalkSpec):
        if kernel.kernel is not Kernel.CUSTOM_1D:
            raise ValueError("the Lyapunov check applies to 1-D custom kernels")
        return kernel.custom
    if kernel is None:
        return DEFAULT_CUSTOM_1D
    if not isinstance(kernel, Custom1DParams):
        raise TypeError("expected Custom1DParams")
    return kernel


def lyapunov_drift_1d(kernel, x):
    """Exact one-step drift of ``f(x) = log(1 + |x|)`` under a finite jump law."""
    law = _kernel_params(kernel).law_at(x)
    base = 1.0 + abs(x)
    return math.fsum(p * math.log1p((abs(x + j) - abs(x)) / base) for j, p in zip(law.values, law.probs))


def _rational(v, max_den=10**6):
    f = Fraction(v).limit_denominator(max_den)
    return f if float(f) == v else Fraction(v)


def lyapunov_drift_sign_exact(kernel, x):
    """Sign (-1, 0, 1) of the drift of ``log(1 + |x|)``, decided without rounding.

    With rational probabilities ``k_i / N`` the sign equals that of
    ``prod((1 + |x + j_i|) / (1 + |x|))^k_i - 1``, evaluated in exact rationals.  If
    the common denominator is too large for that, a 100-digit evaluation is used.
    """
    law = _kernel_params(kernel).law_at(x)
    xq = Fraction(x)
    base = 1 + abs(xq)
    probs = [_rational(p) for p in law.probs]
    den = math.lcm(*(p.denominator for p in probs))
    if den <= 1000:
        prod = Fraction(1)
        for j, p in zip(law.values, probs):
            prod *= ((1 + abs(xq + Fraction(j))) / base) ** int(p * den)
        return (prod > 1) - (prod < 1)
    with mpmath.workdps(100):
        val = mpmath.fsum(
            mpmath.mpf(p.numerator) / p.denominator * mpmath.log((1 + abs(xq + Fraction(j))) / base)
            for j, p in zip(law.values, probs)
        )
    return int(mpmath.sign(val))


def lyapunov_experiment(kernel, xs):
    """Drift on a grid plus the largest ``|x|`` whose drift is positive."""
    params = _kernel_params(kernel)
    xs = [float(v) for v in xs]
    drift = [lyapunov_drift_1d(params, v) for v in xs]
    signs = [lyapunov_drift_sign_exact(params, v) for v in xs]
    positive = [abs(v) for v, s in zip(xs, signs) if s > 0]
    stats_ = {
        "largest_abs_x_positive_drift": max(positive) if positive else None,
        "all_nonpositive": all(s <= 0 for s in signs),
    }
    return DiagnosticReport(Experiment.LYAPUNOV_DRIFT, stats_, {"n_points": len(xs)},
                            {"x": xs, "drift": drift, "sign": signs})

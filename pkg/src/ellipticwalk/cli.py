"""Command-line interface.

Exit codes: 0 success, 1 usage or runtime error, 2 indeterminate verdict.
"""
import argparse
import json
import math
import os
import shutil
import sys
import tempfile

import numpy as np

from . import __version__
from .classify import Kind, classify_spec, classify_uv
from .diagnostics import (
    lyapunov_experiment,
    non_confinement_check,
    occupation_experiment,
    return_probability_experiment,
)
from .estimators import estimate_increment_moments, estimate_radial_moments
from .kernels import Kernel, WalkOverflowError, WalkSpec, iter_chunks
from .moments import EpsDecay, UVConstants, exact_radial_moments_quadrature, predicted_radial_moments, sigma_sq
from .parallel import THREADS_ENV, map_walks
from .records import (
    fmt,
    manifest_path_for,
    read_manifest,
    read_trajectories,
    sha256_file,
    trajectory_header,
    trajectory_rows_csv,
    trajectory_rows_jsonl,
    utc_now,
    write_manifest,
)
from .rng import RngStream
from .sphere import unit_hat

EXIT_OK, EXIT_ERROR, EXIT_INDETERMINATE = 0, 1, 2


class UsageError(Exception):
    pass


def _floats(text):
    try:
        return [float(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from None


def _ints(text):
    return [int(float(v)) for v in _floats(text)]


def _add_spec_args(p, required=True):
    p.add_argument("--dim", type=int, required=required)
    p.add_argument("--a", type=float, default=1.0 if not required else None, required=required)
    p.add_argument("--b", type=float, default=1.0 if not required else None, required=required)
    p.add_argument("--alpha", type=float, default=0.0)
    p.add_argument("--kernel", choices=[k.value for k in Kernel], default=None,
                   help="defaults to elliptic, or tilted when --alpha is non-zero")


def _spec_from(args, a=None, b=None):
    if args.dim is None:
        raise UsageError("--dim is required")
    kernel = args.kernel
    if kernel is None:
        kernel = Kernel.TILTED if args.alpha else Kernel.ELLIPTIC
    a = args.a if a is None else a
    b = args.b if b is None else b
    try:
        return WalkSpec(args.dim, 1.0 if a is None else a, 1.0 if b is None else b, args.alpha, Kernel(kernel))
    except ValueError as exc:
        raise UsageError(str(exc)) from None


def _emit(obj, out=None):
    text = json.dumps(obj, indent=None, allow_nan=True) + "\n"
    if out:
        with open(out, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


# ---------------------------------------------------------------- classify


def cmd_classify(args, argv):
    spec_mode = args.dim is not None or args.a is not None or args.b is not None
    raw_mode = args.u is not None or args.v is not None
    if spec_mode == raw_mode:
        raise UsageError("give either --dim/--a/--b [--alpha] or --u/--v [--eps-decay]")
    if raw_mode:
        if args.u is None or args.v is None:
            raise UsageError("raw mode needs both --u and --v")
        if args.alpha:
            raise UsageError("--alpha is not valid in raw mode")
        try:
            uv = UVConstants(args.u, args.v, EpsDecay(args.eps_decay), args.delta0)
        except ValueError as exc:
            raise UsageError(str(exc)) from None
        verdict = classify_uv(uv)
    else:
        if args.dim is None or args.a is None or args.b is None:
            raise UsageError("spec mode needs --dim, --a and --b")
        if args.eps_decay != EpsDecay.UNKNOWN.value or args.delta0 is not None:
            raise UsageError("--eps-decay/--delta0 are only valid with --u/--v")
        try:
            kernel = Kernel.TILTED if args.alpha else Kernel.ELLIPTIC
            spec = WalkSpec(args.dim, args.a, args.b, args.alpha, kernel)
        except ValueError as exc:
            raise UsageError(str(exc)) from None
        verdict = classify_spec(spec)
    d = verdict.to_dict()
    for k in ("U", "V", "margin"):
        if isinstance(d[k], float) and math.isnan(d[k]):
            d[k] = None
    _emit(d)
    return EXIT_INDETERMINATE if verdict.kind is Kind.INDETERMINATE else EXIT_OK


# ---------------------------------------------------------------- simulate


def _write_walk(spec, start, steps, thin, seed, w, fmt_name, path):
    rows = trajectory_rows_csv if fmt_name == "csv" else trajectory_rows_jsonl
    error = None
    with open(path, "w", newline="") as fh:
        fh.write(rows(w, [0], start[None, :]))
        try:
            for first, block in iter_chunks(spec, start, steps, RngStream(seed, w)):
                idx = np.arange(first, first + block.shape[0])
                keep = idx % thin == 0
                fh.write(rows(w, idx[keep], block[keep]))
        except WalkOverflowError as exc:
            error = {"walk_id": w, "step": exc.step, "error": str(exc)}
    return error


def cmd_simulate(args, argv):
    spec = _spec_from(args)
    if args.steps < 1 or args.walks < 1 or args.thin < 1:
        raise UsageError("--steps, --walks and --thin must be positive")
    start = np.zeros(spec.dim) if args.start is None else np.asarray(args.start, dtype=float)
    if start.shape != (spec.dim,):
        raise UsageError(f"--start needs {spec.dim} coordinates")
    out = args.out
    out_dir = os.path.dirname(os.path.abspath(out))
    if not os.path.isdir(out_dir) or not os.access(out_dir, os.W_OK):
        raise UsageError(f"cannot write to {out!r}")
    started = utc_now()
    with tempfile.TemporaryDirectory(dir=out_dir, prefix=".ellipticwalk-") as tmp:
        parts = [os.path.join(tmp, f"walk{w}.part") for w in range(args.walks)]

        def one(w):
            return _write_walk(spec, start, args.steps, args.thin, args.seed, w, args.format, parts[w])

        errors = [e for e in map_walks(one, args.walks, args.threads) if e is not None]
        with open(out, "w", newline="") as fh:
            if args.format == "csv":
                fh.write(trajectory_header(spec.dim))
            for part in parts:
                with open(part) as src:
                    shutil.copyfileobj(src, fh)
    write_manifest(
        manifest_path_for(out), tool_version=__version__, spec=spec.to_dict(), seed=args.seed,
        command=argv, started=started, outputs=[out],
        extra={"start": start.tolist(), "errors": errors},
    )
    for e in errors:
        print(f"walk {e['walk_id']}: {e['error']}", file=sys.stderr)
    return EXIT_ERROR if errors else EXIT_OK


# ---------------------------------------------------------------- estimate


def _table_out(rows, columns, args):
    if args.format == "csv":
        text = ",".join(columns) + "\n" + "".join(
            ",".join(fmt(r[c]) if isinstance(r[c], float) else str(r[c]) for c in columns) + "\n" for r in rows
        )
        if args.out:
            with open(args.out, "w") as fh:
                fh.write(text)
        else:
            sys.stdout.write(text)
    else:
        _emit({"mode": args.mode, "columns": columns, "rows": rows}, args.out)


def cmd_estimate(args, argv):
    spec = _spec_from(args)
    started = utc_now()
    rng = RngStream(args.seed)
    has_quad = spec.kernel in (Kernel.ELLIPTIC, Kernel.PARAMETRIZED_2D) and spec.dim >= 2
    if args.mode == "increment":
        x = np.zeros(spec.dim) if args.x is None else np.asarray(args.x, dtype=float)
        if x.shape != (spec.dim,):
            raise UsageError(f"--x needs {spec.dim} coordinates")
        rep = estimate_increment_moments(spec, x, args.samples, rng)
        doc = {"mode": "increment", "spec": spec.to_dict(), "seed": args.seed, "report": rep.to_dict()}
        meta = {"direction_used": unit_hat(x).tolist()}
        if rep.origin_convention:
            meta["note"] = "x = 0: the direction of the origin is taken to be e1"
        doc["metadata"] = meta
        if spec.kernel is not Kernel.CUSTOM_1D:
            doc["oracle"] = {"cov": sigma_sq(unit_hat(x), spec).tolist()}
            if has_quad and np.linalg.norm(x) > 0:
                m1, m2 = exact_radial_moments_quadrature(float(np.linalg.norm(x)), spec)
                doc["oracle"].update({"mu1_quad": m1, "mu2_quad": m2})
        if args.format == "csv":
            raise UsageError("increment mode emits JSON only")
        _emit(doc, args.out)
    elif args.mode == "radial":
        if not args.radii:
            raise UsageError("--radii is required in radial mode")
        rows = []
        for row in estimate_radial_moments(spec, sorted(args.radii), args.samples, rng):
            rec = row.to_dict()
            pred = predicted_radial_moments(row.r, spec)
            rec.update({"mu1_pred": pred.mu1, "mu2_pred": pred.mu2})
            if has_quad:
                m1, m2 = exact_radial_moments_quadrature(row.r, spec)
                rec.update({"mu1_quad": m1, "mu2_quad": m2})
            rows.append(rec)
        _table_out(rows, list(rows[0].keys()), args)
    else:
        if not args.radii:
            raise UsageError("--radii is required in quadrature mode")
        if not has_quad:
            raise UsageError("quadrature mode supports the elliptic law with dim >= 2")
        rows = []
        for r in sorted(args.radii):
            m1, m2 = exact_radial_moments_quadrature(r, spec, args.quad_points)
            pred = predicted_radial_moments(r, spec)
            rows.append({"r": r, "mu1_quad": m1, "mu2_quad": m2, "mu1_pred": pred.mu1, "mu2_pred": pred.mu2})
        _table_out(rows, ["r", "mu1_quad", "mu2_quad", "mu1_pred", "mu2_pred"], args)
    if args.out:
        write_manifest(manifest_path_for(args.out), tool_version=__version__, spec=spec.to_dict(),
                       seed=args.seed, command=argv, started=started, outputs=[args.out])
    return EXIT_OK


# ---------------------------------------------------------------- diagnose


def cmd_diagnose(args, argv):
    started = utc_now()
    rng = RngStream(args.seed)
    exp = args.experiment
    if exp == "lyapunov":
        xs = np.linspace(args.x_min, args.x_max, args.points)
        doc = lyapunov_experiment(None, xs).to_dict()
        spec_doc = WalkSpec(1, kernel=Kernel.CUSTOM_1D).to_dict()
    else:
        spec = _spec_from(args)
        spec_doc = spec.to_dict()
        if exp == "return":
            runs = [return_probability_experiment(spec, args.r, args.R, args.start_radius, args.walks,
                                                  args.step_cap, rng, track_tail=args.tail, threads=args.threads)]
            if args.compare_a is not None or args.compare_b is not None:
                other = _spec_from(args, a=args.compare_a or args.a, b=args.compare_b or args.b)
                runs.append(return_probability_experiment(other, args.r, args.R, args.start_radius, args.walks,
                                                          args.step_cap, rng, track_tail=args.tail,
                                                          threads=args.threads))
            doc = {"experiment": "ReturnProbability", "runs": [r.to_dict() for r in runs]}
        elif exp == "occupation":
            rep = occupation_experiment(spec, args.radius, args.checkpoints, args.walks, rng, threads=args.threads)
            doc = rep.to_dict()
            doc["series"].pop("per_walk")
        else:
            rep = non_confinement_check(spec, args.x, args.n, args.walks, rng, n_grid=args.grid, threads=args.threads)
            doc = rep.to_dict()
            doc["series"].pop("first_passage")
    _emit(doc, args.out)
    if args.out:
        write_manifest(manifest_path_for(args.out), tool_version=__version__, spec=spec_doc,
                       seed=args.seed, command=argv, started=started, outputs=[args.out])
    return EXIT_OK


# ---------------------------------------------------------------- plotdata


def cmd_plotdata(args, argv):
    started = utc_now()
    walks = read_trajectories(args.input)
    if not walks:
        raise UsageError("input trajectory is empty")
    w = args.walk_id if args.walk_id is not None else min(walks)
    if w not in walks:
        raise UsageError(f"walk {w} not found in {args.input}")
    steps, pos = walks[w]
    if pos.shape[1] != 2:
        raise UsageError(
            f"plot data needs a planar (d = 2) trajectory, got d = {pos.shape[1]}; "
            "project onto two coordinates first (projection flags are not implemented)"
        )
    order = np.argsort(steps, kind="stable")
    steps, pos = steps[order], pos[order]
    total = steps[-1] if steps[-1] > 0 else 1
    with open(args.out, "w", newline="") as fh:
        fh.write("step,x1,x2,t_norm\n")
        for s, (x1, x2) in zip(steps, pos):
            fh.write(f"{int(s)},{fmt(x1)},{fmt(x2)},{fmt(s / total)}\n")
    write_manifest(manifest_path_for(args.out), tool_version=__version__, spec=None, seed=None,
                   command=argv, started=started, outputs=[args.out],
                   extra={"input": os.path.abspath(args.input), "input_sha256": sha256_file(args.input)})
    return EXIT_OK


# ---------------------------------------------------------------- replay


def _redirect(command, out_dir):
    cmd = list(command)
    for flag in ("--out",):
        if flag in cmd:
            i = cmd.index(flag)
            cmd[i + 1] = os.path.join(out_dir, os.path.basename(cmd[i + 1]))
    return cmd


def cmd_replay(args, argv):
    doc = read_manifest(args.manifest)
    out_dir = args.out_dir or tempfile.mkdtemp(prefix="ellipticwalk-replay-")
    os.makedirs(out_dir, exist_ok=True)
    cmd = _redirect(doc["command"], out_dir)
    if cmd and cmd[0] == "replay":
        raise UsageError("refusing to replay a replay")
    code = main(cmd)
    if code not in (EXIT_OK, EXIT_INDETERMINATE):
        return code
    ok = True
    for rec in doc["outputs"]:
        new = os.path.join(out_dir, os.path.basename(rec["path"]))
        same = os.path.exists(new) and sha256_file(new) == rec["sha256"]
        ok &= same
        print(f"{'match' if same else 'DIFFER'} {new}", file=sys.stderr)
    return EXIT_OK if ok else EXIT_ERROR


# ---------------------------------------------------------------- parser


def build_parser():
    p = argparse.ArgumentParser(prog="ellipticwalk", description=__doc__.splitlines()[0])
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = p.add_subparsers(dest="command", required=True)

    c = sub.add_parser("classify", help="recurrence/transience verdict as JSON")
    c.add_argument("--dim", type=int)
    c.add_argument("--a", type=float)
    c.add_argument("--b", type=float)
    c.add_argument("--alpha", type=float, default=0.0)
    c.add_argument("--u", type=float)
    c.add_argument("--v", type=float)
    c.add_argument("--eps-decay", choices=[e.value for e in EpsDecay], default=EpsDecay.UNKNOWN.value)
    c.add_argument("--delta0", type=float)
    c.set_defaults(func=cmd_classify)

    def threads(q):
        q.add_argument("--threads", type=int, default=None, help=f"worker threads (default ${THREADS_ENV} or 1)")

    s = sub.add_parser("simulate", help="write trajectories and a manifest")
    _add_spec_args(s)
    s.add_argument("--steps", type=int, required=True)
    s.add_argument("--walks", type=int, default=1)
    s.add_argument("--seed", type=int, required=True)
    s.add_argument("--out", required=True)
    s.add_argument("--format", choices=["csv", "jsonl"], default="csv")
    s.add_argument("--thin", type=int, default=1)
    s.add_argument("--start", type=_floats)
    threads(s)
    s.set_defaults(func=cmd_simulate)

    e = sub.add_parser("estimate", help="moment estimates with oracle columns")
    _add_spec_args(e)
    e.add_argument("--mode", choices=["increment", "radial", "quadrature"], required=True)
    e.add_argument("--x", type=_floats, help="state for increment mode")
    e.add_argument("--radii", type=_floats)
    e.add_argument("--samples", type=int, default=10**6)
    e.add_argument("--quad-points", type=int, default=128)
    e.add_argument("--seed", type=int, default=0)
    e.add_argument("--format", choices=["json", "csv"], default="json")
    e.add_argument("--out")
    e.set_defaults(func=cmd_estimate)

    d = sub.add_parser("diagnose", help="Monte Carlo diagnostics as JSON")
    d.add_argument("--experiment", choices=["return", "occupation", "nonconfinement", "lyapunov"], required=True)
    _add_spec_args(d, required=False)
    d.add_argument("--seed", type=int, default=0)
    d.add_argument("--walks", type=int, default=2000)
    d.add_argument("--r", type=float, default=5.0)
    d.add_argument("--R", type=float, default=200.0)
    d.add_argument("--start-radius", type=float, default=20.0)
    d.add_argument("--step-cap", type=int, default=10**6)
    d.add_argument("--tail", action=argparse.BooleanOptionalAction, default=False)
    d.add_argument("--compare-a", type=float)
    d.add_argument("--compare-b", type=float)
    d.add_argument("--radius", type=float, default=10.0)
    d.add_argument("--checkpoints", type=_ints, default=[10**3, 10**4, 10**5, 10**6])
    d.add_argument("--x", type=float, default=10.0, help="displacement threshold")
    d.add_argument("--n", type=int, default=10**5)
    d.add_argument("--grid", type=_ints)
    d.add_argument("--x-min", type=float, default=-100.0)
    d.add_argument("--x-max", type=float, default=100.0)
    d.add_argument("--points", type=int, default=201)
    d.add_argument("--out")
    threads(d)
    d.set_defaults(func=cmd_diagnose)

    pd = sub.add_parser("plotdata", help="time-coloured planar plot data from a trajectory file")
    pd.add_argument("--input", required=True)
    pd.add_argument("--out", required=True)
    pd.add_argument("--walk-id", type=int)
    pd.set_defaults(func=cmd_plotdata)

    r = sub.add_parser("replay", help="re-run a manifest and compare output digests")
    r.add_argument("manifest")
    r.add_argument("--out-dir")
    r.set_defaults(func=cmd_replay)
    return p


def main(argv=None):
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code == 0 else EXIT_ERROR
    try:
        return args.func(args, argv)
    except (UsageError, ValueError, OSError) as exc:
        print(f"ellipticwalk {args.command}: error: {exc}", file=sys.stderr)
        return EXIT_ERROR

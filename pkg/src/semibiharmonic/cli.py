"""Command-line front end: ``semibiharmonic {generate,radial,residual,check,flow}``.

Exit codes: 0 success, 1 validation error, 2 check failure, 3 I/O error.
Every data file is written next to a ``.manifest.json`` describing the run.
"""

import argparse
import os
import sys
from pathlib import Path

import numpy as np

from . import closed_form as cf
from . import io
from .constants import DEFAULT_ACCURACY
from .convergence import DiagnosticReport, study
from .curves import random_closed_curve, residual_scale, semibiharmonic_residual, sup_norm
from .errors import SemibiharmonicError
from .finite_difference import SPECTRAL
from .flat import (
    ODE_RTOL,
    RadialProfile,
    data_precision_scale,
    radial_closed_form_n3,
    radial_closed_form_n4,
    radial_residual,
    solve_radial_ode,
)
from .geometry import Coupling, ModelSpace
from .suites import SUITES, run_suite
from .variational import gradient_flow

EXIT_OK, EXIT_VALIDATION, EXIT_CHECK, EXIT_IO = 0, 1, 2, 3
SEED_ENV = "SEMIBIHARM_SEED"
FAMILY_NAMES = {
    "great-circle": cf.GEODESIC,
    "s3-general": cf.S3_GENERAL,
    "s3-family-a": cf.S3_FAMILY_A,
    "s3-family-b": cf.S3_FAMILY_B,
    "s1-mode": cf.S1_MODE,
    "flat-line": cf.FLAT_LINE,
}
GENERATE_FAMILIES = tuple(FAMILY_NAMES) + ("radial",)
DEFAULT_STRIDES = (4, 2, 1)
CURVE_NODES = 256
# the coarsest default stride then leaves 129 radial nodes, inside the asymptotic range
RADIAL_NODES = 513


class UsageError(SemibiharmonicError):
    """Bad command line."""


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.prog}: {message}")


def default_seed():
    value = os.environ.get(SEED_ENV)
    if value is None:
        return 0
    try:
        return int(value)
    except ValueError:
        raise UsageError(f"{SEED_ENV} must be an integer, got {value!r}") from None


def _accuracy(text):
    if text == SPECTRAL:
        return SPECTRAL
    try:
        return int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"accuracy must be 2, 4 or {SPECTRAL}") from None


def _strides(text):
    try:
        vals = tuple(int(v) for v in text.split(","))
    except ValueError:
        raise argparse.ArgumentTypeError("strides must be comma-separated integers") from None
    if len(vals) < 3 or any(v < 1 for v in vals):
        raise argparse.ArgumentTypeError("need at least 3 positive strides")
    return vals


def _coupling_args(p, required=False, default=None):
    p.add_argument("--delta1", type=float, required=required, default=default)
    p.add_argument("--delta2", type=float, required=required, default=default)


def _radial_args(p):
    p.add_argument("--rmin", type=float, default=0.5)
    p.add_argument("--rmax", type=float, default=5.0)
    p.add_argument("--c1", type=float, default=1.0)
    p.add_argument("--c2", type=float, default=0.0)
    p.add_argument("--f0", type=float, default=None, help="f(rmin) for --integrate")
    p.add_argument("--df0", type=float, default=None, help="f'(rmin) for --integrate")
    mode = p.add_mutually_exclusive_group()
    mode.add_argument("--closed-form", dest="method", action="store_const", const="closed-form")
    mode.add_argument("--integrate", dest="method", action="store_const", const="integrate")
    p.add_argument("--rtol", type=float, default=ODE_RTOL, help="relative tolerance for --integrate")
    p.set_defaults(method="closed-form")


def build_parser():
    parser = _Parser(prog="semibiharmonic",
                     description="Generate and verify semi-biharmonic curves and radial maps.")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    g = sub.add_parser("generate", help="sample a closed-form family to CSV")
    g.add_argument("family", choices=GENERATE_FAMILIES)
    _coupling_args(g)
    g.add_argument("--kg", type=float, help="geodesic curvature parameter (S^3 families)")
    g.add_argument("--dim", type=int, default=None, help="sphere dimension, or radial domain dimension")
    g.add_argument("--a", type=float, default=1.0, help="amplitude (s1-mode)")
    g.add_argument("--k", type=int, default=None, help="mode number (s1-mode)")
    g.add_argument("--c3", type=float, default=0.0)
    g.add_argument("--c4", type=float, default=0.0)
    g.add_argument("--x0", type=float, default=0.0)
    g.add_argument("--x1", type=float, default=1.0)
    g.add_argument("--variant", choices=("auto",) + cf.VARIANTS, default="auto")
    g.add_argument("--nodes", type=int, default=None,
                   help=f"default {CURVE_NODES} for curves, {RADIAL_NODES} for radial")
    _radial_args(g)
    _output_args(g)

    r = sub.add_parser("radial", help="radial solution of the flat-domain equation")
    r.add_argument("--dim", type=int, required=True)
    _coupling_args(r, required=True)
    r.add_argument("--nodes", type=int, default=RADIAL_NODES)
    _radial_args(r)
    _output_args(r)

    res = sub.add_parser("residual", help="refinement study of the residual of a CSV")
    res.add_argument("input")
    _coupling_args(res)
    res.add_argument("--strides", type=_strides, default=DEFAULT_STRIDES)
    res.add_argument("--accuracy", type=_accuracy, default=DEFAULT_ACCURACY)
    res.add_argument("--min-order", type=float, default=2.0)
    res.add_argument("--out", required=True, help="report JSON path")

    ch = sub.add_parser("check", help="run verification suites")
    ch.add_argument("--suite", choices=SUITES + ("all",), default="all")
    ch.add_argument("--seed", type=int, default=None)
    ch.add_argument("--jobs", type=int, default=1)
    ch.add_argument("--out", required=True, help="report JSON path")

    f = sub.add_parser("flow", help="gradient descent of the energy")
    src = f.add_mutually_exclusive_group(required=True)
    src.add_argument("--input")
    src.add_argument("--random-seed", type=int, nargs="?", const=-1, default=None,
                     help=f"start from a random closed curve (seed defaults to ${SEED_ENV} or 0)")
    _coupling_args(f, required=True)
    f.add_argument("--target", choices=("flat", "sphere"), default="flat")
    f.add_argument("--dim", type=int, default=2, help="target dimension for --random-seed")
    f.add_argument("--nodes", type=int, default=16, help="nodes of the random initial curve")
    f.add_argument("--max-iters", type=int, default=20000)
    f.add_argument("--tol", type=float, default=1e-8)
    f.add_argument("--trace-every", type=int, default=1)
    f.add_argument("--accuracy", type=_accuracy, default=None,
                   help=f"default {SPECTRAL} on closed curves, {DEFAULT_ACCURACY} otherwise")
    _output_args(f)
    return parser


def _output_args(p):
    p.add_argument("--out", required=True, help="output CSV path")
    p.add_argument("--gnuplot", action="store_true", help="also write a gnuplot script")


def _flags(args):
    return {k: v for k, v in vars(args).items() if k != "command"}


def _finish(args, path, columns, title, seed=None, grid_sizes=()):
    io.write_manifest(path, io.run_manifest(args.command, _flags(args), seed, grid_sizes))
    if getattr(args, "gnuplot", False):
        io.gnuplot_script(path, columns, title)


# ----------------------------------------------------------------------------
# generate / radial
# ----------------------------------------------------------------------------

def _need(args, *names):
    missing = [f"--{n.replace('_', '-')}" for n in names if getattr(args, n) is None]
    if missing:
        raise UsageError(f"{args.family} needs {', '.join(missing)}")


def _resolve(desc, requested):
    if requested != "auto":
        return desc.with_variant(requested), None
    res = cf.sign_resolution(desc)
    if not res.resolved:
        notes = [c.get("note") for c in res.report.checks if c.get("note")]
        detail = "; ".join(notes) if notes else "no variant passes the residual oracle"
        raise SemibiharmonicError(f"{desc.family}: sign resolution failed ({detail})")
    return desc.with_variant(res.variant), res


def _radial_profile(args):
    c = Coupling(args.delta1, args.delta2)
    n = args.dim
    if args.method == "closed-form":
        if n == 3:
            f = radial_closed_form_n3(c, args.c1, args.c2)
        elif n == 4:
            f = radial_closed_form_n4(c, args.c1, args.c2)
        else:
            raise SemibiharmonicError(f"closed forms exist for n = 3 and n = 4, got n = {n}")
        return RadialProfile.sample(f, n, args.rmin, args.rmax, args.nodes)
    f0 = 0.0 if args.f0 is None else args.f0
    df0 = 0.0 if args.df0 is None else args.df0
    return solve_radial_ode(n, c, args.rmin, args.rmax, f0, df0, nodes=args.nodes, rtol=args.rtol)


def _write_radial(args, profile):
    io.write_radial_csv(args.out, profile)
    desc = {"family": "radial", "variant": cf.LITERAL,
            "params": {"delta1": args.delta1, "delta2": args.delta2, "dim": args.dim,
                       "c1": args.c1, "c2": args.c2, "method": args.method}}
    if args.method == "integrate":
        desc["params"]["rtol"] = args.rtol
    io.write_json(io.sidecar(args.out, "family"), desc)
    _finish(args, args.out, ["r", "f"], f"radial profile, n = {args.dim}",
            grid_sizes=(profile.n_nodes,))


def cmd_generate(args):
    if args.nodes is None:
        args.nodes = RADIAL_NODES if args.family == "radial" else CURVE_NODES
    if args.family == "radial":
        _need(args, "delta1", "delta2", "dim")
        _write_radial(args, _radial_profile(args))
        return EXIT_OK
    family = FAMILY_NAMES[args.family]
    if family == cf.GEODESIC:
        dim = 3 if args.dim is None else args.dim
        desc = cf.FamilyDescriptor(family, {"dim": dim})
        grid = cf.great_circle(dim, args.nodes)
    elif family == cf.S1_MODE:
        _need(args, "delta1", "delta2")
        c = Coupling(args.delta1, args.delta2)
        k = args.k
        if k is None:
            search = cf.mode_condition_search(c, max(1, args.nodes // 4))
            if not search.modes:
                raise SemibiharmonicError(
                    f"no integer mode solves the equation for delta1/delta2 = {c.ratio:g}; "
                    f"the condition is {cf.ORACLE_CONDITION}")
            k = search.modes[0]
        coeff = c.delta2 * k ** 2 + c.delta1
        if abs(coeff) > cf.ZERO_TOL * max(1.0, abs(c.delta1), abs(c.delta2)) * k ** 2:
            raise SemibiharmonicError(
                f"k = {k} does not satisfy {cf.ORACLE_CONDITION} (delta2 k^2 + delta1 = {coeff:g})")
        desc = cf.FamilyDescriptor(family, {"delta1": args.delta1, "delta2": args.delta2,
                                            "a": args.a, "k": k}, cf.FLIPPED)
        grid = cf.s1_mode(args.a, k, args.nodes)
    else:
        _need(args, "delta1", "delta2")
        params = {"delta1": args.delta1, "delta2": args.delta2}
        if family in (cf.S3_GENERAL, cf.S3_FAMILY_B):
            _need(args, "kg")
            params["kg"] = args.kg
        if family == cf.FLAT_LINE:
            params.update(c1=args.c1, c2=args.c2, c3=args.c3, c4=args.c4, x0=args.x0, x1=args.x1)
        desc, _ = _resolve(cf.FamilyDescriptor(family, params), args.variant)
        grid = cf.build(desc, args.nodes)
    io.write_curve_csv(args.out, grid)
    io.write_json(io.sidecar(args.out, "family"), desc.to_dict())
    cols = ["s"] + [f"x{i}" for i in range(grid.points.shape[1])]
    _finish(args, args.out, cols, f"{args.family} ({desc.variant})", grid_sizes=(grid.n_nodes,))
    return EXIT_OK


def cmd_radial(args):
    _write_radial(args, _radial_profile(args))
    return EXIT_OK


# ----------------------------------------------------------------------------
# residual
# ----------------------------------------------------------------------------

def _input_coupling(args, desc):
    d1, d2 = args.delta1, args.delta2
    params = desc.get("params", {}) if desc else {}
    if d1 is None:
        d1 = params.get("delta1")
    if d2 is None:
        d2 = params.get("delta2")
    if d1 is None or d2 is None:
        raise UsageError("coupling unknown: pass --delta1/--delta2 or keep the .family.json sidecar")
    return Coupling(d1, d2)


def _subsample_radial(p, stride):
    if (p.n_nodes - 1) % stride:
        raise SemibiharmonicError(f"{p.n_nodes} radial nodes do not subsample by {stride}")
    return RadialProfile(p.r[::stride], p.values[::stride], p.n)


def _require_file(path):
    if not Path(path).is_file():
        raise FileNotFoundError(f"input {path} not found")


def cmd_residual(args):
    _require_file(args.input)
    kind = io.read_meta_kind(args.input)
    fam_path = io.sidecar(args.input, "family")
    desc = io.read_json(fam_path) if fam_path.exists() else None
    c = _input_coupling(args, desc)
    strides = sorted(args.strides, reverse=True)
    acc = args.accuracy
    if kind == "radial":
        profile = io.read_radial_csv(args.input)
        grids = {s: _subsample_radial(profile, s) for s in strides}

        # integrated samples carry the integrator tolerance, not machine precision
        precision = data_precision_scale((desc or {}).get("params", {}).get("rtol", 0.0))

        def scale(p):
            return precision * max(abs(c.delta1), abs(c.delta2)) * max(1.0, float(np.max(np.abs(p.values))))

        s = study("radial residual", lambda n: grids[n],
                  lambda p: float(np.max(np.abs(radial_residual(p, c, acc).values))),
                  strides, scale=scale, min_order=args.min_order, gain=2.5)
        sizes = [grids[k].n_nodes for k in strides]
    elif kind == "curve":
        grid = io.read_curve_csv(args.input)
        grids = {k: grid.subsample(k) for k in strides}
        s = study("semi-biharmonic residual", lambda n: grids[n],
                  lambda g: sup_norm(semibiharmonic_residual(g, c, acc), g, acc),
                  strides, scale=lambda g: residual_scale(g, c), min_order=args.min_order)
        sizes = [grids[k].n_nodes for k in strides]
    else:
        raise io.FormatError(f"{args.input}: unsupported data kind {kind!r}")
    s.grids = sizes
    report = DiagnosticReport(f"residual: {Path(args.input).name}", meta={
        "input": str(args.input), "kind": kind, "coupling": list(c.as_tuple()),
        "strides": strides, "accuracy": acc,
        "variant": desc.get("variant") if desc else None,
        "family": desc.get("family") if desc else None,
    })
    report.add_study(s)
    io.write_json(args.out, report.to_dict())
    io.write_manifest(args.out, io.run_manifest(args.command, _flags(args), None, sizes))
    return EXIT_OK if report.passed else EXIT_CHECK


# ----------------------------------------------------------------------------
# check / flow
# ----------------------------------------------------------------------------

def cmd_check(args):
    seed = default_seed() if args.seed is None else args.seed
    if args.jobs < 1:
        raise UsageError("--jobs must be >= 1")
    report = run_suite(args.suite, seed=seed, jobs=args.jobs)
    io.write_json(args.out, report.to_dict())
    flags = _flags(args)
    flags["seed"] = seed
    io.write_manifest(args.out, io.run_manifest(args.command, flags, seed))
    return EXIT_OK if report.passed else EXIT_CHECK


def cmd_flow(args):
    c = Coupling(args.delta1, args.delta2)
    seed = None
    if args.input is not None:
        _require_file(args.input)
        grid = io.read_curve_csv(args.input)
    else:
        seed = default_seed() if args.random_seed == -1 else args.random_seed
        space = ModelSpace.flat(args.dim) if args.target == "flat" else ModelSpace.sphere(args.dim)
        offset = 2.0 if args.target == "flat" else 1.0
        amp = 0.5 if args.target == "flat" else 0.05
        grid = random_closed_curve(space, args.nodes, np.random.default_rng(seed),
                                   amplitude=amp, offset=offset)
    if args.trace_every < 1:
        raise UsageError("--trace-every must be >= 1")
    acc = args.accuracy
    if acc is None:
        acc = SPECTRAL if grid.periodic else DEFAULT_ACCURACY
    result = gradient_flow(grid, c, max_iters=args.max_iters, tol=args.tol,
                           trace_every=args.trace_every, accuracy=acc)
    out = Path(args.out)
    io.write_curve_csv(out, result.grid)
    trajectory = out.with_name(f"{out.stem}.trajectory.csv")
    io.write_trajectory_csv(trajectory, result.trace)
    io.write_json(io.sidecar(out, "flow"), {
        "status": result.status,
        "iterations": result.iterations,
        "final_energy": result.final_energy,
        "final_residual": result.final_residual,
        "monotone": result.monotone,
        "coupling": list(c.as_tuple()),
        "accuracy": acc,
    })
    if seed is not None:
        args.random_seed = seed
    _finish(args, out, ["s"] + [f"x{i}" for i in range(grid.points.shape[1])],
            f"flow terminal curve ({result.status})", seed, (grid.n_nodes,))
    if args.gnuplot:
        io.gnuplot_script(trajectory, ["iteration", "energy", "residual"], "flow trajectory")
    # stagnation at the discretization floor is a normal outcome; divergence is not
    return EXIT_CHECK if result.status == "diverged" else EXIT_OK


COMMANDS = {"generate": cmd_generate, "radial": cmd_radial, "residual": cmd_residual,
            "check": cmd_check, "flow": cmd_flow}


def main(argv=None):
    try:
        args = build_parser().parse_args(argv)
        return COMMANDS[args.command](args)
    except OSError as exc:
        print(f"semibiharmonic: I/O error: {exc}", file=sys.stderr)
        return EXIT_IO
    except (SemibiharmonicError, ValueError) as exc:
        print(f"semibiharmonic: {exc}", file=sys.stderr)
        return EXIT_VALIDATION


if __name__ == "__main__":
    sys.exit(main())

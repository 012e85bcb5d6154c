"""Command line entry point.

Exit codes: 0 success, 1 verification failure, 2 invalid input.
"""

from __future__ import annotations

import argparse
import csv
import sys
from pathlib import Path

import numpy as np

from . import shadowing as sh
from .config import ConfigError, RunConfig, load_config
from .cover import EquivarianceViolation, InvolutionModel, check_descent
from .dynamics import DepthOverflow, NoConvergence
from .frame import LeafCoord
from .report import csv_text, dumps, write_atomic
from .verify import build_context, run_verification

EXIT_OK, EXIT_FAIL, EXIT_INPUT = 0, 1, 2


class InputError(ValueError):
    pass


def read_points(path: str | None, width: int) -> np.ndarray:
    """Rows of ``width`` numbers from a comma-separated file; a non-numeric first row is a header."""
    if path is None:
        raise InputError("--points is required")
    try:
        with open(path, newline="", encoding="utf-8") as fh:
            rows = [r for r in csv.reader(fh) if r and any(c.strip() for c in r)]
    except OSError as exc:
        raise InputError(f"cannot read {path}: {exc.strerror}") from None
    out = []
    for i, row in enumerate(rows):
        try:
            values = [float(c) for c in row]
        except ValueError:
            if i == 0:
                continue
            raise InputError(f"{path}:{i + 1}: non-numeric value") from None
        if len(values) != width:
            raise InputError(f"{path}:{i + 1}: expected {width} columns, got {len(values)}")
        if not all(np.isfinite(values)):
            raise InputError(f"{path}:{i + 1}: non-finite value")
        out.append(values)
    return np.array(out, dtype=float).reshape(-1, width)


def emit(text: str, out: str | None) -> None:
    if out is None:
        sys.stdout.write(text)
    else:
        write_atomic(out, text)


def cmd_constants(config: RunConfig, args) -> int:
    ctx = build_context(config)
    lift, fr = ctx.lift, ctx.lift.frame
    pert = lift.perturbation
    payload = {
        "mu": fr.mu,
        "lambda": fr.lam,
        "nu_u": fr.nu_u.tolist(),
        "nu_s": fr.nu_s.tolist(),
        "C0": {"value": ctx.c0.value, "error_radius": ctx.c0.error_radius, "upper": ctx.c0.upper,
               "grid_resolution": config.grid_resolution},
        "C": ctx.sc.C,
        "margin": ctx.sc.margin,
        "satisfies_lemma": ctx.sc.satisfies_lemma,
        "lipschitz": {
            "perturbation": pert.lipschitz_bound(),
            "perturbation_termwise": pert.termwise_lipschitz_bound(),
            "sigma_min_A": lift.sigma_min,
            "invertibility_margin": lift.sigma_min - pert.lipschitz_bound(),
            "inverse_contraction": lift.contraction_factor,
            "lift": lift.lipschitz,
        },
    }
    emit(dumps(payload) + "\n", args.out)
    return EXIT_OK


def _theta_rows(ctx, points: np.ndarray, tol: float):
    def one(batch):
        s = sh.theta_s(ctx.lift, ctx.sc, batch, tol).coord
        u = sh.theta_u(ctx.lift, ctx.sc, batch, tol).coord
        return s, u

    try:
        s, u = one(points)
        for p, sv, uv in zip(points, s.value, u.value):
            yield [float(p[0]), float(p[1]), float(sv), float(s.error_radius), float(uv), float(u.error_radius), ""]
        return
    except (DepthOverflow, NoConvergence):
        pass
    for p in points:
        try:
            s, u = one(p)
            yield [float(p[0]), float(p[1]), float(s.value), float(s.error_radius), float(u.value),
                   float(u.error_radius), ""]
        except (DepthOverflow, NoConvergence) as exc:
            yield [float(p[0]), float(p[1]), "", "", "", "", type(exc).__name__]


def cmd_theta(config: RunConfig, args) -> int:
    points = read_points(args.points, 2)
    ctx = build_context(config)
    header = ["x1", "x2", "theta_s", "err_s", "theta_u", "err_u", "error"]
    emit(csv_text(header, _theta_rows(ctx, points, config.theta_tol)), args.out)
    return EXIT_OK


def cmd_leaf(config: RunConfig, args) -> int:
    leaf = LeafCoord(args.kind or config.leaf.kind,
                     config.leaf.coord if args.leaf_coord is None else args.leaf_coord)
    depth = config.leaf.depth if args.depth is None else args.depth
    if depth < 0 or depth > config.max_depth:
        raise InputError(f"--depth must lie in [0, {config.max_depth}]")
    window = config.window if args.window is None else tuple(args.window)
    if not (window[0] < window[1] and window[2] < window[3]):
        raise InputError("--window needs x0 < x1 and y0 < y1")
    resolution = config.window_resolution if args.resolution is None else args.resolution
    if resolution < 2:
        raise InputError("--resolution must be at least 2")
    ctx = build_context(config)
    points = sh.leaf_sample(ctx.lift, ctx.sc, leaf, window, resolution, depth)
    rows = ([float(p[0]), float(p[1]), depth] for p in points)
    emit(csv_text(["x1", "x2", "depth"], rows), args.out)
    return EXIT_OK


def cmd_divergence(config: RunConfig, args) -> int:
    pairs = read_points(args.points, 4)
    ctx = build_context(config)
    depth = config.depth if args.depth is None else args.depth
    if depth < 0 or depth > config.max_depth:
        raise InputError(f"--depth must lie in [0, {config.max_depth}]")
    rows = []
    for i, (x1, x2, y1, y2) in enumerate(pairs):
        track = sh.orbit_divergence(ctx.lift, (x1, x2), (y1, y2), depth, dps=args.dps)
        rows.extend([i, n, du, ds, d] for n, du, ds, d in track.rows())
    emit(csv_text(["pair", "n", "dist_u", "dist_s", "dist"], rows), args.out)
    return EXIT_OK


def _finish_report(report, args) -> int:
    emit(report.to_json(), args.out)
    for line in report.summary_lines():
        print(line, file=sys.stderr)
    return EXIT_OK if report.passed else EXIT_FAIL


def cmd_verify(config: RunConfig, args) -> int:
    return _finish_report(run_verification(config), args)


def cmd_quotient_check(config: RunConfig, args) -> int:
    ctx = build_context(config)
    model = InvolutionModel(ctx.lift)
    try:
        report = check_descent(model, ctx.sc, config.samples["descent"], config.theta_tol, seed=config.seed)
    except EquivarianceViolation as exc:
        report = exc.report
        print(f"descent fails; worst sample {exc.worst_sample}", file=sys.stderr)
    return _finish_report(report, args)


COMMANDS = {
    "constants": cmd_constants,
    "theta": cmd_theta,
    "leaf": cmd_leaf,
    "divergence": cmd_divergence,
    "verify": cmd_verify,
    "quotient-check": cmd_quotient_check,
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="shadowleaf", description=__doc__.splitlines()[0])
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="JSON run configuration (defaults built in)")
    common.add_argument("--out", help="output file (default stdout)")
    common.add_argument("--seed", type=int, help="override the configured seed")
    sub = parser.add_subparsers(dest="command", required=True)

    sub.add_parser("constants", parents=[common], help="print lambda, mu, certified C0 and C as JSON")
    p = sub.add_parser("theta", parents=[common], help="leaf coordinates of points as CSV")
    p.add_argument("--points", help="CSV of x1,x2 rows")
    p = sub.add_parser("leaf", parents=[common], help="grid sample of a generalized leaf as CSV")
    p.add_argument("--leaf-coord", type=float)
    p.add_argument("--kind", choices=("stable", "unstable"))
    p.add_argument("--depth", type=int)
    p.add_argument("--window", type=float, nargs=4, metavar=("X0", "X1", "Y0", "Y1"))
    p.add_argument("--resolution", type=int)
    p = sub.add_parser("divergence", parents=[common], help="pseudo-distance tracks of orbit pairs as CSV")
    p.add_argument("--points", help="CSV of x1,x2,y1,y2 rows")
    p.add_argument("--depth", type=int)
    p.add_argument("--dps", type=int, help="iterate in mpmath with this many digits")
    sub.add_parser("verify", parents=[common], help="run the property suite; JSON report")
    sub.add_parser("quotient-check", parents=[common], help="check descent through x -> -x; JSON report")
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_INPUT if exc.code else EXIT_OK
    try:
        config = load_config(args.config)
        if args.seed is not None:
            if not 0 <= args.seed < 2**64:
                raise ConfigError("seed", "must fit in 64 bits")
            config = config.with_seed(args.seed)
        return COMMANDS[args.command](config, args)
    except ConfigError as exc:
        print(f"config error at {exc.path}: {exc.message}", file=sys.stderr)
        return EXIT_INPUT
    except InputError as exc:
        print(f"input error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())

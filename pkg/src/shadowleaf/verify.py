"""The property suite behind ``shadowleaf verify``.

Every check draws its samples from its own seeded generator, so records are
reproducible one by one and the report is byte-identical across runs.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, replace

import numpy as np

from . import shadowing as sh
from .config import RunConfig
from .cover import EquivarianceViolation, InvolutionModel, check_descent
from .dynamics import CertifiedValue, PerturbedLift, shadowing_constant
from .frame import LeafCoord, dist, dist_s
from .report import PropertyRecord, VerificationReport

# property ids, in report order
ROUNDOFF = 1e-12

CHECKS = (
    "c0_soundness", "shadowing_bound", "inverse_correctness", "nesting", "certified_containment",
    "equivariance", "deck", "dichotomy", "c_independence", "continuity", "stable_contraction",
    "flood_fill",
)


@dataclass
class Context:
    config: RunConfig
    lift: PerturbedLift
    c0: CertifiedValue
    sc: sh.ShadowConstant

    def rng(self, name: str) -> np.random.Generator:
        return np.random.default_rng([self.config.seed, CHECKS.index(name) if name in CHECKS else len(CHECKS)])


def build_context(config: RunConfig) -> Context:
    lift = config.build_lift()
    c0 = shadowing_constant(lift, config.grid_resolution)
    if config.shadow_constant is None:
        sc = sh.choose_shadow_constant(c0, lift.frame.lam, config.margin)
    else:
        sc = sh.ShadowConstant(config.shadow_constant, c0, config.margin, lift.frame.lam)
    return Context(config, lift, c0, sc)


def brute_force_c0(lift: PerturbedLift, resolution: int, chunk_rows: int = 256) -> float:
    """Grid maximum of both displacements, evaluated by applying the maps directly.

    The backward displacement is sampled through the substitution ``x = f(y)``
    so no closed form for it is used.
    """
    fr = lift.frame
    g = np.arange(resolution) / resolution
    best = 0.0
    for start in range(0, resolution, chunk_rows):
        y = np.stack(np.meshgrid(g[start:start + chunk_rows], g, indexing="ij"), axis=-1)
        fy = lift.apply(y)
        forward = dist(fr, fy, lift.apply_model(y))
        backward = dist(fr, y, lift.apply_model_inverse(fy))
        best = max(best, float(forward.max()), float(backward.max()))
    return best


def check_c0_soundness(ctx: Context) -> list[PropertyRecord]:
    brute = brute_force_c0(ctx.lift, ctx.config.oracle_resolution)
    upper = ctx.c0.upper
    excess = (upper - brute) / brute if brute > 0 else (0.0 if upper == 0 else math.inf)
    return [PropertyRecord("c0_soundness", "thm1.claim", ctx.config.oracle_resolution**2, excess, 0.05,
                           passed=bool(upper >= brute and excess <= 0.05))]


def check_shadowing_bound(ctx: Context) -> list[PropertyRecord]:
    lift, fr = ctx.lift, ctx.lift.frame
    n = ctx.config.samples["shadowing_bound"]
    x = ctx.rng("shadowing_bound").uniform(-2.0, 2.0, (n, 2))
    forward = dist(fr, lift.apply(x), lift.apply_model(x))
    backward = dist(fr, lift.apply_inverse(x), lift.apply_model_inverse(x))
    worst = float(max(forward.max(), backward.max()))
    return [PropertyRecord("shadowing_bound", "thm1.claim", n, worst, ctx.c0.upper)]


def check_inverse(ctx: Context) -> list[PropertyRecord]:
    lift = ctx.lift
    n = ctx.config.samples["shadowing_bound"]
    x = ctx.rng("inverse_correctness").uniform(-50.0, 50.0, (n, 2))
    err = np.linalg.norm(lift.apply(lift.apply_inverse(x)) - x, axis=-1)
    scale = np.maximum(1.0, np.abs(x).max(axis=-1))
    threshold = lift.inverse_tolerance * (1 + np.linalg.norm(lift.A, 2))
    return [PropertyRecord("inverse_correctness", "thm1.claim", n, float(np.max(err / scale)), threshold)]


def check_nesting(ctx: Context) -> list[PropertyRecord]:
    n = ctx.config.samples["nesting"]
    depth = ctx.config.nesting_depth
    x = ctx.rng("nesting").random((n, 2))
    records = []
    for kind in ("stable", "unstable"):
        intervals = sh.leaf_intervals(ctx.lift, ctx.sc, x, depth, kind)
        residual = float(np.max(sh.nesting_residual(intervals))) if depth > 0 else 0.0
        records.append(PropertyRecord(f"nesting_{kind}", "thm1.lemma", n, residual, 1e-12))
    return records


def check_containment(ctx: Context) -> list[PropertyRecord]:
    n = ctx.config.samples["nesting"]
    tol = ctx.config.theta_tol
    x = ctx.rng("certified_containment").random((n, 2))
    records = []
    for kind in ("stable", "unstable"):
        leaf = sh.theta(ctx.lift, ctx.sc, x, tol, kind)
        worst = -math.inf
        for interval in sh.leaf_intervals(ctx.lift, ctx.sc, x, leaf.depth, kind):
            outside = np.maximum(interval.lo - leaf.coord.value, leaf.coord.value - interval.hi)
            worst = max(worst, float(outside.max()))
        records.append(PropertyRecord(f"certified_containment_{kind}", "thm1.p1", n, worst, 1e-12))
    return records


def check_equivariance(ctx: Context) -> list[PropertyRecord]:
    lift, fr, tol = ctx.lift, ctx.lift.frame, ctx.config.theta_tol
    n = ctx.config.samples["equivariance"]
    x = ctx.rng("equivariance").random((n, 2))
    fx = lift.apply(x)
    records = []
    for kind, factor in (("stable", fr.mu), ("unstable", fr.lam)):
        before = sh.theta(lift, ctx.sc, x, tol, kind).coord.value
        after = sh.theta(lift, ctx.sc, fx, tol, kind).coord.value
        residual = float(np.max(np.abs(after - factor * before)))
        records.append(PropertyRecord(f"equivariance_{kind}", "thm1.p3", n, residual, (1 + factor) * tol))
    return records


def check_deck(ctx: Context) -> list[PropertyRecord]:
    lift, fr, tol = ctx.lift, ctx.lift.frame, ctx.config.theta_tol
    n = ctx.config.samples["deck"]
    rng = ctx.rng("deck")
    x = rng.random((n, 2))
    k = rng.integers(-3, 4, (n, 2)).astype(float)
    records = []
    for kind, cov in (("stable", fr.nu_u), ("unstable", fr.nu_s)):
        base = sh.theta(lift, ctx.sc, x, tol, kind).coord.value
        moved = sh.theta(lift, ctx.sc, x + k, tol, kind).coord.value
        residual = float(np.max(np.abs(moved - base - k @ cov)))
        records.append(PropertyRecord(f"deck_{kind}", "thm1.p4", n, residual, 2 * tol))
    return records


def dichotomy_pairs(ctx: Context, count: int) -> list[tuple]:
    """Half of the pairs on a common generalized stable leaf, half independent."""
    rng = ctx.rng("dichotomy")
    pairs = []
    for i in range(count):
        x = rng.random(2)
        if i % 2 == 0:
            y = sh.stable_partner(ctx.lift, ctx.sc, x, float(rng.uniform(-0.5, 0.5)), dps=ctx.config.dps)
        else:
            y = tuple(x + rng.uniform(-0.5, 0.5, 2))
        pairs.append((x, y))
    return pairs


def classify_pairs(ctx: Context, pairs, N: int) -> dict:
    """Compare leaf-coordinate equality against the orbit-divergence oracle.

    Pairs with ``|d theta| <= 2 tol`` must stay within the bounded track;
    pairs with ``|d theta| >= 10 tol`` must grow at least like
    ``mu^n |d theta| - 2C``; pairs in between are left unclassified.
    """
    lift, fr, tol, sc = ctx.lift, ctx.lift.frame, ctx.config.theta_tol, ctx.sc
    xs = np.array([p[0] for p in pairs], dtype=float)
    ys = np.array([[float(p[1][0]), float(p[1][1])] for p in pairs])
    gap = np.abs(sh.theta_s(lift, sc, xs, tol).coord.value - sh.theta_s(lift, sc, ys, tol).coord.value)
    C0 = sc.C0_bound.upper
    n = np.arange(N + 1)
    tally = {"same": 0, "different": 0, "excluded": 0, "disagreements": 0}
    for (x, y), x_f, y_f, delta in zip(pairs, xs, ys, gap):
        if 2 * tol < delta < 10 * tol:
            tally["excluded"] += 1
            continue
        track = sh.orbit_divergence(lift, x, y, N, dps=ctx.config.dps)
        bound = 2 * sc.C + float(dist_s(fr, x_f, y_f)) + 2 * C0 / (1 - fr.lam)
        bounded = bool(track.dist.max() <= bound * (1 + 1e-12))
        if delta <= 2 * tol:
            tally["same"] += 1
            agree = bounded
        else:
            tally["different"] += 1
            floor = fr.mu**n * delta - 2 * sc.C - 2 * tol * fr.mu**n
            agree = (not bounded) and bool(np.all(track.dist_u >= floor))
        tally["disagreements"] += not agree
    return tally


def check_dichotomy(ctx: Context) -> list[PropertyRecord]:
    pairs = dichotomy_pairs(ctx, ctx.config.samples["dichotomy"])
    tally = classify_pairs(ctx, pairs, ctx.config.depth)
    return [PropertyRecord("dichotomy", "thm1.p1+p6", tally["same"] + tally["different"],
                           tally["disagreements"], 0)]


def check_c_independence(ctx: Context) -> list[PropertyRecord]:
    lift, tol = ctx.lift, ctx.config.theta_tol
    n = ctx.config.samples["c_independence"]
    x = ctx.rng("c_independence").random((n, 2))
    estimates = []
    for margin in ctx.config.margins:
        sc = sh.choose_shadow_constant(ctx.c0, lift.frame.lam, margin)
        estimates.append(sh.theta_s(lift, sc, x, tol).coord)
    worst = -math.inf
    for a, b in itertools.combinations(estimates, 2):
        worst = max(worst, float(np.max(np.abs(a.value - b.value) - (a.error_radius + b.error_radius))))
    return [PropertyRecord("c_independence", "thm1.p6", n, worst, 0.0)]


def nearby_pairs(ctx: Context, n: int, scale: float = 1e-3) -> tuple[np.ndarray, np.ndarray]:
    fr = ctx.lift.frame
    rng = ctx.rng("continuity")
    x = rng.random((n, 2))
    angle = rng.uniform(0, 2 * np.pi, n)
    direction = np.stack([np.cos(angle), np.sin(angle)], axis=-1)
    unit = np.abs(direction @ fr.nu_u) + np.abs(direction @ fr.nu_s)
    target = rng.uniform(0, scale, n)
    return x, x + direction * (target / unit)[:, None]


def check_continuity(ctx: Context) -> list[PropertyRecord]:
    lift, fr, tol = ctx.lift, ctx.lift.frame, ctx.config.theta_tol
    n = ctx.config.samples["continuity"]
    x, y = nearby_pairs(ctx, n)
    measured = np.abs(sh.theta_s(lift, ctx.sc, x, tol).coord.value - sh.theta_s(lift, ctx.sc, y, tol).coord.value)
    bound = sh.continuity_bound(lift, ctx.sc, dist(fr, x, y), ctx.config.continuity_depth)
    return [PropertyRecord("continuity", "thm1.p7", n, float(np.max(measured - bound)), 0.0)]


def check_stable_contraction(ctx: Context) -> list[PropertyRecord]:
    lift, fr = ctx.lift, ctx.lift.frame
    n = ctx.config.samples["contraction"]
    N = ctx.config.depth
    rng = ctx.rng("stable_contraction")
    x = rng.random((n, 2))
    y = x + rng.uniform(-1.0, 1.0, (n, 2))
    track = sh.orbit_divergence(lift, x, y, N)
    steps = np.arange(N + 1)[:, None]
    # absolute roundoff allowance: with p = 0 the inequality is an equality decaying below 1e-16
    bound = fr.lam**steps * track.dist_s[0] + 2 * ctx.c0.upper / (1 - fr.lam) + ROUNDOFF
    return [PropertyRecord("stable_contraction", "thm1.p6", n, float(np.max(track.dist_s - bound)), 0.0)]


def check_flood_fill(ctx: Context) -> list[PropertyRecord]:
    cfg = ctx.config
    x0, x1, y0, y1 = cfg.window
    centre = np.array([(x0 + x1) / 2, (y0 + y1) / 2])
    u0 = float(sh.theta_s(ctx.lift, ctx.sc, centre, cfg.theta_tol).coord.value)
    # any admissible C gives the same partition; widen it so the band spans a few grid cells
    fr = ctx.lift.frame
    cell = max(x1 - x0, y1 - y0) / (cfg.window_resolution - 1) * fr.upper_norm_constant
    sc = replace(ctx.sc, C=max(ctx.sc.C, 2 * cell * fr.mu**cfg.flood_depth))
    mask = sh.leaf_mask(ctx.lift, sc, LeafCoord("stable", u0), cfg.window, cfg.window_resolution, cfg.flood_depth)
    components = sh.complement_components(mask)
    return [PropertyRecord("flood_fill", "thm1.p2", cfg.window_resolution**2, abs(components - 2), 0)]


def check_branched_cover(ctx: Context) -> list[PropertyRecord]:
    model = InvolutionModel(ctx.lift)
    try:
        report = check_descent(model, ctx.sc, ctx.config.samples["descent"], ctx.config.theta_tol,
                               seed=ctx.config.seed)
    except EquivarianceViolation as exc:
        report = exc.report
    return report.properties


RUNNERS = {
    "c0_soundness": check_c0_soundness,
    "shadowing_bound": check_shadowing_bound,
    "inverse_correctness": check_inverse,
    "nesting": check_nesting,
    "certified_containment": check_containment,
    "equivariance": check_equivariance,
    "deck": check_deck,
    "dichotomy": check_dichotomy,
    "c_independence": check_c_independence,
    "continuity": check_continuity,
    "stable_contraction": check_stable_contraction,
    "flood_fill": check_flood_fill,
}


def run_verification(config: RunConfig, only: tuple[str, ...] | None = None) -> VerificationReport:
    ctx = build_context(config)
    report = VerificationReport()
    for name in CHECKS:
        if only is None or name in only:
            report.properties.extend(RUNNERS[name](ctx))
    if config.branched_cover and (only is None or "branched_cover" in only):
        report.properties.extend(check_branched_cover(ctx))
    return report

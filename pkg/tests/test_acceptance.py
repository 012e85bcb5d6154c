"""Exit criteria on the default instance (cat map, odd two-term perturbation, seed 42).

Each test prints one ``CRITERION n PASS|FAIL`` line to the terminal.
"""

import time

import numpy as np
import pytest

from shadowleaf import shadowing as sh
from shadowleaf.cli import main
from shadowleaf.config import parse_config
from shadowleaf.cover import EquivarianceViolation, InvolutionModel, check_descent
from shadowleaf.dynamics import FourierTerm, Perturbation, PerturbedLift, shadowing_constant
from shadowleaf.frame import coord_u, dist
from shadowleaf.verify import RUNNERS, build_context, classify_pairs, dichotomy_pairs, nearby_pairs

pytestmark = pytest.mark.acceptance


@pytest.fixture
def say(capsys):
    def emit(number, ok, detail):
        with capsys.disabled():
            print(f"\nCRITERION {number} {'PASS' if ok else 'FAIL'}: {detail}")
    return emit


def records(ctx, name):
    return {r.id: r for r in RUNNERS[name](ctx)}


def test_01_unperturbed_exactness(say):
    start = time.perf_counter()
    ctx = build_context(parse_config({"perturbation": []}))
    g = (np.arange(100) + 0.5) / 100
    x = np.stack(np.meshgrid(g, g, indexing="ij"), axis=-1).reshape(-1, 2)
    err = float(np.max(np.abs(sh.theta_s(ctx.lift, ctx.sc, x, 1e-8).coord.value - coord_u(ctx.lift.frame, x))))
    elapsed = time.perf_counter() - start
    ok = err <= 1e-12 and ctx.c0.upper == 0 and elapsed < 5
    say(1, ok, f"max|theta_s - coord_u|={err:.3e} C0={ctx.c0.upper} runtime={elapsed:.2f}s")
    assert ok


def test_02_nestedness(ctx, say):
    start = time.perf_counter()
    got = records(ctx, "nesting")
    elapsed = time.perf_counter() - start
    worst = max(r.worst_residual for r in got.values())
    ok = all(r.passed for r in got.values()) and elapsed < 30
    say(2, ok, f"worst nesting excess={worst:.3e} over {ctx.config.samples['nesting']} points, n<=30, "
               f"runtime={elapsed:.2f}s")
    assert ok


def test_02_nestedness_negative_control(ctx, say):
    # C = 0.5 C0/(1 - lam) must produce at least one nesting violation
    fr = ctx.lift.frame
    C = 0.5 * ctx.c0.upper / (1 - fr.lam)
    x = np.random.default_rng(42).random((1000, 2))
    weak = sh.ShadowConstant(C, ctx.c0, 0.0, fr.lam)
    worst = max(float(np.max(sh.nesting_residual(sh.leaf_intervals(ctx.lift, weak, x, 30, kind))))
                for kind in ("stable", "unstable"))
    ok = worst > 1e-12
    say(2, ok, f"negative control C={C:.5f}: worst nesting excess={worst:.3e} (needs > 1e-12)")
    assert ok


def test_03_semiconjugacy_residual(ctx, say):
    got = records(ctx, "equivariance")
    s, u = got["equivariance_stable"], got["equivariance_unstable"]
    fr = ctx.lift.frame
    ok = (s.passed and u.passed and s.threshold == pytest.approx((1 + fr.mu) * 1e-8)
          and u.threshold == pytest.approx((1 + fr.lam) * 1e-8) and s.samples == 1000)
    say(3, ok, f"stable {s.worst_residual:.3e} <= {s.threshold:.3e}; unstable {u.worst_residual:.3e} <= {u.threshold:.3e}")
    assert ok


def test_04_deck_equivariance(ctx, say):
    r = records(ctx, "deck")["deck_stable"]
    ok = r.passed and r.threshold == pytest.approx(2e-8) and r.samples == 1000
    say(4, ok, f"max|theta_s(x+k) - theta_s(x) - nu_u(k)|={r.worst_residual:.3e} <= 2e-8")
    assert ok


def test_05_dichotomy(ctx, say):
    pairs = dichotomy_pairs(ctx, 200)
    tally = classify_pairs(ctx, pairs, 40)
    ok = tally["disagreements"] == 0 and tally["same"] > 0 and tally["different"] > 0
    say(5, ok, f"same={tally['same']} different={tally['different']} excluded={tally['excluded']} "
               f"disagreements={tally['disagreements']}")
    assert ok


def test_06_c_independence(ctx, say):
    r = records(ctx, "c_independence")["c_independence"]
    say(6, r.passed, f"margins {ctx.config.margins}: worst excess over summed radii={r.worst_residual:.3e} "
                     f"on {r.samples} samples")
    assert r.passed and r.samples == 500


def test_07_continuity(ctx, say):
    r = records(ctx, "continuity")["continuity"]
    x, y = nearby_pairs(ctx, 500)
    close = float(dist(ctx.lift.frame, x, y).max())
    ok = r.passed and close <= 1e-3
    say(7, ok, f"worst measured - bound={r.worst_residual:.3e} over {r.samples} pairs with dist<={close:.2e}")
    assert ok


def test_08_c0_soundness(ctx, say):
    r = records(ctx, "c0_soundness")["c0_soundness"]
    say(8, r.passed, f"certified C0 at 512 exceeds 4096 brute force by {100 * r.worst_residual:.2f}% (<= 5%)")
    assert r.passed


def test_09_branched_cover_descent(ctx, cat, say):
    report = check_descent(InvolutionModel(ctx.lift), ctx.sc, 500, 1e-8, seed=42)
    worst = report["descent_stable"].worst_residual
    even = PerturbedLift(cat, Perturbation((FourierTerm((0, 1), sx=0.03), FourierTerm((1, 0), sy=0.02),
                                            FourierTerm((1, 0), cx=0.02))))
    sc = sh.choose_shadow_constant(shadowing_constant(even, 512), even.frame.lam)
    try:
        check_descent(InvolutionModel(even), sc, 500, 1e-8, seed=42)
        control = False
    except EquivarianceViolation:
        control = True
    ok = worst <= 2e-8 and control
    say(9, ok, f"max|theta_s(-x) + theta_s(x)|={worst:.3e} <= 2e-8; even-term control raised={control}")
    assert ok


def test_10_corrected_stable_contraction(ctx, say):
    r = records(ctx, "stable_contraction")["stable_contraction"]
    say(10, r.passed, f"worst dist_s excess over bound={r.worst_residual:.3e} on {r.samples} pairs, n<=40")
    assert r.passed and r.samples == 500


def test_11_determinism(tmp_path, say):
    a, b = tmp_path / "a.json", tmp_path / "b.json"
    codes = (main(["verify", "--out", str(a)]), main(["verify", "--out", str(b)]))
    ok = a.read_bytes() == b.read_bytes()
    say(11, ok, f"two default verify runs byte-identical={ok} (exit codes {codes})")
    assert ok

"""Generalized leaves obtained by one-sided shadowing.

For a stable leaf ``L`` with coordinate ``u0`` the generalized leaf is the set
of points whose forward orbit satisfies ``|coord_u(f^n x) - mu^n u0| <= C``
for every ``n >= 0``.  For fixed ``x`` the admissible ``u0`` at depth ``n``
form an interval of width ``2 C lam^n``; these intervals are nested once
``C (1 - lam)`` exceeds the shadowing constant, so they pin down a single
coordinate ``theta_s(x)``.  The unstable side is the same construction run
with ``f^-1`` and ``coord_s``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import mpmath
import numpy as np
from scipy import ndimage

from .dynamics import CertifiedValue, DepthOverflow, PerturbedLift
from .frame import Kind, LeafCoord


@dataclass(frozen=True)
class ShadowConstant:
    C: float
    C0_bound: CertifiedValue
    margin: float
    lam: float

    @property
    def satisfies_lemma(self) -> bool:
        """Whether ``C >= C0 / (1 - lam)`` for the certified ``C0`` upper bound."""
        return self.C * (1 - self.lam) >= self.C0_bound.upper


def choose_shadow_constant(C0_bound: CertifiedValue, lam: float, margin: float = 0.1) -> ShadowConstant:
    if not margin > 0:
        raise ValueError("margin must be positive")
    C = C0_bound.upper / (1 - lam) * (1 + margin)
    return ShadowConstant(C=C, C0_bound=C0_bound, margin=margin, lam=lam)


@dataclass(frozen=True)
class LeafInterval:
    """Leaf coordinates ``c`` admissible for ``x`` at ``depth``: ``|mu^depth c - track| <= C``."""

    kind: Kind
    depth: int
    lo: np.ndarray | float
    hi: np.ndarray | float

    @property
    def width(self):
        return self.hi - self.lo

    @property
    def midpoint(self):
        return 0.5 * (self.lo + self.hi)

    def contains(self, other: LeafInterval, slack: float = 0.0):
        return (other.lo >= self.lo - slack) & (other.hi <= self.hi + slack)


@dataclass(frozen=True)
class GeneralizedLeafId:
    kind: Kind
    coord: CertifiedValue
    depth: int


def _track(lift: PerturbedLift, x, n: int, kind: Kind) -> np.ndarray:
    """Transverse coordinates along the orbit that defines ``kind`` leaves, depths ``0..n``."""
    if n < 0:
        raise ValueError("depth must be non-negative")
    if kind == "stable":
        return lift.coordinate_orbit(x, n)[0]
    if kind == "unstable":
        return lift.coordinate_orbit(x, -n)[1]
    raise ValueError(f"unknown leaf kind {kind!r}")


def _interval(lift: PerturbedLift, C: float, track, n: int, kind: Kind) -> LeafInterval:
    scale = lift.frame.mu ** -n
    return LeafInterval(kind, n, (track - C) * scale, (track + C) * scale)


def leaf_interval(lift: PerturbedLift, sc: ShadowConstant, x, n: int, kind: Kind = "stable") -> LeafInterval:
    track = _track(lift, x, n, kind)
    return _interval(lift, sc.C, track[n], n, kind)


def leaf_intervals(lift: PerturbedLift, sc: ShadowConstant, x, n_max: int, kind: Kind = "stable") -> list[LeafInterval]:
    """All intervals for depths ``0..n_max`` from a single orbit."""
    track = _track(lift, x, n_max, kind)
    return [_interval(lift, sc.C, track[n], n, kind) for n in range(n_max + 1)]


def nesting_residual(intervals: Sequence[LeafInterval]) -> np.ndarray:
    """Largest amount by which a deeper interval sticks out of its predecessor (<= 0 when nested)."""
    worst = None
    for outer, inner in zip(intervals, intervals[1:]):
        excess = np.maximum(outer.lo - inner.lo, inner.hi - outer.hi)
        worst = excess if worst is None else np.maximum(worst, excess)
    if worst is None:
        return np.full(np.shape(intervals[0].lo), -np.inf)
    return worst


def depth_for_tolerance(C: float, lam: float, tol: float) -> int:
    if not tol > 0:
        raise ValueError("tol must be positive")
    if C <= tol:
        return 0
    n = math.ceil(math.log(C / tol) / math.log(1 / lam))
    while C * lam**n > tol:
        n += 1
    return n


def theta(lift: PerturbedLift, sc: ShadowConstant, x, tol: float, kind: Kind = "stable") -> GeneralizedLeafId:
    n = depth_for_tolerance(sc.C, lift.frame.lam, tol)
    if n > lift.max_depth:
        raise DepthOverflow(f"tolerance {tol:g} needs depth {n} > max depth {lift.max_depth}")
    track = _track(lift, x, n, kind)
    interval = _interval(lift, sc.C, track[n], n, kind)
    return GeneralizedLeafId(kind, CertifiedValue(interval.midpoint, sc.C * lift.frame.lam**n), n)


def theta_s(lift: PerturbedLift, sc: ShadowConstant, x, tol: float) -> GeneralizedLeafId:
    """Coordinate of the stable leaf ``L`` with ``x`` in its generalized leaf."""
    return theta(lift, sc, x, tol, "stable")


def theta_u(lift: PerturbedLift, sc: ShadowConstant, x, tol: float) -> GeneralizedLeafId:
    return theta(lift, sc, x, tol, "unstable")


def semiconjugacy(lift: PerturbedLift, sc: ShadowConstant, x, tol: float) -> tuple[CertifiedValue, CertifiedValue]:
    """The leaf-space map ``x -> (theta_s(x), theta_u(x))``.

    It conjugates ``f`` to ``(u, s) -> (mu u, lam s)``.
    """
    return theta_s(lift, sc, x, tol).coord, theta_u(lift, sc, x, tol).coord


def membership_depth(lift: PerturbedLift, sc: ShadowConstant, x, leaf: LeafCoord, N: int):
    """Whether ``x`` passes the first ``N + 1`` shadowing tests for ``leaf``."""
    track = _track(lift, x, N, leaf.kind)
    n = np.arange(N + 1).reshape((-1,) + (1,) * (track.ndim - 1))
    centre = lift.frame.mu**n * leaf.value
    return np.all(np.abs(track - centre) <= sc.C, axis=0)


@dataclass(frozen=True)
class DivergenceTrack:
    n: np.ndarray
    dist_u: np.ndarray
    dist_s: np.ndarray

    @property
    def dist(self) -> np.ndarray:
        return self.dist_u + self.dist_s

    def rows(self) -> list[tuple[int, float, float, float]]:
        return [(int(n), float(u), float(s), float(u + s))
                for n, u, s in zip(self.n, self.dist_u, self.dist_s)]


def orbit_divergence(lift: PerturbedLift, x, y, N: int, dps: int | None = None) -> DivergenceTrack:
    """Pseudo-distances between ``f^n x`` and ``f^n y`` for ``n = 0..N``.

    With ``dps`` set, a single pair is iterated in mpmath at that many
    decimal digits; otherwise double precision over arbitrary batches.
    """
    if N < 0:
        raise ValueError("N must be non-negative")
    if dps is None:
        cu_x, cs_x = lift.coordinate_orbit(x, N)
        cu_y, cs_y = lift.coordinate_orbit(y, N)
        return DivergenceTrack(np.arange(N + 1), np.abs(cu_x - cu_y), np.abs(cs_x - cs_y))

    with mpmath.workdps(dps):
        mp = mp_frame(lift)
        orbit_x = lift.orbit_mp(x, N)
        orbit_y = lift.orbit_mp(y, N)
        du, ds = [], []
        for a, b in zip(orbit_x, orbit_y):
            diff = (a[0] - b[0], a[1] - b[1])
            du.append(float(abs(mp.nu_u[0] * diff[0] + mp.nu_u[1] * diff[1])))
            ds.append(float(abs(mp.nu_s[0] * diff[0] + mp.nu_s[1] * diff[1])))
    return DivergenceTrack(np.arange(N + 1), np.array(du), np.array(ds))


def window_grid(window: Sequence[float], resolution: int) -> np.ndarray:
    """``resolution x resolution`` grid over ``(x0, x1, y0, y1)``, indexed ``[i, j] -> (x_i, y_j)``."""
    if resolution < 2:
        raise ValueError("resolution must be at least 2")
    x0, x1, y0, y1 = window
    gx = np.linspace(x0, x1, resolution)
    gy = np.linspace(y0, y1, resolution)
    return np.stack(np.meshgrid(gx, gy, indexing="ij"), axis=-1)


def leaf_mask(lift: PerturbedLift, sc: ShadowConstant, leaf: LeafCoord, window, resolution: int, N: int) -> np.ndarray:
    return membership_depth(lift, sc, window_grid(window, resolution), leaf, N)


def leaf_sample(lift: PerturbedLift, sc: ShadowConstant, leaf: LeafCoord, window, resolution: int, N: int) -> np.ndarray:
    """Grid points of ``window`` that pass the depth-``N`` membership test, as an ``(m, 2)`` array."""
    grid = window_grid(window, resolution)
    return grid[membership_depth(lift, sc, grid, leaf, N)]


def complement_components(mask: np.ndarray) -> int:
    """Number of 4-connected components of the grid cells outside ``mask``."""
    _, count = ndimage.label(~mask)
    return int(count)


def continuity_bound(lift: PerturbedLift, sc: ShadowConstant, separation, n_max: int = 30) -> np.ndarray:
    """Upper bound on ``|theta_s(x) - theta_s(y)|`` given ``dist(x, y) = separation``.

    Both values lie in their depth-``n`` intervals, whose centres move by at
    most ``mu^-n Lip(f)^n |x - y|``.
    """
    fr = lift.frame
    euclid = np.asarray(separation, dtype=float) / fr.lower_norm_constant
    growth = lift.lipschitz / fr.mu
    n = np.arange(n_max + 1).reshape((-1,) + (1,) * euclid.ndim)
    return np.min(2 * sc.C * fr.lam**n + growth**n * euclid, axis=0)


# high-precision helpers


@dataclass(frozen=True)
class MpFrame:
    mu: mpmath.mpf
    nu_u: tuple
    nu_s: tuple
    v_u: tuple
    v_s: tuple


def mp_frame(lift: PerturbedLift) -> MpFrame:
    """Eigen-data at the current mpmath precision, oriented like ``lift.frame``."""
    m = lift.matrix
    tr = mpmath.mpf(m.trace)
    mu = (tr + mpmath.sqrt(tr * tr - 4)) / 2
    lam = 1 / mu

    def vec(p, q, r, s, t, reference):
        first = (mpmath.mpf(q), t - p)
        second = (t - s, mpmath.mpf(r))
        v = first if mpmath.norm(first) >= mpmath.norm(second) else second
        norm = mpmath.norm(v)
        v = (v[0] / norm, v[1] / norm)
        if v[0] * reference[0] + v[1] * reference[1] < 0:
            v = (-v[0], -v[1])
        return v

    fr = lift.frame
    return MpFrame(
        mu=mu,
        nu_u=vec(m.a, m.c, m.b, m.d, mu, fr.nu_u),
        nu_s=vec(m.a, m.c, m.b, m.d, lam, fr.nu_s),
        v_u=vec(m.a, m.b, m.c, m.d, mu, fr.v_u),
        v_s=vec(m.a, m.b, m.c, m.d, lam, fr.v_s),
    )


def theta_s_mp(lift: PerturbedLift, z: Sequence, depth: int) -> mpmath.mpf:
    """Depth-``depth`` midpoint estimate of ``theta_s(z)`` in the current mpmath precision."""
    mp = mp_frame(lift)
    end = lift.orbit_mp(z, depth)[-1]
    return (mp.nu_u[0] * end[0] + mp.nu_u[1] * end[1]) / mp.mu**depth


def stable_partner(lift: PerturbedLift, sc: ShadowConstant, x, offset: float, dps: int = 32) -> tuple:
    """A point on the generalized stable leaf of ``x``, displaced by about ``offset`` along it.

    Returns ``y = x + offset v_s + t v_u`` (mpmath coordinates) with ``t``
    solved so that ``theta_s(y) = theta_s(x)`` to roughly ``10^-(dps - 10)``.
    """
    with mpmath.workdps(dps):
        mp = mp_frame(lift)
        target_err = mpmath.mpf(10) ** (10 - dps)
        if sc.C > 0:
            depth = int(mpmath.ceil(mpmath.log(sc.C / target_err) / mpmath.log(mp.mu)))
        else:
            depth = 0
        x = (mpmath.mpf(float(x[0])), mpmath.mpf(float(x[1])))
        base = (x[0] + offset * mp.v_s[0], x[1] + offset * mp.v_s[1])
        target = theta_s_mp(lift, x, depth)

        def gap(t):
            z = (base[0] + t * mp.v_u[0], base[1] + t * mp.v_u[1])
            return theta_s_mp(lift, z, depth) - target

        # both estimates sit within C of the plain coordinates, which bounds the root
        slope = mp.nu_u[0] * mp.v_u[0] + mp.nu_u[1] * mp.v_u[1]
        reach = (2 * mpmath.mpf(sc.C) + target_err) / abs(slope) * mpmath.mpf("1.01")
        if reach == 0 or gap(0) == 0:
            t = mpmath.mpf(0)
        else:
            t = mpmath.findroot(gap, (-reach, reach), solver="anderson", tol=target_err, verify=False)
        return (base[0] + t * mp.v_u[0], base[1] + t * mp.v_u[1])

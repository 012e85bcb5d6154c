"""The perturbed lift ``f(x) = A x + p(x)`` and the shadowing constant.

``p`` is a finite Fourier sum, so it is exactly periodic under integer
translations and its Lipschitz constant has a closed-form upper bound.  That
makes ``f`` a lift of a torus homeomorphism isotopic to the automorphism
``A`` with deck cocycle ``f(x + k) = f(x) + A k``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import mpmath
import numpy as np

from .frame import EigenFrame, HyperbolicMatrix, eigenframe

TWO_PI = 2.0 * math.pi


class NoConvergence(RuntimeError):
    """The inverse contraction iteration could not reach the requested tolerance."""


class DepthOverflow(ValueError):
    """A requested orbit depth exceeds the configured maximum."""


@dataclass(frozen=True)
class FourierTerm:
    """One frequency of the displacement:
    ``(cx cos t + sx sin t, cy cos t + sy sin t)`` with ``t = 2 pi <k, x>``."""

    k: tuple[int, int]
    cx: float = 0.0
    sx: float = 0.0
    cy: float = 0.0
    sy: float = 0.0

    def __post_init__(self):
        k = tuple(self.k)
        if len(k) != 2 or not all(isinstance(v, (int, np.integer)) and not isinstance(v, bool) for v in k):
            raise ValueError(f"frequency {self.k!r} must be a pair of integers")
        object.__setattr__(self, "k", (int(k[0]), int(k[1])))
        for name in ("cx", "sx", "cy", "sy"):
            value = float(getattr(self, name))
            if not math.isfinite(value):
                raise ValueError(f"amplitude {name} must be finite")
            object.__setattr__(self, name, value)

    @property
    def amplitudes(self) -> tuple[float, float]:
        """Per-component amplitude bounds ``(hypot(cx, sx), hypot(cy, sy))``."""
        return math.hypot(self.cx, self.sx), math.hypot(self.cy, self.sy)

    def to_dict(self) -> dict:
        return {"k": list(self.k), "cx": self.cx, "sx": self.sx, "cy": self.cy, "sy": self.sy}


@dataclass(frozen=True)
class Perturbation:
    terms: tuple[FourierTerm, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "terms", tuple(self.terms))

    @classmethod
    def from_dicts(cls, items: Iterable[dict]) -> Perturbation:
        return cls(tuple(FourierTerm(k=tuple(d["k"]), cx=d.get("cx", 0.0), sx=d.get("sx", 0.0),
                                     cy=d.get("cy", 0.0), sy=d.get("sy", 0.0)) for d in items))

    def __call__(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        out = np.zeros_like(x)
        for t in self.terms:
            phase = TWO_PI * (t.k[0] * x[..., 0] + t.k[1] * x[..., 1])
            c, s = np.cos(phase), np.sin(phase)
            out[..., 0] += t.cx * c + t.sx * s
            out[..., 1] += t.cy * c + t.sy * s
        return out

    @property
    def is_zero(self) -> bool:
        return all(t.cx == t.sx == t.cy == t.sy == 0.0 for t in self.terms)

    @property
    def is_odd(self) -> bool:
        return all(t.cx == 0.0 and t.cy == 0.0 for t in self.terms)

    def jacobian_bound(self) -> np.ndarray:
        """Entrywise bound on ``|dp_i/dx_j|`` over the whole plane."""
        bound = np.zeros((2, 2))
        for t in self.terms:
            amp = np.array(t.amplitudes)
            bound += TWO_PI * np.outer(amp, np.abs(t.k))
        return bound

    def lipschitz_bound(self) -> float:
        """Certified Euclidean Lipschitz constant (Frobenius norm of :meth:`jacobian_bound`)."""
        return float(np.linalg.norm(self.jacobian_bound()))

    def termwise_lipschitz_bound(self) -> float:
        """The cruder bound ``sum 2 pi |k| (|cx| + |sx| + |cy| + |sy|)``."""
        return sum(TWO_PI * math.hypot(*t.k) * (abs(t.cx) + abs(t.sx) + abs(t.cy) + abs(t.sy))
                   for t in self.terms)

    def covector_lipschitz_bound(self, w) -> float:
        """Lipschitz bound for the scalar function ``x -> w . p(x)``."""
        w = np.asarray(w, dtype=float)
        grad = np.zeros(2)
        for t in self.terms:
            amp = math.hypot(w[0] * t.cx + w[1] * t.cy, w[0] * t.sx + w[1] * t.sy)
            grad += amp * np.abs(t.k)
        return TWO_PI * float(np.linalg.norm(grad))

    def sup_bound(self) -> float:
        amps = np.array([t.amplitudes for t in self.terms]).reshape(-1, 2)
        return float(np.linalg.norm(amps.sum(axis=0)))

    def to_dicts(self) -> list[dict]:
        return [t.to_dict() for t in self.terms]

    def evaluate_mp(self, z: Sequence) -> tuple:
        """``p(z)`` in the current mpmath precision."""
        px = mpmath.mpf(0)
        py = mpmath.mpf(0)
        for t in self.terms:
            phase = 2 * mpmath.pi * (t.k[0] * z[0] + t.k[1] * z[1])
            c, s = mpmath.cos(phase), mpmath.sin(phase)
            px += t.cx * c + t.sx * s
            py += t.cy * c + t.sy * s
        return px, py


@dataclass(frozen=True)
class CertifiedValue:
    """A value whose true counterpart lies within ``error_radius``."""

    value: float
    error_radius: float = 0.0

    @property
    def upper(self):
        return self.value + self.error_radius

    @property
    def lower(self):
        return self.value - self.error_radius


@dataclass(frozen=True)
class PerturbedLift:
    """The lift ``f = A + p``.

    The inverse tolerance is relative: ``apply_inverse`` guarantees
    ``|f(y) - x| <= inverse_tolerance * max(1, |x|_inf)``.
    """

    matrix: HyperbolicMatrix
    perturbation: Perturbation = field(default_factory=Perturbation)
    inverse_tolerance: float = 1e-12
    inverse_max_iterations: int = 1000
    max_depth: int = 200
    frame: EigenFrame = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "frame", eigenframe(self.matrix))
        if not self.inverse_tolerance > 0:
            raise ValueError("inverse_tolerance must be positive")
        if self.inverse_max_iterations < 1:
            raise ValueError("inverse_max_iterations must be at least 1")
        lip = self.perturbation.lipschitz_bound()
        if not lip < self.sigma_min:
            raise ValueError(
                f"perturbation Lipschitz bound {lip:.6g} is not below the smallest "
                f"singular value {self.sigma_min:.6g} of A; the lift may not be invertible"
            )

    @property
    def A(self) -> np.ndarray:
        return self.matrix.array

    @property
    def A_inv(self) -> np.ndarray:
        return self.matrix.inverse_array

    @property
    def sigma_min(self) -> float:
        return float(np.linalg.svd(self.A, compute_uv=False)[-1])

    @property
    def lipschitz(self) -> float:
        """Certified Lipschitz constant of ``f`` itself, ``|A|_2 + Lip(p)``."""
        return float(np.linalg.norm(self.A, 2)) + self.perturbation.lipschitz_bound()

    @property
    def contraction_factor(self) -> float:
        """Certified contraction rate of ``y -> A^-1 (x - p(y))``."""
        lip = self.perturbation.lipschitz_bound()
        operator = float(np.linalg.norm(self.A_inv, 2)) * lip
        entrywise = float(np.linalg.norm(np.abs(self.A_inv) @ self.perturbation.jacobian_bound()))
        return min(operator, entrywise)

    def apply(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        return x @ self.A.T + self.perturbation(x)

    def apply_model(self, x) -> np.ndarray:
        return np.asarray(x, dtype=float) @ self.A.T

    def apply_model_inverse(self, x) -> np.ndarray:
        return np.asarray(x, dtype=float) @ self.A_inv.T

    def inverse_iterations(self, initial_step: float, tolerance: float) -> int:
        """Iteration count that certifies both ``|y - y*|`` and the residual below ``tolerance``."""
        q = self.contraction_factor
        if initial_step == 0.0 or q == 0.0:
            return 1
        lip = self.perturbation.lipschitz_bound()
        log_q = math.log(q)
        by_error = math.log(tolerance * (1 - q) / initial_step) / log_q
        by_residual = 1 + math.log(tolerance / (lip * initial_step)) / log_q
        return max(1, math.ceil(max(by_error, by_residual)))

    def apply_inverse(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        A_inv_T = self.A_inv.T
        y0 = x @ A_inv_T
        y = (x - self.perturbation(y0)) @ A_inv_T
        step = np.linalg.norm(y - y0, axis=-1)
        scale = np.maximum(1.0, np.max(np.abs(x), axis=-1))
        tol = self.inverse_tolerance * scale
        # the count depends only on step / tolerance, so normalise per point
        count = self.inverse_iterations(float(np.max(step / tol)) if step.size else 0.0, 1.0)
        if count > self.inverse_max_iterations:
            raise NoConvergence(
                f"inverse needs {count} iterations, more than the allowed {self.inverse_max_iterations}"
            )
        for _ in range(count - 1):
            y = (x - self.perturbation(y)) @ A_inv_T
        residual = np.linalg.norm(self.apply(y) - x, axis=-1)
        if np.any(residual > tol):
            worst = float(np.max(residual / tol))
            raise NoConvergence(f"inverse residual is {worst:.3g} times the tolerance")
        return y

    def iterate(self, x, n: int) -> np.ndarray:
        if abs(n) > self.max_depth:
            raise DepthOverflow(f"|n| = {abs(n)} exceeds max depth {self.max_depth}")
        step = self.apply if n > 0 else self.apply_inverse
        y = np.asarray(x, dtype=float)
        for _ in range(abs(n)):
            y = step(y)
        return y

    def coordinate_orbit(self, x, n: int) -> tuple[np.ndarray, np.ndarray]:
        """Leaf coordinates ``(coord_u, coord_s)`` of ``f^j(x)`` for ``j = 0..n`` (or ``0..-n``).

        Points are kept as a torus residue in ``[0, 1)^2`` plus an integer
        deck part, whose covector coordinates follow the exact recursions
        ``nu_u(A k) = mu nu_u(k)`` and ``nu_s(A k) = lam nu_s(k)``.  This
        keeps the sine arguments small however far the orbit travels.
        """
        if abs(n) > self.max_depth:
            raise DepthOverflow(f"|n| = {abs(n)} exceeds max depth {self.max_depth}")
        fr = self.frame
        forward = n >= 0
        grow_u, grow_s = (fr.mu, fr.lam) if forward else (fr.lam, fr.mu)
        step = self.apply if forward else self.apply_inverse

        x = np.asarray(x, dtype=float)
        deck = np.floor(x)
        r = x - deck
        U = deck @ fr.nu_u
        S = deck @ fr.nu_s
        cu = [r @ fr.nu_u + U]
        cs = [r @ fr.nu_s + S]
        for _ in range(abs(n)):
            y = step(r)
            j = np.floor(y)
            r = y - j
            U = grow_u * U + j @ fr.nu_u
            S = grow_s * S + j @ fr.nu_s
            cu.append(r @ fr.nu_u + U)
            cs.append(r @ fr.nu_s + S)
        return np.array(cu), np.array(cs)

    # high-precision path, used by independent oracles

    def apply_mp(self, z: Sequence) -> tuple:
        m = self.matrix
        px, py = self.perturbation.evaluate_mp(z)
        return (m.a * z[0] + m.b * z[1] + px, m.c * z[0] + m.d * z[1] + py)

    def orbit_mp(self, z: Sequence, n: int) -> list[tuple]:
        """Forward orbit ``z, f(z), ..., f^n(z)`` in the current mpmath precision."""
        if n < 0:
            raise ValueError("orbit_mp only iterates forward")
        z = (mpmath.mpf(z[0]), mpmath.mpf(z[1]))
        out = [z]
        for _ in range(n):
            z = self.apply_mp(z)
            out.append(z)
        return out


def displacement_fields(lift: PerturbedLift, y) -> tuple[np.ndarray, np.ndarray]:
    """Closed-form ``d(f(y), A y)`` and ``d(f^-1(x), A^-1 x)`` where ``x = f(y)``."""
    fr = lift.frame
    p = lift.perturbation(y)
    a = np.abs(p @ fr.nu_s)
    b = np.abs(p @ fr.nu_u)
    return a + b, fr.mu * a + fr.lam * b


def shadowing_constant(lift: PerturbedLift, grid_resolution: int, chunk_rows: int = 256) -> CertifiedValue:
    """Certified upper bound for ``sup_x max(d(f x, A x), d(f^-1 x, A^-1 x))``.

    ``value`` is the maximum over the ``grid_resolution``-square grid of the
    unit square and ``value + error_radius`` bounds the supremum over the
    whole plane, using periodicity and a Lipschitz slack for the gaps
    between grid points.
    """
    if grid_resolution < 2:
        raise ValueError("grid_resolution must be at least 2")
    fr = lift.frame
    g = np.arange(grid_resolution) / grid_resolution
    fwd_max = bwd_max = 0.0
    for start in range(0, grid_resolution, chunk_rows):
        X = np.stack(np.meshgrid(g[start:start + chunk_rows], g, indexing="ij"), axis=-1)
        fwd, bwd = displacement_fields(lift, X)
        fwd_max = max(fwd_max, float(fwd.max()))
        bwd_max = max(bwd_max, float(bwd.max()))

    pert = lift.perturbation
    lip_s = pert.covector_lipschitz_bound(fr.nu_s)
    lip_u = pert.covector_lipschitz_bound(fr.nu_u)
    reach = math.sqrt(2.0) / 2.0 / grid_resolution
    upper = max(fwd_max + (lip_s + lip_u) * reach, bwd_max + (fr.mu * lip_s + fr.lam * lip_u) * reach)
    value = max(fwd_max, bwd_max)
    return CertifiedValue(value, upper - value)

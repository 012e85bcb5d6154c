"""Linear-model geometry for a hyperbolic toral automorphism.

Leaves of the stable foliation are the lines ``nu_u(x) = const`` and leaves of
the unstable foliation are the lines ``nu_s(x) = const``.  The transverse
measures are the absolute values of covector displacements, which gives the
pseudo-distances ``dist_u`` and ``dist_s`` and the distance ``dist``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Literal

import numpy as np

Kind = Literal["stable", "unstable"]


class NotHyperbolic(ValueError):
    """Raised for an integer matrix that is not in SL(2, Z) with trace >= 3."""


@dataclass(frozen=True)
class HyperbolicMatrix:
    a: int
    b: int
    c: int
    d: int

    def __post_init__(self):
        for name in "abcd":
            value = getattr(self, name)
            if isinstance(value, bool) or not isinstance(value, (int, np.integer)):
                raise NotHyperbolic(f"entry {name}={value!r} is not an integer")
        det = self.a * self.d - self.b * self.c
        if det != 1:
            raise NotHyperbolic(f"determinant is {det}, expected 1")
        if self.trace < 3:
            raise NotHyperbolic(f"trace is {self.trace}, expected >= 3")

    @classmethod
    def from_rows(cls, rows) -> HyperbolicMatrix:
        (a, b), (c, d) = rows
        return cls(a, b, c, d)

    @property
    def trace(self) -> int:
        return self.a + self.d

    @property
    def array(self) -> np.ndarray:
        return np.array([[self.a, self.b], [self.c, self.d]], dtype=float)

    @property
    def inverse_array(self) -> np.ndarray:
        # det = 1, so the inverse is integral
        return np.array([[self.d, -self.b], [-self.c, self.a]], dtype=float)

    def rows(self) -> list[list[int]]:
        return [[self.a, self.b], [self.c, self.d]]


def _unit(v: np.ndarray) -> np.ndarray:
    v = v / np.linalg.norm(v)
    # deterministic orientation: first nonzero component positive
    if v[0] < 0 or (v[0] == 0 and v[1] < 0):
        v = -v
    return v


def _eigvec(p: float, q: float, r: float, s: float, t: float) -> np.ndarray:
    # kernel of [[p - t, q], [r, s - t]]; pick the better conditioned of the two row solutions
    first = np.array([q, t - p])
    second = np.array([t - s, r])
    return first if np.linalg.norm(first) >= np.linalg.norm(second) else second


@dataclass(frozen=True)
class EigenFrame:
    """Eigen-data of a hyperbolic matrix.

    ``mu`` is the dilatation and ``lam = 1/mu`` the contraction rate.
    ``v_u``/``v_s`` are right eigenvectors and ``nu_u``/``nu_s`` the left
    eigen-covectors, all of unit Euclidean norm.
    """

    mu: float
    lam: float
    v_u: np.ndarray
    v_s: np.ndarray
    nu_u: np.ndarray
    nu_s: np.ndarray

    @property
    def lower_norm_constant(self) -> float:
        """Largest c with ``c * |x - y| <= dist(x, y)``."""
        return abs(self.nu_u[0] * self.nu_s[1] - self.nu_u[1] * self.nu_s[0])

    @property
    def upper_norm_constant(self) -> float:
        """Smallest c with ``dist(x, y) <= c * |x - y|``."""
        return max(np.linalg.norm(self.nu_u + self.nu_s), np.linalg.norm(self.nu_u - self.nu_s))


def eigenframe(matrix: HyperbolicMatrix) -> EigenFrame:
    a, b, c, d = matrix.a, matrix.b, matrix.c, matrix.d
    tr = matrix.trace
    mu = (tr + math.sqrt(tr * tr - 4)) / 2
    lam = 1.0 / mu
    v_u = _unit(_eigvec(a, b, c, d, mu))
    v_s = _unit(_eigvec(a, b, c, d, lam))
    # left eigenvectors are right eigenvectors of the transpose
    nu_u = _unit(_eigvec(a, c, b, d, mu))
    nu_s = _unit(_eigvec(a, c, b, d, lam))
    return EigenFrame(mu=mu, lam=lam, v_u=v_u, v_s=v_s, nu_u=nu_u, nu_s=nu_s)


def coord_u(frame: EigenFrame, x) -> np.ndarray | float:
    """Transverse coordinate of the stable leaf through ``x``."""
    return np.asarray(x, dtype=float) @ frame.nu_u


def coord_s(frame: EigenFrame, x) -> np.ndarray | float:
    """Transverse coordinate of the unstable leaf through ``x``."""
    return np.asarray(x, dtype=float) @ frame.nu_s


def dist_u(frame: EigenFrame, x, y):
    return np.abs(coord_u(frame, np.asarray(x, dtype=float) - np.asarray(y, dtype=float)))


def dist_s(frame: EigenFrame, x, y):
    return np.abs(coord_s(frame, np.asarray(x, dtype=float) - np.asarray(y, dtype=float)))


def dist(frame: EigenFrame, x, y):
    return dist_s(frame, x, y) + dist_u(frame, x, y)


@dataclass(frozen=True)
class LeafCoord:
    """A leaf of the stable (``nu_u`` level set) or unstable (``nu_s`` level set) foliation."""

    kind: Kind
    value: float

    def __post_init__(self):
        if self.kind not in ("stable", "unstable"):
            raise ValueError(f"unknown leaf kind {self.kind!r}")

    def image(self, frame: EigenFrame, power: int = 1) -> LeafCoord:
        """Leaf coordinate of the image under ``A**power``."""
        factor = frame.mu if self.kind == "stable" else frame.lam
        return LeafCoord(self.kind, self.value * factor**power)

    def translate(self, frame: EigenFrame, k) -> LeafCoord:
        """Leaf coordinate of the image under the deck translation by integer vector ``k``."""
        cov = frame.nu_u if self.kind == "stable" else frame.nu_s
        return LeafCoord(self.kind, self.value + float(np.asarray(k, dtype=float) @ cov))


def transverse_coord(frame: EigenFrame, kind: Kind, x):
    return coord_u(frame, x) if kind == "stable" else coord_s(frame, x)


def leaf_neighborhood_contains(frame: EigenFrame, leaf: LeafCoord, C: float, x):
    """Membership in ``L_C``: points at transverse pseudo-distance at most ``C`` from ``leaf``."""
    if C < 0:
        raise ValueError("C must be non-negative")
    return np.abs(transverse_coord(frame, leaf.kind, x) - leaf.value) <= C

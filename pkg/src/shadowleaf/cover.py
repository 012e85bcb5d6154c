"""Descent of the generalized partitions through the elliptic involution.

The torus double-covers the sphere with four marked points via
``x -> -x``; the branch points are the half-integer points.  When the
perturbation is odd, the lift commutes with the involution, so the
generalized leaf of coordinate ``u0`` is carried to that of ``-u0`` and the
partition passes to the quotient.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .dynamics import FourierTerm, Perturbation, PerturbedLift
from .frame import HyperbolicMatrix, LeafCoord
from .report import PropertyRecord, VerificationReport
from .shadowing import ShadowConstant, membership_depth, theta_s, theta_u

BRANCH_POINTS = np.array([[0.0, 0.0], [0.5, 0.0], [0.0, 0.5], [0.5, 0.5]])


class EquivarianceViolation(AssertionError):
    """The generalized partition is not symmetric under ``x -> -x``."""

    def __init__(self, message: str, worst_sample, report: VerificationReport):
        super().__init__(message)
        self.worst_sample = worst_sample
        self.report = report


def symmetrize(p: Perturbation) -> Perturbation:
    """Odd part ``(p(x) - p(-x)) / 2``: the sine amplitudes only."""
    return Perturbation(tuple(FourierTerm(t.k, sx=t.sx, sy=t.sy) for t in p.terms))


@dataclass(frozen=True)
class InvolutionModel:
    lift: PerturbedLift

    @classmethod
    def from_perturbation(cls, matrix: HyperbolicMatrix, p: Perturbation, **lift_options) -> InvolutionModel:
        return cls(PerturbedLift(matrix, symmetrize(p), **lift_options))

    @property
    def is_odd(self) -> bool:
        return self.lift.perturbation.is_odd

    def involution(self, x) -> np.ndarray:
        return -np.asarray(x, dtype=float)


def quotient_representative(x) -> np.ndarray:
    """Canonical torus point of the orbit ``{x, -x}``: the lexicographically smaller residue."""
    x = np.asarray(x, dtype=float)
    # mod can round tiny negatives up to exactly 1.0
    a = np.mod(x, 1.0) % 1.0
    b = np.mod(-x, 1.0) % 1.0
    take_b = (b[..., 0] < a[..., 0]) | ((b[..., 0] == a[..., 0]) & (b[..., 1] < a[..., 1]))
    return np.where(take_b[..., None], b, a)


def check_descent(model: InvolutionModel, sc: ShadowConstant, sample_count: int, tol: float,
                  seed: int = 0, pairing_depth: int = 4) -> VerificationReport:
    """Check that both generalized partitions are symmetric under ``x -> -x``.

    Returns the report on success and raises :class:`EquivarianceViolation`
    carrying it otherwise.
    """
    lift = model.lift
    rng = np.random.default_rng(seed)
    x = rng.random((sample_count, 2))
    records = []
    worst_sample = None
    worst_ratio = -np.inf

    for kind, ref, theta in (("stable", "thm2.descent", theta_s), ("unstable", "thm2.descent", theta_u)):
        plus = theta(lift, sc, x, tol).coord.value
        minus = theta(lift, sc, -x, tol).coord.value
        residual = np.abs(plus + minus)
        i = int(np.argmax(residual))
        if residual[i] / (2 * tol) > worst_ratio:
            worst_ratio = residual[i] / (2 * tol)
            worst_sample = x[i].tolist()
        records.append(PropertyRecord(f"descent_{kind}", ref, sample_count, float(residual[i]), 2 * tol))

    # odd lift plus deck equivariance pins the half-integer points: theta(b) = coord(b)
    fr = lift.frame
    for kind, fn, w in (("stable", theta_s, fr.nu_u), ("unstable", theta_u, fr.nu_s)):
        at_branch = fn(lift, sc, BRANCH_POINTS, tol).coord.value
        records.append(PropertyRecord(f"branch_points_{kind}", "thm2.descent", len(BRANCH_POINTS),
                                      float(np.max(np.abs(at_branch - BRANCH_POINTS @ w))), 2 * tol))

    # x lies in the depth-N band of u0 exactly when -x lies in the band of -u0
    u0 = theta_s(lift, sc, x[: min(sample_count, 50)], tol).coord.value
    probes = x[: len(u0)] + 0.05 * lift.frame.v_u
    mismatches = 0
    for point, value in zip(probes, u0):
        here = bool(membership_depth(lift, sc, point, LeafCoord("stable", float(value)), pairing_depth))
        there = bool(membership_depth(lift, sc, -point, LeafCoord("stable", float(-value)), pairing_depth))
        mismatches += here != there
    records.append(PropertyRecord("leaf_pairing", "thm2.descent", len(u0), float(mismatches), 0.0))

    report = VerificationReport(records)
    if not report.passed:
        raise EquivarianceViolation(
            f"partition is not involution-symmetric (worst residual {worst_ratio:.3g} x threshold)",
            worst_sample,
            report,
        )
    return report

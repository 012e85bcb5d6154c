"""Generalized stable/unstable partitions for perturbed hyperbolic toral maps."""

from .cover import EquivarianceViolation, InvolutionModel, check_descent, quotient_representative, symmetrize
from .dynamics import (
    CertifiedValue,
    DepthOverflow,
    FourierTerm,
    NoConvergence,
    Perturbation,
    PerturbedLift,
    shadowing_constant,
)
from .frame import (
    EigenFrame,
    HyperbolicMatrix,
    LeafCoord,
    NotHyperbolic,
    coord_s,
    coord_u,
    dist,
    dist_s,
    dist_u,
    eigenframe,
    leaf_neighborhood_contains,
)
from .report import PropertyRecord, VerificationReport
from .shadowing import (
    GeneralizedLeafId,
    LeafInterval,
    ShadowConstant,
    choose_shadow_constant,
    leaf_interval,
    leaf_sample,
    membership_depth,
    orbit_divergence,
    semiconjugacy,
    theta_s,
    theta_u,
)

__version__ = "0.1.0"

"""Numerical verification of L_p Brunn-Minkowski type inequalities.

Set arithmetic (M-additions, L_p sums, hull volumes), calculus of
s-concave grid functions (sup-convolutions, scalings, lifts) and a
harness that checks the Brunn-Minkowski family of inequalities on
concrete inputs, producing reproducible reports.
"""

from .errors import ConfigurationError, DomainError, LplabError
from .functions import (
    GridFunction,
    LiftedBody,
    Profile,
    alpha_mean,
    is_s_concave,
    lift_membership,
    lift_volume,
    scale_fn,
    sup_conv_bruteforce,
    sup_conv_m,
    sup_conv_p,
)
from .harness import (
    FunctionalLpConfig,
    check_sup_conv_concavity,
    check_lift_inclusion,
    construct_functional_sum,
    s_tilde,
    verify_bbl,
    verify_bm,
    verify_lift_volume,
    verify_lp_bm,
    verify_lp_minkowski,
    verify_pl,
    verify_functional_lp_bm,
)
from .numerics import Box, Grid, RandomSource, integrate_grid, interpolate, kappa, mc_volume, refinement_sweep
from .report import VerificationReport
from .sets import (
    CoefficientSet,
    ConvexPolytope,
    DiscreteSet,
    lp_pointwise_sum,
    lp_support_sum,
    m_add,
    support_function,
    volume_hull,
)

__version__ = "0.1.0"

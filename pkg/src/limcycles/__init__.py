"""Limit-cycle detection, stability operators and uniqueness-criterion checks for planar systems."""

from .expr import Expr, ParseError, UnknownIdentifierError, differentiate, parse
from .field import (
    LienardSpec,
    PlanarField,
    TransformedSpec,
    big_F,
    big_G,
    conti_filippov,
    energy,
    lienard_plane,
    phase_plane,
    planar_field,
)
from .integrate import POSITIVE_Y_AXIS, Section, Trajectory, integrate, next_crossing
from .cycles import Cycle, InconsistentStabilityError, classify, find_cycles, is_star_shaped, return_map, scan_cycles
from .operators import alpha, angular_speed, divergence_integral, nu, nu_integral, nu_lienard, sign_scan
from .criteria import (
    CriterionReport,
    HomogeneousFamilySpec,
    check_cor1,
    check_thm1,
    check_thm2,
    check_thm3,
    check_thm4,
    check_thm5,
    check_thm6,
)
from .gallery import gallery, get_system

__version__ = "0.1.0"

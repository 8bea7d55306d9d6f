"""Symbolic dynamics toolkit: subshifts, beta-shifts, pressure, dimension and orbit complexity."""

__version__ = "0.1.0"

from .errors import *  # noqa: F401,F403
from .exact import QuadNumber, RationalInterval
from .words import LanguageSlice, complexity_function, complexity_table, enumerate_language, language_counts
from .shifts import (
    Automaton,
    GapSet,
    SftSpec,
    SubshiftSpec,
    build_full_shift,
    build_s_gap,
    build_sft,
    decompose_word,
    gluing_word,
)
from .beta import BetaSpec, build_beta_shift, expansion_of_one, full_word_verdict, is_admissible_beta, is_full_word
from .metric import Potential, birkhoff_sum, build_cover, d_phi, d_phi_rho, recode, stratify, variation
from .thermo import (
    MarkovMeasureSpec,
    entropy_estimate,
    log_z_n,
    measure_dimension,
    pressure_gap_check,
    solve_dimension_gamma,
)
from .forge import (
    complexity_upper_bound,
    construct_dense_point,
    construct_subsystem_step1,
    generate_prefix,
    plan_intermediate_entropy,
)
from .probe import furstenberg_profile, multiplicative_dependence, orbit_closure_profile
from .config import ExperimentConfig, parse_config

"""mirlab: convex approximations of two-stage mixed-integer recourse models.

Exact rational oracles for the second-stage value function and its LP
relaxation, dual-basis machinery, periodic-remainder analysis, two convex
approximations with Monte Carlo estimators, computable error-bound constants
and certificates, plus a CLI for validation / evaluation / sweeps / reports.
"""

from .instance import Instance, ValidationReport, load_instance, save_instance, scale_costs, validate_instance
from .exact import LpSolution, MipSolution, solve_lp, solve_mip, check_recourse_assumptions
from .bases import DualBasis, enumerate_bases, dual_feasible_indices, dual_vertex, cone_margin_contains, lp_by_enumeration
from .periodic import (PeriodicComponent, ReducedCosts, build_components, gamma2_constant,
                       gamma_mean, gomory_value, psi_value, qbar_between, reduced_costs)
from .distributions import (DistributionSpec, draw_scenario, expected_l1_norm,
                            tv_conditional_sum, tv_numeric)
from .approx import Estimate, estimate_recourse, sup_error_on_grid, v_alpha, v_hat
from .bounds import (BoundConstants, ShiftCertificate, bound_constants, cook_gamma1,
                     empirical_shift, gap_shift_vector, parametric_bound, scaling_ratio_table)
from .sir import SirSpec, sir_as_instance, sir_expected_recourse, sir_value

__version__ = "0.1.0"

"""Exact and Monte Carlo verification tools for heat semigroups on the 3D model groups G(rho)."""

from .estimators import (
    EstimateReport,
    InequalityReport,
    MCConfig,
    check_decay,
    check_gradient_bound,
    check_ibp,
    check_logsobolev,
    check_poincare,
    estimate_dptf,
    estimate_ptf,
)
from .functions import get_function
from .geometry import ModelSpace, build_model, curvature_bounds, parse_model, tensor_set
from .pbw import PBWAlgebra, box_matrix, verify_commutation
from .polycalc import HeisPoly, OneFormPoly, exterior_d, heat_apply, verify_bw
from .report import CheckResult, SuiteReport, emit_report
from .sde import PathConfig, simulate
from .suite import selftest

__version__ = "0.1.0"

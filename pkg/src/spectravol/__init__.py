"""Volumes of spectrahedra via the max-entropy (Wishart) approximation."""

from .center import CenterResult, SolverOptions, analytic_center, find_strictly_feasible, stationarity_check
from .errors import *  # noqa: F401,F403
from .maxent import EntropyValue, WishartMaxEnt, phi, phi_gradient, verify_duality
from .spectra import Spectrahedron, build_B, orthonormalize, validate
from .volume import (
    ConditionReport,
    VolumeReport,
    approx_log_volume,
    asymptotic_log_volume_scp,
    check_conditions,
    exact_log_volume_one_constraint,
)

__version__ = "0.1.0"

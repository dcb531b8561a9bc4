"""Periodic finite-difference lab for compressible Navier-Stokes with
density-dependent viscosity ``nu(rho) = mu rho``, its augmented
kappa-entropy form, and relative-entropy diagnostics."""
from .dynamics import SchemeConfig, Trajectory, cfl_dt, rhs_augmented, rhs_primitive, simulate, step_rk4
from .entropy import kappa_entropy, relative_entropy, relative_inequality_audit, identity5_residual
from .errors import BlowUpError, ConfigError, DomainError, GridMismatchError, KappaFlowError, VacuumError
from .grid import Grid
from .states import AugState, Params, PrimState, to_augmented, to_primitive
from .thermo import PressureLaw

__version__ = "0.1.0"

__all__ = [
    "AugState", "BlowUpError", "ConfigError", "DomainError", "Grid", "GridMismatchError",
    "KappaFlowError", "Params", "PressureLaw", "PrimState", "SchemeConfig", "Trajectory",
    "VacuumError", "cfl_dt", "identity5_residual", "kappa_entropy", "relative_entropy",
    "relative_inequality_audit", "rhs_augmented", "rhs_primitive", "simulate", "step_rk4",
    "to_augmented", "to_primitive",
]

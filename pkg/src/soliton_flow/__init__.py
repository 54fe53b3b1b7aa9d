"""Simulation and verification tools for cohomogeneity-one expanding gradient
Ricci solitons: arclength and phase-space integration, critical points,
runtime checks of the structural inequalities, and asymptotic fits."""

from .errors import (ConfigError, CoordinateBreakdownError, ModelMismatchError, SingularStateError,
                     SolitonFlowError)
from .integrator import IntegratorConfig, InlineMonitor, Trajectory, integrate, rk4_step
from .model import Normalization, OrbitModel, preset, total_dim, validate
from .phase import (PhaseState, critical_points, derived, einstein_residuals, linearize, physical_from_phase,
                    reconstruct_y1, rhs_phase, rhs_subsystem)
from .physical import (PhysicalState, conserved, phase_from_physical, rhs_two_summand, rhs_warped,
                       series_startup, startup_series)

__version__ = "0.1.0"

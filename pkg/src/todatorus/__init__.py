"""Coupled singular mean-field energies on the flat unit-area torus.

Spectral calculus on the torus, weight synthesis from periodic Green's
functions, the two-component exponential energy with its critical
parameters, concentrating test-function sweeps, preconditioned
minimization, and blow-up diagnostics.
"""

from .analysis import (BlowupScenario, ConcentrationRecord, DiskDeficit, classify_blowup,
                       concentration_mass, disk_radii, limit_profile_residual,
                       local_mt_deficit_disk, pohozaev_residual, pohozaev_roots,
                       truncated_log_profile)
from .functional import (EnergyBreakdown, RhoParams, ScalarDeficit, StatePair, critical_rho,
                         grad_j_rho, j_rho, scalar_mt_deficit)
from .minimize import (IterationRecord, MinimizeOptions, MinimizeReport, continuation,
                       detect_divergence, minimize_j)
from .surface import Field, Point, SurfaceGrid, build_grid, random_smooth_field, torus_distance
from .testfns import (BubbleParams, SlopeFit, SweepRecord, SweepReport, default_bubble_center,
                      fit_log_slope, lambda_sweep, scalar_bubble, toda_bubble_pair)
from .weights import (SingularConfig, WeightField, alpha_at, build_weight, flat_weight,
                      green_function, snap_config, tilde_alpha)

__version__ = "0.1.0"

__all__ = [
    "__version__",
    "BlowupScenario", "ConcentrationRecord", "DiskDeficit", "classify_blowup",
    "concentration_mass", "disk_radii", "limit_profile_residual", "local_mt_deficit_disk",
    "pohozaev_residual", "pohozaev_roots", "truncated_log_profile",
    "EnergyBreakdown", "RhoParams", "ScalarDeficit", "StatePair", "critical_rho",
    "grad_j_rho", "j_rho", "scalar_mt_deficit",
    "IterationRecord", "MinimizeOptions", "MinimizeReport", "continuation",
    "detect_divergence", "minimize_j",
    "Field", "Point", "SurfaceGrid", "build_grid", "random_smooth_field", "torus_distance",
    "BubbleParams", "SlopeFit", "SweepRecord", "SweepReport", "default_bubble_center",
    "fit_log_slope", "lambda_sweep", "scalar_bubble", "toda_bubble_pair",
    "SingularConfig", "WeightField", "alpha_at", "build_weight", "flat_weight",
    "green_function", "snap_config", "tilde_alpha",
]

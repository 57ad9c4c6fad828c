"""Schrodinger bridges on the compact Lie groups SO(2) and SO(3)."""

from .control import BridgeSolution, build_solution, control_at, density_at, fokker_planck_residual, propagate_potentials
from .geometry import (DensityGrid, Group, GroupGrid, exp_so3, hat, make_grid, vee, von_mises_so2,
                       von_mises_so3_class)
from .hilbert import hilbert_distance, normalize_sup, pointwise_ratio
from .semigroup import HeatKernelSO2, HeatKernelSO3, SemigroupOperator, kernel_value_so2, kernel_value_so3, semigroup
from .sinkhorn import BridgeProblem, ConvergenceReport, SchrodingerPotentials, sinkhorn_step, solve

__version__ = "0.1.0"

"""Finite-difference laboratory for Landau-de Gennes order tensors on a
square domain with a concentric square isotropic inclusion.

Layers: core (material algebra), grid (geometry and discrete operators),
kernels (numba/numpy bulk terms), solvers (Newton with deflation, gradient
flows), energy, stability (second-variation decomposition), geodesics
(well-to-well transition costs), gamma (large-domain limit energies),
symmetry (square-group deduplication), campaigns and cli (drivers).
"""

__version__ = "0.1.0"

from .core import (MaterialParams, QTensor, WellSet, ParameterError, s_plus,
                   bulk_potential, reduced_potential, reduced_potential_grad,
                   biaxiality, biaxiality_field)
from .grid import Grid, GridSpec, GeometryError, build_grid, dirichlet_values
from .solvers import (ReducedState, FullState, SolverConfig, SolutionRecord,
                      newton_solve, gradient_flow, residual_reduced,
                      residual_full, ic_wors, ic_bd, ic_esc, ic_escaped,
                      classify)
from .energy import EnergyBreakdown, energy_reduced, energy_full, rho0_sweep, rho1_sweep
from .stability import (stability_report, min_rayleigh, second_variation_v13,
                        second_variation_scalar, coeff_fields)
from .geodesics import geodesic_distance, transition_costs, cost_sweep
from .gamma import j_inf_wors, j_inf_bd, j_inf_esc, ratios, classify_regime
from .symmetry import act, dedup, GROUP_NAMES, AXIS_GROUP_NAMES
from .campaigns import deflate_campaign, escaped_continuation, flow_experiment

__all__ = [name for name in dir() if not name.startswith("_")]

"""Discrete energies and the two critical-radius sweeps.

The functional measured here is the (nondimensional) elastic-plus-bulk
energy with the bulk potential shifted so its minimum value is zero; for a
state confined to the (q1, q3) plane the two evaluations agree exactly.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import MaterialParams, reduced_potential
from .grid import build_grid
from .solvers import (ReducedState, FullState, SolverConfig, newton_solve,
                      ic_wors, ic_bd)

__all__ = ["EnergyBreakdown", "energy_reduced", "energy_full",
           "rho0_sweep", "rho1_sweep"]


@dataclass
class EnergyBreakdown:
    elastic: float
    bulk: float

    @property
    def total(self) -> float:
        return self.elastic + self.bulk


def energy_reduced(state: ReducedState, params: MaterialParams) -> EnergyBreakdown:
    """integral of |grad q1|^2 + 3 |grad q3|^2 + (lam^2/2C) F(q1, q3)."""
    g = state.grid
    q1, q3 = state.fields
    elastic = g.dirichlet_energy(q1) + 3.0 * g.dirichlet_energy(q3)
    fac = params.lambda_bar_sq / (2.0 * params.C)
    dens = fac * reduced_potential(q1, q3, params)
    bulk = g.integrate(np.where(g.domain, dens, 0.0))
    return EnergyBreakdown(elastic, bulk)


def _bulk_density_full(q: np.ndarray, params: MaterialParams) -> np.ndarray:
    q1, q2, q3, q4, q5 = q
    tr2 = 2 * q1**2 + 2 * q2**2 + 6 * q3**2 + 2 * q4**2 + 2 * q5**2
    # tr Q^3 = 3 det Q for symmetric traceless Q
    a, b, c = q1 - q3, -q1 - q3, 2 * q3
    det = (a * (b * c - q5 * q5) - q2 * (q2 * c - q5 * q4)
           + q4 * (q2 * q5 - b * q4))
    tr3 = 3.0 * det
    return (params.A / 2.0 * tr2 - params.B / 3.0 * tr3
            + params.C / 4.0 * tr2 * tr2 - params.f_min)


def energy_full(state: FullState, params: MaterialParams) -> EnergyBreakdown:
    """integral of (1/2)|grad Q|^2 + (lam^2/2C)(f_bulk - min f_bulk)."""
    g = state.grid
    norms = (2.0, 2.0, 6.0, 2.0, 2.0)
    elastic = sum(0.5 * norms[k] * g.dirichlet_energy(state.fields[k])
                  for k in range(5))
    fac = params.lambda_bar_sq / (2.0 * params.C)
    bdens = fac * _bulk_density_full(state.fields, params)
    bulk = g.integrate(np.where(g.domain, bdens, 0.0))
    return EnergyBreakdown(elastic, bulk)


# ---------------------------------------------------------------------------
# sweeps


@dataclass
class SweepPoint:
    rho: float
    rho_snapped: float
    energy_wors: float
    energy_bd: float


def rho0_sweep(params: MaterialParams, n: int, rhos, config: SolverConfig = None):
    """Energies of the cross and edge-layer solutions across hole sizes.

    Returns (points, rho0) where rho0 is the interpolated crossing of the
    two energy curves (None when the curves do not cross on the range).
    """
    config = config or SolverConfig()
    points = []
    for rho in rhos:
        g = build_grid(n, rho)
        rw = newton_solve(ic_wors(g, params), params, config, symmetrize=True,
                          init_name="wors")
        rb = newton_solve(ic_bd(g, params), params, config, init_name="bd")
        ew = rw.energy if rw.converged else np.nan
        eb = rb.energy if rb.converged else np.nan
        points.append(SweepPoint(rho, g.spec.rho_snapped, ew, eb))
    rho0 = None
    for a, b in zip(points, points[1:]):
        da = a.energy_wors - a.energy_bd
        db = b.energy_wors - b.energy_bd
        if np.isfinite(da) and np.isfinite(db) and da * db < 0:
            rho0 = a.rho_snapped + (b.rho_snapped - a.rho_snapped) * da / (da - db)
            break
    return points, rho0


def _bd_exists(params, n, rho, config) -> bool:
    g = build_grid(n, rho)
    rec = newton_solve(ic_bd(g, params), params, config)
    return rec.converged and rec.label == "BD"


def rho1_sweep(params: MaterialParams, n: int, lo: float, hi: float,
               config: SolverConfig = None, grid_tol: float = None):
    """Bisect for the hole size past which the edge-layer solution stops
    existing (Newton from ic_bd fails or falls back to the cross).

    ``lo`` must admit the edge-layer solution and ``hi`` must not; the
    bracket is refined until its width drops below grid_tol (default: one
    grid cell).  Returns (lo, hi, midpoint).
    """
    config = config or SolverConfig()
    h = 2.0 / (n - 1)
    grid_tol = grid_tol if grid_tol is not None else h
    if not _bd_exists(params, n, lo, config):
        raise ValueError(f"edge-layer solution absent at lower bracket rho={lo}")
    if _bd_exists(params, n, hi, config):
        raise ValueError(f"edge-layer solution still present at upper bracket rho={hi}")
    while hi - lo > grid_tol:
        mid = 0.5 * (lo + hi)
        if abs(mid - lo) < h / 2 or abs(hi - mid) < h / 2:
            break
        if _bd_exists(params, n, mid, config):
            lo = mid
        else:
            hi = mid
    return lo, hi, 0.5 * (lo + hi)

"""Degenerate-metric geodesic distances between bulk-potential wells.

The distance between states qa, qb in the (q1, q3) plane is
inf over paths of the integral of sqrt(F) |dq|, for the shifted potential F
that vanishes exactly at the wells.  Discretely we minimize the equivalent
quadratic action E = (N-1) * sum_j F(midpoint_j) |delta_j|^2 over interior
path points (Cauchy-Schwarz makes min sqrt(E) equal the geodesic length at
the optimum) and report d = sqrt(E).
"""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from scipy.optimize import minimize

from .core import MaterialParams, WellSet
from .kernels import path_energy_grad

__all__ = ["geodesic_distance", "transition_costs", "TransitionCosts",
           "cost_sweep", "export_path"]


def _objective(x, qa, qb, N, params):
    pts = np.empty((N, 2))
    pts[0] = qa
    pts[-1] = qb
    pts[1:-1] = x.reshape(-1, 2)
    grad = np.zeros_like(pts)
    E = path_energy_grad(pts, params, grad)
    return E, grad[1:-1].ravel()


def geodesic_distance(qa, qb, params: MaterialParams, npoints: int = 401,
                      init=None, return_path: bool = False):
    """Geodesic cost between two points of the (q1, q3) plane.

    ``init`` may supply an (npoints, 2) starting path to steer the
    minimizer toward a particular homotopy class; default is the straight
    segment.  Minimization is L-BFGS-B with the analytic gradient.
    """
    qa = np.asarray(qa, dtype=float)
    qb = np.asarray(qb, dtype=float)
    t = np.linspace(0.0, 1.0, npoints)[:, None]
    path0 = qa[None, :] * (1 - t) + qb[None, :] * t if init is None else np.asarray(init)
    if path0.shape != (npoints, 2):
        raise ValueError(f"init path must have shape ({npoints}, 2)")
    res = minimize(_objective, path0[1:-1].ravel(), args=(qa, qb, npoints, params),
                   jac=True, method="L-BFGS-B",
                   options=dict(maxiter=20000, ftol=1e-16, gtol=1e-10))
    d = float(np.sqrt(max(res.fun, 0.0)))
    if not return_path:
        return d
    path = np.empty((npoints, 2))
    path[0], path[-1] = qa, qb
    path[1:-1] = res.x.reshape(-1, 2)
    return d, path


@dataclass
class TransitionCosts:
    """The four well-to-well costs entering the large-domain energies.

    c1: origin to the positively ordered well p3
    c2: origin to a negatively ordered planar well (p1 or p2)
    c3: planar well to p3
    c4: planar well to planar well (p1 to p2)
    """
    c1: float
    c2: float
    c3: float
    c4: float

    def as_dict(self):
        return {"c1": self.c1, "c2": self.c2, "c3": self.c3, "c4": self.c4}


def transition_costs(params: MaterialParams, npoints: int = 401,
                     return_paths: bool = False):
    """Compute (c1, c2, c3, c4) for the given material parameters.

    The planar-to-planar cost c4 is minimized over both the straight
    initialization and an arc through q3 < 0, since the straight path
    passes near the saddle at the origin and belongs to a different basin.
    """
    wells = WellSet.of(params)
    sp = params.s_plus
    pairs = {
        "c1": (wells.origin, wells.p3, None),
        "c2": (wells.origin, wells.p1, None),
        "c3": (wells.p1, wells.p3, None),
    }
    out = {}
    paths = {}
    for name, (qa, qb, init) in pairs.items():
        d, path = geodesic_distance(qa, qb, params, npoints, init, return_path=True)
        out[name] = d
        paths[name] = path
    t = np.linspace(0.0, 1.0, npoints)
    arc = np.stack([-sp / 2 * np.cos(np.pi * t),
                    -sp / 6 - 0.3 * sp * np.sin(np.pi * t)], axis=1)
    best = np.inf
    for init in (None, arc):
        d, path = geodesic_distance(wells.p1, wells.p2, params, npoints, init,
                                    return_path=True)
        if d < best:
            best, paths["c4"] = d, path
    out["c4"] = best
    costs = TransitionCosts(**out)
    return (costs, paths) if return_paths else costs


def cost_sweep(ts, B: float = 0.64e4, C: float = 0.35e4,
               lambda_bar_sq: float = 200.0, npoints: int = 401):
    """Transition costs across reduced temperatures t (A = t B^2 / 27 C)."""
    rows = []
    for t in ts:
        p = MaterialParams.from_reduced_temperature(t, B=B, C=C,
                                                    lambda_bar_sq=lambda_bar_sq)
        rows.append((t, transition_costs(p, npoints)))
    return rows


def export_path(path: np.ndarray, out: Path, name: str, params: MaterialParams):
    """Write a geodesic path as CSV (t, q1, q3) with a JSON sidecar."""
    out = Path(out)
    out.mkdir(parents=True, exist_ok=True)
    csv_path = out / f"{name}.csv"
    t = np.linspace(0.0, 1.0, path.shape[0])
    with open(csv_path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["t", "q1", "q3"])
        for ti, (a, b) in zip(t, path):
            w.writerow([f"{ti:.10g}", f"{a:.10g}", f"{b:.10g}"])
    meta = {"schema": 1, "name": name, "npoints": int(path.shape[0]),
            "A": params.A, "B": params.B, "C": params.C}
    with open(out / f"{name}.json", "w") as fh:
        json.dump(meta, fh, indent=2)
    return csv_path

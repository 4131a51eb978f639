"""Second variation of the full energy around planar (q1, q3) critical
points, decomposed by perturbation subspace.

For a critical point confined to the (q1, q3) plane the second variation
block-diagonalizes: in-plane perturbations (v1, v3), and three scalar
channels v2, v4, v5.  Each channel's quadratic form is assembled as a
sparse matrix over interior nodes using the same gradient stencils and
quadrature weights as the energy, so matrix values agree with
finite differences of the full energy.  The reported index is the minimal
Rayleigh quotient mu = Q(v) / int v^2 over perturbations vanishing on the
boundary; mu < 0 (beyond tolerance) marks instability and the minimizer is
returned as a witness.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from .core import MaterialParams
from .solvers import ReducedState

__all__ = ["CoeffFields", "coeff_fields", "second_variation_v13",
           "second_variation_scalar", "min_rayleigh", "stability_report",
           "StabilityReport", "curvature_probe"]

SCALAR_CHANNELS = ("v2", "v4", "v5")


@dataclass
class CoeffFields:
    """Nodewise potential coefficients of the per-channel quadratic forms."""
    c11: np.ndarray
    c13: np.ndarray
    c33: np.ndarray
    c2: np.ndarray
    c4: np.ndarray
    c5: np.ndarray


def coeff_fields(state: ReducedState, params: MaterialParams) -> CoeffFields:
    q1, q3 = state.fields
    A, B, C = params.A, params.B, params.C
    r2 = q1 * q1 + 3 * q3 * q3
    return CoeffFields(
        c11=A / C + 2 * B / C * q3 + 6 * (q1 * q1 + q3 * q3),
        c13=4 * B / C * q1 + 24 * q1 * q3,
        c33=3 * A / C - 6 * B / C * q3 + 6 * q1 * q1 + 54 * q3 * q3,
        c2=A / C + 2 * B / C * q3 + 2 * r2,
        c4=A / C - B / C * (q1 + q3) + 2 * r2,
        c5=A / C - B / C * (q3 - q1) + 2 * r2,
    )


def second_variation_v13(state, params, v1, v3) -> float:
    """d^2/de^2 of the energy for the in-plane perturbation (v1, v3)."""
    g = state.grid
    c = coeff_fields(state, params)
    lam2 = params.lambda_bar_sq
    dens = lam2 * (c.c11 * v1 * v1 + c.c33 * v3 * v3 + c.c13 * v1 * v3)
    return (g.integrate(np.where(g.domain, dens, 0.0))
            + 2.0 * g.dirichlet_energy(v1) + 6.0 * g.dirichlet_energy(v3))


def second_variation_scalar(state, params, v, channel: str) -> float:
    """d^2/de^2 of the energy for a perturbation in one scalar channel."""
    g = state.grid
    c = coeff_fields(state, params)
    cf = {"v2": c.c2, "v4": c.c4, "v5": c.c5}[channel]
    dens = params.lambda_bar_sq * cf * v * v
    return (g.integrate(np.where(g.domain, dens, 0.0))
            + 2.0 * g.dirichlet_energy(v))


# ---------------------------------------------------------------------------
# sparse quadratic forms


def _stiffness(grid) -> sp.csr_matrix:
    """Edge-based form with v^T K v = int |grad v|^2 for interior-supported v."""
    return grid.stiffness_interior()


def _mass(grid) -> sp.dia_matrix:
    return sp.diags(grid.weights[grid.interior])


def _form_matrix(state, params, channel: str):
    """(H, W, lower_bound) with v^T H v = second variation, v^T W v = int v^2."""
    g = state.grid
    c = coeff_fields(state, params)
    lam2 = params.lambda_bar_sq
    K = _stiffness(g)
    w = g.weights[g.interior]
    if channel == "v13":
        c11, c13, c33 = (f[g.interior] for f in (c.c11, c.c13, c.c33))
        H = sp.bmat([
            [2.0 * K + sp.diags(lam2 * w * c11), sp.diags(lam2 * w * c13 / 2.0)],
            [sp.diags(lam2 * w * c13 / 2.0), 6.0 * K + sp.diags(lam2 * w * c33)],
        ], format="csc")
        W = sp.block_diag([_mass(g), _mass(g)], format="csc")
        # eigenvalues of the nodewise 2x2 potential blocks bound mu from below
        tr = c11 + c33
        disc = np.sqrt((c11 - c33) ** 2 + c13 ** 2)
        bound = lam2 * float(np.min(0.5 * (tr - disc)))
    else:
        cf = {"v2": c.c2, "v4": c.c4, "v5": c.c5}[channel][g.interior]
        H = (2.0 * K + sp.diags(lam2 * w * cf)).tocsc()
        W = _mass(g).tocsc()
        bound = lam2 * float(np.min(cf))
    return H, W, bound


def min_rayleigh(state, params, channel: str, tol: float = 0.0):
    """Minimal Rayleigh quotient and its minimizer for one channel.

    Solves the generalized symmetric eigenproblem H v = mu W v by
    shift-invert at a certified lower bound for mu, so the smallest
    eigenvalue is found reliably even deep in the negative range.
    """
    H, W, bound = _form_matrix(state, params, channel)
    sigma = bound - 1.0
    vals, vecs = spla.eigsh(H, k=1, M=W, sigma=sigma, which="LM",
                            tol=tol, maxiter=5000)
    mu = float(vals[0])
    g = state.grid
    n = g.spec.n
    if channel == "v13":
        N = g.n_interior
        v1 = np.zeros((n, n))
        v3 = np.zeros((n, n))
        v1[g.interior] = vecs[:N, 0]
        v3[g.interior] = vecs[N:, 0]
        witness = (v1, v3)
    else:
        v = np.zeros((n, n))
        v[g.interior] = vecs[:, 0]
        witness = v
    return mu, witness


@dataclass
class StabilityReport:
    mu: dict                    # channel -> minimal Rayleigh quotient
    stable: dict                # channel -> bool at tolerance
    witnesses: dict             # channel -> unstable-direction field(s)
    tol: float

    @property
    def overall_stable(self) -> bool:
        return all(self.stable.values())

    @property
    def index_channels(self):
        return tuple(ch for ch, ok in self.stable.items() if not ok)


def stability_report(state: ReducedState, params: MaterialParams,
                     tol_factor: float = 1e-6,
                     channels=("v13",) + SCALAR_CHANNELS) -> StabilityReport:
    """Per-channel minimal Rayleigh quotients for a planar critical point.

    A channel counts stable when mu >= -tol with tol = tol_factor * lam^2;
    witnesses are kept only for unstable channels.
    """
    tol = tol_factor * params.lambda_bar_sq
    mu, stable, wit = {}, {}, {}
    for ch in channels:
        m, w = min_rayleigh(state, params, ch)
        mu[ch] = m
        stable[ch] = m >= -tol
        if not stable[ch]:
            wit[ch] = w
    return StabilityReport(mu, stable, wit, tol)


def curvature_probe(state: ReducedState, params, channel: str, v,
                    eps: float = 1e-4):
    """Finite-difference check of a channel's second variation.

    Embeds the perturbation into the five-field energy and returns
    (E(u+eps v) + E(u-eps v) - 2 E(u)) / eps^2, to be compared against
    the assembled quadratic form value.
    """
    from .energy import energy_full

    comp = {"v13": (0, 2), "v2": (1,), "v4": (3,), "v5": (4,)}[channel]
    full = state.to_full()
    e0 = energy_full(full, params).total
    vs = v if channel == "v13" else (v,)
    out = []
    for sgn in (+1.0, -1.0):
        st = full.copy()
        for k, vk in zip(comp, vs):
            st.fields[k] = st.fields[k] + sgn * eps * vk
        out.append(energy_full(st, params).total)
    return (out[0] + out[1] - 2.0 * e0) / eps**2

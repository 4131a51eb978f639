"""Hot nodewise kernels: bulk terms of the Euler-Lagrange systems and the
discrete path energy used by the geodesic solver.

Each kernel has a pure-numpy implementation and a numba @njit twin.  The
numba path is the default; set LDGLAB_DISABLE_NUMBA=1 before import to force
the numpy fallback (the benchmark in benchmarks/bench_kernels.py compares
the two).
"""

from __future__ import annotations

import os

import numpy as np

USE_NUMBA = os.environ.get("LDGLAB_DISABLE_NUMBA", "0") not in ("1", "true", "yes")

if USE_NUMBA:
    try:
        from numba import njit
    except ImportError:                      # pragma: no cover
        USE_NUMBA = False

__all__ = ["bulk_reduced", "bulk_full", "path_energy_grad", "USE_NUMBA"]


# -- reduced two-field bulk term ----------------------------------------------

def _bulk_reduced_np(q1, q3, a2c, b2c, lam2, out1, out3):
    r2 = q1 * q1 + 3.0 * q3 * q3
    out1[:] = lam2 * (a2c * q1 + 2.0 * b2c * q1 * q3 + r2 * q1)
    out3[:] = lam2 * (a2c * q3 + b2c * (q1 * q1 / 3.0 - q3 * q3) + r2 * q3)


def _bulk_full_np(q, a2c, b2c, lam2, out):
    q1, q2, q3, q4, q5 = q
    tau = 2 * q1**2 + 2 * q2**2 + 6 * q3**2 + 2 * q4**2 + 2 * q5**2
    out[0] = lam2 * (a2c * q1 + b2c * (2 * q1 * q3 - 0.5 * (q4**2 - q5**2)) + 0.5 * tau * q1)
    out[1] = lam2 * (a2c * q2 + b2c * (2 * q2 * q3 - q4 * q5) + 0.5 * tau * q2)
    out[2] = lam2 * (a2c * q3 + b2c * ((q1**2 + q2**2) / 3.0 - q3**2 - (q4**2 + q5**2) / 6.0)
                     + 0.5 * tau * q3)
    out[3] = lam2 * (a2c * q4 - b2c * (q3 * q4 + q1 * q4 + q2 * q5) + 0.5 * tau * q4)
    out[4] = lam2 * (a2c * q5 - b2c * (q3 * q5 - q1 * q5 + q2 * q4) + 0.5 * tau * q5)


def _path_energy_grad_np(pts, A, B, C, fmin, grad):
    """Energy (N-1) * sum_k F(mid_k) |dq_k|^2 and its gradient w.r.t. nodes."""
    nseg = pts.shape[0] - 1
    d = pts[1:] - pts[:-1]
    mid = 0.5 * (pts[1:] + pts[:-1])
    m1, m3 = mid[:, 0], mid[:, 1]
    r2 = m1 * m1 + 3.0 * m3 * m3
    F = A * r2 + 2.0 * B * m3 * (m1 * m1 - m3 * m3) + C * r2 * r2 - fmin
    g1 = 2.0 * A * m1 + 4.0 * B * m1 * m3 + 4.0 * C * r2 * m1
    g3 = 6.0 * A * m3 + 2.0 * B * (m1 * m1 - 3.0 * m3 * m3) + 12.0 * C * r2 * m3
    seg = d[:, 0] ** 2 + d[:, 1] ** 2
    E = nseg * float(np.sum(F * seg))
    gF = np.stack([g1, g3], axis=1)
    grad[:] = 0.0
    grad[:-1] += nseg * (0.5 * gF * seg[:, None] - 2.0 * F[:, None] * d)
    grad[1:] += nseg * (0.5 * gF * seg[:, None] + 2.0 * F[:, None] * d)
    return E


if USE_NUMBA:
    _bulk_reduced_nb = njit(cache=True)(_bulk_reduced_np)

    @njit(cache=True)
    def _bulk_full_nb(q, a2c, b2c, lam2, out):  # pragma: no cover - numba
        q1, q2, q3, q4, q5 = q[0], q[1], q[2], q[3], q[4]
        tau = 2 * q1**2 + 2 * q2**2 + 6 * q3**2 + 2 * q4**2 + 2 * q5**2
        out[0] = lam2 * (a2c * q1 + b2c * (2 * q1 * q3 - 0.5 * (q4**2 - q5**2)) + 0.5 * tau * q1)
        out[1] = lam2 * (a2c * q2 + b2c * (2 * q2 * q3 - q4 * q5) + 0.5 * tau * q2)
        out[2] = lam2 * (a2c * q3 + b2c * ((q1**2 + q2**2) / 3.0 - q3**2 - (q4**2 + q5**2) / 6.0)
                         + 0.5 * tau * q3)
        out[3] = lam2 * (a2c * q4 - b2c * (q3 * q4 + q1 * q4 + q2 * q5) + 0.5 * tau * q4)
        out[4] = lam2 * (a2c * q5 - b2c * (q3 * q5 - q1 * q5 + q2 * q4) + 0.5 * tau * q5)

    @njit(cache=True)
    def _path_energy_grad_nb(pts, A, B, C, fmin, grad):  # pragma: no cover - numba
        nseg = pts.shape[0] - 1
        E = 0.0
        grad[:] = 0.0
        for k in range(nseg):
            d1 = pts[k + 1, 0] - pts[k, 0]
            d3 = pts[k + 1, 1] - pts[k, 1]
            m1 = 0.5 * (pts[k + 1, 0] + pts[k, 0])
            m3 = 0.5 * (pts[k + 1, 1] + pts[k, 1])
            r2 = m1 * m1 + 3.0 * m3 * m3
            F = A * r2 + 2.0 * B * m3 * (m1 * m1 - m3 * m3) + C * r2 * r2 - fmin
            g1 = 2.0 * A * m1 + 4.0 * B * m1 * m3 + 4.0 * C * r2 * m1
            g3 = 6.0 * A * m3 + 2.0 * B * (m1 * m1 - 3.0 * m3 * m3) + 12.0 * C * r2 * m3
            seg = d1 * d1 + d3 * d3
            E += F * seg
            grad[k, 0] += nseg * (0.5 * g1 * seg - 2.0 * F * d1)
            grad[k, 1] += nseg * (0.5 * g3 * seg - 2.0 * F * d3)
            grad[k + 1, 0] += nseg * (0.5 * g1 * seg + 2.0 * F * d1)
            grad[k + 1, 1] += nseg * (0.5 * g3 * seg + 2.0 * F * d3)
        return nseg * E

    bulk_reduced_raw = _bulk_reduced_nb
    bulk_full_raw = _bulk_full_nb
    path_energy_grad_raw = _path_energy_grad_nb
else:
    bulk_reduced_raw = _bulk_reduced_np
    bulk_full_raw = _bulk_full_np
    path_energy_grad_raw = _path_energy_grad_np


def bulk_reduced(q1, q3, params):
    """Bulk parts of the reduced Euler-Lagrange equations, as a pair of arrays."""
    out1 = np.empty_like(q1)
    out3 = np.empty_like(q3)
    bulk_reduced_raw(q1, q3, params.A / (2 * params.C), params.B / (2 * params.C),
                     params.lambda_bar_sq, out1, out3)
    return out1, out3


def bulk_full(q, params):
    """Bulk parts of the five-field system for stacked components q[0..4]."""
    out = np.empty_like(q)
    bulk_full_raw(q, params.A / (2 * params.C), params.B / (2 * params.C),
                  params.lambda_bar_sq, out)
    return out


def path_energy_grad(pts, params, grad):
    """Discrete geodesic path energy and gradient; see geodesics module."""
    return path_energy_grad_raw(pts, params.A, params.B, params.C, params.f_min, grad)

"""Square annulus grid: node classification, boundary data, Laplacian, quadrature.

The domain is {rho < max(|x|,|y|) < 1} discretised on a uniform n x n grid
over [-1, 1]^2.  The inner half-width rho is snapped to the nearest grid
line so the inner boundary is exactly grid-aligned.  Fields live on the full
grid as (n, n) arrays; hole nodes are carried as zeros and excluded from
every reduction through the masks below.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp

__all__ = ["GridSpec", "Grid", "build_grid", "dirichlet_values", "BoundaryData"]


class GeometryError(ValueError):
    """Raised when (n, rho) cannot produce a valid annulus."""


@dataclass(frozen=True)
class GridSpec:
    n: int
    h: float
    rho_requested: float
    rho_snapped: float
    eps_corner: float  # outer-corner ramp half-width, absolute units


class Grid:
    """Grid geometry plus node classification and discrete operators.

    Masks partition the n^2 nodes into hole / inner boundary / interior /
    outer boundary.  ``dirichlet`` is the union of the two boundary rings.
    """

    def __init__(self, spec: GridSpec):
        self.spec = spec
        n, h, rho = spec.n, spec.h, spec.rho_snapped
        x = np.linspace(-1.0, 1.0, n)
        self.x = x
        self.X, self.Y = np.meshgrid(x, x, indexing="ij")
        m = np.maximum(np.abs(self.X), np.abs(self.Y))
        self.hole = m < rho - h / 4
        self.inner = np.abs(m - rho) < h / 4
        self.outer = ((np.abs(np.abs(self.X) - 1) < h / 4)
                      | (np.abs(np.abs(self.Y) - 1) < h / 4)) & ~self.inner
        self.interior = ~(self.hole | self.inner | self.outer)
        self.dirichlet = self.inner | self.outer
        self.domain = ~self.hole

        # Interior unknown numbering and the 5-point Laplacian restricted to
        # interior-interior couplings; Dirichlet neighbours enter through
        # boundary arrays at residual time.
        self.idx = -np.ones((n, n), dtype=np.int64)
        ii, jj = np.nonzero(self.interior)
        self.ii, self.jj = ii, jj
        self.idx[ii, jj] = np.arange(ii.size)
        self.n_interior = ii.size
        self._lap_interior = self._build_lap()
        self._weights = self._build_weights()
        self._edge_cache = None

    # -- construction helpers -------------------------------------------------

    def _build_lap(self) -> sp.csr_matrix:
        n, h = self.spec.n, self.spec.h
        k = np.arange(self.n_interior)
        rows = [k]
        cols = [k]
        vals = [np.full(self.n_interior, -4.0 / h**2)]
        for di, dj in ((1, 0), (-1, 0), (0, 1), (0, -1)):
            nb = self.idx[self.ii + di, self.jj + dj]
            m = nb >= 0
            rows.append(k[m])
            cols.append(nb[m])
            vals.append(np.full(m.sum(), 1.0 / h**2))
        return sp.csr_matrix((np.concatenate(vals),
                              (np.concatenate(rows), np.concatenate(cols))),
                             shape=(self.n_interior, self.n_interior))

    def _build_weights(self) -> np.ndarray:
        """Trapezoidal quadrature weights over the annulus, per node."""
        h = self.spec.h
        w = np.zeros((self.spec.n, self.spec.n))
        w[self.interior] = h * h
        # Boundary nodes: h^2/2 on edges, h^2/4 at the four outer corners,
        # 3h^2/4 at the reflex (inner-square) corners.
        for mask in (self.inner, self.outer):
            ii, jj = np.nonzero(mask)
            # fraction of the four surrounding cells lying inside the domain
            cells = np.zeros(ii.size)
            for di in (0, -1):
                for dj in (0, -1):
                    i0, j0 = ii + di, jj + dj
                    ok = (i0 >= 0) & (j0 >= 0) & (i0 + 1 < self.spec.n) & (j0 + 1 < self.spec.n)
                    inside = np.zeros(ii.size, dtype=bool)
                    iv, jv = i0[ok], j0[ok]
                    corner_in = (~self.hole[iv, jv] & ~self.hole[iv + 1, jv]
                                 & ~self.hole[iv, jv + 1] & ~self.hole[iv + 1, jv + 1])
                    inside[ok] = corner_in
                    cells += inside.astype(float)
            w[ii, jj] = cells / 4.0 * h * h
        return w

    # -- operators ------------------------------------------------------------

    @property
    def lap_interior(self) -> sp.csr_matrix:
        return self._lap_interior

    @property
    def weights(self) -> np.ndarray:
        return self._weights

    def apply_laplacian(self, u: np.ndarray) -> np.ndarray:
        """5-point Laplacian on interior nodes; zero elsewhere.

        Dirichlet nodes of ``u`` must hold their boundary values.
        """
        h = self.spec.h
        out = np.zeros_like(u)
        lap = (u[2:, 1:-1] + u[:-2, 1:-1] + u[1:-1, 2:] + u[1:-1, :-2]
               - 4.0 * u[1:-1, 1:-1]) / h**2
        out[1:-1, 1:-1] = lap
        out[~self.interior] = 0.0
        return out

    def grad_sq(self, u: np.ndarray) -> np.ndarray:
        """Nodewise |grad u|^2: centered interior, one-sided at domain edges."""
        gx = self._diff(u, axis=0)
        gy = self._diff(u, axis=1)
        return gx * gx + gy * gy

    def _diff(self, u: np.ndarray, axis: int) -> np.ndarray:
        h = self.spec.h
        n = self.spec.n
        valid = self.domain
        up = np.roll(u, -1, axis=axis)
        um = np.roll(u, 1, axis=axis)
        vp = np.roll(valid, -1, axis=axis)
        vm = np.roll(valid, 1, axis=axis)
        # roll wraps around; kill the wrapped line
        edge_hi = [slice(None)] * 2
        edge_hi[axis] = n - 1
        edge_lo = [slice(None)] * 2
        edge_lo[axis] = 0
        vp[tuple(edge_hi)] = False
        vm[tuple(edge_lo)] = False
        g = np.zeros_like(u, dtype=float)
        both = vp & vm & valid
        g[both] = (up[both] - um[both]) / (2 * h)
        fwd = vp & ~vm & valid
        g[fwd] = (up[fwd] - u[fwd]) / h
        bwd = ~vp & vm & valid
        g[bwd] = (u[bwd] - um[bwd]) / h
        return g

    def _edges(self):
        """(a, b, w) flat index pairs and weights of domain lattice edges.

        Edges joining two Dirichlet nodes run along the boundary and get
        weight 1/2 (trapezoid in the transverse direction); every other
        domain edge gets weight 1.  Cached on first use.
        """
        if self._edge_cache is None:
            n = self.spec.n
            lin = np.arange(n * n).reshape(n, n)
            pairs = []
            for axis in (0, 1):
                sl_a = (slice(0, -1), slice(None)) if axis == 0 else (slice(None), slice(0, -1))
                sl_b = (slice(1, None), slice(None)) if axis == 0 else (slice(None), slice(1, None))
                keep = self.domain[sl_a] & self.domain[sl_b]
                w = np.where(self.dirichlet[sl_a] & self.dirichlet[sl_b], 0.5, 1.0)
                pairs.append((lin[sl_a][keep], lin[sl_b][keep], w[keep]))
            a = np.concatenate([p[0] for p in pairs])
            b = np.concatenate([p[1] for p in pairs])
            w = np.concatenate([p[2] for p in pairs])
            self._edge_cache = (a, b, w)
        return self._edge_cache

    def dirichlet_energy(self, u: np.ndarray) -> float:
        """Edge-based integral of |grad u|^2 over the annulus.

        The exact gradient of this sum with respect to an interior node is
        -2 h^2 times the 5-point Laplacian, so it is the Lyapunov elastic
        energy of the discrete flows and Newton systems.
        """
        a, b, w = self._edges()
        flat = u.ravel()
        d = flat[a] - flat[b]
        return float(np.sum(w * d * d))

    def stiffness_interior(self) -> sp.csr_matrix:
        """Sparse K with v^T K v = dirichlet_energy(v) for v zero on the
        boundary, restricted to interior nodes."""
        a, b, w = self._edges()
        idxf = np.full(self.spec.n ** 2, -1, dtype=np.int64)
        idxf[self.interior.ravel()] = np.arange(self.n_interior)
        ia, ib = idxf[a], idxf[b]
        rows, cols, vals = [], [], []
        keep = ia >= 0
        rows.append(ia[keep]); cols.append(ia[keep]); vals.append(w[keep])
        keep = ib >= 0
        rows.append(ib[keep]); cols.append(ib[keep]); vals.append(w[keep])
        keep = (ia >= 0) & (ib >= 0)
        rows.append(ia[keep]); cols.append(ib[keep]); vals.append(-w[keep])
        rows.append(ib[keep]); cols.append(ia[keep]); vals.append(-w[keep])
        return sp.csr_matrix((np.concatenate(vals),
                              (np.concatenate(rows), np.concatenate(cols))),
                             shape=(self.n_interior, self.n_interior))

    def integrate(self, density: np.ndarray) -> float:
        """Node-weighted trapezoidal integral over the annulus."""
        return float(np.sum(density * self._weights))

    # -- export ---------------------------------------------------------------

    def export_field(self, u: np.ndarray, path, field_name: str = "value"):
        """Write `x,y,value` CSV (hole omitted) plus a JSON sidecar."""
        import csv

        path = str(path)
        mask = self.domain
        with open(path, "w", newline="") as f:
            wcsv = csv.writer(f)
            wcsv.writerow(["x", "y", "value"])
            for i, j in zip(*np.nonzero(mask)):
                wcsv.writerow([f"{self.X[i, j]:.10g}", f"{self.Y[i, j]:.10g}",
                               f"{u[i, j]:.12g}"])
        meta = {"schema": 1, "n": self.spec.n, "h": self.spec.h,
                "rho_snapped": self.spec.rho_snapped,
                "eps_corner": self.spec.eps_corner, "field_name": field_name}
        with open(path + ".json", "w") as f:
            json.dump(meta, f, indent=1)


def build_grid(n: int, rho: float, eps_corner_cells: float = 4.0) -> Grid:
    """Classify the n x n grid for inner half-width rho.

    ``eps_corner_cells`` is the corner-ramp half-width in multiples of h.
    Raises :class:`GeometryError` if the hole would touch the outer boundary
    or vanish.
    """
    if n % 2 == 0 or n < 5:
        raise GeometryError(f"n must be odd and >= 5, got {n}")
    h = 2.0 / (n - 1)
    if not (0.0 < rho < 1.0 - 4.0 / (n - 1)):
        raise GeometryError(
            f"rho={rho} outside (0, 1 - 4/(n-1)) = (0, {1 - 4.0 / (n - 1):.6g}) for n={n}")
    k = int(round(rho / h))
    k = max(1, k)
    rho_snapped = k * h
    if rho_snapped >= 1.0 - 2.0 * h:
        raise GeometryError(
            f"snapped rho={rho_snapped:.6g} leaves no interior ring (need < {1 - 2 * h:.6g})")
    spec = GridSpec(n=n, h=h, rho_requested=rho, rho_snapped=rho_snapped,
                    eps_corner=eps_corner_cells * h)
    return Grid(spec)


@dataclass
class BoundaryData:
    """Dirichlet values per field on the two boundary rings, as full arrays."""

    q1: np.ndarray
    q3: np.ndarray
    # q2, q4, q5 vanish on the whole boundary


def dirichlet_values(grid: Grid, params) -> BoundaryData:
    """Tangent uniaxial data on the outer square, isotropic on the inner.

    q1 = +s_plus/2 on y = +-1 and -s_plus/2 on x = +-1, with an odd linear
    ramp through zero within eps_corner of each outer corner; q3 = -s_plus/6
    on the whole outer boundary; everything vanishes on the inner boundary.
    """
    sp_ = params.s_plus
    eps = grid.spec.eps_corner
    n = grid.spec.n
    h = grid.spec.h
    q1 = np.zeros((n, n))
    q3 = np.zeros((n, n))
    on_y = np.abs(np.abs(grid.Y) - 1) < h / 4
    on_x = np.abs(np.abs(grid.X) - 1) < h / 4
    ramp_y = np.minimum(1.0, (1.0 - np.abs(grid.X)) / eps)   # along y=+-1 edges
    ramp_x = np.minimum(1.0, (1.0 - np.abs(grid.Y)) / eps)   # along x=+-1 edges
    my = on_y & grid.outer
    mx = on_x & grid.outer & ~on_y
    q1[my] = sp_ / 2.0 * ramp_y[my]
    q1[mx] = -sp_ / 2.0 * ramp_x[mx]
    q1[on_x & on_y] = 0.0
    q3[grid.outer] = -sp_ / 6.0
    return BoundaryData(q1=q1, q3=q3)

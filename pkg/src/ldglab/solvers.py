"""Newton and gradient-flow solvers for the reduced (q1, q3) and full
five-field systems, with deflation for landscape searches.

Fields are (n, n) arrays carrying their Dirichlet values; residuals are
evaluated on interior nodes only.  Deflation multiplies the residual by
M(u) = prod_k (1/||u - u_k||^p + shift) in the discrete L2 norm; the Newton
step for the deflated residual is obtained from the undeflated step by the
usual rank-one (Sherman-Morrison) scaling.
"""

from __future__ import annotations

from dataclasses import dataclass, field as dfield
from typing import Optional

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from .grid import Grid, dirichlet_values
from .kernels import bulk_reduced, bulk_full

__all__ = [
    "ReducedState", "FullState", "SolverConfig", "SolutionRecord",
    "residual_reduced", "residual_full", "newton_solve", "gradient_flow",
    "ic_wors", "ic_bd", "ic_mixed", "ic_diagonal", "ic_esc", "ic_escaped",
    "classify", "symmetrize_wors",
]


class SolverError(RuntimeError):
    pass


# ---------------------------------------------------------------------------
# states


class _State:
    """Shared machinery for grid states; ``fields`` is (k, n, n)."""

    nfields: int
    names: tuple

    def __init__(self, grid: Grid, fields: np.ndarray):
        assert fields.shape[0] == self.nfields
        self.grid = grid
        self.fields = fields

    def copy(self):
        return type(self)(self.grid, self.fields.copy())

    def pack(self) -> np.ndarray:
        """Interior unknowns as a flat vector, field-major."""
        return np.concatenate([f[self.grid.interior] for f in self.fields])

    def unpack(self, vec: np.ndarray):
        N = self.grid.n_interior
        for k in range(self.nfields):
            self.fields[k][self.grid.interior] = vec[k * N:(k + 1) * N]

    def distance(self, other: "_State") -> float:
        """Discrete L2 distance over interior nodes, all fields."""
        h = self.grid.spec.h
        d = (self.fields - other.fields)[:, self.grid.interior]
        return float(np.sqrt(h * h * np.sum(d * d)))

    def apply_dirichlet(self, bdata):
        dmask = self.grid.dirichlet
        self.fields[0][dmask] = bdata.q1[dmask]
        idx3 = 1 if self.nfields == 2 else 2
        self.fields[idx3][dmask] = bdata.q3[dmask]
        for k in range(self.nfields):
            if k not in (0, idx3):
                self.fields[k][dmask] = 0.0
        self.fields[:, self.grid.hole] = 0.0


class ReducedState(_State):
    nfields = 2
    names = ("q1", "q3")

    @property
    def q1(self):
        return self.fields[0]

    @property
    def q3(self):
        return self.fields[1]

    def to_full(self) -> "FullState":
        n = self.grid.spec.n
        f = np.zeros((5, n, n))
        f[0] = self.fields[0]
        f[2] = self.fields[1]
        return FullState(self.grid, f)


class FullState(_State):
    nfields = 5
    names = ("q1", "q2", "q3", "q4", "q5")

    @property
    def q1(self):
        return self.fields[0]

    @property
    def q3(self):
        return self.fields[2]


@dataclass
class SolverConfig:
    newton_tol_factor: float = 1e-9     # tolerance = factor * lambda_bar_sq
    newton_max_iter: int = 50
    linesearch_factor: float = 0.5
    linesearch_max: int = 20
    dt: float = 1e-4
    t_end: float = 4.0
    # early exit must sit far below the smallest transient amplitude of a
    # growing unstable mode, or flows stall on saddle points mid-transit
    flow_update_tol: float = 1e-14
    deflation_power: float = 2.0
    deflation_shift: float = 1.0
    deflation_radius_factor: float = 1e-3   # radius = factor * s_plus * sqrt(area)

    def newton_tol(self, params) -> float:
        return self.newton_tol_factor * params.lambda_bar_sq

    def deflation_radius(self, params, grid: Grid) -> float:
        area = 4.0 - 4.0 * grid.spec.rho_snapped**2
        return self.deflation_radius_factor * params.s_plus * np.sqrt(area)


@dataclass
class SolutionRecord:
    state: _State
    residual: float
    energy: float
    label: str
    converged: bool
    iterations: int
    symmetry_class: Optional[int] = None
    init_name: str = ""
    history: list = dfield(default_factory=list)


# ---------------------------------------------------------------------------
# residuals and Jacobians


def residual_reduced(state: ReducedState, params):
    """R1 = lap q1 - bulk1, R3 = lap q3 - bulk3 on interior nodes."""
    g = state.grid
    b1, b3 = bulk_reduced(state.q1, state.q3, params)
    return (g.apply_laplacian(state.q1) - np.where(g.interior, b1, 0.0),
            g.apply_laplacian(state.q3) - np.where(g.interior, b3, 0.0))


def residual_full(state: FullState, params):
    """Five-component residual derived from the tensor Euler-Lagrange equation."""
    g = state.grid
    bulk = bulk_full(state.fields, params)
    out = np.empty_like(state.fields)
    for k in range(5):
        out[k] = g.apply_laplacian(state.fields[k]) - np.where(g.interior, bulk[k], 0.0)
    return out


def residual_full_tensor_oracle(state: FullState, params):
    """Matrix-wise evaluation of the tensor equation, for cross-checking.

    Builds the 3x3 tensor at every node, evaluates
    A Q - B (Q^2 - I |Q|^2/3) + C |Q|^2 Q, and projects back onto the five
    components.  Independent of the expanded polynomial route above.
    """
    g = state.grid
    q1, q2, q3, q4, q5 = state.fields
    n = g.spec.n
    Q = np.zeros((n, n, 3, 3))
    Q[..., 0, 0] = q1 - q3
    Q[..., 1, 1] = -q1 - q3
    Q[..., 2, 2] = 2 * q3
    Q[..., 0, 1] = Q[..., 1, 0] = q2
    Q[..., 0, 2] = Q[..., 2, 0] = q4
    Q[..., 1, 2] = Q[..., 2, 1] = q5
    tau = np.einsum("...ij,...ij->...", Q, Q)
    Q2 = np.einsum("...ij,...jk->...ik", Q, Q)
    N = (params.A * Q - params.B * (Q2 - np.eye(3) * tau[..., None, None] / 3.0)
         + params.C * tau[..., None, None] * Q)
    lam_fac = params.lambda_bar_sq / (2.0 * params.C)
    comps = np.stack([
        0.5 * (N[..., 0, 0] - N[..., 1, 1]),
        N[..., 0, 1],
        0.5 * N[..., 2, 2],
        N[..., 0, 2],
        N[..., 1, 2],
    ])
    out = np.empty_like(state.fields)
    for k in range(5):
        out[k] = g.apply_laplacian(state.fields[k]) - np.where(g.interior, lam_fac * comps[k], 0.0)
    return out


def _bulk_jac_reduced(q1, q3, params):
    lam2, A, B, C = params.lambda_bar_sq, params.A, params.B, params.C
    r2 = q1 * q1 + 3 * q3 * q3
    d11 = lam2 * (A / (2 * C) + B / C * q3 + r2 + 2 * q1 * q1)
    d13 = lam2 * (B / C * q1 + 6 * q1 * q3)
    d31 = lam2 * (B / (3 * C) * q1 + 2 * q1 * q3)
    d33 = lam2 * (A / (2 * C) - B / C * q3 + r2 + 6 * q3 * q3)
    return ((d11, d13), (d31, d33))


def _bulk_jac_full(q, params):
    lam2, A, B, C = params.lambda_bar_sq, params.A, params.B, params.C
    q1, q2, q3, q4, q5 = q
    a2c = A / (2 * C)
    b2c = B / (2 * C)
    tau = 2 * q1**2 + 2 * q2**2 + 6 * q3**2 + 2 * q4**2 + 2 * q5**2
    dtau = (4 * q1, 4 * q2, 12 * q3, 4 * q4, 4 * q5)
    z = np.zeros_like(q1)
    dP = [
        (2 * q3, z, 2 * q1, -q4, q5),
        (z, 2 * q3, 2 * q2, -q5, -q4),
        (2 * q1 / 3, 2 * q2 / 3, -2 * q3, -q4 / 3, -q5 / 3),
        (-q4, -q5, -q4, -(q1 + q3), -q2),
        (q5, -q4, -q5, -q2, q1 - q3),
    ]
    J = [[None] * 5 for _ in range(5)]
    for i in range(5):
        for j in range(5):
            val = b2c * dP[i][j] + 0.5 * q[i] * dtau[j]
            if i == j:
                val = val + a2c + 0.5 * tau
            J[i][j] = lam2 * val
    return J


def _residual_of(state, params):
    if isinstance(state, ReducedState):
        r1, r3 = residual_reduced(state, params)
        return np.stack([r1, r3])
    return residual_full(state, params)


def _jacobian(state, params):
    g = state.grid
    L = g.lap_interior
    if isinstance(state, ReducedState):
        blocks = _bulk_jac_reduced(state.q1, state.q3, params)
    else:
        blocks = _bulk_jac_full(state.fields, params)
    k = state.nfields
    mat = [[None] * k for _ in range(k)]
    for i in range(k):
        for j in range(k):
            d = sp.diags(blocks[i][j][g.interior])
            mat[i][j] = (L - d) if i == j else (-d)
    return sp.bmat(mat, format="csc")


# ---------------------------------------------------------------------------
# deflation


class _Deflator:
    def __init__(self, records, config: SolverConfig, params, grid):
        self.states = [r.state for r in records]
        self.p = config.deflation_power
        self.shift = config.deflation_shift
        self.h2 = grid.spec.h ** 2

    def factors(self, state):
        return [state.distance(s) for s in self.states]

    def value(self, state) -> float:
        m = 1.0
        for d in self.factors(state):
            if d == 0.0:
                return np.inf
            m *= 1.0 / d**self.p + self.shift
        return m

    def step_scale(self, state, du_vec) -> float:
        """Sherman-Morrison scaling tau applied to the undeflated Newton step."""
        u = state.pack()
        s = 0.0
        for other in self.states:
            diff = u - other.pack()
            d = np.sqrt(self.h2 * np.dot(diff, diff))
            mk = 1.0 / d**self.p + self.shift
            # d m_k / du . du
            dm_du = -self.p * d ** (-self.p - 2.0) * self.h2 * np.dot(diff, du_vec)
            s += dm_du / mk
        denom = 1.0 - s
        if abs(denom) < 1e-3:
            denom = np.sign(denom) * 1e-3 if denom != 0 else 1e-3
        return 1.0 / denom


# ---------------------------------------------------------------------------
# Newton


def symmetrize_wors(state: ReducedState):
    """Project onto the diagonally symmetric class: q1 odd and q3 even under
    both diagonal reflections (x,y)->(y,x) and (x,y)->(-y,-x)."""
    q1, q3 = state.fields
    q1t = 0.5 * (q1 - q1.T)
    q1 [:] = 0.5 * (q1t - q1t[::-1, ::-1].T)
    q3t = 0.5 * (q3 + q3.T)
    q3[:] = 0.5 * (q3t + q3t[::-1, ::-1].T)


def newton_solve(init, params, config: SolverConfig = None,
                 deflated_against=(), symmetrize: bool = False,
                 init_name: str = "") -> SolutionRecord:
    """Globalized Newton iteration; optionally deflated against known records.

    Returns a record with ``converged`` False (and the reason in ``label``)
    on line-search failure, iteration exhaustion, or rediscovery of a
    deflated solution.
    """
    config = config or SolverConfig()
    state = init.copy()
    g = state.grid
    tol = config.newton_tol(params)
    radius = config.deflation_radius(params, g)
    defl = _Deflator(deflated_against, config, params, g) if deflated_against else None
    if symmetrize and isinstance(state, ReducedState):
        symmetrize_wors(state)

    history = []
    res = _residual_of(state, params)
    rn = float(np.max(np.abs(res)))
    for it in range(config.newton_max_iter):
        mval = defl.value(state) if defl else 1.0
        history.append(rn)
        if rn <= tol:
            if defl and min(defl.factors(state), default=np.inf) <= radius:
                return SolutionRecord(state, rn, np.nan, "DUPLICATE", False, it,
                                      init_name=init_name, history=history)
            label = classify(state, params)
            energy = _energy_total(state, params)
            return SolutionRecord(state, rn, energy, label, True, it,
                                  init_name=init_name, history=history)
        J = _jacobian(state, params)
        try:
            du = spla.spsolve(J, -res[:, g.interior].ravel())
        except RuntimeError as exc:
            return SolutionRecord(state, rn, np.nan, f"LINSOLVE:{exc}", False, it,
                                  init_name=init_name, history=history)
        if not np.all(np.isfinite(du)):
            return SolutionRecord(state, rn, np.nan, "LINSOLVE:singular", False, it,
                                  init_name=init_name, history=history)
        if defl:
            du = defl.step_scale(state, du) * du
        # backtracking on the (deflated) residual max-norm
        merit0 = mval * rn
        alpha = 1.0
        ok = False
        for _ in range(config.linesearch_max):
            trial = state.copy()
            trial.unpack(trial.pack() + alpha * du)
            if symmetrize and isinstance(trial, ReducedState):
                symmetrize_wors(trial)
            res_t = _residual_of(trial, params)
            rn_t = float(np.max(np.abs(res_t)))
            m_t = defl.value(trial) if defl else 1.0
            if np.isfinite(rn_t) and m_t * rn_t < (1.0 - 1e-4 * alpha) * merit0:
                ok = True
                break
            alpha *= config.linesearch_factor
        if not ok:
            return SolutionRecord(state, rn, np.nan, "LINESEARCH", False, it,
                                  init_name=init_name, history=history)
        state, res, rn = trial, res_t, rn_t
    return SolutionRecord(state, rn, np.nan, "MAXITER", False, config.newton_max_iter,
                          init_name=init_name, history=history)


def _energy_total(state, params) -> float:
    from .energy import energy_reduced, energy_full

    if isinstance(state, ReducedState):
        return energy_reduced(state, params).total
    return energy_full(state, params).total


# ---------------------------------------------------------------------------
# gradient flow (IMEX: Laplacian Crank-Nicolson, bulk explicit)


def gradient_flow(init, params, config: SolverConfig = None,
                  sample_every: float = 0.1, record_states: bool = False):
    """Integrate dq/dt = lap q - bulk(q) to t_end or stationarity.

    Returns (final_record, samples) where samples is a list of
    (t, energy) pairs (plus states when requested).
    """
    config = config or SolverConfig()
    state = init.copy()
    g = state.grid
    dt = config.dt
    nsteps = int(round(config.t_end / dt))
    L = g.lap_interior
    N = g.n_interior
    ident = sp.identity(N, format="csc")
    lhs = spla.factorized((ident - dt / 2.0 * L).tocsc())
    rhs_op = (ident + dt / 2.0 * L).tocsr()

    # constant Dirichlet contribution to the Laplacian at near-boundary nodes
    bvec = np.empty((N, state.nfields))
    for k in range(state.nfields):
        full = g.apply_laplacian(state.fields[k])
        bvec[:, k] = full[g.interior] - L @ state.fields[k][g.interior]

    u = np.stack([f[g.interior] for f in state.fields], axis=1)
    samples = []
    t = 0.0
    sample_stride = max(1, int(round(sample_every / dt)))
    for step in range(nsteps):
        if isinstance(state, ReducedState):
            b1, b3 = bulk_reduced(state.fields[0], state.fields[1], params)
            bulk = np.stack([b1[g.interior], b3[g.interior]], axis=1)
        else:
            bb = bulk_full(state.fields, params)
            bulk = bb[:, g.interior].T
        rhs = rhs_op @ u + dt * (bvec - bulk)
        unew = lhs(rhs)
        if not np.all(np.isfinite(unew)):
            raise SolverError(f"gradient flow blow-up at t={t:.6g}")
        upd = float(np.max(np.abs(unew - u)))
        u = unew
        for k in range(state.nfields):
            state.fields[k][g.interior] = u[:, k]
        t += dt
        if step % sample_stride == 0 or step == nsteps - 1:
            e = _energy_total(state, params)
            samples.append((t, e, state.copy() if record_states else None))
        if upd < config.flow_update_tol:
            break
    res = _residual_of(state, params)
    rn = float(np.max(np.abs(res)))
    rec = SolutionRecord(state, rn, _energy_total(state, params),
                         classify(state, params), True, 0, init_name="flow")
    return rec, samples


# ---------------------------------------------------------------------------
# initial conditions


def ic_wors(grid: Grid, params) -> ReducedState:
    """Diagonal-cross initial condition: q1 = +-s/2 split by |x| vs |y|."""
    sp_ = params.s_plus
    n = grid.spec.n
    q1 = np.where(np.abs(grid.X) < np.abs(grid.Y), sp_ / 2.0,
                  np.where(np.abs(grid.X) > np.abs(grid.Y), -sp_ / 2.0, 0.0))
    q3 = np.full((n, n), -sp_ / 6.0)
    st = ReducedState(grid, np.stack([q1, q3]))
    st.apply_dirichlet(dirichlet_values(grid, params))
    return st


def ic_bd(grid: Grid, params, orientation: int = +1) -> ReducedState:
    """Constant q1 = +-s/2 fill (edge layers form against the boundary data)."""
    sp_ = params.s_plus
    n = grid.spec.n
    q1 = np.full((n, n), orientation * sp_ / 2.0)
    q3 = np.full((n, n), -sp_ / 6.0)
    st = ReducedState(grid, np.stack([q1, q3]))
    st.apply_dirichlet(dirichlet_values(grid, params))
    return st


def ic_mixed(grid: Grid, params, edge: str = "S") -> ReducedState:
    """Half-cross initial condition: cross in three quadrants, one edge layer.

    ``edge`` in {"N", "S", "E", "W"} names the outer edge that carries the
    transition layer; the diagonal cross survives only in the opposite
    half.
    """
    sp_ = params.s_plus
    n = grid.spec.n
    X, Y = grid.X, grid.Y
    quad = {"S": Y > np.abs(X), "N": Y < -np.abs(X),
            "W": X > np.abs(Y), "E": X < -np.abs(Y)}
    if edge not in quad:
        raise ValueError(f"edge must be one of N/S/E/W, got {edge!r}")
    inner_sign = 1.0 if edge in ("N", "S") else -1.0
    q1 = np.where(quad[edge], inner_sign * sp_ / 2.0, -inner_sign * sp_ / 2.0)
    q3 = np.full((n, n), -sp_ / 6.0)
    st = ReducedState(grid, np.stack([q1, q3]))
    st.apply_dirichlet(dirichlet_values(grid, params))
    return st


def ic_diagonal(grid: Grid, params, sign: int = +1) -> FullState:
    """Five-field seed with the planar director along a square diagonal:
    q1 = 0, q2 = +-s/2 in the bulk."""
    sp_ = params.s_plus
    n = grid.spec.n
    f = np.zeros((5, n, n))
    f[1] = sign * sp_ / 2.0
    f[2] = -sp_ / 6.0
    st = FullState(grid, f)
    st.apply_dirichlet(dirichlet_values(grid, params))
    return st


def ic_esc(grid: Grid, params, eta: float = None) -> ReducedState:
    """WORS-like condition with a positively ordered collar around the hole.

    q1 = 0 and q3 = +s/3 on rho < max(|x|,|y|) < rho + eta; the default eta
    places the collar edge at 0.96.
    """
    rho = grid.spec.rho_snapped
    if eta is None:
        eta = 0.96 - rho
    if eta < 0:
        raise ValueError(f"eta must be >= 0, got {eta}")
    st = ic_wors(grid, params)
    m = np.maximum(np.abs(grid.X), np.abs(grid.Y))
    collar = (m > rho) & (m < rho + eta) & grid.interior
    st.fields[0][collar] = 0.0
    st.fields[1][collar] = params.s_plus / 3.0
    return st


def ic_escaped(grid: Grid, params, winding: int = +1) -> FullState:
    """Uniaxial director escaping into z at the hole, winding +-1 in-plane.

    n goes from e_z at the inner boundary to the boundary-compatible in-plane
    director at the outer square; the in-plane angle is winding*phi + pi/2.
    """
    sp_ = params.s_plus
    rho = grid.spec.rho_snapped
    m = np.maximum(np.abs(grid.X), np.abs(grid.Y))
    tau = np.clip((m - rho) / (1.0 - rho), 0.0, 1.0)
    theta = np.pi / 2.0 * (1.0 - tau)             # tilt out of plane
    phi = np.arctan2(grid.Y, grid.X)
    alpha = winding * phi + np.pi / 2.0
    nx = np.cos(theta) * np.cos(alpha)
    ny = np.cos(theta) * np.sin(alpha)
    nz = np.sin(theta)
    f = np.stack([
        sp_ * 0.5 * (nx * nx - ny * ny),
        sp_ * nx * ny,
        sp_ * 0.5 * (nz * nz - 1.0 / 3.0),
        sp_ * nx * nz,
        sp_ * ny * nz,
    ])
    st = FullState(grid, f)
    st.apply_dirichlet(dirichlet_values(grid, params))
    return st


# ---------------------------------------------------------------------------
# classification


@dataclass
class ClassifyThresholds:
    diag_zero_level: float = 0.1      # |q1| < level*s_plus counts as zero
    wors_diag_frac: float = 0.8
    bd_diag_frac: float = 0.35
    bd_sign_frac: float = 0.70
    mixed_diag_lo: float = 0.25
    escape_level: float = 1e-3        # max(|q4|,|q5|) > level*s_plus


def _diag_zero_fracs(state, params, thr):
    g = state.grid
    n = g.spec.n
    d = np.arange(n)
    q1 = state.fields[0]
    level = thr.diag_zero_level * params.s_plus
    fr = []
    for jd in (d, n - 1 - d):
        mask = g.interior[d, jd]
        vals = q1[d, jd][mask]
        fr.append(float(np.mean(np.abs(vals) < level)) if vals.size else 1.0)
    return fr


def classify(state, params, thr: ClassifyThresholds = None) -> str:
    """Taxonomy label: WORS | BD | MIXED | ESCAPED | OTHER."""
    thr = thr or ClassifyThresholds()
    g = state.grid
    if state.nfields == 5:
        esc = max(float(np.max(np.abs(state.fields[3]))),
                  float(np.max(np.abs(state.fields[4]))))
        if esc > thr.escape_level * params.s_plus:
            return "ESCAPED"
        # in-plane rotated eigenframe: outside the planar taxonomy
        if float(np.max(np.abs(state.fields[1]))) > 0.1 * params.s_plus:
            return "OTHER"
    q1 = state.fields[0]
    z1, z2 = _diag_zero_fracs(state, params, thr)
    pos = float(np.mean(q1[g.interior] > 0))
    frac = max(pos, 1.0 - pos)
    if z1 > thr.wors_diag_frac and z2 > thr.wors_diag_frac:
        # WORS sign pattern: positive toward y=+-1 edges, negative toward x=+-1
        jmid = np.searchsorted(g.x, (g.spec.rho_snapped + 1) / 2)
        c = g.spec.n // 2
        if q1[c, jmid] > 0 and q1[jmid, c] < 0:
            return "WORS"
        return "OTHER"
    if frac > thr.bd_sign_frac and z1 < thr.bd_diag_frac and z2 < thr.bd_diag_frac:
        return "BD"
    if min(z1, z2) > thr.mixed_diag_lo and frac > 0.5:
        return "MIXED"
    return "OTHER"

"""Campaign drivers: multi-start deflation searches, flow experiments, and
parameter continuations.  These orchestrate the solver layer and return
plain data that the CLI serializes.
"""

from __future__ import annotations

from dataclasses import dataclass, field as dfield

import numpy as np

from .core import MaterialParams
from .grid import Grid, build_grid, dirichlet_values
from .solvers import (ReducedState, FullState, SolverConfig, SolutionRecord,
                      newton_solve, gradient_flow, ic_wors, ic_bd, ic_mixed,
                      ic_diagonal, ic_esc, ic_escaped, classify)
from .symmetry import dedup, AXIS_GROUP_NAMES

__all__ = ["random_state", "deflate_campaign", "DeflateResult",
           "escaped_continuation", "ContinuationResult", "flow_experiment",
           "CampaignError"]


class CampaignError(RuntimeError):
    pass


def random_state(grid: Grid, params, rng: np.random.Generator,
                 nfields: int = 2, jacobi_sweeps: int = 5):
    """Random admissible start: nodewise uniform amplitudes smoothed by a few
    Jacobi sweeps so Newton starts inside a convergence basin.

    q3 is drawn in [-s/3, s/3]; every other component in [-s, s].
    """
    s = params.s_plus
    n = grid.spec.n
    f = rng.uniform(-s, s, size=(nfields, n, n))
    i3 = 1 if nfields == 2 else 2
    f[i3] = rng.uniform(-s / 3.0, s / 3.0, size=(n, n))
    cls = ReducedState if nfields == 2 else FullState
    st = cls(grid, f)
    st.apply_dirichlet(dirichlet_values(grid, params))
    for _ in range(jacobi_sweeps):
        avg = np.zeros_like(f)
        cnt = np.zeros((n, n))
        for di, dj in ((1, 0), (-1, 0), (0, 1), (0, -1)):
            sl_c = (slice(max(0, -di), n - max(0, di)),
                    slice(max(0, -dj), n - max(0, dj)))
            sl_n = (slice(max(0, di), n - max(0, -di)),
                    slice(max(0, dj), n - max(0, -dj)))
            dom = grid.domain[sl_n]
            avg[:, sl_c[0], sl_c[1]] += f[:, sl_n[0], sl_n[1]] * dom
            cnt[sl_c] += dom
        upd = avg / np.maximum(cnt, 1)
        f[:, grid.interior] = upd[:, grid.interior]
    return st


def _structured_starts(grid, params, nfields, embed_records=()):
    """Deterministic seeds covering the known taxonomy."""
    starts = [("wors", ic_wors(grid, params)),
              ("bd+", ic_bd(grid, params, +1)),
              ("bd-", ic_bd(grid, params, -1))]
    starts += [(f"mixed{e}", ic_mixed(grid, params, e)) for e in "NSEW"]
    if nfields == 5:
        starts = [(name, st.to_full()) for name, st in starts]
        starts += [("diag+", ic_diagonal(grid, params, +1)),
                   ("diag-", ic_diagonal(grid, params, -1)),
                   ("esc+", ic_escaped(grid, params, +1)),
                   ("esc-", ic_escaped(grid, params, -1))]
        for k, rec in enumerate(embed_records):
            if isinstance(rec.state, ReducedState):
                starts.append((f"embed{k}", rec.state.to_full()))
    return starts


@dataclass
class DeflateResult:
    records: list                       # converged, deduplicated-against records
    classes: list                       # one representative per symmetry class
    labels: list                        # labels of the class representatives
    attempts: int
    failures: int = 0


def deflate_campaign(grid: Grid, params: MaterialParams,
                     config: SolverConfig = None, nfields: int = 2,
                     nstarts: int = 64, seed: int = 0,
                     embed_records=(), group=AXIS_GROUP_NAMES) -> DeflateResult:
    """Multi-start deflated Newton search of the solution landscape.

    Structured seeds run first, then random smoothed starts; each start is
    re-run deflated against everything found so far until it stops
    producing new solutions.  Class counts are lower bounds on the true
    landscape since the search is finite.
    """
    config = config or SolverConfig()
    rng = np.random.default_rng(seed)
    found: list[SolutionRecord] = []
    attempts = failures = 0
    radius = config.deflation_radius(params, grid)

    def is_new(rec):
        return all(rec.state.distance(r.state) > radius for r in found)

    starts = _structured_starts(grid, params, nfields, embed_records)
    while len(starts) < nstarts:
        starts.append((f"rand{len(starts)}",
                       random_state(grid, params, rng, nfields)))
    for name, st in starts[:nstarts]:
        # undeflated solve first, so a start sitting in a fresh basin is
        # never deflected out of it; then re-run deflated against
        # everything known while that keeps paying off
        attempts += 1
        rec = newton_solve(st, params, config, init_name=name)
        if rec.converged and is_new(rec):
            found.append(rec)
        elif not rec.converged:
            failures += 1
        for _ in range(8):
            attempts += 1
            rec = newton_solve(st, params, config, deflated_against=found,
                               init_name=name)
            if rec.converged and is_new(rec):
                found.append(rec)
                continue
            if not rec.converged and rec.label not in ("DUPLICATE",):
                failures += 1
            break
    reps = dedup(found, tol=radius, group=group)
    return DeflateResult(records=found, classes=reps,
                         labels=[r.label for r in reps],
                         attempts=attempts, failures=failures)


@dataclass
class ContinuationResult:
    rhos: list                          # snapped hole sizes attempted
    escaped: list                       # bool per rho
    q3_inner_max: list                  # max q3 adjacent to the hole per rho
    last_good: float | None
    first_bad: float | None

    @property
    def threshold(self):
        """Midpoint estimate of the escape-existence edge."""
        if self.last_good is None or self.first_bad is None:
            return None
        return 0.5 * (self.last_good + self.first_bad)


def escaped_continuation(params: MaterialParams, n: int = 129,
                         rho_start: float = 0.02, rho_max: float = 0.12,
                         step: float = 0.002, winding: int = +1,
                         config: SolverConfig = None) -> ContinuationResult:
    """Warm-started continuation of the escaped five-field state in rho.

    Starts from ic_escaped at rho_start; each subsequent (snapped) hole
    size reuses the previous solution. Stops after the first hole size
    where no escaped state converges.
    """
    if step <= 0:
        raise ValueError(f"step must be positive, got {step}")
    config = config or SolverConfig()
    g = build_grid(n, rho_start)
    rec = newton_solve(ic_escaped(g, params, winding), params, config,
                       init_name="esc")
    if not (rec.converged and rec.label == "ESCAPED"):
        raise CampaignError(f"no escaped state at starting rho={rho_start} "
                            f"(got {rec.label})")
    rhos, flags, q3max = [], [], []
    seen = set()
    last_good = first_bad = None
    prev = rec.state
    rho = rho_start
    while rho <= rho_max:
        g = build_grid(n, rho)
        rs = g.spec.rho_snapped
        if rs in seen:
            rho += step
            continue
        seen.add(rs)
        st = FullState(g, prev.fields.copy())
        st.apply_dirichlet(dirichlet_values(g, params))
        rec = newton_solve(st, params, config, init_name=f"cont{rs:.4f}")
        ok = rec.converged and rec.label == "ESCAPED"
        rhos.append(rs)
        flags.append(ok)
        ring = np.zeros_like(g.inner)
        ring[1:-1, 1:-1] = (g.inner[2:, 1:-1] | g.inner[:-2, 1:-1]
                            | g.inner[1:-1, 2:] | g.inner[1:-1, :-2])
        ring &= g.interior
        fld = rec.state.fields[2] if rec.converged else st.fields[2]
        q3max.append(float(np.max(fld[ring])) if ring.any() else np.nan)
        if ok:
            last_good = rs
            prev = rec.state
        else:
            first_bad = rs
            break
        rho += step
    return ContinuationResult(rhos, flags, q3max, last_good, first_bad)


def flow_experiment(params, n, rho, ic_name: str, config: SolverConfig = None,
                    perturb: float = 1e-6, seed: int = 0, **ic_kwargs):
    """Named-initial-condition gradient flow; returns (record, samples).

    ``perturb`` adds seeded nodewise noise of amplitude perturb * s_plus to
    the initial state.  The discrete flow conserves the symmetries of a
    symmetric start exactly, so without this noise an unstable symmetric
    state is a fixed point of the computation; the noise plays the role of
    the rounding asymmetry any physical simulation carries.
    """
    g = build_grid(n, rho)
    makers = {"wors": ic_wors, "bd": ic_bd, "esc": ic_esc, "escaped": ic_escaped}
    if ic_name not in makers:
        raise CampaignError(f"unknown initial condition {ic_name!r}")
    st = makers[ic_name](g, params, **ic_kwargs)
    if perturb:
        rng = np.random.default_rng(seed)
        noise = rng.uniform(-1.0, 1.0, size=st.fields.shape)
        st.fields[:, g.interior] += perturb * params.s_plus * noise[:, g.interior]
    return gradient_flow(st, params, config)

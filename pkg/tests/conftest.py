import numpy as np
import pytest

from ldglab import (MaterialParams, build_grid, newton_solve, SolverConfig)
from ldglab.solvers import ic_wors, ic_bd


@pytest.fixture(scope="session")
def params():
    return MaterialParams.default()


@pytest.fixture(scope="session")
def solve_cache(params):
    """Memoized converged states keyed by (kind, n, rho, lambda_bar_sq)."""
    cache = {}

    def get(kind, n, rho, lam2=200.0):
        key = (kind, n, rho, lam2)
        if key not in cache:
            p = MaterialParams.default(lambda_bar_sq=lam2)
            g = build_grid(n, rho)
            if kind == "wors":
                rec = newton_solve(ic_wors(g, p), p, symmetrize=True,
                                   init_name="wors")
            elif kind == "bd":
                rec = newton_solve(ic_bd(g, p), p, init_name="bd")
            else:
                raise KeyError(kind)
            cache[key] = rec
        return cache[key]

    return get


@pytest.fixture()
def rng():
    return np.random.default_rng(1234)

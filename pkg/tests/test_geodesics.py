"""Degenerate-metric geodesic costs between potential wells."""

import numpy as np
import pytest

from ldglab.core import MaterialParams, WellSet
from ldglab.geodesics import (cost_sweep, export_path, geodesic_distance,
                              transition_costs)


@pytest.fixture(scope="module")
def costs(params):
    return transition_costs(params, npoints=201)


def test_costs_positive_and_ordered(costs):
    c = costs
    assert 0 < c.c1 < c.c2 < c.c3 < c.c4
    # origin-mediated planar-to-planar path would cost 2 c2; the direct
    # geodesic must not beat concatenation through the saddle by much more
    # than the degenerate metric allows, and must be cheaper than 2 c2
    assert c.c4 < 2 * c.c2


def test_c2_symmetric_between_planar_wells(params):
    w = WellSet.of(params)
    da = geodesic_distance(np.array(w.origin), np.array(w.p1), params,
                           npoints=201)
    db = geodesic_distance(np.array(w.origin), np.array(w.p2), params,
                           npoints=201)
    assert da == pytest.approx(db, rel=1e-6)


def test_triangle_inequality(costs):
    # origin->p1 then p1->p3 dominates origin->p3
    assert costs.c1 <= costs.c2 + costs.c3 + 1e-9
    assert costs.c3 <= costs.c1 + costs.c2 + 1e-9


def test_distance_refines_with_resolution(params):
    w = WellSet.of(params)
    coarse = geodesic_distance(np.array(w.origin), np.array(w.p3), params,
                               npoints=51)
    fine = geodesic_distance(np.array(w.origin), np.array(w.p3), params,
                             npoints=401)
    assert abs(fine - coarse) / fine < 5e-3


def test_endpoint_identity_is_zero(params):
    w = WellSet.of(params)
    d = geodesic_distance(np.array(w.p1), np.array(w.p1), params, npoints=51)
    assert d == pytest.approx(0.0, abs=1e-12)


def test_cost_sweep_monotone_trends(params):
    rows = cost_sweep([-9.0, -6.0], npoints=101)
    assert len(rows) == 2
    for t, c in rows:
        assert c.c2 > c.c1
    # deeper quench (more negative t) costs more
    assert rows[0][1].c1 > rows[1][1].c1


def test_export_path(tmp_path, params):
    w = WellSet.of(params)
    _, path = geodesic_distance(np.array(w.origin), np.array(w.p3), params,
                                npoints=51, return_path=True)
    export_path(path, tmp_path, "o_to_p3", params)
    data = np.loadtxt(tmp_path / "o_to_p3.csv", delimiter=",", skiprows=1)
    assert data.shape == (51, 3)
    assert data[0, 1:] == pytest.approx([0.0, 0.0])
    assert data[-1, 1:] == pytest.approx(list(w.p3))

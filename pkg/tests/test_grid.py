"""Grid geometry, masks, quadrature, and discrete operators."""

import json

import numpy as np
import pytest

from ldglab import GeometryError, build_grid, dirichlet_values


def test_rho_snapping():
    g = build_grid(129, 0.2)
    h = g.spec.h
    k = round(g.spec.rho_snapped / h)
    assert abs(g.spec.rho_snapped - k * h) < 1e-14
    assert abs(g.spec.rho_snapped - 0.2) <= h / 2 + 1e-14
    # tiny rho snaps up to one cell, never to zero
    g2 = build_grid(129, 1e-6)
    assert g2.spec.rho_snapped == pytest.approx(h)


def test_masks_partition():
    g = build_grid(65, 0.25)
    total = g.hole.astype(int) + g.inner.astype(int) + g.outer.astype(int) \
        + g.interior.astype(int)
    assert np.all(total == 1)
    assert np.array_equal(g.dirichlet, g.inner | g.outer)
    assert np.array_equal(g.domain, ~g.hole)
    # four-fold symmetry of every mask
    for m in (g.hole, g.inner, g.outer, g.interior):
        assert np.array_equal(m, m[::-1, :])
        assert np.array_equal(m, m[:, ::-1])
        assert np.array_equal(m, m.T)


def test_weights_area():
    # cell-counting trapezoid weights integrate 1 to the exact domain area
    # 4 - 4 rho^2 when rho sits on the grid.
    g = build_grid(129, 0.25)
    rho = g.spec.rho_snapped
    area = g.integrate(np.where(g.domain, 1.0, 0.0))
    assert area == pytest.approx(4.0 - 4.0 * rho * rho, abs=1e-10)


def test_integrate_smooth_function():
    g = build_grid(257, 0.25)
    rho = g.spec.rho_snapped
    f = g.X**2 + g.Y**2
    exact = 8.0 / 3.0 - 8.0 / 3.0 * rho**4
    val = g.integrate(np.where(g.domain, f, 0.0))
    assert val == pytest.approx(exact, rel=1e-4)


def test_laplacian_manufactured_convergence():
    # 5-point Laplacian is second order on a smooth manufactured solution.
    errs = []
    for n in (65, 129):
        g = build_grid(n, 0.25)
        u = np.sin(np.pi * g.X) * np.sin(np.pi * g.Y)
        lap = g.apply_laplacian(u)
        exact = -2.0 * np.pi**2 * u
        err = np.max(np.abs((lap - exact)[g.interior]))
        errs.append(err)
    assert errs[1] < errs[0] / 3.0  # ~4x for O(h^2)


def test_dirichlet_energy_matches_stiffness():
    g = build_grid(33, 0.25)
    rng = np.random.default_rng(0)
    u = np.where(g.domain, rng.standard_normal((33, 33)), 0.0)
    # stiffness_interior reproduces the edge sum for fields vanishing on
    # the Dirichlet rings
    v = u.copy()
    v[g.dirichlet] = 0.0
    vi = v[g.interior]
    K = g.stiffness_interior()
    assert float(vi @ (K @ vi)) == pytest.approx(g.dirichlet_energy(v), rel=1e-12)


def test_dirichlet_energy_exact_on_linear():
    # For u = x the exact Dirichlet integral over the domain is area.
    g = build_grid(129, 0.25)
    rho = g.spec.rho_snapped
    u = np.where(g.domain, g.X, 0.0)
    # edges crossing the hole boundary see the artificial jump to 0, so
    # evaluate on a field that is linear everywhere instead
    u = g.X.copy()
    val = g.dirichlet_energy(u)
    assert val == pytest.approx(4.0 - 4.0 * rho * rho, rel=1e-10)


def test_geometry_errors():
    with pytest.raises(GeometryError):
        build_grid(128, 0.2)  # even n
    with pytest.raises(GeometryError):
        build_grid(3, 0.2)  # too small
    with pytest.raises(GeometryError):
        build_grid(129, 0.0)
    with pytest.raises(GeometryError):
        build_grid(129, 0.999)


def test_dirichlet_values_pattern(params):
    g = build_grid(129, 0.2)
    bd = dirichlet_values(g, params)
    sp_ = params.s_plus
    c = 64  # midline index
    # tangent data: +s/2 on y=+-1 midedge, -s/2 on x=+-1 midedge
    assert bd.q1[c, 0] == pytest.approx(sp_ / 2)
    assert bd.q1[c, -1] == pytest.approx(sp_ / 2)
    assert bd.q1[0, c] == pytest.approx(-sp_ / 2)
    assert bd.q1[-1, c] == pytest.approx(-sp_ / 2)
    # corners ramp through zero
    assert bd.q1[0, 0] == 0.0
    assert abs(bd.q1[0, 1]) < sp_ / 2
    # q3 constant on the outer ring, zero on the inner
    assert np.all(bd.q3[g.outer] == pytest.approx(-sp_ / 6))
    assert np.all(bd.q3[g.inner] == 0.0)
    assert np.all(bd.q1[g.inner] == 0.0)


def test_export_field(tmp_path):
    g = build_grid(33, 0.25)
    u = g.X + 2 * g.Y
    path = tmp_path / "field.csv"
    g.export_field(u, path, field_name="u")
    data = np.loadtxt(path, delimiter=",", skiprows=1)
    assert data.shape == (int(g.domain.sum()), 3)
    # values round-trip
    assert data[0, 2] == pytest.approx(g.X[0, 0] + 2 * g.Y[0, 0])
    meta = json.loads((tmp_path / "field.csv.json").read_text())
    assert meta["schema"] == 1
    assert meta["field_name"] == "u"
    assert meta["n"] == 33

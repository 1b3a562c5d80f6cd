import math
import warnings

import numpy as np
import pytest

import moebiusdisk as md
from moebiusdisk.fields import (
    Field,
    FieldInterpolator,
    RadialField,
    RadialGrid,
    TruncationWarning,
    dilate_radial,
    dirichlet_energy,
    field_from_profile,
    field_to_csv,
    hardy_ratio,
    integrate_dmu,
    integrate_euclidean,
    load_field,
    make_grid,
    mollifier,
    pullback,
    radial_bump,
    radial_grid,
    radial_grid_log,
    save_field,
    smooth_bump,
    support_radius,
    truncated_log,
    weighted_sup_norm,
    zero_field,
)
from moebiusdisk.geometry import polar_lift

TWO_PI = 2.0 * math.pi


def test_grid_validation():
    with pytest.raises(ValueError):
        RadialGrid(np.array([0.0, 1.0, 2.0]))  # first node must be positive
    with pytest.raises(ValueError):
        RadialGrid(np.array([1.0, 0.5, 2.0]))  # not increasing
    with pytest.raises(ValueError):
        make_grid(64, 4, 6.0)  # too few angles


def test_field_shape_and_finiteness_checks():
    g = make_grid(32, 16, 4.0)
    with pytest.raises(ValueError):
        Field(g, np.zeros((5, 5)))
    bad = np.zeros((32, 16))
    bad[0, 0] = np.inf
    with pytest.raises(ValueError):
        Field(g, bad)


def test_hyperbolic_volume_quadrature():
    grid = radial_grid(4096, 12.0)
    vol = TWO_PI * float(np.sum(grid.w_mu))
    assert vol == pytest.approx(math.pi * math.sinh(12.0) ** 2, rel=1e-4)


def test_euclidean_area_quadrature():
    grid = radial_grid(4096, 12.0)
    ones = RadialField(grid, np.ones(grid.n_rho))
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", TruncationWarning)
        area = integrate_euclidean(ones)
    assert area == pytest.approx(math.pi * math.tanh(12.0) ** 2, rel=1e-4)


def test_truncated_log_energy_exact():
    grid = radial_grid_log(512, 12.0, 12.0, include_ell=[1.0])
    u = truncated_log(grid)
    assert dirichlet_energy(u) == pytest.approx(TWO_PI, rel=1e-9)


def test_integrate_dmu_warns_on_fat_tail():
    grid = radial_grid(256, 4.0)
    u = RadialField(grid, np.ones(grid.n_rho))
    with pytest.warns(TruncationWarning):
        integrate_dmu(u)


def test_hardy_ratio_analytic_case():
    grid = radial_grid(4096, 12.0)
    u = RadialField(grid, 1.0 - grid.r**2)
    assert hardy_ratio(u) == pytest.approx(2.0, abs=1e-4)


def test_hardy_ratio_rejects_zero_field():
    grid = radial_grid(64, 4.0)
    with pytest.raises(ValueError):
        hardy_ratio(RadialField(grid, np.zeros(grid.n_rho)))


def test_dilation_preserves_energy_and_sup_norm():
    kinks = [0.5, 1.0, 2.0]
    grid = radial_grid_log(4096, 12.0, 16.0, include_ell=kinks)
    u = truncated_log(grid)
    e0, n0 = dirichlet_energy(u), weighted_sup_norm(u)
    for s in (0.5, 2.0):
        v = dilate_radial(u, s)
        assert dirichlet_energy(v) == pytest.approx(e0, rel=1e-3)
        assert weighted_sup_norm(v) == pytest.approx(n0, rel=1e-3)


def test_dilation_rejects_nonpositive_scale():
    grid = radial_grid(64, 4.0)
    with pytest.raises(ValueError):
        dilate_radial(truncated_log(grid), 0.0)


def test_smooth_bump_energy_normalization():
    g = make_grid(256, 128, 8.0)
    u = smooth_bump(g, 1.5, energy=1.0)
    assert dirichlet_energy(u) == pytest.approx(1.0, rel=1e-12)


def test_radial_bump_support():
    grid = radial_grid(1024, 8.0)
    u = radial_bump(grid, 1.5)
    assert np.all(u.values[grid.rho_nodes > 1.5] == 0.0)


def test_pullback_is_nearly_isometric():
    g = make_grid(512, 256, 12.0)
    u = smooth_bump(g, 1.5, energy=1.0)
    v = pullback(u, polar_lift(1.0, 0.3))
    assert dirichlet_energy(v) == pytest.approx(1.0, rel=1e-3)


def test_planted_profile_matches_pullback():
    # analytic planting and numerical pullback agree away from grid error
    g = make_grid(256, 256, 10.0)
    c = polar_lift(1.0, 0.0)
    planted = field_from_profile(g, mollifier(1.2), c)
    moved = pullback(field_from_profile(g, mollifier(1.2)), c)
    assert float(np.max(np.abs(planted.values - moved.values))) < 5e-3


def test_interpolator_reproduces_node_values():
    g = make_grid(128, 64, 6.0)
    u = smooth_bump(g, 1.5)
    interp = FieldInterpolator(u)
    vals = interp.at_polar(g.rho_nodes[10], g.theta[7])
    assert vals == pytest.approx(u.values[10, 7], abs=1e-10)


def test_interpolator_vanishes_outside_truncation():
    g = make_grid(64, 32, 4.0)
    interp = FieldInterpolator(smooth_bump(g, 1.0))
    assert interp.at_polar(5.0, 0.0) == 0.0


def test_support_radius():
    g = make_grid(256, 64, 8.0)
    u = smooth_bump(g, 1.5)
    assert support_radius(u) <= 1.5 + g.rho_nodes[1]


def test_save_load_round_trip(tmp_path):
    g = make_grid(64, 32, 4.0)
    u = smooth_bump(g, 1.0)
    path = tmp_path / "u.json"
    save_field(str(path), u)
    v = load_field(str(path))
    assert isinstance(v, Field)
    np.testing.assert_allclose(v.values, u.values, atol=0)
    np.testing.assert_allclose(v.grid.rho_nodes, g.rho_nodes, atol=0)


def test_save_load_radial_round_trip(tmp_path):
    grid = radial_grid(64, 4.0)
    u = radial_bump(grid, 1.0)
    path = tmp_path / "r.json"
    save_field(str(path), u)
    v = load_field(str(path))
    assert isinstance(v, RadialField)
    np.testing.assert_allclose(v.values, u.values, atol=0)


def test_field_to_csv(tmp_path):
    g = make_grid(16, 8, 3.0)
    path = tmp_path / "f.csv"
    field_to_csv(str(path), smooth_bump(g, 1.0))
    lines = path.read_text().strip().splitlines()
    assert len(lines) == 16 * 8 + 1


def test_zero_field_integrates_to_zero():
    g = make_grid(32, 16, 4.0)
    assert integrate_dmu(zero_field(g)) == 0.0

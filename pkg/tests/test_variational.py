import math
import warnings

import numpy as np
import pytest

from moebiusdisk.fields import (
    Field,
    TruncationWarning,
    dirichlet_energy,
    make_grid,
    pullback,
    radial_grid,
    smooth_bump,
    zero_field,
)
from moebiusdisk.functionals import quartic
from moebiusdisk.geometry import geodesic_distance, polar_lift, ORIGIN
from moebiusdisk.variational import (
    OptimizerConfig,
    blowup_probe,
    dirichlet_form,
    maximize,
    moser_field,
    profile_extract,
    recenter,
    riesz_gradient,
    vanishing_check,
)

TWO_PI = 2.0 * math.pi


def test_moser_field_normalization():
    for k in (2, 16, 256):
        m = moser_field(k)
        assert dirichlet_energy(m) == pytest.approx(1.0, rel=1e-9)
        # plateau value at the innermost node
        assert m.values[0] == pytest.approx(
            math.sqrt(math.log(k) / TWO_PI), rel=1e-12
        )


def test_moser_field_rejects_bad_input():
    with pytest.raises(ValueError):
        moser_field(1)
    with pytest.raises(ValueError):
        moser_field(10**6, grid=radial_grid(64, 3.0))  # plateau unresolvable


def test_blowup_probe_is_flat_at_critical_exponent():
    values = [v for _, v, _ in blowup_probe(4.0 * math.pi, [2, 8, 32, 128])]
    assert max(values) / min(values) < 3.0


def test_dirichlet_form_matches_field_energy():
    g = make_grid(256, 128, 8.0)
    u = smooth_bump(g, 1.5, energy=1.0)
    form = dirichlet_form(g)
    assert form.energy(u) == pytest.approx(dirichlet_energy(u), rel=2e-2)
    # bilinear symmetry
    v = smooth_bump(g, 2.0)
    assert form.inner(u, v) == pytest.approx(form.inner(v, u), rel=1e-12)


def test_poisson_solve_against_manufactured_solution():
    # radial exact solution u = exp(-rho^2) of the hyperbolic Poisson
    # problem; the discrete error is pure second-order truncation
    g = make_grid(512, 256, 8.0)
    rho = g.rho_nodes[:, None]
    u_exact = np.exp(-(rho**2)) - math.exp(-64.0)
    up = -2.0 * rho * np.exp(-(rho**2))
    upp = (4.0 * rho**2 - 2.0) * np.exp(-(rho**2))
    A = np.sinh(rho) * np.cosh(rho)
    f = -(np.cosh(2.0 * rho) * up + A * upp) / A
    form = dirichlet_form(g)
    b = form.mass_vector(np.broadcast_to(f, (g.n_rho, g.n_theta)).copy())
    sol = form._unpack(form.solve(b))
    err = float(np.max(np.abs(sol.values - u_exact)))
    assert err < 1e-4


def test_riesz_gradient_is_directional_derivative():
    g = make_grid(128, 64, 8.0)
    F = quartic()
    u = smooth_bump(g, 1.5, energy=1.0)
    phi = smooth_bump(g, 2.5)
    form = dirichlet_form(g)
    grad = riesz_gradient(u, F)
    lhs = form.inner(grad, phi)
    h = 1e-6
    up = Field(g, u.values + h * phi.values)
    um = Field(g, u.values - h * phi.values)
    rhs = (form.functional(up, F) - form.functional(um, F)) / (2.0 * h)
    assert lhs == pytest.approx(rhs, rel=1e-5)


def test_recenter_recovers_planted_centers():
    g = make_grid(512, 1024, 8.0)
    base = smooth_bump(g, 1.2, energy=1.0)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", TruncationWarning)
        for d in (1.0, 2.0, 4.0):
            c = polar_lift(d, 0.0)
            rec = recenter(pullback(base, c))
            assert geodesic_distance(rec.center, c) < 0.1
            assert not rec.ambiguous


def test_recenter_leaves_centered_field_alone():
    g = make_grid(128, 64, 8.0)
    u = smooth_bump(g, 1.5, energy=1.0)
    rec = recenter(u)
    assert rec.center.abs == 0.0
    np.testing.assert_array_equal(rec.field.values, u.values)


def test_recenter_rejects_zero_field():
    g = make_grid(64, 32, 6.0)
    with pytest.raises(ValueError):
        recenter(zero_field(g))


def test_optimizer_config_validation():
    with pytest.raises(ValueError):
        OptimizerConfig(t=0.0)
    with pytest.raises(ValueError):
        OptimizerConfig(t=1.5)
    with pytest.raises(ValueError):
        OptimizerConfig(step=-1.0)


def test_maximize_converges_and_is_monotone():
    g = make_grid(128, 64, 6.0)
    seed = smooth_bump(g, 1.5, energy=1.0)
    cfg = OptimizerConfig(t=1.0, step=1.0, max_iters=200, grad_tol=1e-6,
                          recenter_every=10)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", TruncationWarning)
        trace = maximize(seed, quartic(), cfg)
    assert trace.status == "converged"
    obj = np.asarray(trace.objective_history)
    assert np.all(np.diff(obj) >= -1e-12)
    assert max(trace.drift_history) < 1e-8
    assert trace.final_residual < 1e-6


def test_maximize_small_energy_gives_small_objective():
    g = make_grid(128, 64, 6.0)
    seed = smooth_bump(g, 1.5, energy=1e-4)
    cfg = OptimizerConfig(t=1e-4, max_iters=100)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", TruncationWarning)
        trace = maximize(seed, quartic(), cfg)
    assert trace.final_objective < 1e-6


def test_profile_extract_single_bump():
    g = make_grid(256, 512, 8.0)
    base = smooth_bump(g, 1.2, energy=1.0)
    shifted = pullback(base, polar_lift(1.0, 0.0))
    rep = profile_extract([shifted] * 4, energy_floor=0.05, rho_cut=2.5, taper=1.0)
    assert len(rep.profiles) == 1
    assert dirichlet_energy(rep.profiles[0]) == pytest.approx(1.0, rel=0.02)


def test_profile_extract_needs_a_sequence():
    g = make_grid(64, 32, 6.0)
    with pytest.raises(ValueError):
        profile_extract([zero_field(g)], energy_floor=0.1)


def test_vanishing_check_distinguishes_decay():
    g = make_grid(128, 64, 8.0)
    u = smooth_bump(g, 1.5, energy=1.0)
    fading = [Field(g, u.values * 0.5**j) for j in range(4)]
    rep = vanishing_check(fading, quartic())
    assert rep.concentration_decays and rep.f_integral_decays
    steady = vanishing_check([u] * 3, quartic())
    assert not steady.concentration_decays and not steady.f_integral_decays

import math

import numpy as np
import pytest

from moebiusdisk.geometry import (
    ORIGIN,
    DiskPoint,
    MobiusMap,
    ball_area,
    circle_circumference,
    disk_drop,
    geodesic_distance,
    geodesic_distance_checked,
    geodesic_distance_z,
    measure_weight,
    mobius_apply_z,
    polar_lift,
    random_disk_points,
)


def test_distance_from_origin_is_artanh():
    for r in (0.1, 0.5, 0.9, 0.999):
        p = DiskPoint(r, 0.0)
        assert geodesic_distance(ORIGIN, p) == pytest.approx(math.atanh(r), abs=1e-14)


def test_distance_is_symmetric():
    rng = np.random.default_rng(3)
    for _ in range(50):
        a = DiskPoint.from_complex(complex(*rng.uniform(-0.6, 0.6, 2)))
        b = DiskPoint.from_complex(complex(*rng.uniform(-0.6, 0.6, 2)))
        assert geodesic_distance(a, b) == pytest.approx(geodesic_distance(b, a), abs=1e-13)


def test_mobius_pair_is_involutive():
    rng = np.random.default_rng(0)
    for _ in range(100):
        c = DiskPoint.from_complex(complex(*rng.uniform(-0.7, 0.7, 2)))
        m = MobiusMap(c)
        p = DiskPoint.from_complex(complex(*rng.uniform(-0.7, 0.7, 2)))
        q = m.inverse()(m(p))
        assert abs(q.z - p.z) < 1e-14


def test_mobius_sends_center_to_origin():
    c = DiskPoint(0.3, -0.4)
    assert MobiusMap(c)(c).abs == 0.0


def test_shift_is_isometry():
    rng = np.random.default_rng(1)
    for _ in range(100):
        zeta = complex(*rng.uniform(-0.8, 0.8, 2)) * 0.6
        a = complex(*rng.uniform(-0.6, 0.6, 2))
        b = complex(*rng.uniform(-0.6, 0.6, 2))
        d0 = geodesic_distance_z(a, b)
        d1 = geodesic_distance_z(mobius_apply_z(zeta, a), mobius_apply_z(zeta, b))
        assert abs(d0 - d1) < 1e-12


def test_distance_saturates_near_boundary():
    a = DiskPoint(1.0 - 1e-16, 0.0)
    b = DiskPoint(-(1.0 - 1e-16), 0.0)
    d, saturated = geodesic_distance_checked(a, b)
    assert saturated and d == 50.0
    # the vectorized version clamps to the same cap without warnings
    assert float(geodesic_distance_z(a.z, np.array([b.z]))[0]) <= 50.0


def test_vectorized_distance_matches_scalar():
    rng = np.random.default_rng(5)
    z1 = complex(*rng.uniform(-0.5, 0.5, 2))
    z2 = rng.uniform(-0.5, 0.5, 20) + 1j * rng.uniform(-0.5, 0.5, 20)
    d = geodesic_distance_z(z1, z2)
    for i in range(20):
        ref = geodesic_distance(DiskPoint.from_complex(z1), DiskPoint.from_complex(z2[i]))
        assert d[i] == pytest.approx(ref, abs=1e-13)


def test_ball_area_and_circumference():
    assert ball_area(1.0) == pytest.approx(math.pi * math.sinh(1.0) ** 2, rel=1e-15)
    assert circle_circumference(2.0) == pytest.approx(
        2.0 * math.pi * math.sinh(2.0) * math.cosh(2.0), rel=1e-15
    )
    # circumference is the derivative of the ball area
    h = 1e-6
    fd = (ball_area(1.5 + h) - ball_area(1.5 - h)) / (2 * h)
    assert fd == pytest.approx(circle_circumference(1.5), rel=1e-8)


def test_polar_lift_round_trip():
    p = polar_lift(2.0, 1.2)
    rho, theta = disk_drop(p)
    assert rho == pytest.approx(2.0, abs=1e-12)
    assert theta == pytest.approx(1.2, abs=1e-12)


def test_polar_lift_rejects_boundary_radius():
    with pytest.raises(ValueError):
        polar_lift(25.0, 0.0)
    with pytest.raises(ValueError):
        polar_lift(-1.0, 0.0)


def test_disk_point_rejects_exterior():
    with pytest.raises(ValueError):
        DiskPoint(1.0, 0.1)


def test_measure_weight_at_origin():
    assert measure_weight(ORIGIN) == 1.0


def test_random_points_follow_hyperbolic_measure():
    rng = np.random.default_rng(7)
    z = random_disk_points(rng, 20000, rho_cap=3.0)
    rho = np.arctanh(np.abs(z))
    assert np.max(rho) <= 3.0 + 1e-12
    # mu(V_rho) = pi sinh^2 rho: the fraction inside rho = 1 is the area ratio
    frac = np.mean(rho <= 1.0)
    expect = math.sinh(1.0) ** 2 / math.sinh(3.0) ** 2
    assert frac == pytest.approx(expect, abs=0.01)

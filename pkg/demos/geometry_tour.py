"""A short tour of the disk geometry primitives.

Checks the closed-form identities numerically and shows that Moebius
shifts act as isometries on randomly sampled point pairs.
"""

import math

import numpy as np

from moebiusdisk import (
    ORIGIN,
    DiskPoint,
    MobiusMap,
    ball_area,
    circle_circumference,
    geodesic_distance,
    geodesic_distance_z,
    mobius_apply_z,
    polar_lift,
    random_disk_points,
)


def main():
    print("distance from the origin is artanh of the Euclidean radius:")
    for rho in (0.5, 1.0, 2.0, 4.0):
        p = polar_lift(rho, 0.0)
        print(f"  rho = {rho:4.1f}: |z| = {p.abs:.6f}, "
              f"d(0, z) = {geodesic_distance(ORIGIN, p):.12f}")

    print("\nball areas grow like sinh^2 (exponential volume growth):")
    for rho in (1.0, 2.0, 4.0, 8.0):
        print(f"  rho = {rho:4.1f}: area = {ball_area(rho):12.4e}, "
              f"circumference = {circle_circumference(rho):12.4e}")

    print("\na Moebius shift moves points but preserves all distances:")
    rng = np.random.default_rng(0)
    shift = MobiusMap(DiskPoint(0.4, -0.2))
    worst = 0.0
    for _ in range(1000):
        a = complex(*rng.uniform(-0.7, 0.7, 2))
        b = complex(*rng.uniform(-0.7, 0.7, 2))
        d0 = geodesic_distance_z(a, b)
        d1 = geodesic_distance_z(
            mobius_apply_z(shift.center.z, a), mobius_apply_z(shift.center.z, b)
        )
        worst = max(worst, abs(float(d0 - d1)))
    print(f"  worst distance defect over 1000 pairs: {worst:.3e}")

    print("\nsampling uniformly in the hyperbolic measure pushes mass outward:")
    z = random_disk_points(rng, 50000, rho_cap=3.0)
    rho = np.arctanh(np.abs(z))
    for edge in (1.0, 2.0, 3.0):
        frac = float(np.mean(rho <= edge))
        expect = math.sinh(edge) ** 2 / math.sinh(3.0) ** 2
        print(f"  fraction inside rho = {edge}: {frac:.4f} (exact {expect:.4f})")


if __name__ == "__main__":
    main()

"""Recover concentration profiles from a sequence of two-bump fields.

Each field in the synthetic sequence is a sum of two bumps drifting
apart along opposite rays.  The recenter-average-subtract loop recovers
both profiles with their energies, and the extracted centers diverge
with the sequence index, mirroring the dichotomy behind profile
decompositions: the energy splits into well-separated blobs.
"""

import math
import warnings

from moebiusdisk import (
    Field,
    TruncationWarning,
    dirichlet_energy,
    field_from_profile,
    geodesic_distance,
    make_grid,
    mollifier,
    polar_lift,
    profile_extract,
)


def planted_bump(grid, width, energy, center):
    base = field_from_profile(grid, mollifier(width))
    scale = math.sqrt(energy / dirichlet_energy(base))
    return field_from_profile(grid, lambda d: scale * mollifier(width)(d), center)


def main():
    grid = make_grid(256, 512, 8.0)
    sequence = []
    for i in range(9):
        d = 1.0 + 0.15 * i
        f1 = planted_bump(grid, 1.2, 1.0, polar_lift(d, 0.0))
        f2 = planted_bump(grid, 1.0, 0.5, polar_lift(d, math.pi))
        sequence.append(Field(grid, f1.values + f2.values))
    print("planted: bump A with energy 1.0 and bump B with energy 0.5,")
    print("drifting apart along opposite rays (separation 2.0 to 4.4)\n")

    with warnings.catch_warnings():
        warnings.simplefilter("ignore", TruncationWarning)
        report = profile_extract(sequence, energy_floor=0.03,
                                 rho_cut=1.8, taper=0.8)

    print(f"profiles recovered: {len(report.profiles)}")
    for i, w in enumerate(report.profiles):
        print(f"  profile {i}: energy = {dirichlet_energy(w):.4f}")
    print(f"energy sum = {report.energy_sum:.4f}")

    print("\nextracted center separation along the sequence:")
    for k, (c1, c2) in enumerate(zip(report.centers_per_step[0],
                                     report.centers_per_step[1])):
        print(f"  field {k}: {geodesic_distance(c1, c2):.3f}")


if __name__ == "__main__":
    main()

"""Closed-form geometry of the Poincare disk.

The disk carries the metric g_ij = delta_ij / (1 - |x|^2)^2 (no factor 4),
so that

    d(0, r) = artanh(r),
    area of the geodesic ball of radius rho = pi * sinh(rho)^2,
    circumference of the geodesic circle of radius rho = 2*pi*sinh(rho)*cosh(rho).

All operations here are pure functions on immutable values.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

# Geodesic distances are capped here; far beyond any experiment's rho_max,
# and safely inside the range where 1 - tanh(rho) is representable.
DISTANCE_CAP = 50.0

# Largest hyperbolic radius polar_lift accepts: tanh(rho) must stay < 1.0
# in double precision (tanh(18.4) == 1.0 - 2e-16).
RHO_LIFT_MAX = 18.0


@dataclass(frozen=True)
class DiskPoint:
    """A point of the open unit disk, |z| < 1."""

    re: float
    im: float

    def __post_init__(self):
        if not (self.re * self.re + self.im * self.im < 1.0):
            raise ValueError(
                f"point ({self.re}, {self.im}) is not inside the open unit disk"
            )

    @property
    def z(self) -> complex:
        return complex(self.re, self.im)

    @property
    def abs(self) -> float:
        return math.hypot(self.re, self.im)

    @classmethod
    def from_complex(cls, z: complex) -> "DiskPoint":
        return cls(float(z.real), float(z.imag))


ORIGIN = DiskPoint(0.0, 0.0)


@dataclass(frozen=True)
class MobiusMap:
    """The disk automorphism z -> (z - zeta) / (1 - conj(zeta) z).

    The family contains no rotation factor: the map with center 0 is the
    identity, and every map sends its own center to the origin.
    """

    center: DiskPoint

    def __call__(self, p: DiskPoint) -> DiskPoint:
        return mobius_apply(self, p)

    def inverse(self) -> "MobiusMap":
        return mobius_inverse(self)


def mobius_apply(m: MobiusMap, p: DiskPoint) -> DiskPoint:
    """Apply the Moebius shift with center zeta to a disk point."""
    w = mobius_apply_z(m.center.z, p.z)
    return DiskPoint.from_complex(w)


def mobius_apply_z(zeta: complex, z):
    """Vectorized Moebius shift on complex coordinates (no validity checks)."""
    return (z - zeta) / (1.0 - np.conj(zeta) * z)


def mobius_inverse(m: MobiusMap) -> MobiusMap:
    """Algebraic inverse: the shift with the opposite center."""
    return MobiusMap(DiskPoint(-m.center.re, -m.center.im))


def geodesic_distance_checked(a: DiskPoint, b: DiskPoint) -> tuple[float, bool]:
    """Geodesic distance together with a saturation flag.

    Returns (artanh |eta_a(b)|, saturated).  When the Moebius image is so
    close to the boundary that artanh overflows the cap, the cap is
    returned and the flag is set.
    """
    t = abs(mobius_apply_z(a.z, b.z))
    if t >= math.tanh(DISTANCE_CAP):
        return DISTANCE_CAP, True
    return math.atanh(t), False


def geodesic_distance(a: DiskPoint, b: DiskPoint) -> float:
    """Geodesic distance between two disk points (saturating at DISTANCE_CAP)."""
    return geodesic_distance_checked(a, b)[0]


def geodesic_distance_z(z1, z2):
    """Vectorized geodesic distance on complex coordinates.

    Saturates at DISTANCE_CAP instead of overflowing near the boundary.
    """
    t = np.abs((z2 - z1) / (1.0 - np.conj(z1) * z2))
    # tanh(DISTANCE_CAP) rounds to 1.0 in doubles, so clamp just below 1
    t = np.minimum(t, np.nextafter(1.0, 0.0))
    return np.minimum(np.arctanh(t), DISTANCE_CAP)


def measure_weight(p: DiskPoint) -> float:
    """Density of the hyperbolic measure: 1 / (1 - |z|^2)^2."""
    s = 1.0 - (p.re * p.re + p.im * p.im)
    return 1.0 / (s * s)


def polar_lift(rho: float, theta: float, rho_max: float = RHO_LIFT_MAX) -> DiskPoint:
    """Disk point at hyperbolic radius rho and angle theta (r = tanh rho)."""
    if rho < 0.0:
        raise ValueError("rho must be nonnegative")
    if rho > rho_max:
        raise ValueError(
            f"rho={rho} exceeds the configured limit {rho_max}; "
            "the point would collapse onto the boundary in floating point"
        )
    r = math.tanh(rho)
    return DiskPoint(r * math.cos(theta), r * math.sin(theta))


def disk_drop(p: DiskPoint) -> tuple[float, float]:
    """Hyperbolic polar coordinates (rho, theta) of a disk point."""
    r = p.abs
    theta = math.atan2(p.im, p.re) % (2.0 * math.pi)
    return math.atanh(r), theta


def ball_area(rho: float) -> float:
    """Hyperbolic area of the geodesic ball of radius rho: pi * sinh(rho)^2."""
    return math.pi * math.sinh(rho) ** 2


def circle_circumference(rho: float) -> float:
    """Hyperbolic length of the geodesic circle of radius rho."""
    return 2.0 * math.pi * math.sinh(rho) * math.cosh(rho)


def random_disk_points(rng: np.random.Generator, n: int, rho_cap: float = 3.0):
    """n points sampled uniformly w.r.t. the hyperbolic measure on V_rho_cap.

    Returns an array of complex coordinates.
    """
    # mu(V_rho) = pi sinh^2 rho, so sinh^2 is uniform on [0, sinh^2 rho_cap].
    s = rng.uniform(0.0, math.sinh(rho_cap) ** 2, size=n)
    rho = np.arcsinh(np.sqrt(s))
    theta = rng.uniform(0.0, 2.0 * math.pi, size=n)
    return np.tanh(rho) * np.exp(1j * theta)

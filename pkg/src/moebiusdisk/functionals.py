"""Integral functionals with exponential-type nonlinearities.

Exponential integrals are computed in the normalized form e^{p u^2} - 1,
which keeps the hyperbolic-measure integrals finite for decaying fields.
Exponent arguments above EXP_CAP are clamped and counted as saturated
rather than silently overflowing to inf.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .fields import (
    Field,
    FieldInterpolator,
    RadialField,
    integrate_dmu,
    integrate_euclidean,
)
from .geometry import DiskPoint

FOUR_PI = 4.0 * math.pi

#: exponent arguments are clamped here; beyond it exp overflows double precision
EXP_CAP = 700.0


@dataclass(frozen=True)
class Nonlinearity:
    """A nonlinearity F with derivative and growth envelope C |s|^r e^{p s^2}.

    growth_r > 2 forces F(0) = 0; growth_p must stay below the critical
    threshold 4 pi.  convexity_claim records whether the strict interpolation
    inequality needed for maximizer existence is asserted for this F.
    """

    name: str
    eval: callable
    deriv: callable
    growth_c: float
    growth_r: float
    growth_p: float
    convexity_claim: bool = False

    def __post_init__(self):
        if self.growth_c <= 0 or self.growth_r <= 2 or not (0 <= self.growth_p < FOUR_PI):
            raise ValueError("growth envelope requires C > 0, r > 2, 0 <= p < 4 pi")

    def validate(self, s_max: float = 3.0, n: int = 301) -> None:
        """Spot checks: F(0) = 0, growth envelope, derivative vs differences."""
        s = np.linspace(-s_max, s_max, n)
        f = np.asarray(self.eval(s), dtype=float)
        if abs(float(self.eval(np.array([0.0]))[0])) > 1e-14:
            raise ValueError(f"{self.name}: F(0) must vanish")
        envelope = self.growth_c * np.abs(s) ** self.growth_r * np.exp(self.growth_p * s * s)
        if np.any(np.abs(f) > envelope * (1.0 + 1e-9) + 1e-12):
            raise ValueError(f"{self.name}: growth envelope violated on sample grid")
        h = 1e-5
        fd = (np.asarray(self.eval(s + h)) - np.asarray(self.eval(s - h))) / (2 * h)
        d = np.asarray(self.deriv(s), dtype=float)
        scale = np.maximum(np.abs(d), 1.0)
        if np.max(np.abs(fd - d) / scale) > 1e-6:
            raise ValueError(f"{self.name}: derivative disagrees with finite differences")


def quartic() -> Nonlinearity:
    """F(s) = s^4: the simplest admissible nonlinearity (r = 4, p = 0)."""
    return Nonlinearity(
        name="quartic",
        eval=lambda s: np.asarray(s) ** 4,
        deriv=lambda s: 4.0 * np.asarray(s) ** 3,
        growth_c=1.0,
        growth_r=4.0,
        growth_p=0.0,
        convexity_claim=True,
    )


NONLINEARITIES = {"quartic": quartic}


@dataclass(frozen=True)
class FunctionalReport:
    """Value of an exponential integral plus its numerical health flags."""

    value: float
    saturated_nodes: int = 0

    @property
    def saturated(self) -> bool:
        return self.saturated_nodes > 0


def _exp_m1(p: float, values: np.ndarray):
    """(e^{p u^2} - 1, number of clamped nodes)."""
    x = p * values * values
    n_sat = int(np.count_nonzero(x > EXP_CAP))
    return np.expm1(np.minimum(x, EXP_CAP)), n_sat


def _like(u, values):
    if isinstance(u, RadialField):
        return RadialField(u.grid, values)
    return Field(u.grid, values)


def tm_euclidean_report(u, p: float) -> FunctionalReport:
    """Integral of (e^{p u^2} - 1) against the Euclidean measure."""
    g, n_sat = _exp_m1(p, u.values)
    return FunctionalReport(integrate_euclidean(_like(u, g)), n_sat)


def tm_euclidean(u, p: float) -> float:
    return tm_euclidean_report(u, p).value


def tm_invariant_report(u, p: float) -> FunctionalReport:
    """Integral of (e^{p u^2} - 1) against the hyperbolic measure.

    Moebius-shift invariant up to discretization error.  Finiteness of the
    continuum integral is only guaranteed on the unit energy ball when
    p <= 4 pi; outside that regime the value is a blow-up probe.
    """
    g, n_sat = _exp_m1(p, u.values)
    return FunctionalReport(integrate_dmu(_like(u, g)), n_sat)


def tm_invariant(u, p: float) -> float:
    return tm_invariant_report(u, p).value


def f_integral(u, F: Nonlinearity) -> float:
    """Integral of F(u) against the hyperbolic measure."""
    return integrate_dmu(_like(u, np.asarray(F.eval(u.values), dtype=float)))


def brezis_lieb_defect(u_k: Field, u: Field, F: Nonlinearity) -> float:
    """Integral of F(u_k) - F(u_k - u) - F(u) against the hyperbolic measure.

    Vanishes exactly when u_k == u or u == 0, and decays as the difference
    u_k - u drifts to the boundary.
    """
    if u_k.grid is not u.grid and u_k.values.shape != u.values.shape:
        raise ValueError("fields must share a grid")
    vals = (
        np.asarray(F.eval(u_k.values), dtype=float)
        - np.asarray(F.eval(u_k.values - u.values), dtype=float)
        - np.asarray(F.eval(u.values), dtype=float)
    )
    return integrate_dmu(Field(u_k.grid, vals))


# ---------------------------------------------------------------------------
# local exponential bound on a Euclidean half-radius window

#: default sub-critical exponent for the window bound
DEFAULT_WINDOW_Q = math.pi / 4.0

#: Euclidean radius of the window disk
WINDOW_RADIUS = 0.5


@dataclass(frozen=True)
class LocalBoundReport:
    lhs: float
    rhs: float
    norm_sq: float
    constant: float
    ok: bool


class _WindowQuadrature:
    """Tensor polar quadrature on the Euclidean disk of radius 1/2 at center."""

    def __init__(self, center: DiskPoint, n_s: int = 64, n_phi: int = 64):
        if abs(center.z) + WINDOW_RADIUS >= 1.0:
            raise ValueError("window must have closure inside the unit disk")
        s = (np.arange(n_s) + 0.5) * (WINDOW_RADIUS / n_s)
        phi = np.arange(n_phi) * (2.0 * math.pi / n_phi)
        self.z = center.z + s[:, None] * np.exp(1j * phi[None, :])
        self.w = (s * (WINDOW_RADIUS / n_s))[:, None] * np.full(
            (1, n_phi), 2.0 * math.pi / n_phi
        )

    def integral(self, values) -> float:
        return float(np.sum(values * self.w))


def window_norm_sq(u: Field, center: DiskPoint, lam: float) -> float:
    """The window Sobolev norm: integral over W of |grad u|^2 + lam u^2 dx."""
    quad = _WindowQuadrature(center)
    interp = FieldInterpolator(u)
    ux, uy = interp.gradient_at_z(quad.z)
    vals = interp.at_z(quad.z)
    return quad.integral(ux * ux + uy * uy + lam * vals * vals)


def window_exp_integral(u: Field, center: DiskPoint, q: float) -> float:
    """Integral over W of (e^{q u^2} - 1) dx."""
    quad = _WindowQuadrature(center)
    vals = FieldInterpolator(u).at_z(quad.z)
    g, _ = _exp_m1(q, vals)
    return quad.integral(g)


def calibrate_local_bound(
    fields, center: DiskPoint, q: float = DEFAULT_WINDOW_Q, lam: float = 1.0
) -> float:
    """Empirical constant: sup of lhs * (1 - n^2) / n^2 over a seed family.

    The seed fields should have small window norm (n^2 <= ~0.2); the bound
    is then tested on fields with larger norms.
    """
    best = 0.0
    for u in fields:
        n2 = window_norm_sq(u, center, lam)
        if n2 <= 0 or n2 >= 1:
            raise ValueError("calibration fields must have window norm in (0, 1)")
        lhs = window_exp_integral(u, center, q)
        best = max(best, lhs * (1.0 - n2) / n2)
    return best


def local_tm_bound_check(
    u: Field,
    center: DiskPoint,
    q: float,
    lam: float,
    constant: float,
) -> LocalBoundReport:
    """Check lhs <= C * n^2 / (1 - n^2) on the window at the given center.

    Requires n^2 = window norm squared < 1 (hypothesis of the bound).
    """
    n2 = window_norm_sq(u, center, lam)
    if n2 >= 1.0:
        raise ValueError(f"window norm squared is {n2:.4f} >= 1; bound hypothesis violated")
    lhs = window_exp_integral(u, center, q)
    rhs = constant * n2 / (1.0 - n2)
    return LocalBoundReport(lhs=lhs, rhs=rhs, norm_sq=n2, constant=constant, ok=lhs <= rhs)

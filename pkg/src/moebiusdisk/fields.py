"""Discrete scalar fields on the disk in hyperbolic polar coordinates.

A field is sampled on a tensor grid (rho_i, theta_j) with r = tanh(rho).
Fields are implicitly zero at rho_max (Dirichlet truncation) and beyond.

Much of the quadrature is organised around the log-radius coordinate

    ell = log(1/r) = 2 artanh(e^{-2 rho}),

in which the chart (ell, theta) is conformal to a flat half-strip:

    Dirichlet energy     = integral of (u_ell^2 + u_theta^2) d(ell) d(theta),
    hyperbolic measure   = A(rho)^2 d(ell) d(theta),  A = sinh(rho) cosh(rho),
    Euclidean measure    = e^{-2 ell}   d(ell) d(theta).

In particular the radial Dirichlet energy 2 pi * sum (du)^2 / d(ell) is exact
for fields that are piecewise linear in ell, which covers the truncated-log
and Moser-type test profiles with their kinks.
"""

from __future__ import annotations

import json
import math
import os
import tempfile
import warnings
from dataclasses import dataclass, field as dc_field

import numpy as np
from scipy.interpolate import RectBivariateSpline

from .geometry import DiskPoint, geodesic_distance_z, mobius_apply_z

TWO_PI = 2.0 * math.pi

#: tag written into serialized field headers; the metric carries no factor 4
METRIC_CONVENTION = "delta/(1-|x|^2)^2"

#: relative size of boundary-ring values above which truncation is suspect
TAIL_TOLERANCE = 1e-6


class TruncationWarning(UserWarning):
    """Integrand or support does not vanish at the rho_max truncation."""


def _ell_of_rho(rho):
    """log(1/tanh(rho)), stable for large rho."""
    return 2.0 * np.arctanh(np.exp(-2.0 * np.asarray(rho, dtype=float)))


def _rho_of_ell(ell):
    return np.arctanh(np.exp(-np.asarray(ell, dtype=float)))


def _trapezoid_widths(x):
    """Weights w with sum(f*w) = trapezoid rule for nodes x (ascending)."""
    w = np.zeros_like(x)
    d = np.diff(x)
    w[:-1] += 0.5 * d
    w[1:] += 0.5 * d
    return w


def _lock(a):
    a = np.asarray(a, dtype=float)
    a.setflags(write=False)
    return a


@dataclass(frozen=True, eq=False)
class RadialGrid:
    """Strictly increasing hyperbolic radii in (0, rho_max]."""

    rho_nodes: np.ndarray

    def __post_init__(self):
        rho = _lock(self.rho_nodes)
        object.__setattr__(self, "rho_nodes", rho)
        if rho.ndim != 1 or len(rho) < 3:
            raise ValueError("need a 1-D array of at least 3 radial nodes")
        if not (np.all(np.diff(rho) > 0) and rho[0] > 0):
            raise ValueError("rho_nodes must be strictly increasing and positive")
        object.__setattr__(self, "ell", _lock(_ell_of_rho(rho)))
        object.__setattr__(self, "r", _lock(np.tanh(rho)))
        # A = sinh * cosh; hyperbolic and Euclidean quadrature weights per node.
        # Trapezoid rule in the ell coordinate handles the boundary-refined
        # log grids well (the hyperbolic density is A^2 d(ell) d(theta)).
        A = np.sinh(rho) * np.cosh(rho)
        ell_w = _trapezoid_widths(self.ell[::-1])[::-1]
        w_mu = A * A * ell_w
        w_mu[0] += 0.5 * np.sinh(rho[0]) ** 2  # disk 0 <= rho < rho_0, plateau value
        w_eu = self.r**2 * ell_w
        w_eu[0] += 0.5 * self.r[0] ** 2
        object.__setattr__(self, "A", _lock(A))
        object.__setattr__(self, "w_mu", _lock(w_mu))
        object.__setattr__(self, "w_euclid", _lock(w_eu))

    @property
    def rho_max(self) -> float:
        return float(self.rho_nodes[-1])

    @property
    def n_rho(self) -> int:
        return len(self.rho_nodes)


@dataclass(frozen=True, eq=False)
class Grid(RadialGrid):
    """Tensor grid (rho_i, theta_j); theta uniform on [0, 2 pi)."""

    n_theta: int = 256

    def __post_init__(self):
        super().__post_init__()
        if self.n_theta < 8:
            raise ValueError("n_theta must be at least 8")
        theta = np.arange(self.n_theta) * (TWO_PI / self.n_theta)
        object.__setattr__(self, "theta", _lock(theta))

    @property
    def d_theta(self) -> float:
        return TWO_PI / self.n_theta

    def nodes_z(self) -> np.ndarray:
        """Complex coordinates of all grid nodes, shape (n_rho, n_theta)."""
        return self.r[:, None] * np.exp(1j * self.theta[None, :])


def make_grid(n_rho: int = 512, n_theta: int = 256, rho_max: float = 12.0) -> Grid:
    """Default uniform-in-rho tensor grid."""
    rho = np.linspace(rho_max / n_rho, rho_max, n_rho)
    return Grid(rho, n_theta)


def radial_grid(n: int = 2048, rho_max: float = 12.0) -> RadialGrid:
    """Uniform-in-rho radial grid."""
    return RadialGrid(np.linspace(rho_max / n, rho_max, n))


def radial_grid_log(
    n: int = 2048,
    rho_max: float = 12.0,
    ell_max: float = 12.0,
    include_ell=(),
) -> RadialGrid:
    """Radial grid uniform in ell = log(1/r), resolving log-type profiles.

    include_ell lists log-radii (e.g. kink locations) inserted exactly.
    """
    ell_min = float(_ell_of_rho(rho_max))
    ell = np.linspace(ell_min, ell_max, n)
    extra = [x for x in include_ell if ell_min < x < ell_max]
    if extra:
        ell = np.unique(np.concatenate([ell, np.asarray(extra, dtype=float)]))
    rho = _rho_of_ell(ell)[::-1].copy()
    rho[-1] = rho_max  # exact endpoint, immune to ell round trip noise
    return RadialGrid(rho)


@dataclass(frozen=True, eq=False)
class RadialField:
    """Angle-independent field: one value per radial node."""

    grid: RadialGrid
    values: np.ndarray

    def __post_init__(self):
        v = _lock(self.values)
        object.__setattr__(self, "values", v)
        if v.shape != (self.grid.n_rho,):
            raise ValueError("values must match the radial grid")
        if not np.all(np.isfinite(v)):
            raise ValueError("field values must be finite")

    @property
    def rho_nodes(self):
        return self.grid.rho_nodes


@dataclass(frozen=True, eq=False)
class Field:
    """Scalar field sampled on a (rho, theta) tensor grid."""

    grid: Grid
    values: np.ndarray

    def __post_init__(self):
        v = _lock(self.values)
        object.__setattr__(self, "values", v)
        if v.shape != (self.grid.n_rho, self.grid.n_theta):
            raise ValueError("values must have shape (n_rho, n_theta)")
        if not np.all(np.isfinite(v)):
            raise ValueError("field values must be finite")

    @property
    def rho_nodes(self):
        return self.grid.rho_nodes

    @property
    def n_theta(self) -> int:
        return self.grid.n_theta


def zero_field(grid: Grid) -> Field:
    return Field(grid, np.zeros((grid.n_rho, grid.n_theta)))


def field_from_function(grid: Grid, f) -> Field:
    """Sample f(rho, theta) (vectorized) on the grid."""
    rho = grid.rho_nodes[:, None]
    theta = grid.theta[None, :]
    return Field(grid, np.broadcast_to(f(rho, theta), (grid.n_rho, grid.n_theta)).copy())


def field_from_profile(grid: Grid, profile, center: DiskPoint | None = None) -> Field:
    """Sample profile(geodesic distance to center) on the grid.

    A radial profile composed with a Moebius shift is exactly the same
    profile of the distance to the shifted center, so this plants shifted
    bumps without interpolation error.
    """
    if center is None or (center.re == 0.0 and center.im == 0.0):
        d = np.broadcast_to(grid.rho_nodes[:, None], (grid.n_rho, grid.n_theta))
    else:
        d = geodesic_distance_z(center.z, grid.nodes_z())
    return Field(grid, np.asarray(profile(d), dtype=float))


def mollifier(width: float):
    """Smooth compactly supported profile: exp(1 - 1/(1-(d/width)^2)) on d < width."""

    def profile(d):
        d = np.asarray(d, dtype=float)
        x = np.minimum(d / width, 1.0)
        with np.errstate(divide="ignore", over="ignore"):
            v = np.where(x < 1.0, np.exp(1.0 - 1.0 / np.maximum(1.0 - x * x, 1e-300)), 0.0)
        return v

    return profile


def smooth_bump(
    grid: Grid,
    width: float = 1.5,
    center: DiskPoint | None = None,
    energy: float | None = None,
) -> Field:
    """Compactly supported smooth bump; optionally rescaled to a target energy."""
    u = field_from_profile(grid, mollifier(width), center)
    if energy is not None:
        e = dirichlet_energy(u)
        u = Field(grid, u.values * math.sqrt(energy / e))
    return u


def radial_bump(grid: RadialGrid, width: float = 1.5, energy: float | None = None) -> RadialField:
    u = RadialField(grid, mollifier(width)(grid.rho_nodes))
    if energy is not None:
        u = RadialField(grid, u.values * math.sqrt(energy / dirichlet_energy(u)))
    return u


def truncated_log(grid: RadialGrid) -> RadialField:
    """u(r) = log(1/max(r, 1/e)); Dirichlet energy is exactly 2 pi."""
    return RadialField(grid, np.minimum(grid.ell, 1.0))


# ---------------------------------------------------------------------------
# quadrature and energy


def integrate_dmu(g, tail_tol: float = TAIL_TOLERANCE) -> float:
    """Quadrature of g against the hyperbolic measure d(mu).

    Warns when the integrand at rho_max is not negligible (the truncated
    tail would then carry unbounded mass).
    """
    if isinstance(g, RadialField):
        vals, w = g.values, g.grid.w_mu
        total = TWO_PI * float(np.dot(vals, w))
        edge = abs(vals[-1])
    else:
        vals, w = g.values, g.grid.w_mu
        total = float(np.sum(vals * w[:, None])) * g.grid.d_theta
        edge = float(np.max(np.abs(vals[-1])))
    scale = float(np.max(np.abs(vals))) if vals.size else 0.0
    if scale > 0 and edge > tail_tol * scale:
        warnings.warn(
            f"integrand at rho_max is {edge:.3e} (max {scale:.3e}); "
            "truncation of the hyperbolic tail is suspect",
            TruncationWarning,
            stacklevel=2,
        )
    return total


def integrate_euclidean(g) -> float:
    """Quadrature of g against the Euclidean measure dx on the disk."""
    if isinstance(g, RadialField):
        return TWO_PI * float(np.dot(g.values, g.grid.w_euclid))
    return float(np.sum(g.values * g.grid.w_euclid[:, None])) * g.grid.d_theta


def _theta_derivative(values: np.ndarray) -> np.ndarray:
    """Spectral derivative along the periodic theta axis."""
    n = values.shape[1]
    k = np.fft.rfftfreq(n, d=1.0 / n) * 1j
    if n % 2 == 0:
        k = k.copy()
        k[-1] = 0.0  # drop the unpaired Nyquist mode
    return np.fft.irfft(np.fft.rfft(values, axis=1) * k[None, :], n=n, axis=1)


def dirichlet_energy(u) -> float:
    """The gradient energy, equal to the Euclidean Dirichlet integral.

    Radial fields: exact cell sum 2 pi * (du)^2 / d(ell) in the conformal
    log-radius coordinate (exact for piecewise-linear-in-ell profiles).
    Tensor fields: central differences in rho, spectral derivative in
    theta, trapezoid quadrature of u_rho^2 A + u_theta^2 / A.
    """
    if isinstance(u, RadialField):
        du = np.diff(u.values)
        dell = -np.diff(u.grid.ell)  # ell decreases with rho
        return TWO_PI * float(np.sum(du * du / dell))
    g = u.grid
    u_rho = np.gradient(u.values, g.rho_nodes, axis=0)
    u_theta = _theta_derivative(u.values)
    integrand = u_rho**2 * g.A[:, None] + u_theta**2 / g.A[:, None]
    radial = np.trapezoid(integrand, g.rho_nodes, axis=0)
    return float(np.sum(radial)) * g.d_theta


def hardy_ratio(u) -> float:
    """dirichlet_energy(u) / integral of u^2 d(mu); at least 1/4 in the continuum."""
    if isinstance(u, RadialField):
        mass = TWO_PI * float(np.dot(u.values**2, u.grid.w_mu))
    else:
        mass = float(np.sum(u.values**2 * u.grid.w_mu[:, None])) * u.grid.d_theta
    if mass == 0.0:
        raise ValueError("hardy_ratio is undefined for the zero field")
    return dirichlet_energy(u) / mass


# ---------------------------------------------------------------------------
# transformations


def dilate_radial(u: RadialField, s: float) -> RadialField:
    """The norm-preserving dilation (h_s u)(r) = s^{-1/2} u(r^s).

    In the log-radius coordinate this is ell -> s*ell; resampling is linear
    in ell (exact for the piecewise-linear-in-ell test family).
    """
    if s <= 0:
        raise ValueError("dilation parameter must be positive")
    ell = u.grid.ell[::-1]  # ascending
    vals = u.values[::-1]
    # extend with 0 at the boundary (ell -> 0) and the plateau value inside
    xp = np.concatenate([[0.0], ell, [1e300]])
    fp = np.concatenate([[0.0], vals, [vals[-1]]])
    new = math.sqrt(1.0 / s) * np.interp(s * ell, xp, fp)
    return RadialField(u.grid, new[::-1].copy())


def weighted_sup_norm(u: RadialField) -> float:
    """max over nodes of |u| / sqrt(log(1/r)); invariant under dilations."""
    return float(np.max(np.abs(u.values) / np.sqrt(u.grid.ell)))


class FieldInterpolator:
    """Bicubic interpolant of a field in (rho, theta), periodic in theta.

    A synthetic rho=0 row (angular mean of the innermost ring) regularizes
    the chart singularity at the center; beyond rho_max the field is 0.
    """

    _PAD = 4

    def __init__(self, u: Field):
        g = u.grid
        p = self._PAD
        theta_ext = np.concatenate(
            [g.theta[-p:] - TWO_PI, g.theta, g.theta[:p] + TWO_PI]
        )
        vals_ext = np.concatenate([u.values[:, -p:], u.values, u.values[:, :p]], axis=1)
        center_row = np.full((1, vals_ext.shape[1]), np.mean(u.values[0]))
        rho_ext = np.concatenate([[0.0], g.rho_nodes])
        vals_ext = np.concatenate([center_row, vals_ext], axis=0)
        self._spline = RectBivariateSpline(rho_ext, theta_ext, vals_ext, kx=3, ky=3)
        self.rho_max = g.rho_max

    def at_polar(self, rho, theta):
        rho = np.asarray(rho, dtype=float)
        theta = np.mod(np.asarray(theta, dtype=float), TWO_PI)
        inside = rho <= self.rho_max
        out = np.zeros(rho.shape)
        if np.any(inside):
            out[inside] = self._spline.ev(rho[inside], theta[inside])
        return out

    def at_z(self, z):
        """Values at complex coordinates."""
        z = np.asarray(z)
        r = np.abs(z)
        rho = np.arctanh(np.minimum(r, 1.0 - 1e-16))
        theta = np.angle(z)
        return self.at_polar(rho, theta)

    def gradient_at_z(self, z):
        """Cartesian gradient (du/dx, du/dy) at complex coordinates."""
        z = np.asarray(z)
        r = np.abs(z)
        r = np.maximum(r, 1e-12)
        rho = np.arctanh(np.minimum(r, 1.0 - 1e-16))
        theta = np.mod(np.angle(z), TWO_PI)
        u_rho = self._spline.ev(rho, theta, dx=1)
        u_theta = self._spline.ev(rho, theta, dy=1)
        # rho = artanh(r): d(rho)/dr = 1/(1-r^2)
        drho_dx = (z.real / r) / (1.0 - r * r)
        drho_dy = (z.imag / r) / (1.0 - r * r)
        dth_dx = -z.imag / (r * r)
        dth_dy = z.real / (r * r)
        return u_rho * drho_dx + u_theta * dth_dx, u_rho * drho_dy + u_theta * dth_dy


def support_radius(u: Field, rel_tol: float = 1e-12) -> float:
    """Largest rho at which |u| exceeds rel_tol * max|u| (0 for the zero field)."""
    peak = float(np.max(np.abs(u.values)))
    if peak == 0.0:
        return 0.0
    ring = np.max(np.abs(u.values), axis=1)
    idx = np.nonzero(ring > rel_tol * peak)[0]
    return float(u.grid.rho_nodes[idx[-1]]) if len(idx) else 0.0


def pullback(u: Field, zeta: DiskPoint, out_grid: Grid | None = None) -> Field:
    """The Moebius shift u o eta_zeta, resampled on out_grid (default: same grid).

    Warns when the shifted support leaks past the truncation radius of the
    output grid instead of failing silently.
    """
    g_out = out_grid if out_grid is not None else u.grid
    if zeta.re == 0.0 and zeta.im == 0.0 and g_out is u.grid:
        return u
    shift = math.atanh(zeta.abs)
    if shift + support_radius(u) > g_out.rho_max:
        warnings.warn(
            "shifted support may leak past rho_max of the output grid",
            TruncationWarning,
            stacklevel=2,
        )
    w = mobius_apply_z(zeta.z, g_out.nodes_z())
    interp = FieldInterpolator(u)
    vals = interp.at_z(w)
    return Field(g_out, vals)


# ---------------------------------------------------------------------------
# serialization

_FORMAT = "moebiusdisk-field"


def save_field(path: str, u) -> None:
    """Self-describing JSON grid format; written atomically."""
    radial = isinstance(u, RadialField)
    doc = {
        "format": _FORMAT,
        "version": 1,
        "metric_convention": METRIC_CONVENTION,
        "kind": "radial" if radial else "polar",
        "rho_max": u.grid.rho_max,
        "n_rho": u.grid.n_rho,
        "n_theta": None if radial else u.grid.n_theta,
        "rho_nodes": u.grid.rho_nodes.tolist(),
        "values": u.values.tolist(),
    }
    atomic_write_text(path, json.dumps(doc))


def load_field(path: str):
    with open(path) as fh:
        doc = json.load(fh)
    if doc.get("format") != _FORMAT:
        raise ValueError(f"{path} is not a {_FORMAT} file")
    if doc.get("metric_convention") != METRIC_CONVENTION:
        raise ValueError(f"unsupported metric convention {doc.get('metric_convention')!r}")
    rho = np.asarray(doc["rho_nodes"], dtype=float)
    vals = np.asarray(doc["values"], dtype=float)
    if doc["kind"] == "radial":
        return RadialField(RadialGrid(rho), vals)
    return Field(Grid(rho, int(doc["n_theta"])), vals)


def field_to_csv(path: str, u) -> None:
    """Plot-ready CSV export: rho, theta, re, im, value."""
    rows = ["rho,theta,re,im,value"]
    if isinstance(u, RadialField):
        for rho, r, v in zip(u.grid.rho_nodes, u.grid.r, u.values):
            rows.append(f"{rho:.12g},0,{r:.12g},0,{v:.12g}")
    else:
        z = u.grid.nodes_z()
        for i, rho in enumerate(u.grid.rho_nodes):
            for j, theta in enumerate(u.grid.theta):
                rows.append(
                    f"{rho:.12g},{theta:.12g},{z[i, j].real:.12g},"
                    f"{z[i, j].imag:.12g},{u.values[i, j]:.12g}"
                )
    atomic_write_text(path, "\n".join(rows) + "\n")


def atomic_write_text(path: str, text: str) -> None:
    """Write-then-rename so readers never observe a partial file."""
    d = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(dir=d, suffix=".tmp")
    try:
        with os.fdopen(fd, "w") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise

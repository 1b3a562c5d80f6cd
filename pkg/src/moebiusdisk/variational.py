"""Optimization and asymptotics: Moser probes, constrained ascent, profiles.

The optimizer works with a discrete Dirichlet form a(u, v) assembled from
the (rho, theta) tensor grid (conservative five-point scheme).  All inner
products, the sphere constraint a(u, u) = t and the Riesz gradient use
this single form, so the directional-derivative identity

    a(riesz_gradient(u), phi) = d/d(eps) integral F(u + eps phi) d(mu)

holds to solver accuracy by construction.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field as dc_field

import numpy as np
import scipy.sparse as sp
from scipy.sparse.linalg import splu

from .fields import (
    Field,
    Grid,
    RadialField,
    RadialGrid,
    TruncationWarning,
    dirichlet_energy,
    pullback,
    radial_grid_log,
)
from .functionals import Nonlinearity, f_integral, tm_invariant_report
from .geometry import DiskPoint, geodesic_distance_z

TWO_PI = 2.0 * math.pi


# ---------------------------------------------------------------------------
# Moser probe family


def moser_field(k: int, grid: RadialGrid | None = None) -> RadialField:
    """The normalized truncated-log family with unit Dirichlet energy.

    m_k = sqrt(log k / 2 pi) on r <= 1/k, log(1/r) / sqrt(2 pi log k) outside.
    In the log-radius coordinate this is min(ell, log k) / sqrt(2 pi log k),
    piecewise linear, so the radial energy quadrature is exact when the kink
    ell = log k is a grid node.
    """
    if k < 2:
        raise ValueError("k must be at least 2")
    ell_k = math.log(k)
    if grid is None:
        grid = radial_grid_log(
            2048, rho_max=12.0, ell_max=max(12.0, ell_k + 5.0), include_ell=[ell_k]
        )
    if ell_k >= float(grid.ell[0]):
        raise ValueError(
            f"grid resolves log-radii only up to {float(grid.ell[0]):.3f} "
            f"but k={k} needs a plateau at {ell_k:.3f}; refine the grid"
        )
    vals = np.minimum(grid.ell, ell_k) / math.sqrt(TWO_PI * ell_k)
    return RadialField(grid, vals)


def blowup_probe(p: float, k_list) -> list[tuple[int, float, bool]]:
    """tm_invariant along the Moser family; growth diagnoses supercriticality."""
    if p <= 0:
        raise ValueError("p must be positive")
    out = []
    for k in k_list:
        rep = tm_invariant_report(moser_field(int(k)), p)
        out.append((int(k), rep.value, rep.saturated))
    return out


# ---------------------------------------------------------------------------
# discrete Dirichlet form and Riesz gradient

#: relative residual above which a linear solve is declared failed
SOLVER_TOL = 1e-10


class DirichletForm:
    """Sparse form a(u, v) = integral grad u . grad v dx on a tensor grid.

    Conservative five-point assembly: radial edge coefficients use the
    exact integral of A = sinh * cosh across the edge, angular ones the
    exact integral of 1/A across the node's radial band.  The last radial
    ring is a zero-Dirichlet boundary; the singular center is handled by
    the diverging angular coefficient of the innermost band.
    """

    def __init__(self, grid: Grid):
        self.grid = grid
        n_r = grid.n_rho - 1  # interior rings; last ring is Dirichlet 0
        n_t = grid.n_theta
        self.n_r, self.n_t = n_r, n_t
        rho = grid.rho_nodes
        dth = grid.d_theta

        # radial edge conductances: integral of A between consecutive rings
        #   A = sinh(2 rho) / 2, antiderivative cosh(2 rho) / 4
        cosh2 = np.cosh(2.0 * rho)
        int_a = np.diff(cosh2) / 4.0
        c_rad = int_a / np.diff(rho) ** 2 * dth  # edge i <-> i+1, per column

        # angular conductances: integral of 1/A over the node's band
        #   1/A = 2 / sinh(2 rho), antiderivative log(tanh(rho))
        mid = 0.5 * (rho[:-1] + rho[1:])
        edges = np.concatenate([[rho[0] / 2.0], mid, [rho[-1]]])
        log_tanh = np.log(np.tanh(edges))
        c_ang = np.diff(log_tanh)[:n_r] / dth**2 * dth  # band of ring i, per edge

        def idx(i, j):
            return i * n_t + j

        rows, cols, vals = [], [], []
        i_arr = np.repeat(np.arange(n_r), n_t)
        j_arr = np.tile(np.arange(n_t), n_r)
        diag = np.zeros(n_r * n_t)

        # angular edges (periodic)
        jp = (j_arr + 1) % n_t
        w = c_ang[i_arr]
        rows.append(idx(i_arr, j_arr)); cols.append(idx(i_arr, jp)); vals.append(-w)
        rows.append(idx(i_arr, jp)); cols.append(idx(i_arr, j_arr)); vals.append(-w)
        np.add.at(diag, idx(i_arr, j_arr), w)
        np.add.at(diag, idx(i_arr, jp), w)

        # radial edges between interior rings
        mask = i_arr < n_r - 1
        ii, jj = i_arr[mask], j_arr[mask]
        w = c_rad[ii]
        rows.append(idx(ii, jj)); cols.append(idx(ii + 1, jj)); vals.append(-w)
        rows.append(idx(ii + 1, jj)); cols.append(idx(ii, jj)); vals.append(-w)
        np.add.at(diag, idx(ii, jj), w)
        np.add.at(diag, idx(ii + 1, jj), w)

        # edge from the outermost interior ring to the Dirichlet boundary
        ii = np.full(n_t, n_r - 1)
        jj = np.arange(n_t)
        np.add.at(diag, idx(ii, jj), c_rad[n_r - 1])

        # center degree of freedom: radial edges from rho=0 to every ring-0
        # node across the inner disk; with zero load and equal conductances
        # the solved center value is exactly the ring-0 mean, so packing a
        # field with that mean keeps the form and solver consistent.
        n = n_r * n_t
        c_center = (cosh2[0] - 1.0) / 4.0 / rho[0] ** 2 * dth
        jj = np.arange(n_t)
        rows.append(np.full(n_t, n)); cols.append(idx(0, jj))
        vals.append(np.full(n_t, -c_center))
        rows.append(idx(0, jj)); cols.append(np.full(n_t, n))
        vals.append(np.full(n_t, -c_center))
        np.add.at(diag, idx(0, jj), c_center)

        # control volumes: exact band masses of the hyperbolic measure
        # between radial midpoints (antiderivative of A is cosh(2 rho)/4);
        # these, not the grid's quadrature weights, make the load vector
        # consistent with the stiffness near the center.
        band_edges = np.concatenate([[0.0], mid, [rho[-1]]])
        self.cell_mu = np.diff(np.cosh(2.0 * band_edges)) / 4.0 * dth

        rows.append(np.arange(n))
        cols.append(np.arange(n))
        vals.append(diag)
        rows.append([n]); cols.append([n]); vals.append([n_t * c_center])
        self.matrix = sp.csr_matrix(
            (np.concatenate([np.asarray(a) for a in vals]),
             (np.concatenate([np.asarray(a) for a in rows]),
              np.concatenate([np.asarray(a) for a in cols]))),
            shape=(n + 1, n + 1),
        )
        self._lu = None

    # -- vector packing: interior rings of a Field, flattened

    def _pack(self, u: Field) -> np.ndarray:
        return np.concatenate([u.values[:-1].reshape(-1), [np.mean(u.values[0])]])

    def _unpack(self, x: np.ndarray) -> Field:
        vals = np.zeros((self.grid.n_rho, self.grid.n_theta))
        vals[:-1] = x[:-1].reshape(self.n_r, self.n_t)
        return Field(self.grid, vals)

    def check_boundary(self, u: Field, rel_tol: float = 1e-9) -> None:
        peak = float(np.max(np.abs(u.values)))
        if peak and float(np.max(np.abs(u.values[-1]))) > rel_tol * peak:
            raise ValueError("field must vanish on the outermost ring")

    def apply(self, u: Field) -> np.ndarray:
        return self.matrix @ self._pack(u)

    def inner(self, u: Field, v: Field) -> float:
        """The bilinear form a(u, v)."""
        return float(self._pack(v) @ (self.matrix @ self._pack(u)))

    def energy(self, u: Field) -> float:
        return self.inner(u, u)

    def mass_vector(self, f_values: np.ndarray) -> np.ndarray:
        """Lumped load vector: f against the control-volume measure masses."""
        b = f_values[:-1] * self.cell_mu[:-1, None]
        return np.concatenate([b.reshape(-1), [0.0]])

    def functional(self, u: Field, F: Nonlinearity) -> float:
        """Integral of F(u) d(mu) in the form's own control-volume quadrature.

        Using this as the optimizer objective makes the Riesz gradient the
        exact representer of its directional derivatives.
        """
        vals = np.asarray(F.eval(u.values[:-1]), dtype=float)
        return float(np.sum(vals * self.cell_mu[:-1, None]))

    def solve(self, b: np.ndarray) -> np.ndarray:
        if self._lu is None:
            self._lu = splu(self.matrix.tocsc())
        x = self._lu.solve(b)
        scale = float(np.linalg.norm(b))
        if scale > 0:
            res = float(np.linalg.norm(self.matrix @ x - b)) / scale
            if res > SOLVER_TOL:
                raise RuntimeError(f"linear solve failed: relative residual {res:.3e}")
        return x


_FORM_CACHE: dict[int, DirichletForm] = {}


def dirichlet_form(grid: Grid) -> DirichletForm:
    """Memoized form assembly (one factorization per grid object)."""
    key = id(grid)
    if key not in _FORM_CACHE:
        if len(_FORM_CACHE) > 8:
            _FORM_CACHE.clear()
        _FORM_CACHE[key] = DirichletForm(grid)
    return _FORM_CACHE[key]


def riesz_gradient(u: Field, F: Nonlinearity) -> Field:
    """Gradient of u -> integral F(u) d(mu) in the Dirichlet inner product.

    Solves a(v, phi) = integral F'(u) phi d(mu) for all phi vanishing on
    the boundary ring; equivalently the discrete Poisson problem with
    right-hand side F'(u) times the hyperbolic density.
    """
    form = dirichlet_form(u.grid)
    b = form.mass_vector(np.asarray(F.deriv(u.values), dtype=float))
    return form._unpack(form.solve(b))


# ---------------------------------------------------------------------------
# recentering


def concentration_center(u: Field, eps: float = 1.0):
    """Node maximizing the mass of u^2 d(mu) in the geodesic eps-ball.

    Returns (center point, ball mass, ambiguous flag).  The search scans
    the best-ranked cells by local mass; the flag is set when a second
    peak at least 2*eps away comes within 5% of the winner.
    """
    g = u.grid
    cell_mass = u.values**2 * g.w_mu[:, None] * g.d_theta
    flat = cell_mass.ravel()
    n_cand = min(192, flat.size)
    order = np.argpartition(flat, -n_cand)[-n_cand:]
    # cell mass favors outer rings (the measure weight grows with rho), so
    # also seed candidates from the raw peak values of the field itself
    flat_u = (u.values**2).ravel()
    n_peak = min(64, flat_u.size)
    order_u = np.argpartition(flat_u, -n_peak)[-n_peak:]
    z_nodes = g.nodes_z()
    z_cand = z_nodes.ravel()[np.concatenate([order, order_u])]
    # include the origin so a centered field cannot lose to grid jitter
    z_cand = np.concatenate([[0.0 + 0.0j], z_cand])
    masses = np.empty(len(z_cand))
    for i, zc in enumerate(z_cand):
        d = geodesic_distance_z(zc, z_nodes)
        masses[i] = float(np.sum(cell_mass[d <= eps]))
    best = int(np.argmax(masses))
    z_best = z_cand[best]
    sep = geodesic_distance_z(z_best, z_cand)
    rivals = masses[sep > 2.0 * eps]
    ambiguous = bool(len(rivals)) and float(np.max(rivals)) >= 0.95 * masses[best]
    return DiskPoint.from_complex(complex(z_best)), float(masses[best]), ambiguous


@dataclass(frozen=True)
class RecenterResult:
    field: Field
    center: DiskPoint
    ball_mass: float
    ambiguous: bool


def recenter(u: Field, eps: float = 1.0) -> RecenterResult:
    """Pull the mass peak of u^2 d(mu) back to the origin.

    The returned field is u composed with the shift sending the origin to
    the detected center (an isometry, so energy is preserved up to
    resampling error).
    """
    if float(np.max(np.abs(u.values))) == 0.0:
        raise ValueError("cannot recenter the zero field")
    center, mass, ambiguous = concentration_center(u, eps)
    if center.abs == 0.0:
        return RecenterResult(u, center, mass, ambiguous)
    shifted = pullback(u, DiskPoint(-center.re, -center.im))
    return RecenterResult(shifted, center, mass, ambiguous)


# ---------------------------------------------------------------------------
# constrained maximization


@dataclass
class OptimizerConfig:
    """Projected-ascent settings for maximizing integral F(u) d(mu) at a(u,u) = t."""

    t: float = 1.0
    step: float = 1.0
    max_iters: int = 200
    grad_tol: float = 1e-6
    recenter_every: int = 10
    armijo: float = 1e-4
    max_halvings: int = 30

    def __post_init__(self):
        if not (0 < self.t <= 1):
            raise ValueError("t must lie in (0, 1]")
        if self.step <= 0 or self.grad_tol <= 0:
            raise ValueError("step and grad_tol must be positive")


@dataclass
class OptimizerTrace:
    objective_history: list = dc_field(default_factory=list)
    residual_history: list = dc_field(default_factory=list)
    drift_history: list = dc_field(default_factory=list)
    recenter_shifts: list = dc_field(default_factory=list)
    final_field: Field | None = None
    status: str = "running"

    @property
    def final_objective(self) -> float:
        return self.objective_history[-1]

    @property
    def final_residual(self) -> float:
        return self.residual_history[-1]


def _project(form: DirichletForm, u: Field, t: float) -> Field:
    e = form.energy(u)
    if e <= 0:
        raise ValueError("cannot project a zero-energy field onto the sphere")
    return Field(u.grid, u.values * math.sqrt(t / e))


def maximize(seed: Field, F: Nonlinearity, config: OptimizerConfig) -> OptimizerTrace:
    """Projected gradient ascent on the sphere a(u, u) = t.

    Each iteration steps along the tangential Riesz gradient, rescales
    back to the sphere, and backtracks until the objective strictly
    increases.  Periodic recentering keeps the mass peak at the origin;
    a recentering that would decrease the objective is skipped (the trace
    stays monotone).
    """
    form = dirichlet_form(seed.grid)
    form.check_boundary(seed)
    clean = seed.values.copy()
    clean[-1] = 0.0  # boundary dust from resampled seeds
    u = _project(form, Field(seed.grid, clean), config.t)
    if config.recenter_every > 0:
        # recenter the seed before ascent begins, while the trace is empty;
        # off-center starts otherwise converge to a grid-skewed optimum
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", TruncationWarning)
            rec = recenter(u)
        if rec.center.abs > 0.0:
            u = _project(form, rec.field, config.t)
            trace_seed_shift = rec.center
        else:
            trace_seed_shift = None
    else:
        trace_seed_shift = None
    trace = OptimizerTrace()
    if trace_seed_shift is not None:
        trace.recenter_shifts.append(trace_seed_shift)
    obj = form.functional(u, F)
    trace.objective_history.append(obj)
    step = config.step

    for it in range(config.max_iters):
        g = riesz_gradient(u, F)
        # tangential component on the sphere
        coef = form.inner(g, u) / config.t
        g_tan = Field(u.grid, g.values - coef * u.values)
        residual = math.sqrt(max(form.energy(g_tan), 0.0))
        trace.residual_history.append(residual)
        trace.drift_history.append(abs(form.energy(u) - config.t))
        if residual < config.grad_tol:
            trace.status = "converged"
            break

        accepted = False
        alpha = step
        for _ in range(config.max_halvings + 1):
            cand = _project(
                form, Field(u.grid, u.values + alpha * g_tan.values), config.t
            )
            cand_obj = form.functional(cand, F)
            if cand_obj >= obj + config.armijo * alpha * residual**2:
                accepted = True
                break
            alpha *= 0.5
        if not accepted:
            trace.status = "stagnated"
            break
        u, obj = cand, cand_obj
        trace.objective_history.append(obj)
        step = min(alpha * 1.5, config.step * 8)

        if config.recenter_every > 0 and (it + 1) % config.recenter_every == 0:
            with warnings.catch_warnings():
                warnings.simplefilter("ignore", TruncationWarning)
                rec = recenter(u)
            if rec.center.abs > 0.0:
                cand = _project(form, rec.field, config.t)
                cand_obj = form.functional(cand, F)
                if cand_obj >= obj:
                    u, obj = cand, cand_obj
                    trace.objective_history.append(obj)
                    trace.recenter_shifts.append(rec.center)
    else:
        trace.status = "max_iters"

    if not trace.residual_history:
        trace.residual_history.append(math.inf)
    trace.final_field = u
    return trace


# ---------------------------------------------------------------------------
# synthetic profile decomposition


@dataclass(frozen=True)
class ProfileReport:
    profiles: list
    centers_per_step: list
    energy_sum: float
    residual_dmu_norms: list
    iterations: int


def _tail_cutoff(grid: Grid, rho_cut: float, taper: float = 1.5) -> np.ndarray:
    """Smooth radial mask: 1 inside rho_cut, cosine taper to 0 at rho_cut + taper."""
    rho = grid.rho_nodes
    x = np.clip((rho - rho_cut) / taper, 0.0, 1.0)
    return (0.5 * (1.0 + np.cos(math.pi * x)))[:, None]


def dmu_norm(u: Field) -> float:
    return math.sqrt(
        float(np.sum(u.values**2 * u.grid.w_mu[:, None])) * u.grid.d_theta
    )


def profile_extract(
    sequence,
    energy_floor: float,
    max_profiles: int = 8,
    rho_cut: float = 4.0,
    taper: float = 1.5,
) -> ProfileReport:
    """Iterated recenter-average-subtract decomposition of a field sequence.

    Each round recenters every field at its mass peak, averages the last
    third of the recentered sequence on a compact ball (the weak-limit
    surrogate), records the averaged profile with its per-field centers,
    and subtracts the re-shifted profile from each field.  Stops when the
    extracted profile's energy drops below energy_floor.
    """
    if len(sequence) < 3:
        raise ValueError("need at least 3 fields")
    grid = sequence[0].grid
    fields = list(sequence)
    profiles, centers_all, energies = [], [], []
    mask = _tail_cutoff(grid, rho_cut, taper)

    with warnings.catch_warnings():
        warnings.simplefilter("ignore", TruncationWarning)
        for _ in range(max_profiles):
            if all(float(np.max(np.abs(f.values))) == 0.0 for f in fields):
                break
            recentered, centers = [], []
            for f in fields:
                if float(np.max(np.abs(f.values))) == 0.0:
                    recentered.append(f)
                    centers.append(None)
                else:
                    rec = recenter(f)
                    recentered.append(rec.field)
                    centers.append(rec.center)
            n_tail = max(1, len(fields) // 3)
            avg = np.mean([f.values for f in recentered[-n_tail:]], axis=0)
            w = Field(grid, avg * mask)
            e = dirichlet_energy(w)
            if e < energy_floor:
                break
            if energies and e > energies[-1] * 1.5:
                raise RuntimeError(
                    "profile energies are not decreasing; extraction diverged"
                )
            profiles.append(w)
            centers_all.append(centers)
            energies.append(e)
            new_fields = []
            for f, c in zip(fields, centers):
                if c is None:
                    new_fields.append(f)
                else:
                    planted = pullback(w, c) if c.abs > 0 else w
                    new_fields.append(Field(grid, f.values - planted.values))
            fields = new_fields

    return ProfileReport(
        profiles=profiles,
        centers_per_step=centers_all,
        energy_sum=float(sum(energies)),
        residual_dmu_norms=[dmu_norm(f) for f in fields],
        iterations=len(profiles),
    )


# ---------------------------------------------------------------------------
# vanishing diagnostics


@dataclass(frozen=True)
class VanishingReport:
    concentrations: list
    f_integrals: list

    @property
    def concentration_decays(self) -> bool:
        return self.concentrations[-1] < 0.5 * self.concentrations[0]

    @property
    def f_integral_decays(self) -> bool:
        return self.f_integrals[-1] < 0.5 * self.f_integrals[0]


def vanishing_check(sequence, F: Nonlinearity) -> VanishingReport:
    """Concentration function vs F-integral along a sequence.

    Decay of the max unit-ball mass (vanishing) should force the
    F-integral to zero; a concentrating sequence keeps both bounded away.
    """
    conc, fints = [], []
    for u in sequence:
        _, mass, _ = concentration_center(u)
        conc.append(mass)
        fints.append(f_integral(u, F))
    return VanishingReport(concentrations=conc, f_integrals=fints)

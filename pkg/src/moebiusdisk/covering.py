"""Uniformly locally finite ball coverings of the disk.

Greedy selection of center points so that the geodesic eps-balls are
pairwise disjoint while the enlarged balls (radius cover_factor * eps)
cover the working region.  Disjointness reduces to an exact pairwise
distance inequality because the Moebius shifts are isometries.

Hyperbolic law of cosines in this metric normalization (distances are
half the curvature -1 ones):

    cosh(2 d) = cosh(2 rho1) cosh(2 rho2)
                - sinh(2 rho1) sinh(2 rho2) cos(theta1 - theta2),

which the neighbor hash uses to convert a distance threshold into an
angular window per radial band.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np

from .geometry import ball_area, circle_circumference

TWO_PI = 2.0 * math.pi

#: candidate lattices larger than this are refused outright
CANDIDATE_CAP = 10_000_000


@dataclass(frozen=True)
class CoveringSpec:
    """Parameters of a covering experiment.

    eps is the disjoint-ball radius, cover_factor scales the enlarged
    covering balls, rho_max bounds the working region, lattice_step the
    candidate spacing.  lattice_step > eps does not guarantee coverage;
    it is allowed (the result then reports gaps) but warned about.
    """

    eps: float
    rho_max: float
    lattice_step: float
    cover_factor: float = 3.0

    def __post_init__(self):
        if self.eps <= 0 or self.rho_max <= 0 or self.lattice_step <= 0:
            raise ValueError("eps, rho_max and lattice_step must be positive")
        if self.cover_factor < 2:
            raise ValueError("cover_factor must be at least 2")
        if self.cover_factor * self.eps >= self.rho_max:
            raise ValueError("enlarged radius must stay below rho_max")
        if self.lattice_step > self.eps:
            warnings.warn(
                "lattice_step exceeds eps; coverage of the region is not guaranteed",
                stacklevel=2,
            )

    @property
    def big_radius(self) -> float:
        return self.cover_factor * self.eps


@dataclass(frozen=True)
class CoveringResult:
    """Selected centers plus the verification statistics."""

    spec: CoveringSpec
    centers_rho: np.ndarray
    centers_theta: np.ndarray
    multiplicity_empirical: int
    multiplicity_bound: int
    coverage_gap_count: int
    min_pairwise_distance: float

    @property
    def n_centers(self) -> int:
        return len(self.centers_rho)

    def centers_z(self) -> np.ndarray:
        return np.tanh(self.centers_rho) * np.exp(1j * self.centers_theta)


def candidate_lattice(spec: CoveringSpec):
    """Concentric-circle lattice: radii j * lattice_step, arc spacing ~ step.

    Returns (rho, theta) arrays ordered by increasing radius, ties by angle.
    The origin is always the first candidate.
    """
    h = spec.lattice_step
    n_rings = int(math.floor(spec.rho_max / h + 1e-12))
    counts = [1]
    for j in range(1, n_rings + 1):
        counts.append(int(math.ceil(circle_circumference(j * h) / h)))
    total = sum(counts)
    if total > CANDIDATE_CAP:
        raise ValueError(
            f"lattice would have {total} candidates, beyond the cap {CANDIDATE_CAP}"
        )
    rho = np.empty(total)
    theta = np.empty(total)
    rho[0] = 0.0
    theta[0] = 0.0
    pos = 1
    for j in range(1, n_rings + 1):
        m = counts[j]
        rho[pos : pos + m] = j * h
        theta[pos : pos + m] = np.arange(m) * (TWO_PI / m)
        pos += m
    return rho, theta


def pair_distance(rho1, theta1, rho2, theta2):
    """Geodesic distance from hyperbolic polar coordinates (vectorized)."""
    c = np.cosh(2 * rho1) * np.cosh(2 * rho2) - np.sinh(2 * rho1) * np.sinh(
        2 * rho2
    ) * np.cos(theta1 - theta2)
    return 0.5 * np.arccosh(np.maximum(c, 1.0))


class NeighborGrid:
    """Band-and-sector hash answering 'any stored point within d of here?'.

    Bands are radial shells of fixed height; each band is split into
    angular sectors.  Queries convert the distance threshold into an
    angular window per band with the law of cosines, so only a handful
    of buckets are inspected.
    """

    def __init__(self, rho_max: float, threshold: float, band_height: float | None = None):
        self.threshold = threshold
        self.h = band_height if band_height is not None else max(threshold, 0.25)
        self.n_bands = int(math.floor(rho_max / self.h)) + 1
        self.cosh_thr = math.cosh(2 * threshold)
        # sector width per band ~ the angular window at the band's inner edge
        self.n_sec = []
        for b in range(self.n_bands):
            lo = b * self.h
            w = self._window(max(lo, self.h), max(lo, self.h))
            self.n_sec.append(max(1, min(1 << 20, int(TWO_PI / max(w, 1e-9)))))
        self.buckets: dict[tuple[int, int], list[tuple[float, float]]] = {}

    def _window(self, rho1: float, rho2: float) -> float:
        """Max |d(theta)| so that two points at these radii are within threshold."""
        if rho1 + rho2 <= self.threshold:
            return math.pi
        s = math.sinh(2 * rho1) * math.sinh(2 * rho2)
        if s == 0.0:
            return 0.0 if abs(rho1 - rho2) > self.threshold else math.pi
        c = (math.cosh(2 * rho1) * math.cosh(2 * rho2) - self.cosh_thr) / s
        if c >= 1.0:
            return 0.0
        if c <= -1.0:
            return math.pi
        return math.acos(c)

    def insert(self, rho: float, theta: float) -> None:
        b = min(int(rho / self.h), self.n_bands - 1)
        sec = int(theta / TWO_PI * self.n_sec[b]) % self.n_sec[b]
        self.buckets.setdefault((b, sec), []).append((rho, theta))

    def _gather(self, rho: float, theta: float):
        """All stored points whose bucket could hold a neighbor of (rho, theta)."""
        out = []
        b_lo = max(0, int((rho - self.threshold) / self.h))
        b_hi = min(self.n_bands - 1, int((rho + self.threshold) / self.h))
        # the angular window, as a function of the other point's radius,
        # has a single interior maximum at cosh(2 rho') = cosh(2 rho)/cosh(2 thr)
        # (for rho >= thr); elsewhere the extremes are at the band edges
        crit = None
        ratio = math.cosh(2 * rho) / self.cosh_thr
        if ratio >= 1.0:
            crit = 0.5 * math.acosh(ratio)
        for b in range(b_lo, b_hi + 1):
            lo, hi = b * self.h, (b + 1) * self.h
            w = max(self._window(rho, lo), self._window(rho, hi))
            if crit is not None and lo < crit < hi:
                w = max(w, self._window(rho, crit))
            if w <= 0.0:
                continue
            n = self.n_sec[b]
            s_lo = int(math.floor((theta - w) / TWO_PI * n))
            s_hi = int(math.floor((theta + w) / TWO_PI * n))
            if s_hi - s_lo + 1 >= n:
                secs = range(n)
            else:
                secs = [s % n for s in range(s_lo, s_hi + 1)]
            for sec in secs:
                out.extend(self.buckets.get((b, sec), ()))
        return out

    def has_neighbor(self, rho: float, theta: float) -> bool:
        pts = self._gather(rho, theta)
        if not pts:
            return False
        a = np.asarray(pts)
        d = pair_distance(a[:, 0], a[:, 1], rho, theta)
        return bool(np.any(d < self.threshold))

    def count_neighbors(self, rho, theta) -> np.ndarray:
        """Number of stored points within threshold of each query point."""
        rho = np.atleast_1d(np.asarray(rho, dtype=float))
        theta = np.atleast_1d(np.asarray(theta, dtype=float))
        out = np.zeros(len(rho), dtype=int)
        for i in range(len(rho)):
            pts = self._gather(rho[i], theta[i])
            if pts:
                a = np.asarray(pts)
                d = pair_distance(a[:, 0], a[:, 1], rho[i], theta[i])
                out[i] = int(np.count_nonzero(d <= self.threshold))
        return out


def multiplicity_bound(spec: CoveringSpec) -> int:
    """Volume-ratio bound on covering multiplicity.

    Centers of enlarged balls containing a point lie within R = big_radius
    of it, so their disjoint eps-balls pack into the ball of radius R + eps:
    multiplicity <= mu(V_{R + eps}) / mu(V_eps).
    """
    return int(math.ceil(ball_area(spec.big_radius + spec.eps) / ball_area(spec.eps)))


def greedy_select(
    candidates,
    spec: CoveringSpec,
    coverage_samples: int = 100_000,
    rng: np.random.Generator | None = None,
) -> CoveringResult:
    """First-fit selection of centers with pairwise distance >= 2 * eps.

    Candidates are processed in lattice order (increasing radius, then
    angle); a candidate is kept iff it is at distance >= 2*eps from every
    center already kept.  Coverage and multiplicity are then verified on
    points sampled uniformly (w.r.t. the hyperbolic measure) from the
    shrunken region V_{rho_max - big_radius}.
    """
    rho_c, theta_c = candidates
    grid = NeighborGrid(spec.rho_max, 2.0 * spec.eps)
    kept_rho = []
    kept_theta = []
    for rho, theta in zip(rho_c, theta_c):
        if not grid.has_neighbor(rho, theta):
            grid.insert(rho, theta)
            kept_rho.append(rho)
            kept_theta.append(theta)
    kept_rho = np.asarray(kept_rho)
    kept_theta = np.asarray(kept_theta)

    big = NeighborGrid(spec.rho_max, spec.big_radius)
    for rho, theta in zip(kept_rho, kept_theta):
        big.insert(rho, theta)

    rng = rng if rng is not None else np.random.default_rng(0)
    rho_lim = spec.rho_max - spec.big_radius
    s = rng.uniform(0.0, math.sinh(rho_lim) ** 2, size=coverage_samples)
    sample_rho = np.arcsinh(np.sqrt(s))
    sample_theta = rng.uniform(0.0, TWO_PI, size=coverage_samples)
    counts = big.count_neighbors(sample_rho, sample_theta)
    gaps = int(np.count_nonzero(counts == 0))
    mult = int(np.max(counts)) if len(counts) else 0

    return CoveringResult(
        spec=spec,
        centers_rho=kept_rho,
        centers_theta=kept_theta,
        multiplicity_empirical=mult,
        multiplicity_bound=multiplicity_bound(spec),
        coverage_gap_count=gaps,
        min_pairwise_distance=min_pairwise_distance(
            kept_rho, kept_theta, search_cap=3.0 * spec.eps
        ),
    )


def min_pairwise_distance(rho: np.ndarray, theta: np.ndarray, search_cap: float | None = None) -> float:
    """Minimum pairwise center distance, exact below the search cap.

    Small sets are checked all-pairs.  Large sets are checked through a
    neighbor hash with a finite search radius: if no pair is closer than
    the cap, the cap is returned (a certified lower bound).
    """
    n = len(rho)
    if n < 2:
        return math.inf
    if n <= 4000:
        best = math.inf
        for i in range(n - 1):
            d = pair_distance(rho[i + 1 :], theta[i + 1 :], rho[i], theta[i])
            best = min(best, float(np.min(d)))
        return best
    cap = search_cap if search_cap is not None else 2.0 * float(np.max(rho)) + 1.0
    grid = NeighborGrid(float(np.max(rho)) + 1e-9, cap)
    best = cap
    for i in range(n):
        pts = grid._gather(rho[i], theta[i])
        if pts:
            a = np.asarray(pts)
            d = pair_distance(a[:, 0], a[:, 1], rho[i], theta[i])
            best = min(best, float(np.min(d)))
        grid.insert(rho[i], theta[i])
    return best


def multiplicity_estimate(
    result: CoveringResult, samples: int = 100_000, rng: np.random.Generator | None = None
) -> int:
    """Max number of enlarged balls containing a sampled interior point."""
    spec = result.spec
    big = NeighborGrid(spec.rho_max, spec.big_radius)
    for rho, theta in zip(result.centers_rho, result.centers_theta):
        big.insert(rho, theta)
    rng = rng if rng is not None else np.random.default_rng(1)
    rho_lim = spec.rho_max - spec.big_radius
    s = rng.uniform(0.0, math.sinh(rho_lim) ** 2, size=samples)
    counts = big.count_neighbors(
        np.arcsinh(np.sqrt(s)), rng.uniform(0.0, TWO_PI, size=samples)
    )
    return int(np.max(counts)) if samples else 0


def run_covering(spec: CoveringSpec, coverage_samples: int = 100_000) -> CoveringResult:
    """Lattice generation plus greedy selection in one call."""
    return greedy_select(candidate_lattice(spec), spec, coverage_samples)

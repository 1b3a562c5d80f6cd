"""Numerical laboratory for Moebius-invariant exponential functionals on the hyperbolic disk.

The unit disk carries the metric |dx|^2 / (1 - |x|^2)^2.  The package
provides the geometry primitives, discretized fields and quadratures,
the invariant exponential functionals with their local bounds, a greedy
disjoint-ball covering of hyperbolic space, and variational tools
(constrained maximization, recentering, profile extraction).
"""

from .geometry import (
    ORIGIN,
    DiskPoint,
    MobiusMap,
    ball_area,
    circle_circumference,
    disk_drop,
    geodesic_distance,
    geodesic_distance_z,
    mobius_apply_z,
    mobius_inverse,
    polar_lift,
    random_disk_points,
)
from .fields import (
    Field,
    FieldInterpolator,
    Grid,
    RadialField,
    RadialGrid,
    TruncationWarning,
    dilate_radial,
    dirichlet_energy,
    field_from_function,
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
from .functionals import (
    NONLINEARITIES,
    LocalBoundReport,
    Nonlinearity,
    brezis_lieb_defect,
    calibrate_local_bound,
    f_integral,
    local_tm_bound_check,
    quartic,
    tm_euclidean,
    tm_euclidean_report,
    tm_invariant,
    tm_invariant_report,
    window_exp_integral,
    window_norm_sq,
)
from .covering import (
    CoveringResult,
    CoveringSpec,
    candidate_lattice,
    greedy_select,
    min_pairwise_distance,
    multiplicity_bound,
    multiplicity_estimate,
    pair_distance,
    run_covering,
)
from .variational import (
    DirichletForm,
    OptimizerConfig,
    OptimizerTrace,
    ProfileReport,
    RecenterResult,
    VanishingReport,
    blowup_probe,
    concentration_center,
    dirichlet_form,
    maximize,
    moser_field,
    profile_extract,
    recenter,
    riesz_gradient,
    vanishing_check,
)

__version__ = "1.0.0"

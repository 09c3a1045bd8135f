"""Numerical laboratory for Kobayashi geometry on concrete model domains.

Computes boundary-distance oracles, two-sided Kobayashi-Royden metric
estimates, near-geodesic polylines with certified quasi-geodesic factors,
and verification sweeps for quantitative visibility, Gehring-Hayman length
bounds, and closed-form distance lower bounds.
"""

__version__ = "0.1.0"

from .domains import (
    Domain,
    DomainError,
    Ellipsoid,
    HalfspaceIntersection,
    OutsideDomainError,
    PairRule,
    UnitBall,
    UnitDisc,
    boundary_distance,
    contains,
    diameter,
    directional_boundary_distance,
    nearest_boundary_direction,
    sample_pairs,
    unit_cube_c1,
)
from .gauges import (
    AdmissibilityReport,
    GaugeError,
    GaugeProfile,
    OmegaSpec,
    alpha_growth_probe,
    calibrate_omega,
    check_admissibility,
    g_eval,
    g_inverse,
    h_eval,
    m_sup_estimate,
    omega_eval,
    power_gauge,
    sqrt_gauge,
)
from .geodesics import (
    Curve,
    GeodesicResult,
    Lattice,
    SolverConfig,
    build_lattice,
    certify_lambda,
    default_config,
    exact_disc_geodesic,
    penetration_depth,
    refine_curve,
    solve_geodesic,
)
from .inequalities import (
    ShellDecomposition,
    VerificationRecord,
    check_shell_invariants,
    measure_max_c,
    shell_decompose,
    verify_gehring_hayman,
    verify_lower_bounds,
    verify_shells,
    verify_visibility,
)
from .metrics import (
    BoundBundle,
    BoundConstants,
    MetricEstimate,
    MetricField,
    ball_distance_oracle,
    curve_euclid_length,
    curve_kappa_length,
    dini_upper_distance,
    disc_distance_oracle,
    exact_distance,
    finite_type_bound,
    gromov_delta_estimate,
    kappa_bounds,
    kappa_exact,
    lower_distance_bundle,
)
from .reports import ConfigError, ExperimentConfig, ReportBundle, emit_csv, emit_plots, parse_config, run

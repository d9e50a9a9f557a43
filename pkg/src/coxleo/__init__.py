"""Cox point process models of multi-constellation LEO satellite networks.

The package computes downlink statistics of networks whose orbital
planes form a Poisson process on orbit space and whose satellites form
Poisson processes on the planes: distance laws, no-satellite and
association probabilities, SINR coverage, and ergodic capacity.  Every
analytic quantity has a Monte Carlo counterpart so the two routes can
check each other, and deterministic Walker-style constellations can be
moment-matched to the Cox model for comparison.
"""

from .geometry import (
    R_EARTH_KM,
    OrbitGeom,
    VisibilityLimits,
    cap_orbit_arc_angle,
    chord_distance,
    cos_earth_angle,
    omega_window,
    orbital_to_cartesian,
    user_satellite_distance,
    visibility_limits,
)
from .model import (
    ConstellationSpec,
    Curve,
    ModelWarning,
    NetworkModel,
    PropagationConfig,
    db_to_linear,
    fading_ccdf,
    fading_laplace,
    linear_to_db,
    validate,
)
from .quadrature import (
    DEFAULT_SETTINGS,
    QuadratureError,
    QuadratureSettings,
    adaptive_quad,
    fixed_quad,
)
from .analytic import (
    NearestDistanceLaw,
    association_probability,
    association_probability_power,
    coverage_closed,
    coverage_open,
    ergodic_capacity,
    ergodic_capacity_closed,
    ergodic_capacity_open,
    laplace_cross_interference,
    nearest_ccdf,
    nearest_pdf,
    no_satellite_closed,
    no_satellite_open,
)
from .montecarlo import (
    IsotropyResult,
    MonteCarloResult,
    OrbitLaw,
    SampledNetwork,
    estimate,
    isotropy_check,
    nearest_distance_samples,
    sample_network,
    sample_network_generalized,
    sample_type,
)
from .constellation import (
    ONEWEB,
    STARLINK_2A,
    STARLINK_2A_GROUP1,
    STARLINK_2A_GROUP2,
    STARLINK_2A_GROUP3,
    CoverageComparison,
    FittedCox,
    WalkerShell,
    WalkerSystem,
    builtin_shells,
    compare_coverage,
    fit_cox,
    generate_walker,
    horizontal_gap_db,
    load_shell_table,
    mean_visible,
    nearest_distance_sampler,
    visible_count_samples,
    walker_coverage_closed,
)

__version__ = "0.1.0"

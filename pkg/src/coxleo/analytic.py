"""Integral formulas for the network's distance and SINR statistics.

Everything here reduces to integrals over orbit tilt (angular distance
of an orbital plane's closest approach from the user's axis) of
functionals of the satellite process on each orbit.  Two building
blocks cover all of them:

* ``_orbit_functional``: the probability-generating functional of one
  type's orbit process, combining the void probability of a spherical
  cap around the user with the Laplace functional of the interference
  from the rest of each visible arc.  Degenerate caps (``cos_cap = 1``)
  and full-band caps (``cos_cap = r_e/r``) fall out of the same formula,
  which is what the clamped window angles of :mod:`coxleo.geometry`
  buy us.
* ``_serving_orbit_integral``: the density contribution of the orbit
  carrying the serving satellite.  Its integrand has an integrable
  inverse-square-root singularity at the cap edge, removed by a sine
  substitution before Gauss-Legendre.

The along-orbit and tilt integrals use fixed Gauss-Legendre rules;
their integrands are smooth once the square-root edge behavior of the
window angles is substituted away, so the fixed rules converge to
machine precision (the tests double the node counts to check).  The
outer serving-distance and rate integrals are adaptive with breakpoints
at every type's band edges.  Both building blocks are vectorized over
batches of (Laplace argument, cap) pairs so the outer integrands can
evaluate a whole panel of abscissae in one pass.

SINR thresholds are accepted in dB and converted once; Laplace
arguments are linear.
"""

from __future__ import annotations

import math
from functools import cached_property

import numpy as np

from .geometry import (
    R_EARTH_KM,
    arc_fraction_argument,
    cos_earth_angle,
    visibility_limits,
)
from .model import ConstellationSpec, NetworkModel, db_to_linear
from .quadrature import (
    DEFAULT_SETTINGS,
    QuadratureSettings,
    adaptive_quad,
    gauss_legendre,
)

OMEGA_NODES = 64
TILT_NODES = 48


def _inner_settings(settings: QuadratureSettings) -> QuadratureSettings:
    """Tolerances two decades tighter than the requesting integral, so
    inner quadrature noise never masquerades as outer structure."""
    return QuadratureSettings(
        rel_tol=max(settings.rel_tol * 1e-2, 1e-13),
        abs_tol=max(settings.abs_tol * 1e-2, 1e-15),
        max_depth=settings.max_depth,
        max_intervals=settings.max_intervals,
    )


def _one_minus_laplace(x, shape: int):
    """1 - E[exp(-x H)] for unit-mean Nakagami power fading, precise for
    small x (the far-interferer regime)."""
    return -np.expm1(-shape * np.log1p(x / shape))


def _windows(spec: ConstellationSpec, cos_cap, cos_tilt):
    """Void-arc and visible-arc half angles for orbits of each tilt.

    ``w1`` is the half-angle of the orbit arc inside the cap (zero when
    the orbit misses it), ``w2`` the half-angle of the visible arc.
    """
    w1 = np.arcsin(np.sqrt(arc_fraction_argument(cos_cap, cos_tilt)))
    w2 = np.arcsin(
        np.sqrt(arc_fraction_argument(R_EARTH_KM / spec.radius_km, cos_tilt))
    )
    return np.minimum(w1, w2), w2


def _interference_exponent(spec, s_p, alpha, shape, cos_tilt, w_lo, w_hi):
    """Per-orbit interference exponent (mu/pi) * integral over the arc
    [w_lo, w_hi] of 1 - L_H(s_p / distance^alpha).

    ``s_p`` must broadcast against ``cos_tilt``; an extra trailing axis
    for the along-orbit nodes is added internally.
    """
    s_p = np.asarray(s_p, dtype=float)
    if not s_p.any():
        return np.zeros(np.broadcast_shapes(s_p.shape, np.shape(cos_tilt)))
    nodes, weights = gauss_legendre(OMEGA_NODES)
    half = 0.5 * (w_hi - w_lo)
    w = 0.5 * (w_hi + w_lo)[..., None] + half[..., None] * nodes
    r = spec.radius_km
    f2 = (r * r + R_EARTH_KM**2) - (2.0 * r * R_EARTH_KM) * np.cos(w) * np.asarray(cos_tilt)[..., None]
    x = s_p[..., None] * f2 ** (-0.5 * alpha)
    return (spec.mean_sats_per_orbit / np.pi) * ((_one_minus_laplace(x, shape) @ weights) * half)


def _tilt_exponent(spec, alpha, shape, s_p, cos_cap, cos_t):
    """Mean number of satellites, on an orbit of the given tilt, charged
    by the joint cap-void / interference event."""
    w1, w2 = _windows(spec, cos_cap, cos_t)
    exponent = (spec.mean_sats_per_orbit / np.pi) * w1
    return exponent + _interference_exponent(spec, s_p, alpha, shape, cos_t, w1, w2)


def _cap_angles(spec: ConstellationSpec, cos_cap):
    _, tilt_max = visibility_limits(spec.radius_km)
    return np.minimum(np.arccos(np.clip(cos_cap, -1.0, 1.0)), tilt_max), tilt_max


def _broadcast_pair(s_p, cos_cap):
    scalar = np.ndim(s_p) == 0 and np.ndim(cos_cap) == 0
    s_p, cos_cap = np.broadcast_arrays(
        np.atleast_1d(np.asarray(s_p, dtype=float)),
        np.atleast_1d(np.asarray(cos_cap, dtype=float)),
    )
    return s_p, cos_cap, scalar


def _orbit_functional(spec: ConstellationSpec, alpha: float, shape: int,
                      s_p, cos_cap, n_nodes: int = TILT_NODES):
    """PGFL of one type's orbit process for a cap-void plus interference
    event, vectorized over broadcastable ``s_p`` and ``cos_cap``.

    Returns ``exp(-lambda * int_0^tilt_max (1 - e^{-E(t)}) cos t dt)``
    where ``E(t)`` charges each orbit with an empty arc inside the cap of
    cosine ``cos_cap`` and, when ``s_p > 0``, with the interference
    Laplace exponent over the remaining visible arc.  ``s_p`` is the
    Laplace argument already multiplied by the interferers' transmit
    power.  Special cases: ``cos_cap=1`` means no cap (pure interference
    functional); ``s_p=0, cos_cap=r_e/r`` gives the no-visible-satellite
    probability.

    The window angles behave like sqrt(edge - t) at the cap edge and at
    the band edge, so the tilt integral is split there and each panel is
    integrated under ``t = lo + (hi - lo) sin(theta)``, which maps the
    singular end to a double zero of the Jacobian and leaves a smooth
    integrand.
    """
    s_p, cos_cap, scalar = _broadcast_pair(s_p, cos_cap)
    cap, tilt_max = _cap_angles(spec, cos_cap)
    nodes, weights = gauss_legendre(n_nodes)
    theta = 0.25 * np.pi * (nodes + 1.0)
    sin_theta, cos_theta = np.sin(theta), np.cos(theta)
    total = np.zeros(cap.shape)
    for lo, width in ((np.zeros_like(cap), cap), (cap, tilt_max - cap)):
        t = lo[..., None] + width[..., None] * sin_theta
        jac = 0.25 * np.pi * width[..., None] * cos_theta
        cos_t = np.cos(t)
        exponent = _tilt_exponent(spec, alpha, shape, s_p[..., None], cos_cap[..., None], cos_t)
        total += (-np.expm1(-exponent) * cos_t * jac) @ weights
    out = np.exp(-spec.mean_orbits * total)
    return float(out[0]) if scalar else out


def _serving_orbit_integral(spec: ConstellationSpec, alpha: float, shape: int,
                            s_p, cos_cap, n_nodes: int = OMEGA_NODES):
    """Tilt integral of ``e^{-E(t)} / sqrt(1 - cos^2(cap)/cos^2(t))``
    over the cap-intersecting tilts [0, cap_angle], vectorized like
    ``_orbit_functional``.

    The endpoint singularity at t -> cap_angle is integrable; the
    substitution t = cap_angle * sin(theta) makes the integrand smooth.
    """
    s_p, cos_cap, scalar = _broadcast_pair(s_p, cos_cap)
    cap, _ = _cap_angles(spec, cos_cap)
    nodes, weights = gauss_legendre(n_nodes)
    theta = 0.25 * np.pi * (nodes + 1.0)
    t = cap[..., None] * np.sin(theta)
    cos_t = np.cos(t)
    frac = arc_fraction_argument(cos_cap[..., None], cos_t)
    exponent = _tilt_exponent(spec, alpha, shape, s_p[..., None], cos_cap[..., None], cos_t)
    jac = 0.25 * np.pi * cap[..., None] * np.cos(theta)
    # frac vanishes only on degenerate caps, whose Jacobian is zero too
    with np.errstate(divide="ignore"):
        integrand = np.where(frac > 0.0, np.exp(-exponent) / np.sqrt(frac), 0.0) * jac
    out = integrand @ weights
    return float(out[0]) if scalar else out


# ---------------------------------------------------------------------------
# nearest-distance law and no-satellite probabilities


class NearestDistanceLaw:
    """Distribution of the distance to the nearest visible satellite of
    one type, with its piecewise structure made explicit.

    The CCDF is 1 below the minimum possible distance, an orbit-process
    void probability across the visible band, and constant (the
    no-satellite probability) beyond the horizon distance.
    """

    def __init__(self, spec: ConstellationSpec):
        self.spec = spec
        self.min_distance_km = spec.radius_km - R_EARTH_KM
        self.max_distance_km, _ = visibility_limits(spec.radius_km)

    @property
    def breakpoints(self) -> tuple[float, float]:
        return (self.min_distance_km, self.max_distance_km)

    @cached_property
    def no_satellite(self) -> float:
        return _orbit_functional(self.spec, 3.0, 1, 0.0, R_EARTH_KM / self.spec.radius_km)

    def ccdf(self, v):
        """P(nearest visible satellite is farther than v); broadcasts."""
        flat = np.ravel(np.asarray(v, dtype=float))
        out = np.ones(flat.shape)
        out[flat >= self.max_distance_km] = self.no_satellite
        band = (flat > self.min_distance_km) & (flat < self.max_distance_km)
        if band.any():
            cos_cap = cos_earth_angle(self.spec.radius_km, flat[band])
            out[band] = _orbit_functional(self.spec, 3.0, 1, np.zeros(cos_cap.shape), cos_cap)
        return float(out[0]) if np.ndim(v) == 0 else out.reshape(np.shape(v))

    def orbit_density(self, v):
        """The serving-orbit factor g(v); zero outside the visible band."""
        flat = np.ravel(np.asarray(v, dtype=float))
        out = np.zeros(flat.shape)
        band = (flat > self.min_distance_km) & (flat < self.max_distance_km)
        if band.any():
            spec = self.spec
            cos_cap = cos_earth_angle(spec.radius_km, flat[band])
            integral = _serving_orbit_integral(spec, 3.0, 1, np.zeros(cos_cap.shape), cos_cap)
            out[band] = (
                spec.mean_sats_per_orbit * flat[band]
                / (np.pi * R_EARTH_KM * spec.radius_km) * integral
            )
        return float(out[0]) if np.ndim(v) == 0 else out.reshape(np.shape(v))

    def pdf(self, v):
        return self.spec.mean_orbits * self.ccdf(v) * self.orbit_density(v)


def nearest_ccdf(spec: ConstellationSpec, v):
    """P(nearest visible satellite of this type is farther than v)."""
    return NearestDistanceLaw(spec).ccdf(v)


def nearest_pdf(spec: ConstellationSpec, v):
    """Density of the nearest visible-satellite distance (0 off the band)."""
    return NearestDistanceLaw(spec).pdf(v)


def no_satellite_closed(spec: ConstellationSpec) -> float:
    """Probability that no satellite of this type is visible."""
    return NearestDistanceLaw(spec).no_satellite


def no_satellite_open(model: NetworkModel) -> float:
    """Probability that no satellite of any type is visible."""
    out = 1.0
    for spec in model.constellations:
        out *= no_satellite_closed(spec)
    return out


def laplace_cross_interference(spec: ConstellationSpec, s: float,
                               alpha: float = 3.0, fading_shape: int = 1) -> float:
    """Laplace transform E[exp(-s I)] of the total received power from
    every visible satellite of one type (unit receive gain)."""
    if s < 0:
        raise ValueError("s must be nonnegative")
    return _orbit_functional(spec, alpha, fading_shape, s * spec.tx_power_w, 1.0)


# ---------------------------------------------------------------------------
# coverage


def _require_rayleigh(model: NetworkModel):
    if model.propagation.fading_shape != 1:
        raise ValueError(
            "analytic coverage requires fading_shape=1; use the Monte Carlo "
            "engine for other shapes"
        )


def _sweep(fn, tau_db):
    if np.ndim(tau_db) == 0:
        return fn(db_to_linear(float(tau_db)))
    return np.array([fn(db_to_linear(float(t))) for t in np.asarray(tau_db).ravel()]).reshape(
        np.shape(tau_db)
    )


def _band(spec: ConstellationSpec) -> tuple[float, float]:
    return spec.radius_km - R_EARTH_KM, float(visibility_limits(spec.radius_km)[0])


def _serving_term_factory(model: NetworkModel, k: int, tau: float,
                          open_access: bool, no_sat: list[float] | None):
    """Integrand (in serving distance z) of the type-k coverage term."""
    spec = model.constellations[k]
    prop = model.propagation
    alpha = prop.path_loss_exponent
    sigma2 = prop.noise_power_w
    eirp = spec.tx_power_w * spec.gain
    r = spec.radius_km
    density = spec.mean_orbits * spec.mean_sats_per_orbit / (np.pi * r * R_EARTH_KM)

    def integrand(z_arr):
        z = np.ravel(np.asarray(z_arr, dtype=float))
        s = tau * z**alpha / eirp
        val = density * z * np.exp(-sigma2 * s)
        for l, other in enumerate(model.constellations):
            if l == k:
                continue
            s_l = s * other.tx_power_w
            if not open_access:
                val = val * _orbit_functional(other, alpha, 1, s_l, np.ones_like(z))
                continue
            lo_l, hi_l = _band(other)
            cos_cap_l = np.ones_like(z)
            in_band = (z > lo_l) & (z < hi_l)
            if in_band.any():
                cos_cap_l[in_band] = cos_earth_angle(other.radius_km, z[in_band])
            factor = _orbit_functional(other, alpha, 1, s_l, cos_cap_l)
            val = val * np.where(z >= hi_l, no_sat[l], factor)
        s_own = s * spec.tx_power_w
        cos_cap = cos_earth_angle(r, z)
        val = val * _orbit_functional(spec, alpha, 1, s_own, cos_cap)
        val = val * _serving_orbit_integral(spec, alpha, 1, s_own, cos_cap)
        return val

    return integrand


def coverage_closed(model: NetworkModel, serving_type: int, tau_db,
                    settings: QuadratureSettings = DEFAULT_SETTINGS):
    """P(SINR > tau) for a user served by the nearest visible satellite
    of one fixed type, all other types interfering.

    ``tau_db`` may be a scalar or an array (a sweep).  Requires
    Rayleigh fading (shape 1).
    """
    _require_rayleigh(model)
    if not 0 <= serving_type < model.n_types:
        raise ValueError("serving_type out of range")

    def one_tau(tau: float) -> float:
        integrand = _serving_term_factory(model, serving_type, tau,
                                          open_access=False, no_sat=None)
        lo, hi = _band(model.constellations[serving_type])
        val, _ = adaptive_quad(integrand, lo, hi, settings, strict=True)
        return min(max(val, 0.0), 1.0)

    return _sweep(one_tau, tau_db)


def coverage_open(model: NetworkModel, tau_db,
                  settings: QuadratureSettings = DEFAULT_SETTINGS):
    """P(SINR > tau) for a user served by the nearest visible satellite
    of any type.  Reduces to ``coverage_closed`` when K=1."""
    _require_rayleigh(model)
    no_sat = [no_satellite_closed(spec) for spec in model.constellations]

    def one_tau(tau: float) -> float:
        total = 0.0
        for k, spec in enumerate(model.constellations):
            integrand = _serving_term_factory(model, k, tau,
                                              open_access=True, no_sat=no_sat)
            lo, hi = _band(spec)
            breaks = []
            for other in model.constellations:
                breaks.extend(_band(other))
            val, _ = adaptive_quad(integrand, lo, hi, settings,
                                   breakpoints=[b for b in breaks if lo < b < hi],
                                   strict=True)
            total += val
        return min(max(total, 0.0), 1.0)

    return _sweep(one_tau, tau_db)


# ---------------------------------------------------------------------------
# association


def _association_core(model: NetworkModel, k: int, scale: np.ndarray,
                      settings: QuadratureSettings) -> float:
    """Integral of the serving-density of type k times per-type CCDF
    factors evaluated at per-type scaled distances."""
    laws = [NearestDistanceLaw(spec) for spec in model.constellations]
    spec = model.constellations[k]
    lo, hi = _band(spec)

    def integrand(v_arr):
        v = np.ravel(np.asarray(v_arr, dtype=float))
        val = spec.mean_orbits * laws[k].orbit_density(v)
        for m, law in enumerate(laws):
            val = val * law.ccdf(v * scale[m])
        return val

    breaks = set()
    for m, law in enumerate(laws):
        for b in law.breakpoints:
            if scale[m] > 0:
                breaks.add(b / scale[m])
    val, _ = adaptive_quad(integrand, lo, hi, settings,
                           breakpoints=[b for b in breaks if lo < b < hi], strict=True)
    return min(max(val, 0.0), 1.0)


def association_probability(model: NetworkModel, serving_type: int,
                            settings: QuadratureSettings = DEFAULT_SETTINGS) -> float:
    """P(the nearest visible satellite overall belongs to ``serving_type``).

    Summing over types and adding the open-access no-satellite
    probability yields 1.
    """
    if not 0 <= serving_type < model.n_types:
        raise ValueError("serving_type out of range")
    scale = np.ones(model.n_types)
    return _association_core(model, serving_type, scale, settings)


def association_probability_power(model: NetworkModel, serving_type: int,
                                  settings: QuadratureSettings = DEFAULT_SETTINGS) -> float:
    """P(``serving_type`` wins a maximum average-received-power
    association), power ratios mapped to distance scalings via the
    path-loss exponent."""
    if not 0 <= serving_type < model.n_types:
        raise ValueError("serving_type out of range")
    alpha = model.propagation.path_loss_exponent
    own = model.constellations[serving_type]
    eirp_k = own.tx_power_w * own.gain
    scale = np.array([
        ((c.tx_power_w * c.gain) / eirp_k) ** (1.0 / alpha) for c in model.constellations
    ])
    scale[serving_type] = 1.0
    return _association_core(model, serving_type, scale, settings)


# ---------------------------------------------------------------------------
# ergodic capacity


def ergodic_capacity(coverage_fn, settings: QuadratureSettings = DEFAULT_SETTINGS) -> float:
    """Expected log2(1+SINR) from a coverage function of tau in dB.

    Integrates P(SINR > 2^rate - 1) over rate, mapped to the unit
    interval by rate = -ln(1-u); the result is in bits per channel use.
    """
    def integrand(u_arr):
        u = np.ravel(u_arr)
        rate = -np.log1p(-u)
        tau = np.expm1(rate * math.log(2.0))
        out = np.empty_like(u)
        for i in range(u.size):
            cov = coverage_fn(10.0 * math.log10(tau[i]))
            out[i] = cov / (1.0 - u[i])
        return out

    val, _ = adaptive_quad(integrand, 0.0, 1.0, settings, strict=True)
    return max(val, 0.0)


def ergodic_capacity_closed(model: NetworkModel, serving_type: int,
                            settings: QuadratureSettings = DEFAULT_SETTINGS) -> float:
    # Coverage evaluated tighter than the rate integral so its quadrature
    # error does not read as structure to the outer rule.
    inner = _inner_settings(settings)
    return ergodic_capacity(
        lambda tau_db: coverage_closed(model, serving_type, tau_db, inner), settings
    )


def ergodic_capacity_open(model: NetworkModel,
                          settings: QuadratureSettings = DEFAULT_SETTINGS) -> float:
    inner = _inner_settings(settings)
    return ergodic_capacity(lambda tau_db: coverage_open(model, tau_db, inner), settings)

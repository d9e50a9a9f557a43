"""Deterministic Walker shells and moment matching to the orbit model.

A Walker shell places equally many satellites on equally spaced orbital
planes of one inclination.  This module generates such shells, measures
their visible-satellite statistics as a function of user latitude
(averaging over rotations of the constellation about the Earth's axis,
the only symmetry a real shell has), fits the random-orbit model to a
target mean visible count, and compares closed-access coverage between
a deterministic system and its fitted counterpart.

Latitude enters in degrees here (it is data-sheet vocabulary); all
internal math is in radians and kilometers.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from importlib import resources

import numpy as np

from .geometry import R_EARTH_KM, orbital_to_cartesian, visibility_limits
from .model import ConstellationSpec, Curve, NetworkModel, PropagationConfig, db_to_linear

ROTATION_CHUNK = 2048


@dataclass(frozen=True)
class WalkerShell:
    """One deterministic constellation shell.

    ``raan_spread`` is the angle over which the ascending nodes are
    spread (2*pi for a delta pattern, pi for polar star patterns);
    ``phase_offset`` is the integer inter-plane phasing parameter: plane
    p is advanced in anomaly by ``phase_offset * p / (planes *
    sats_per_plane)`` turns.
    """

    altitude_km: float
    inclination_deg: float
    planes: int
    sats_per_plane: int
    phase_offset: int = 0
    raan_spread: float = 2.0 * math.pi

    def __post_init__(self):
        if self.altitude_km <= 0 or not math.isfinite(self.altitude_km):
            raise ValueError("altitude_km must be positive")
        if self.planes < 1 or self.sats_per_plane < 1:
            raise ValueError("planes and sats_per_plane must be at least 1")
        if not 0.0 < self.raan_spread <= 2.0 * math.pi:
            raise ValueError("raan_spread must lie in (0, 2*pi]")

    @property
    def radius_km(self) -> float:
        return R_EARTH_KM + self.altitude_km

    @property
    def n_satellites(self) -> int:
        return self.planes * self.sats_per_plane


@dataclass(frozen=True)
class WalkerSystem:
    """One or more shells operated as a single constellation, plus the
    link parameters their satellites transmit with."""

    shells: tuple[WalkerShell, ...]
    reuse_factor: int = 1
    tx_power_w: float = 1.0
    gain: float = 1.0

    def __post_init__(self):
        if isinstance(self.shells, WalkerShell):
            object.__setattr__(self, "shells", (self.shells,))
        else:
            object.__setattr__(self, "shells", tuple(self.shells))
        if not self.shells:
            raise ValueError("at least one shell is required")
        if self.reuse_factor < 1:
            raise ValueError("reuse_factor must be at least 1")
        if self.tx_power_w <= 0 or self.gain < 1:
            raise ValueError("tx_power_w must be positive and gain at least 1")

    @property
    def positions(self) -> np.ndarray:
        return np.concatenate(
            [generate_walker(shell, self.reuse_factor) for shell in self.shells]
        )

    @property
    def mean_radius_km(self) -> float:
        """Satellite-count-weighted orbital radius, the single radius a
        fitted model uses for a multi-shell system."""
        weights = np.array([s.n_satellites for s in self.shells], dtype=float)
        radii = np.array([s.radius_km for s in self.shells])
        return float(np.average(radii, weights=weights))


STARLINK_2A_GROUP1 = WalkerShell(530.0, 43.0, 28, 120)
STARLINK_2A_GROUP2 = WalkerShell(525.0, 53.0, 28, 120)
STARLINK_2A_GROUP3 = WalkerShell(535.0, 33.0, 28, 120)
STARLINK_2A = (STARLINK_2A_GROUP1, STARLINK_2A_GROUP2, STARLINK_2A_GROUP3)
ONEWEB = WalkerShell(1200.0, 86.4, 12, 54, raan_spread=math.pi)


def generate_walker(shell: WalkerShell, reuse_factor: int = 1) -> np.ndarray:
    """Cartesian satellite positions (n, 3) in km of one Walker shell.

    With ``reuse_factor`` F > 1 only every F-th satellite per plane (by
    in-plane index) is kept: the deterministic co-channel subset.
    """
    if reuse_factor < 1 or shell.sats_per_plane % reuse_factor != 0:
        raise ValueError("reuse_factor must divide sats_per_plane")
    incl = math.radians(shell.inclination_deg)
    p = np.arange(shell.planes)
    j = np.arange(0, shell.sats_per_plane, reuse_factor)
    raan = np.repeat(p * shell.raan_spread / shell.planes, j.size)
    anomaly = (
        2.0 * np.pi * np.tile(j, shell.planes) / shell.sats_per_plane
        + 2.0 * np.pi * np.repeat(p, j.size) * shell.phase_offset / shell.n_satellites
    )
    return orbital_to_cartesian(shell.radius_km, raan, incl, anomaly)


def _user_directions(lat_deg: float, rotations: np.ndarray) -> np.ndarray:
    """Unit user directions (3, n) for a latitude and z-rotations."""
    lat = math.radians(lat_deg)
    return np.stack([
        math.cos(lat) * np.cos(rotations),
        math.cos(lat) * np.sin(rotations),
        math.sin(lat) * np.ones_like(rotations),
    ])


def _as_positions(source) -> np.ndarray:
    if isinstance(source, WalkerSystem):
        return source.positions
    if isinstance(source, WalkerShell):
        return generate_walker(source)
    return np.asarray(source, dtype=float)


def visible_count_samples(source, user_latitude_deg: float, n: int, seed) -> np.ndarray:
    """Visible-satellite counts: over constellation rotations for
    deterministic shells, over network realizations for the random
    model (whose law does not depend on latitude)."""
    rng = np.random.default_rng(seed)
    if isinstance(source, (ConstellationSpec, NetworkModel)):
        specs = source.constellations if isinstance(source, NetworkModel) else (source,)
        out = np.zeros(n)
        for spec in specs:
            n_orbits = rng.poisson(spec.mean_orbits, n)
            total = int(n_orbits.sum())
            sin_incl = np.sin(np.arccos(1.0 - 2.0 * rng.random(total)))
            counts = rng.poisson(spec.mean_sats_per_orbit, total)
            s = np.sin(rng.uniform(0.0, 2.0 * np.pi, int(counts.sum())))
            s = s * np.repeat(sin_incl, counts)
            trial = np.repeat(np.repeat(np.arange(n), n_orbits), counts)
            hits = trial[s >= R_EARTH_KM / spec.radius_km]
            out += np.bincount(hits, minlength=n)
        return out
    positions = _as_positions(source)
    out = np.empty(n)
    for start in range(0, n, ROTATION_CHUNK):
        stop = min(start + ROTATION_CHUNK, n)
        u = _user_directions(user_latitude_deg, rng.uniform(0.0, 2.0 * np.pi, stop - start))
        # positions @ u is r cos(angle); visibility is cos(angle) >= r_e/r
        out[start:stop] = ((positions @ u) >= R_EARTH_KM).sum(axis=0)
    return out


def mean_visible(source, user_latitude_deg: float = 0.0,
                 n_rotations: int = 4096, seed: int = 0) -> float:
    """Mean number of visible satellites.

    Closed form mean_orbits * mean_sats * (1 - r_e/r) / 2 for the
    random-orbit model (latitude-independent); a rotation average for
    deterministic shells.
    """
    if isinstance(source, ConstellationSpec):
        return source.mean_satellites * (1.0 - R_EARTH_KM / source.radius_km) / 2.0
    if isinstance(source, NetworkModel):
        return sum(mean_visible(spec) for spec in source.constellations)
    return float(
        visible_count_samples(source, user_latitude_deg, n_rotations, seed).mean()
    )


def nearest_distance_sampler(source):
    """Callable ``(lat_deg, n, seed) -> distances`` for deterministic
    constellations, suitable for the Monte Carlo isotropy check.

    Each sample rotates the constellation uniformly about the Earth's
    axis; realizations with no visible satellite yield ``inf``.
    """
    systems = source if isinstance(source, (list, tuple)) else [source]
    position_sets = [_as_positions(s) for s in systems]

    def sample(lat_deg: float, n: int, seed) -> np.ndarray:
        rng = np.random.default_rng(seed)
        out = np.full(n, np.inf)
        for start in range(0, n, ROTATION_CHUNK):
            stop = min(start + ROTATION_CHUNK, n)
            u = _user_directions(lat_deg, rng.uniform(0.0, 2.0 * np.pi, stop - start))
            best = np.full(stop - start, np.inf)
            for positions in position_sets:
                # positions @ u is r cos(angle); shells may mix radii
                proj = positions @ u
                r2 = np.einsum("ij,ij->i", positions, positions)[:, None]
                d2 = (r2 + R_EARTH_KM**2) - 2.0 * R_EARTH_KM * proj
                d2 = np.where(proj >= R_EARTH_KM, d2, np.inf)
                best = np.minimum(best, d2.min(axis=0))
            out[start:stop] = np.sqrt(best)
        return out

    return sample


# ---------------------------------------------------------------------------
# moment matching


@dataclass(frozen=True)
class FittedCox:
    """Orbit-model parameters matched to a target mean visible count."""

    lambda_hat: float
    mu_hat: float
    radius_km: float
    target_visible: float
    latitude_deg: float = 0.0

    def __post_init__(self):
        got = self.lambda_hat * self.mu_hat * (1.0 - R_EARTH_KM / self.radius_km) / 2.0
        if abs(got - self.target_visible) > 1e-9:
            raise ValueError("fitted parameters do not reproduce the target")

    def spec(self, tx_power_w: float = 1.0, gain: float = 1.0) -> ConstellationSpec:
        return ConstellationSpec(self.lambda_hat, self.mu_hat, self.radius_km,
                                 tx_power_w=tx_power_w, gain=gain)


def fit_cox(target_visible: float, radius_km: float, *,
            fix_mu: float | None = None, fix_lambda: float | None = None,
            fix_ratio: float | None = None, latitude_deg: float = 0.0) -> FittedCox:
    """Solve lambda * mu * (1 - r_e/r) / 2 = target for the free
    parameter under exactly one closure: fixed satellites per orbit,
    fixed orbit count, or fixed lambda/mu ratio."""
    if not target_visible > 0:
        raise ValueError("target_visible must be positive")
    if radius_km <= R_EARTH_KM:
        raise ValueError(f"radius_km must exceed {R_EARTH_KM}")
    chosen = [x for x in (fix_mu, fix_lambda, fix_ratio) if x is not None]
    if len(chosen) != 1:
        raise ValueError("choose exactly one of fix_mu, fix_lambda, fix_ratio")
    if chosen[0] <= 0:
        raise ValueError("strategy parameter must be positive")
    product = 2.0 * target_visible / (1.0 - R_EARTH_KM / radius_km)
    if fix_mu is not None:
        lam, mu = product / fix_mu, fix_mu
    elif fix_lambda is not None:
        lam, mu = fix_lambda, product / fix_lambda
    else:
        mu = math.sqrt(product / fix_ratio)
        lam = fix_ratio * mu
    # reconcile the target to float rounding so the invariant is exact
    target = lam * mu * (1.0 - R_EARTH_KM / radius_km) / 2.0
    return FittedCox(lam, mu, radius_km, target, latitude_deg)


# ---------------------------------------------------------------------------
# coverage comparison


def walker_coverage_closed(systems, serving: int, propagation: PropagationConfig,
                           user_latitude_deg: float, tau_grid_db, n_trials: int,
                           seed: int = 0) -> Curve:
    """Closed-access SINR coverage of a deterministic multi-shell system
    by Monte Carlo over constellation rotations and fading.

    The served link uses power*gain of the serving system; every other
    visible satellite of any system interferes with power alone.
    """
    systems = list(systems)
    if not 0 <= serving < len(systems):
        raise ValueError("serving index out of range")
    tau_db = np.atleast_1d(np.asarray(tau_grid_db, dtype=float))
    tau = db_to_linear(tau_db)
    position_sets = [_as_positions(s) for s in systems]
    alpha = propagation.path_loss_exponent
    m = propagation.fading_shape
    rng = np.random.default_rng(seed)

    covered = np.zeros(tau.size)
    for start in range(0, n_trials, ROTATION_CHUNK):
        n = min(ROTATION_CHUNK, n_trials - start)
        u = _user_directions(user_latitude_deg, rng.uniform(0.0, 2.0 * np.pi, n))
        interference = np.zeros(n)
        srv_d2 = np.full(n, np.inf)
        srv_w = np.zeros(n)
        for idx, (sys, positions) in enumerate(zip(systems, position_sets)):
            proj = positions @ u
            r2 = np.einsum("ij,ij->i", positions, positions)[:, None]
            visible = proj >= R_EARTH_KM
            d2 = (r2 + R_EARTH_KM**2) - 2.0 * R_EARTH_KM * proj
            h = rng.gamma(m, 1.0 / m, d2.shape)
            w = np.where(visible, sys.tx_power_w * h * d2 ** (-0.5 * alpha), 0.0)
            interference += w.sum(axis=0)
            if idx == serving:
                d2_vis = np.where(visible, d2, np.inf)
                rows = np.argmin(d2_vis, axis=0)
                cols = np.arange(n)
                srv_d2 = d2_vis[rows, cols]
                srv_w = np.where(np.isfinite(srv_d2), w[rows, cols], 0.0)
        has_serving = np.isfinite(srv_d2)
        h_s = rng.gamma(m, 1.0 / m, n)
        eirp = systems[serving].tx_power_w * systems[serving].gain
        with np.errstate(invalid="ignore", divide="ignore"):
            signal = eirp * h_s * srv_d2 ** (-0.5 * alpha)
            denom = propagation.noise_power_w + interference - srv_w
            sinr = np.where(has_serving, signal / denom, 0.0)
        sinr = np.where(np.isnan(sinr), np.inf, sinr)
        covered += (sinr[None, :] > tau[:, None]).sum(axis=1)

    y = covered / n_trials
    stderr = np.sqrt(y * (1.0 - y) / n_trials)
    return Curve.probability(tau_db, y, stderr)


def horizontal_gap_db(curve_a: Curve, curve_b: Curve, levels) -> float:
    """Largest |x_a(level) - x_b(level)| over the levels both curves
    bracket; nan when no level is bracketed by both."""
    gaps = []
    for level in np.atleast_1d(levels):
        xa, xb = curve_a.invert(float(level)), curve_b.invert(float(level))
        if not (math.isnan(xa) or math.isnan(xb)):
            gaps.append(abs(xa - xb))
    return max(gaps) if gaps else math.nan


@dataclass(frozen=True)
class CoverageComparison:
    deterministic: Curve
    fitted: Curve
    max_gap_db: float
    levels: np.ndarray = field(repr=False)


def compare_coverage(system, fitted_model: NetworkModel, propagation: PropagationConfig,
                     tau_grid_db, serving: int = 0, user_latitude_deg: float = 0.0,
                     n_trials: int = 200_000, seed: int = 0,
                     levels=None) -> CoverageComparison:
    """Closed-access coverage of a deterministic system next to its
    fitted random-orbit model, with the largest horizontal (dB) gap over
    the mid-coverage levels.

    ``system`` is a list of WalkerSystem (Monte Carlo over rotations) or
    a NetworkModel (then both sides are analytic, for calibration).
    """
    from . import analytic

    if levels is None:
        levels = np.linspace(0.2, 0.8, 25)
    tau_db = np.atleast_1d(np.asarray(tau_grid_db, dtype=float))
    if isinstance(system, NetworkModel):
        det_model = NetworkModel(system.constellations, propagation)
        det = Curve.probability(tau_db, analytic.coverage_closed(det_model, serving, tau_db))
    else:
        det = walker_coverage_closed(system, serving, propagation,
                                     user_latitude_deg, tau_db, n_trials, seed)
    model = NetworkModel(fitted_model.constellations, propagation)
    fit = Curve.probability(tau_db, analytic.coverage_closed(model, serving, tau_db))
    return CoverageComparison(det, fit, horizontal_gap_db(det, fit, levels), np.asarray(levels))


def load_shell_table(path) -> dict[str, WalkerShell]:
    """Parse a plain-text shell table: whitespace-separated columns
    name, altitude_km, inclination_deg, planes, sats_per_plane; '#'
    starts a comment."""
    shells: dict[str, WalkerShell] = {}
    with open(path, encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            parts = line.split()
            if len(parts) != 5:
                raise ValueError(f"{path}:{lineno}: expected 5 columns, got {len(parts)}")
            name, alt, incl, planes, spp = parts
            try:
                shells[name] = WalkerShell(float(alt), float(incl), int(planes), int(spp))
            except ValueError as exc:
                raise ValueError(f"{path}:{lineno}: {exc}") from exc
    return shells


def builtin_shells() -> dict[str, WalkerShell]:
    """The shell table shipped with the package."""
    ref = resources.files("coxleo").joinpath("data/shells.txt")
    with resources.as_file(ref) as path:
        return load_shell_table(path)

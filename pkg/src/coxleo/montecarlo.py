"""Monte Carlo engine: exact sampling of the orbit model and empirical
estimation of every quantity the analytic module computes.

Estimates are deterministic functions of (seed, configuration): trials
are processed in fixed-size chunks, each chunk drawing from its own
counter-based substream (Philox jumped by the chunk index), and partial
results are reduced in chunk order.  Serial and parallel runs therefore
produce bit-identical output.
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np
from scipy.stats import ks_2samp

from .geometry import R_EARTH_KM, orbital_to_cartesian
from .model import ConstellationSpec, Curve, NetworkModel, db_to_linear

WORKERS_ENV_VAR = "COXLEO_WORKERS"
DEFAULT_CHUNK_SIZE = 1024


# ---------------------------------------------------------------------------
# network realizations as inspectable objects


@dataclass
class TypeSample:
    """All orbits and satellites of one constellation type.

    ``radius_of_orbit`` is only set by the generalized sampler, where
    radii vary per orbit; ``radius_km`` then holds the window midpoint.
    """

    radius_km: float
    longitude: np.ndarray      # (n_orbits,)
    inclination: np.ndarray    # (n_orbits,)
    sat_counts: np.ndarray     # (n_orbits,) satellites per orbit
    anomaly: np.ndarray        # (sat_counts.sum(),) flattened per orbit
    radius_of_orbit: np.ndarray | None = None

    @property
    def n_orbits(self) -> int:
        return len(self.longitude)

    @property
    def n_satellites(self) -> int:
        return int(self.sat_counts.sum())

    def positions(self) -> np.ndarray:
        """Cartesian satellite positions, shape (n_satellites, 3)."""
        th = np.repeat(self.longitude, self.sat_counts)
        incl = np.repeat(self.inclination, self.sat_counts)
        if self.radius_of_orbit is None:
            r = self.radius_km
        else:
            r = np.repeat(self.radius_of_orbit, self.sat_counts)
        return orbital_to_cartesian(r, th, incl, self.anomaly)


@dataclass
class SampledNetwork:
    types: tuple[TypeSample, ...]

    def nearest_visible_distance(self, user=None, type_index=None) -> float:
        """Distance to the nearest visible satellite (inf when none).

        ``user`` is a Cartesian position on the Earth sphere (defaults
        to the pole); ``type_index`` restricts the search to one type.
        """
        if user is None:
            user = np.array([0.0, 0.0, R_EARTH_KM])
        best = math.inf
        indices = range(len(self.types)) if type_index is None else [type_index]
        for k in indices:
            ts = self.types[k]
            if ts.n_satellites == 0:
                continue
            d = np.linalg.norm(ts.positions() - user, axis=1)
            if ts.radius_of_orbit is None:
                d_max = math.sqrt(ts.radius_km**2 - R_EARTH_KM**2)
            else:
                r_sat = np.repeat(ts.radius_of_orbit, ts.sat_counts)
                d_max = np.sqrt(r_sat * r_sat - R_EARTH_KM**2)
            vis = d <= d_max
            if vis.any():
                best = min(best, float(d[vis].min()))
        return best


@dataclass(frozen=True)
class OrbitLaw:
    """Orbit-process law with radius and angle windows.

    The plain network model is the special case of a point-mass radius
    window and full angle windows; radii are otherwise uniform on their
    window and inclinations follow the sine density restricted to theirs.
    """

    mean_orbits: float
    mean_sats_per_orbit: float
    radius_window_km: tuple[float, float]
    longitude_window: tuple[float, float] = (0.0, np.pi)
    inclination_window: tuple[float, float] = (0.0, np.pi)

    def __post_init__(self):
        r_lo, r_hi = self.radius_window_km
        if not (R_EARTH_KM < r_lo <= r_hi):
            raise ValueError("radius window must satisfy r_e < r_lo <= r_hi")
        t_lo, t_hi = self.longitude_window
        if not (0 <= t_lo <= t_hi <= np.pi):
            raise ValueError("longitude window must lie within [0, pi]")
        i_lo, i_hi = self.inclination_window
        if not (0 <= i_lo <= i_hi <= np.pi):
            raise ValueError("inclination window must lie within [0, pi]")
        if self.mean_orbits < 0 or self.mean_sats_per_orbit < 0:
            raise ValueError("mean counts must be nonnegative")


def _sample_inclination(rng, n, window=(0.0, np.pi)):
    """Inclination draws with density proportional to sin on the window."""
    c_hi = math.cos(window[0])
    c_lo = math.cos(window[1])
    if c_hi == c_lo:
        return np.full(n, window[0])
    u = rng.random(n)
    return np.arccos(c_hi + (c_lo - c_hi) * u)


def sample_type(spec: ConstellationSpec, rng) -> TypeSample:
    n_orbits = rng.poisson(spec.mean_orbits)
    longitude = rng.uniform(0.0, np.pi, n_orbits)
    inclination = _sample_inclination(rng, n_orbits)
    sat_counts = rng.poisson(spec.mean_sats_per_orbit, n_orbits)
    anomaly = rng.uniform(0.0, 2 * np.pi, int(sat_counts.sum()))
    return TypeSample(spec.radius_km, longitude, inclination, sat_counts, anomaly)


def sample_network(model: NetworkModel, rng) -> SampledNetwork:
    """One realization of the whole network."""
    return SampledNetwork(tuple(sample_type(spec, rng) for spec in model.constellations))


def sample_network_generalized(orbit_law: OrbitLaw, rng) -> SampledNetwork:
    """One realization with windowed radius/longitude/inclination laws.

    Returned as a single-type network whose per-orbit radii are stored in
    ``radius_of_orbit`` (the ``radius_km`` field holds the window mean).
    """
    n_orbits = rng.poisson(orbit_law.mean_orbits)
    r_lo, r_hi = orbit_law.radius_window_km
    radius = rng.uniform(r_lo, r_hi, n_orbits) if r_hi > r_lo else np.full(n_orbits, r_lo)
    longitude = rng.uniform(*orbit_law.longitude_window, n_orbits)
    inclination = _sample_inclination(rng, n_orbits, orbit_law.inclination_window)
    sat_counts = rng.poisson(orbit_law.mean_sats_per_orbit, n_orbits)
    anomaly = rng.uniform(0.0, 2 * np.pi, int(sat_counts.sum()))
    ts = TypeSample(
        0.5 * (r_lo + r_hi), longitude, inclination, sat_counts, anomaly,
        radius_of_orbit=radius,
    )
    return SampledNetwork((ts,))


# ---------------------------------------------------------------------------
# single-realization SINR evaluation


@dataclass
class SinrSample:
    access: str
    serving_type: int | None
    serving_distance_km: float
    sinr: float
    nearest_interferer_km: float


def evaluate_sinr(net: SampledNetwork, model: NetworkModel, rng,
                  access: str = "closed", serving_type: int = 0) -> SinrSample:
    """Downlink SINR of the pole user for one network realization.

    Serving satellite: nearest visible of type ``serving_type`` (closed
    access) or of any type (open access).  Every link, serving and
    interfering, gets a fresh unit-mean fading draw; interferers are
    received with unit gain.
    """
    if access not in ("closed", "open"):
        raise ValueError("access must be 'closed' or 'open'")
    prop = model.propagation
    alpha = prop.path_loss_exponent
    m = prop.fading_shape
    user = np.array([0.0, 0.0, R_EARTH_KM])

    dists, powers, fadings, nearest = [], [], [], []
    for k, ts in enumerate(net.types):
        spec = model.constellations[k]
        if ts.n_satellites:
            d = np.linalg.norm(ts.positions() - user, axis=1)
            d = np.sort(d[d <= math.sqrt(spec.radius_km**2 - R_EARTH_KM**2)])
        else:
            d = np.empty(0)
        h = rng.gamma(m, 1.0 / m, d.size)
        dists.append(d)
        powers.append(np.full(d.size, spec.tx_power_w))
        fadings.append(h)
        nearest.append(d[0] if d.size else math.inf)

    if access == "closed":
        srv_type = serving_type if math.isfinite(nearest[serving_type]) else None
    else:
        best = int(np.argmin(nearest))
        srv_type = best if math.isfinite(nearest[best]) else None

    if srv_type is None:
        all_d = np.concatenate(dists)
        nearest_interferer = float(all_d.min()) if all_d.size else math.nan
        return SinrSample(access, None, math.nan, 0.0, nearest_interferer)

    srv_dist = nearest[srv_type]
    spec = model.constellations[srv_type]
    h_signal = rng.gamma(m, 1.0 / m)
    signal = spec.tx_power_w * spec.gain * h_signal * srv_dist**-alpha

    interference = 0.0
    nearest_interferer = math.inf
    for k in range(len(net.types)):
        d, p, h = dists[k], powers[k], fadings[k]
        if k == srv_type:
            d, p, h = d[1:], p[1:], h[1:]
        if d.size:
            interference += float(np.sum(p * h * d**-alpha))
            nearest_interferer = min(nearest_interferer, float(d[0]))
    if not math.isfinite(nearest_interferer):
        nearest_interferer = math.nan

    denom = prop.noise_power_w + interference
    sinr = math.inf if denom == 0.0 else signal / denom
    return SinrSample(access, srv_type, float(srv_dist), float(sinr), nearest_interferer)


# ---------------------------------------------------------------------------
# batched estimation


@dataclass
class MonteCarloResult:
    """Empirical estimates from one run; coverage is P(SINR > tau)."""

    coverage: Curve
    no_satellite_rate: float
    no_satellite_stderr: float
    association_freq: np.ndarray
    capacity_bits: float
    capacity_stderr: float
    n_trials: int
    access: str
    serving_type: int | None


def _chunk_rng(seed, chunk_index: int):
    return np.random.Generator(np.random.Philox(seed).jumped(chunk_index))


def _segment_min(values, seg_counts):
    """Minimum of ``values`` per segment; inf on empty segments.

    ``values`` must be stored segment-by-segment; ``seg_counts`` gives
    the segment lengths.
    """
    out = np.full(len(seg_counts), np.inf)
    nonempty = seg_counts > 0
    if nonempty.any():
        starts = np.concatenate(([0], np.cumsum(seg_counts)[:-1]))
        out[nonempty] = np.minimum.reduceat(values, starts[nonempty])
    return out


def _simulate_chunk(model: NetworkModel, access: str, serving_type: int,
                    tau: np.ndarray, n: int, rng):
    """Simulate n trials; returns per-chunk reduction terms."""
    prop = model.propagation
    alpha = prop.path_loss_exponent
    m = prop.fading_shape
    K = model.n_types

    nearest_d2 = np.empty((K, n))       # squared distance of nearest visible
    nearest_term = np.zeros((K, n))     # its contribution to interference
    interference = np.zeros(n)
    for k, spec in enumerate(model.constellations):
        r = spec.radius_km
        n_orbits = rng.poisson(spec.mean_orbits, n)
        total_orbits = int(n_orbits.sum())
        u = rng.random(total_orbits)
        sin_incl = 2.0 * np.sqrt(u * (1.0 - u))       # sin(arccos(1-2u))
        sat_counts = rng.poisson(spec.mean_sats_per_orbit, total_orbits)
        total_sats = int(sat_counts.sum())
        anomaly = rng.uniform(0.0, 2.0 * np.pi, total_sats)

        # distance to the pole user depends only on sin(anomaly)*sin(incl)
        s = np.sin(anomaly) * np.repeat(sin_incl, sat_counts)
        trial = np.repeat(np.repeat(np.arange(n), n_orbits), sat_counts)
        visible = s >= R_EARTH_KM / r
        d2 = (r * r + R_EARTH_KM**2) - (2.0 * r * R_EARTH_KM) * s[visible]
        trial_v = trial[visible]

        h = rng.gamma(m, 1.0 / m, d2.size)
        w = spec.tx_power_w * h * d2 ** (-0.5 * alpha)
        interference += np.bincount(trial_v, weights=w, minlength=n)

        counts_v = np.bincount(trial_v, minlength=n)
        d2_min = _segment_min(d2, counts_v)
        nearest_d2[k] = d2_min
        at_min = d2 == d2_min[trial_v]
        nearest_term[k] = np.bincount(trial_v[at_min], weights=w[at_min], minlength=n)

    if access == "closed":
        srv = np.full(n, serving_type)
        srv_d2 = nearest_d2[serving_type]
    else:
        srv = np.argmin(nearest_d2, axis=0)
        srv_d2 = np.take_along_axis(nearest_d2, srv[None, :], axis=0)[0]
    has_serving = np.isfinite(srv_d2)

    eirp = np.array([c.tx_power_w * c.gain for c in model.constellations])
    h_signal = rng.gamma(m, 1.0 / m, n)
    with np.errstate(invalid="ignore", divide="ignore"):
        signal = eirp[srv] * h_signal * srv_d2 ** (-0.5 * alpha)
        own_term = np.take_along_axis(nearest_term, srv[None, :], axis=0)[0]
        denom = prop.noise_power_w + interference - np.where(has_serving, own_term, 0.0)
        sinr = np.where(has_serving, signal / denom, 0.0)
    sinr = np.where(np.isnan(sinr), np.inf, sinr)  # lone visible satellite, no noise

    cov_counts = (sinr[None, :] > tau[:, None]).sum(axis=1)
    assoc = np.bincount(srv[has_serving], minlength=K)
    with np.errstate(invalid="ignore"):
        cap = np.log2(1.0 + sinr)
    return cov_counts, int(n - has_serving.sum()), assoc, cap.sum(), (cap * cap).sum()


def _run_chunk_range(args):
    model, access, serving_type, tau, seed, chunk_size, n_trials, lo, hi = args
    rows = []
    for c in range(lo, hi):
        n = min(chunk_size, n_trials - c * chunk_size)
        rng = _chunk_rng(seed, c)
        rows.append(_simulate_chunk(model, access, serving_type, tau, n, rng))
    return lo, rows


def resolve_workers(workers: int | None) -> int:
    if workers is not None:
        return max(1, int(workers))
    return max(1, int(os.environ.get(WORKERS_ENV_VAR, "1")))


def estimate(model: NetworkModel, access: str, tau_grid_db, n_trials: int, seed: int,
             serving_type: int = 0, workers: int | None = None,
             chunk_size: int = DEFAULT_CHUNK_SIZE) -> MonteCarloResult:
    """Estimate coverage and companion statistics by simulation.

    The coverage curve carries binomial standard errors; the result also
    reports the no-satellite rate, per-type association frequencies, and
    the mean of log2(1+SINR) over all trials (outages contribute zero).
    All trials share one τ grid.
    """
    if access not in ("closed", "open"):
        raise ValueError("access must be 'closed' or 'open'")
    if n_trials < 1:
        raise ValueError("n_trials must be at least 1")
    if not 0 <= serving_type < model.n_types:
        raise ValueError("serving_type out of range")
    tau_db = np.atleast_1d(np.asarray(tau_grid_db, dtype=float))
    tau = db_to_linear(tau_db)
    K = model.n_types

    n_chunks = -(-n_trials // chunk_size)
    workers = resolve_workers(workers)
    rows: list = [None] * n_chunks
    if workers == 1 or n_chunks == 1:
        _, rows = _run_chunk_range(
            (model, access, serving_type, tau, seed, chunk_size, n_trials, 0, n_chunks)
        )
    else:
        step = -(-n_chunks // (workers * 4))
        tasks = [
            (model, access, serving_type, tau, seed, chunk_size, n_trials, lo,
             min(lo + step, n_chunks))
            for lo in range(0, n_chunks, step)
        ]
        with ProcessPoolExecutor(max_workers=workers) as pool:
            for lo, part in pool.map(_run_chunk_range, tasks):
                rows[lo:lo + len(part)] = part

    cov_counts = np.sum([r[0] for r in rows], axis=0)
    nosat = sum(r[1] for r in rows)
    assoc = np.sum([r[2] for r in rows], axis=0)
    cap_sum = np.sum([r[3] for r in rows], axis=0)
    cap_sumsq = np.sum([r[4] for r in rows], axis=0)

    n = float(n_trials)
    cov = cov_counts / n
    cov_se = np.sqrt(np.clip(cov * (1.0 - cov), 0.0, None) / n)
    nosat_rate = nosat / n
    nosat_se = math.sqrt(max(nosat_rate * (1.0 - nosat_rate), 0.0) / n)
    cap_mean = cap_sum / n
    if math.isfinite(cap_mean):
        cap_se = math.sqrt(max(cap_sumsq / n - cap_mean**2, 0.0) / n)
    else:
        # a zero-noise trial saw a single visible satellite: SINR and
        # hence the capacity sample are unbounded, honestly reported
        cap_se = math.inf
    return MonteCarloResult(
        coverage=Curve.probability(tau_db, cov, cov_se),
        no_satellite_rate=nosat_rate,
        no_satellite_stderr=nosat_se,
        association_freq=assoc / n,
        capacity_bits=float(cap_mean),
        capacity_stderr=cap_se,
        n_trials=n_trials,
        access=access,
        serving_type=serving_type if access == "closed" else None,
    )


# ---------------------------------------------------------------------------
# isotropy diagnostics


def nearest_distance_samples(source, lat_deg: float, n_trials: int, seed) -> np.ndarray:
    """Nearest visible-satellite distances at a user latitude.

    ``source`` is a NetworkModel or a callable ``(lat_deg, n, seed) ->
    distances`` (deterministic constellations supply the callable).
    Realizations with no visible satellite yield ``inf``.
    """
    if callable(source):
        return np.asarray(source(lat_deg, n_trials, seed), dtype=float)
    model: NetworkModel = source
    lat = math.radians(lat_deg)
    ux, uz = math.cos(lat), math.sin(lat)

    out = np.full(n_trials, np.inf)
    chunk = 4096
    n_chunks = -(-n_trials // chunk)
    for c in range(n_chunks):
        n = min(chunk, n_trials - c * chunk)
        rng = _chunk_rng(seed, c)
        best = np.full(n, np.inf)
        for spec in model.constellations:
            r = spec.radius_km
            n_orbits = rng.poisson(spec.mean_orbits, n)
            total_orbits = int(n_orbits.sum())
            theta = rng.uniform(0.0, np.pi, total_orbits)
            cos_incl = 1.0 - 2.0 * rng.random(total_orbits)
            sin_incl = np.sqrt(1.0 - cos_incl * cos_incl)
            sat_counts = rng.poisson(spec.mean_sats_per_orbit, total_orbits)
            total_sats = int(sat_counts.sum())
            anomaly = rng.uniform(0.0, 2.0 * np.pi, total_sats)

            cos_an, sin_an = np.cos(anomaly), np.sin(anomaly)
            ct = np.repeat(np.cos(theta), sat_counts)
            st = np.repeat(np.sin(theta), sat_counts)
            ci = np.repeat(cos_incl, sat_counts)
            si = np.repeat(sin_incl, sat_counts)
            # unit-direction dot product with the user direction
            dot = ux * (ct * cos_an - st * sin_an * ci) + uz * sin_an * si
            d2 = (r * r + R_EARTH_KM**2) - (2.0 * r * R_EARTH_KM) * dot
            visible = dot >= R_EARTH_KM / r
            trial = np.repeat(np.repeat(np.arange(n), n_orbits), sat_counts)
            counts_v = np.bincount(trial[visible], minlength=n)
            best = np.minimum(best, _segment_min(d2[visible], counts_v))
        out[c * chunk:c * chunk + n] = np.sqrt(best)
    return out


@dataclass(frozen=True)
class IsotropyResult:
    statistic: float
    p_value: float
    passed: bool
    latitudes_deg: tuple[float, float] = field(default=(90.0, 45.0))


def _position_seed(seed, lat_deg: float):
    lat_bits = int(np.float64(lat_deg).view(np.uint64))
    return np.random.SeedSequence([int(seed), lat_bits])


def isotropy_check(source, n_trials: int, seed: int,
                   lat_a: float = 90.0, lat_b: float = 45.0,
                   p_threshold: float = 0.01) -> IsotropyResult:
    """Two-sample KS test of nearest-distance laws at two user latitudes.

    Sub-streams are keyed by latitude, so comparing a position against
    itself reproduces the same samples (statistic exactly 0) while
    distinct positions get independent realizations.
    """
    if n_trials < 2:
        raise ValueError("n_trials must be at least 2")
    a = nearest_distance_samples(source, lat_a, n_trials, _position_seed(seed, lat_a))
    b = nearest_distance_samples(source, lat_b, n_trials, _position_seed(seed, lat_b))
    res = ks_2samp(a, b)
    stat, p = float(res.statistic), float(res.pvalue)
    return IsotropyResult(stat, p, p > p_threshold, (lat_a, lat_b))

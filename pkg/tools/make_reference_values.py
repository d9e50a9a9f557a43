"""Regenerate the frozen reference values used in the test suite.

Each block below computes an expected value through a route independent
of the library code that the corresponding test exercises: explicit
rotation matrices and dense sampling for the geometry helpers, and
brute-force Monte Carlo for the analytic formulas.  Run sections with

    python tools/make_reference_values.py geometry
    python tools/make_reference_values.py analytic

and paste the printed constants into the tests when they change.
"""

import sys

import numpy as np

R_E = 6400.0


def rotate_x(v, angle):
    c, s = np.cos(angle), np.sin(angle)
    x, y, z = v[..., 0], v[..., 1], v[..., 2]
    return np.stack([x, c * y - s * z, s * y + c * z], axis=-1)


def rotate_z(v, angle):
    c, s = np.cos(angle), np.sin(angle)
    x, y, z = v[..., 0], v[..., 1], v[..., 2]
    return np.stack([c * x - s * y, s * x + c * y, z], axis=-1)


def orbit_point(r, longitude, inclination, anomaly):
    """Orbit point built from explicit rotations of the equatorial circle."""
    anomaly = np.asarray(anomaly, dtype=float)
    base = np.stack(
        [r * np.cos(anomaly), r * np.sin(anomaly), np.zeros_like(anomaly)], axis=-1
    )
    return rotate_z(rotate_x(base, inclination), longitude)


def geometry():
    user = np.array([0.0, 0.0, R_E])

    # user_satellite_distance at (r=6930, incl=pi/3, anomaly=pi/4)
    p = orbit_point(6930.0, 0.77, np.pi / 3, np.pi / 4)
    d = np.linalg.norm(p - user)
    p0 = orbit_point(6930.0, 0.0, np.pi / 3, np.pi / 4)
    assert abs(np.linalg.norm(p0 - user) - d) < 1e-9  # longitude is immaterial
    print(f"distance(6930, pi/3, pi/4) = {d!r}")

    # cap_orbit_arc_angle at (r=7000, incl=1.2, d=1500): fraction of a densely
    # sampled circle within distance d, times pi
    n = 20_000_001
    anom = np.linspace(0.0, 2 * np.pi, n, endpoint=False)
    for incl in (1.2, 1.4):
        pts = orbit_point(7000.0, 0.3, incl, anom)
        dist = np.linalg.norm(pts - user, axis=-1)
        frac = np.count_nonzero(dist <= 1500.0) / n
        print(f"arc_half_angle(7000, {incl}, 1500) ~= {frac * np.pi!r}  (sampled)")

    # omega_window(7000, tilt, z=1200): bisection on the distance along
    # the orbit, anomaly measured from the closest approach
    r = 7000.0
    for tilt in (0.3, 0.1):
        incl = np.pi / 2 - tilt

        def dist_from_closest(w):
            return np.linalg.norm(
                orbit_point(r, 0.0, incl, np.pi / 2 + w) - user, axis=-1
            )

        def bisect(target, lo=0.0, hi=np.pi / 2):
            if dist_from_closest(lo) >= target:
                return 0.0
            for _ in range(200):
                mid = 0.5 * (lo + hi)
                if dist_from_closest(mid) < target:
                    lo = mid
                else:
                    hi = mid
            return 0.5 * (lo + hi)

        w1 = bisect(1200.0)
        w2 = bisect(np.sqrt(r * r - R_E * R_E))
        print(f"omega_window(7000, {tilt}, 1200) = ({w1!r}, {w2!r})")


def analytic():
    """Brute-force Monte Carlo targets for the integral formulas.

    Positions are built through the rotation-matrix route above and
    visibility is tested as d^2 <= r^2 - R_E^2 (nonnegative elevation),
    sidestepping the coordinate shortcuts the library uses.  Serving
    links carry power*gain, interfering links power alone, and every
    link draws its own unit-mean exponential fade.
    """
    rng = np.random.default_rng(20240817)
    user = np.array([0.0, 0.0, R_E])

    def satellites(lam, mu, r, trials):
        """Flat (trial index, user distance) arrays for one type."""
        n_orb = rng.poisson(lam, trials)
        orbit_trial = np.repeat(np.arange(trials), n_orb)
        longitude = rng.uniform(0.0, np.pi, orbit_trial.size)
        incl = np.arccos(1.0 - 2.0 * rng.random(orbit_trial.size))
        counts = rng.poisson(mu, orbit_trial.size)
        sat_trial = np.repeat(orbit_trial, counts)
        pos = orbit_point(
            r,
            np.repeat(longitude, counts),
            np.repeat(incl, counts),
            rng.uniform(0.0, 2.0 * np.pi, sat_trial.size),
        )
        d = np.linalg.norm(pos - user, axis=-1)
        keep = d * d <= r * r - R_E * R_E
        return sat_trial[keep], d[keep]

    def nearest(sat_trial, d, trials):
        out = np.full(trials, np.inf)
        np.fmin.at(out, sat_trial, d)
        return out

    def proportion(name, hits, total):
        p = hits / total
        se = np.sqrt(p * (1.0 - p) / total)
        print(f"{name} = {p!r}  (stderr {se:.3e}, n={total:.0e})")

    # --- nearest-distance CCDF, single type (lam=40, mu=30, r=6950), v=700
    trials, chunk, hits = 1_000_000, 10_000, 0
    for _ in range(trials // chunk):
        t, d = satellites(40.0, 30.0, 6950.0, chunk)
        hits += int(np.count_nonzero(nearest(t, d, chunk) > 700.0))
    proportion("ccdf(40, 30, 6950; v=700)", hits, trials)

    # --- no visible satellite, single type (lam=8, mu=6, r=7000)
    trials, chunk, hits = 10_000_000, 200_000, 0
    for _ in range(trials // chunk):
        t, d = satellites(8.0, 6.0, 7000.0, chunk)
        hits += int(np.count_nonzero(np.isinf(nearest(t, d, chunk))))
    proportion("no_satellite(8, 6, 7000)", hits, trials)

    # --- interference Laplace transform (lam=20, mu=50, r=7600, p=1,
    #     alpha=3, s=3e8)
    trials, chunk, s = 1_000_000, 10_000, 3.0e8
    acc = np.zeros(2)
    for _ in range(trials // chunk):
        t, d = satellites(20.0, 50.0, 7600.0, chunk)
        h = rng.exponential(1.0, d.size)
        total = np.bincount(t, weights=h * d**-3.0, minlength=chunk)
        x = np.exp(-s * total)
        acc += (x.sum(), (x * x).sum())
    mean = acc[0] / trials
    se = np.sqrt((acc[1] / trials - mean**2) / trials)
    print(f"laplace(20, 50, 7600; s=3e8, alpha=3) = {mean!r}  (stderr {se:.3e})")

    # --- association, K=2, both (30, 30, 7000), type2 eirp 4x type1,
    #     alpha=4 for the power rule
    trials, chunk = 1_000_000, 10_000
    plain = power = 0
    for _ in range(trials // chunk):
        n1 = nearest(*satellites(30.0, 30.0, 7000.0, chunk), chunk)
        n2 = nearest(*satellites(30.0, 30.0, 7000.0, chunk), chunk)
        plain += int(np.count_nonzero(n1 < n2))
        power += int(np.count_nonzero(np.isfinite(n1) & (n2 > n1 * 4.0**0.25)))
    proportion("association(30,30,7000 vs 30,30,7000)", plain, trials)
    proportion("association_power(eirp2=4*eirp1, alpha=4)", power, trials)

    # --- closed-access SINR on type 1 of K=2: (40, 30, 6950, gain 100)
    #     served, (40, 30, 6950, gain 1) interfering; alpha=3, noise 1e-8
    trials, chunk, noise = 1_000_000, 10_000, 1.0e-8
    cov0 = cov10 = 0
    cap_acc = np.zeros(2)
    for _ in range(trials // chunk):
        t1, d1 = satellites(40.0, 30.0, 6950.0, chunk)
        h1 = rng.exponential(1.0, d1.size)
        inter = np.bincount(t1, weights=h1 * d1**-3.0, minlength=chunk)
        order = np.lexsort((d1, t1))
        first = np.r_[True, t1[order][1:] != t1[order][:-1]] if order.size else np.array([], bool)
        srv_rows = order[first]
        srv_trial, srv_d = t1[srv_rows], d1[srv_rows]
        inter[srv_trial] -= h1[srv_rows] * srv_d**-3.0
        t2, d2 = satellites(40.0, 30.0, 6950.0, chunk)
        h2 = rng.exponential(1.0, d2.size)
        inter += np.bincount(t2, weights=h2 * d2**-3.0, minlength=chunk)
        sinr = np.zeros(chunk)
        h_s = rng.exponential(1.0, srv_trial.size)
        sinr[srv_trial] = 100.0 * h_s * srv_d**-3.0 / (noise + inter[srv_trial])
        cov0 += int(np.count_nonzero(sinr > 1.0))
        cov10 += int(np.count_nonzero(sinr > 10.0))
        cap = np.log2(1.0 + sinr)
        cap_acc += (cap.sum(), (cap * cap).sum())
    proportion("coverage_closed(tau=0dB)", cov0, trials)
    proportion("coverage_closed(tau=10dB)", cov10, trials)
    mean = cap_acc[0] / trials
    se = np.sqrt((cap_acc[1] / trials - mean**2) / trials)
    print(f"ergodic_capacity_closed = {mean!r}  (stderr {se:.3e})")


def main():
    sections = sys.argv[1:] or ["geometry"]
    for name in sections:
        print(f"--- {name} ---")
        globals()[name]()


if __name__ == "__main__":
    main()

"""Geometry helpers checked against independent constructions.

Frozen constants were produced by tools/make_reference_values.py, which
builds orbit points from explicit rotation matrices, measures arcs by
dense sampling, and solves for window angles by bisection.
"""

import numpy as np
import pytest

from coxleo.geometry import (
    R_EARTH_KM,
    OrbitGeom,
    cap_orbit_arc_angle,
    chord_distance,
    cos_earth_angle,
    omega_window,
    orbital_to_cartesian,
    user_satellite_distance,
    visibility_limits,
)


def test_distance_sub_satellite_point():
    assert user_satellite_distance(7000.0, np.pi / 2, np.pi / 2) == pytest.approx(600.0)


def test_distance_antipodal_point():
    assert user_satellite_distance(7000.0, np.pi / 2, 3 * np.pi / 2) == pytest.approx(13400.0)


def test_distance_matches_cartesian_construction():
    # frozen: rotation-matrix construction, tools/make_reference_values.py
    got = user_satellite_distance(6930.0, np.pi / 3, np.pi / 4)
    assert got == pytest.approx(5887.700354471196, rel=1e-12)


def test_distance_rejects_subterranean_radius():
    with pytest.raises(ValueError):
        user_satellite_distance(6400.0, 1.0, 1.0)
    with pytest.raises(ValueError):
        user_satellite_distance(5000.0, 1.0, 1.0)


def test_distance_bounds_and_equality_cases():
    rng = np.random.default_rng(7)
    r = 6400.0 + 3000.0 * rng.random(500)
    incl = np.pi * rng.random(500)
    anom = 2 * np.pi * rng.random(500)
    d = user_satellite_distance(r, incl, anom)
    assert np.all(d >= r - R_EARTH_KM - 1e-9)
    assert np.all(d <= r + R_EARTH_KM + 1e-9)
    assert user_satellite_distance(7000.0, np.pi / 2, np.pi / 2) == pytest.approx(600.0)
    # anywhere off the extremal configuration the bounds are strict
    assert user_satellite_distance(7000.0, np.pi / 3, np.pi / 2) > 600.0


def test_distance_agrees_with_position_norm():
    rng = np.random.default_rng(11)
    user = np.array([0.0, 0.0, R_EARTH_KM])
    for _ in range(50):
        r = 6500.0 + 2000.0 * rng.random()
        th = np.pi * rng.random()
        incl = np.pi * rng.random()
        anom = 2 * np.pi * rng.random()
        pos = orbital_to_cartesian(r, th, incl, anom)
        want = np.linalg.norm(pos - user)
        assert user_satellite_distance(r, incl, anom) == pytest.approx(want, rel=1e-12)


def test_cos_earth_angle_extremes():
    r = 6930.0
    d_max = np.sqrt(r * r - R_EARTH_KM**2)
    assert cos_earth_angle(r, r - R_EARTH_KM) == pytest.approx(1.0)
    assert cos_earth_angle(r, d_max) == pytest.approx(R_EARTH_KM / r, rel=1e-12)
    want = (7000.0**2 + 6400.0**2 - 1000.0**2) / (2 * 6400.0 * 7000.0)
    assert cos_earth_angle(7000.0, 1000.0) == pytest.approx(want, rel=1e-15)


def test_cos_earth_angle_monotone_and_domain():
    d = np.linspace(600.0, 13400.0, 200)
    vals = cos_earth_angle(7000.0, d)
    assert np.all(np.diff(vals) < 0)
    assert np.all((vals >= -1) & (vals <= 1))
    with pytest.raises(ValueError):
        cos_earth_angle(7000.0, 599.0)
    with pytest.raises(ValueError):
        cos_earth_angle(7000.0, 13401.0)


def test_arc_angle_polar_orbit_equals_cap_angle():
    r, d = 7000.0, 1500.0
    want = np.arccos(cos_earth_angle(r, d))
    assert cap_orbit_arc_angle(r, np.pi / 2, d) == pytest.approx(want, rel=1e-12)


def test_arc_angle_frozen_sampled_values():
    # frozen: dense-circle sampling, tools/make_reference_values.py
    assert cap_orbit_arc_angle(7000.0, 1.2, 1500.0) == 0.0
    got = cap_orbit_arc_angle(7000.0, 1.4, 1500.0)
    assert got == pytest.approx(0.11530351320504031, abs=1e-6)


def test_arc_angle_monotone_in_distance():
    d = np.linspace(600.0, np.sqrt(7000.0**2 - R_EARTH_KM**2), 300)
    for incl in (1.35, 1.5, np.pi / 2, 1.8):
        a = cap_orbit_arc_angle(7000.0, incl, d)
        assert np.all(np.diff(a) >= -1e-12)
        assert np.all(a < np.pi)  # never the full orbit within a visible cap


def test_arc_angle_matches_sampled_circle():
    rng = np.random.default_rng(23)
    n = 60_000
    anom = np.linspace(0.0, 2 * np.pi, n, endpoint=False)
    user = np.array([0.0, 0.0, R_EARTH_KM])
    for _ in range(1000):
        r = 6500.0 + 2500.0 * rng.random()
        incl = np.pi * rng.random()
        lo, hi = r - R_EARTH_KM, np.sqrt(r * r - R_EARTH_KM**2)
        d = lo + (hi - lo) * rng.random()
        pos = orbital_to_cartesian(r, 0.0, incl, anom)
        frac = np.count_nonzero(np.linalg.norm(pos - user, axis=-1) <= d) / n
        assert cap_orbit_arc_angle(r, incl, d) == pytest.approx(frac * np.pi, abs=1e-3)


def test_visibility_limits_values():
    d_max, tilt_max = visibility_limits(6400.0 * np.sqrt(2.0))
    assert d_max == pytest.approx(6400.0, rel=1e-12)
    assert tilt_max == pytest.approx(np.pi / 4, rel=1e-12)
    d_max, tilt_max = visibility_limits(7000.0)
    assert d_max == pytest.approx(np.sqrt(7000.0**2 - 6400.0**2), rel=1e-15)
    assert tilt_max == pytest.approx(np.arccos(6400.0 / 7000.0), rel=1e-15)
    with pytest.raises(ValueError):
        visibility_limits(6400.0)


def test_horizon_satellite_has_zero_elevation():
    # a satellite at exactly the maximum visible distance sits on the
    # user's horizon plane: its z-coordinate equals the Earth radius
    r = 6930.0
    d_max, _ = visibility_limits(r)
    for tilt in (0.0, 0.1, 0.25):
        _, w2 = omega_window(r, tilt, r - R_EARTH_KM + 1.0)
        pos = orbital_to_cartesian(r, 0.3, np.pi / 2 - tilt, np.pi / 2 + w2)
        d = np.linalg.norm(pos - np.array([0.0, 0.0, R_EARTH_KM]))
        assert d == pytest.approx(d_max, rel=1e-9)
        sin_elev = (pos[2] - R_EARTH_KM) / d
        assert sin_elev == pytest.approx(0.0, abs=1e-9)


def test_omega_window_trivial_cases():
    r = 7000.0
    w1, w2 = omega_window(r, 0.0, r - R_EARTH_KM)
    assert w1 == pytest.approx(0.0, abs=1e-12)
    assert w2 == pytest.approx(np.arcsin(np.sqrt(1 - (R_EARTH_KM / r) ** 2)), rel=1e-12)
    _, tilt_max = visibility_limits(r)
    w1, w2 = omega_window(r, tilt_max, 1200.0)
    assert (w1, w2) == (0.0, 0.0)


def test_omega_window_frozen_bisection_values():
    # frozen: bisection on the along-orbit distance, tools/make_reference_values.py
    w1, w2 = omega_window(7000.0, 0.3, 1200.0)
    assert w1 == 0.0
    assert w2 == pytest.approx(0.2942151468514661, rel=1e-10)
    w1, w2 = omega_window(7000.0, 0.1, 1200.0)
    assert w1 == pytest.approx(0.11917696456551552, rel=1e-10)
    assert w2 == pytest.approx(0.40557352032672733, rel=1e-10)


def test_omega_window_inverts_chord_distance():
    rng = np.random.default_rng(31)
    for _ in range(300):
        r = 6500.0 + 2500.0 * rng.random()
        d_max, tilt_max = visibility_limits(r)
        tilt = tilt_max * rng.random()
        z = (r - R_EARTH_KM) + (d_max - (r - R_EARTH_KM)) * rng.random()
        w1, w2 = omega_window(r, tilt, z)
        assert 0 <= w1 <= w2 <= np.pi / 2
        if w1 > 0:
            assert chord_distance(r, tilt, w1) == pytest.approx(z, rel=1e-9)
        else:
            assert chord_distance(r, tilt, 0.0) >= z * (1 - 1e-12)
        assert chord_distance(r, tilt, w2) == pytest.approx(d_max, rel=1e-9)


def test_chord_distance_matches_shifted_parameterization():
    rng = np.random.default_rng(5)
    for _ in range(100):
        r = 6500.0 + 2500.0 * rng.random()
        tilt = (np.pi / 2) * rng.random()
        w = np.pi * rng.random()
        via_incl = user_satellite_distance(r, np.pi / 2 - tilt, np.pi / 2 + w)
        assert chord_distance(r, tilt, w) == pytest.approx(via_incl, rel=1e-12)


def test_orbit_geom_validation():
    with pytest.raises(ValueError):
        OrbitGeom(6300.0, 0.0, 1.0)
    with pytest.raises(ValueError):
        OrbitGeom(7000.0, np.pi, 1.0)
    with pytest.raises(ValueError):
        OrbitGeom(7000.0, 0.0, -0.1)
    orbit = OrbitGeom(7000.0, 0.5, 1.0)
    assert orbit.user_distance(np.pi / 2) == pytest.approx(
        user_satellite_distance(7000.0, 1.0, np.pi / 2)
    )
    assert orbit.position(0.25).shape == (3,)

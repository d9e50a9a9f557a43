"""Integral formulas against brute-force Monte Carlo and exact identities.

Reference constants come from tools/make_reference_values.py (analytic
section, seed 20240817), which builds satellites through explicit
rotation matrices and measures each quantity by simulation.  Tolerances
are 3 Monte Carlo standard errors plus a small quadrature allowance.
"""

import math

import numpy as np
import pytest

from coxleo.geometry import R_EARTH_KM
from coxleo.model import ConstellationSpec, NetworkModel, PropagationConfig
from coxleo.quadrature import QuadratureSettings, adaptive_quad
from coxleo.analytic import (
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
    _orbit_functional,
    _serving_orbit_integral,
)


def spec(lam, mu, r, p=1.0, g=1.0):
    return ConstellationSpec(lam, mu, r, tx_power_w=p, gain=g)


NOISELESS = PropagationConfig(path_loss_exponent=3.0, noise_power_w=0.0)

# K=2 closed-access reference network: served type carries 20 dB gain,
# the co-altitude interferer transmits with gain 1.
COV_MODEL = NetworkModel(
    (spec(40.0, 30.0, 6950.0, g=100.0), spec(40.0, 30.0, 6950.0)),
    PropagationConfig(path_loss_exponent=3.0, noise_power_w=1.0e-8),
)


# ---------------------------------------------------------------------------
# frozen Monte Carlo references


def test_nearest_ccdf_reference():
    got = nearest_ccdf(spec(40.0, 30.0, 6950.0), 700.0)
    assert abs(got - 0.373468) < 3 * 4.837e-4


def test_no_satellite_reference():
    got = no_satellite_closed(spec(8.0, 6.0, 7000.0))
    assert abs(got - 0.2242938) < 3 * 1.319e-4


def test_interference_laplace_reference():
    got = laplace_cross_interference(spec(20.0, 50.0, 7600.0), 3.0e8, alpha=3.0)
    assert abs(got - 0.2207580) < 3 * 1.610e-4


def test_association_symmetric_reference():
    model = NetworkModel((spec(30.0, 30.0, 7000.0), spec(30.0, 30.0, 7000.0)), NOISELESS)
    got = association_probability(model, 0)
    assert abs(got - 0.500029) < 3 * 5.000e-4


def test_association_power_reference():
    # equal geometry, type 2 radiates 4x the power, alpha = 4
    prop = PropagationConfig(path_loss_exponent=4.0, noise_power_w=0.0)
    model = NetworkModel((spec(30.0, 30.0, 7000.0), spec(30.0, 30.0, 7000.0, p=4.0)), prop)
    got = association_probability_power(model, 0)
    assert abs(got - 0.116007) < 3 * 3.202e-4


def test_coverage_closed_reference():
    got = coverage_closed(COV_MODEL, 0, np.array([0.0, 10.0]))
    assert abs(got[0] - 0.851363) < 3 * 3.557e-4
    assert abs(got[1] - 0.267719) < 3 * 4.428e-4


# loose settings for the capacity integrals: the comparison budgets are
# in the 1e-3 range, so sub-1e-4 quadrature is wasted time
CAPACITY_SETTINGS = QuadratureSettings(rel_tol=1e-3, abs_tol=1e-5)


def test_ergodic_capacity_reference():
    got = ergodic_capacity_closed(COV_MODEL, 0, settings=CAPACITY_SETTINGS)
    assert abs(got - 2.5530574) < 3 * 1.349e-3


# ---------------------------------------------------------------------------
# exact identities


def test_laplace_at_zero_is_one():
    assert laplace_cross_interference(spec(25.0, 40.0, 7100.0), 0.0) == 1.0


def test_laplace_large_s_approaches_no_satellite():
    s = spec(12.0, 9.0, 6900.0)
    lim = laplace_cross_interference(s, 1.0e12)
    target = no_satellite_closed(s)
    # only the empty-constellation event survives; convergence in s is
    # slow (power-law tail), so the comparison is loose
    assert lim >= target
    assert lim < 1.05 * target + 1e-9


def test_laplace_rejects_negative_s():
    with pytest.raises(ValueError):
        laplace_cross_interference(spec(10.0, 10.0, 7000.0), -1.0)


def test_single_type_open_equals_closed():
    model = NetworkModel((spec(40.0, 30.0, 6950.0, g=100.0),),
                         PropagationConfig(path_loss_exponent=3.0, noise_power_w=1.0e-8))
    taus = np.linspace(-10.0, 20.0, 7)
    np.testing.assert_allclose(coverage_open(model, taus),
                               coverage_closed(model, 0, taus), rtol=0, atol=1e-12)


def test_symmetric_association_is_half_conditional():
    model = NetworkModel((spec(18.0, 12.0, 6800.0), spec(18.0, 12.0, 6800.0)), NOISELESS)
    want = (1.0 - no_satellite_open(model)) / 2.0
    assert abs(association_probability(model, 0) - want) < 1e-6


def test_power_association_matches_plain_at_equal_eirp():
    model = NetworkModel((spec(20.0, 15.0, 6900.0, p=3.0), spec(35.0, 10.0, 7300.0, p=3.0)),
                         NOISELESS)
    for k in (0, 1):
        plain = association_probability(model, k)
        power = association_probability_power(model, k)
        assert abs(plain - power) < 1e-9


def test_low_threshold_coverage_approaches_service_probability():
    got = coverage_closed(COV_MODEL, 0, -60.0)
    want = 1.0 - no_satellite_closed(COV_MODEL.constellations[0])
    assert got <= want + 1e-12
    assert want - got < 1e-5


def test_ergodic_of_step_coverage():
    # coverage that drops from 1 to 0 at tau0 integrates to log2(1+tau0)
    tau0 = 5.0
    step = lambda tau_db: float(10.0 ** (np.asarray(tau_db) / 10.0) <= tau0)
    got = ergodic_capacity(step)
    assert abs(got - math.log2(1.0 + tau0)) < 1e-5


def test_ergodic_of_zero_coverage():
    assert ergodic_capacity(lambda tau_db: 0.0) == 0.0


def test_noiseless_coverage_invariant_to_power_scaling():
    base = NetworkModel((spec(30.0, 20.0, 6800.0, p=1.0, g=50.0),
                         spec(25.0, 25.0, 7200.0, p=2.0)), NOISELESS)
    scaled = NetworkModel((spec(30.0, 20.0, 6800.0, p=7.0, g=50.0),
                           spec(25.0, 25.0, 7200.0, p=14.0)), NOISELESS)
    taus = np.array([-5.0, 0.0, 5.0])
    np.testing.assert_allclose(coverage_closed(base, 0, taus),
                               coverage_closed(scaled, 0, taus), rtol=0, atol=1e-9)


def test_rare_outage_band():
    # a 400 km shell with ~33 satellites on average leaves the user
    # unserved roughly once per thousand realizations
    p = no_satellite_closed(spec(25.0, 22.0, 6800.0))
    assert 5e-4 < p < 2e-3


def test_fading_shape_must_be_unit_for_coverage():
    model = NetworkModel((spec(30.0, 20.0, 6900.0),),
                         PropagationConfig(path_loss_exponent=3.0, noise_power_w=0.0,
                                           fading_shape=2.0))
    with pytest.raises(ValueError):
        coverage_closed(model, 0, 0.0)
    with pytest.raises(ValueError):
        coverage_open(model, 0.0)


def test_serving_type_bounds_checked():
    model = NetworkModel((spec(30.0, 20.0, 6900.0),), NOISELESS)
    for bad in (-1, 1, 5):
        with pytest.raises(ValueError):
            coverage_closed(model, bad, 0.0)
        with pytest.raises(ValueError):
            association_probability(model, bad)
        with pytest.raises(ValueError):
            association_probability_power(model, bad)


# ---------------------------------------------------------------------------
# distribution-level properties


def random_spec(rng):
    return spec(rng.uniform(5.0, 60.0), rng.uniform(5.0, 50.0), rng.uniform(6700.0, 7800.0))


def test_ccdf_monotone_and_bounded():
    rng = np.random.default_rng(2024)
    for _ in range(5):
        s = random_spec(rng)
        law = NearestDistanceLaw(s)
        v = np.linspace(0.0, law.max_distance_km * 1.2, 200)
        c = law.ccdf(v)
        assert np.all(c <= 1.0) and np.all(c >= 0.0)
        assert np.all(np.diff(c) <= 1e-12)
        # flat at 1 below the shell, flat at the outage mass beyond reach
        assert c[0] == 1.0
        assert abs(c[-1] - law.no_satellite) < 1e-12


def test_ccdf_continuous_at_band_edges():
    law = NearestDistanceLaw(spec(22.0, 17.0, 7050.0))
    for edge in law.breakpoints:
        lo, hi = law.ccdf(edge - 1e-7), law.ccdf(edge + 1e-7)
        assert abs(hi - lo) < 1e-5


def test_pdf_matches_ccdf_derivative():
    law = NearestDistanceLaw(spec(35.0, 18.0, 7000.0))
    lo, hi = law.min_distance_km, law.max_distance_km
    for v in np.linspace(lo + 30.0, hi - 30.0, 7):
        h = 1e-3
        fd = (law.ccdf(v - h) - law.ccdf(v + h)) / (2.0 * h)
        assert abs(law.pdf(v) - fd) < 1e-6 * max(1.0, abs(fd))


def test_pdf_integrates_to_service_probability():
    rng = np.random.default_rng(77)
    for _ in range(3):
        s = random_spec(rng)
        law = NearestDistanceLaw(s)
        total, _ = adaptive_quad(law.pdf, law.min_distance_km, law.max_distance_km,
                                 breakpoints=law.breakpoints)
        assert abs(total + law.no_satellite - 1.0) < 1e-6


def test_laplace_monotone_in_s():
    s = spec(20.0, 30.0, 7100.0)
    vals = np.array([laplace_cross_interference(s, x)
                     for x in (0.0, 1e6, 1e7, 1e8, 1e9, 1e10)])
    assert np.all(vals > 0.0) and np.all(vals <= 1.0)
    assert np.all(np.diff(vals) < 0.0)


def test_coverage_monotone_in_threshold():
    taus = np.linspace(-10.0, 20.0, 13)
    closed = coverage_closed(COV_MODEL, 0, taus)
    opened = coverage_open(COV_MODEL, taus)
    assert np.all(np.diff(closed) <= 1e-9)
    assert np.all(np.diff(opened) <= 1e-9)


def test_open_access_dominates_closed():
    rng = np.random.default_rng(4242)
    for _ in range(3):
        k = rng.integers(2, 4)
        types = tuple(random_spec(rng) for _ in range(k))
        model = NetworkModel(types, PropagationConfig(3.0, noise_power_w=1e-9))
        taus = np.linspace(-10.0, 20.0, 7)
        opened = coverage_open(model, taus)
        for j in range(k):
            closed = coverage_closed(model, j, taus)
            assert np.all(opened >= closed - 1e-6)


def test_association_partition():
    rng = np.random.default_rng(99)
    for _ in range(5):
        k = int(rng.integers(1, 5))
        types = tuple(random_spec(rng) for _ in range(k))
        model = NetworkModel(types, NOISELESS)
        total = sum(association_probability(model, j) for j in range(k))
        assert abs(total + no_satellite_open(model) - 1.0) < 1e-6


def test_association_power_partition():
    rng = np.random.default_rng(137)
    for _ in range(3):
        k = int(rng.integers(2, 5))
        types = tuple(
            ConstellationSpec(rng.uniform(5.0, 50.0), rng.uniform(5.0, 40.0),
                              rng.uniform(6700.0, 7800.0),
                              tx_power_w=rng.uniform(0.5, 8.0))
            for _ in range(k))
        model = NetworkModel(types, NOISELESS)
        total = sum(association_probability_power(model, j) for j in range(k))
        assert abs(total + no_satellite_open(model) - 1.0) < 1e-6


def test_orbit_functional_node_convergence():
    # the fixed tilt rule must already be converged: doubling the node
    # count may only move the result at roundoff level
    rng = np.random.default_rng(7)
    for _ in range(4):
        s = random_spec(rng)
        re_r = R_EARTH_KM / s.radius_km
        for s_p, cos_cap in ((0.0, re_r), (2e8, 1.0), (5e9, re_r + 0.4 * (1 - re_r))):
            a = _orbit_functional(s, 3.0, 1.0, s_p, cos_cap, n_nodes=48)
            b = _orbit_functional(s, 3.0, 1.0, s_p, cos_cap, n_nodes=96)
            assert abs(a - b) < 1e-12


def test_serving_integral_node_convergence():
    rng = np.random.default_rng(8)
    for _ in range(4):
        s = random_spec(rng)
        re_r = R_EARTH_KM / s.radius_km
        cos_cap = re_r + 0.3 * (1.0 - re_r)
        a = _serving_orbit_integral(s, 3.0, 1.0, 1e8, cos_cap, n_nodes=64)
        b = _serving_orbit_integral(s, 3.0, 1.0, 1e8, cos_cap, n_nodes=128)
        assert abs(a - b) < 1e-9


def test_ergodic_open_between_per_type_bounds():
    # open access serves the overall nearest satellite, so its capacity
    # is at least the best single-type closed value
    model = NetworkModel((spec(30.0, 20.0, 6800.0, g=10.0),
                          spec(20.0, 25.0, 7200.0, g=10.0)),
                         PropagationConfig(3.0, noise_power_w=1e-8))
    open_cap = ergodic_capacity_open(model, settings=CAPACITY_SETTINGS)
    closed = [ergodic_capacity_closed(model, k, settings=CAPACITY_SETTINGS)
              for k in range(2)]
    assert open_cap >= max(closed) - 1e-2

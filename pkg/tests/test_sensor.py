import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import integrate

from crmap.grid import GridSpec, GroundTruthMap, Pose, init_prior
from crmap.oracle import LINE_POSE, line_grid, ray_sensor
from crmap.raycast import Ray, cast, trace_ray
from crmap.sensor import (
    NO_HIT,
    SensorSpec,
    bounce_prob,
    cause_prior,
    disparity_to_range,
    forward_model,
    gaussian_pdf,
    likelihood_given_cause,
    range_to_disparity,
    reach_prob,
    simulate_scan,
)

from conftest import belief_with_means, random_belief

ONE = ray_sensor(SensorSpec())


def line_cone(spec):
    return trace_ray(spec, LINE_POSE, 0, ONE)


@pytest.mark.parametrize("m", [0.5, 0.995, 0.005])
def test_bounce_prob_is_mean(m):
    spec = line_grid(1)
    assert bounce_prob(belief_with_means(spec, [m]), 0) == pytest.approx(m, abs=1e-15)


def test_reach_prob_examples():
    spec = line_grid(3)
    b = belief_with_means(spec, [0.2, 0.3, 0.9])
    cone = line_cone(spec)
    assert reach_prob(b, cone, 1) == 1.0
    assert reach_prob(b, cone, 3) == pytest.approx(0.8 * 0.7, abs=1e-12)
    b.mean[0] = 1.0  # a voxel known to be solid blocks everything behind it
    assert reach_prob(b, cone, 2) == 0.0
    with pytest.raises(IndexError):
        reach_prob(b, cone, 4)


def test_cause_prior_half_occupied_line():
    spec = line_grid(3)
    cp = cause_prior(belief_with_means(spec, [0.5] * 3), line_cone(spec))
    np.testing.assert_allclose(cp.weights, [0.5, 0.25, 0.125, 0.125], atol=1e-12)
    assert cp.weight(NO_HIT) == cp.nohit_weight


def test_cause_prior_blocked_by_first_voxel():
    spec = line_grid(4)
    b = init_prior(spec)
    b.mean[0] = 1.0
    cp = cause_prior(b, line_cone(spec))
    np.testing.assert_array_equal(cp.weights, [1.0, 0.0, 0.0, 0.0, 0.0])


def test_empty_cone_is_all_nohit():
    spec = GridSpec.centered(2.0, 2.0, 0.1)
    cone = cast(spec, Ray.from_bearing(3.0, 0.0, 0.0, 1.0))
    cp = cause_prior(init_prior(spec), cone)
    assert cp.causes == [NO_HIT]
    np.testing.assert_array_equal(cp.weights, [1.0])


@settings(max_examples=200, deadline=None)
@given(st.integers(0, 2**32 - 1), st.floats(-math.pi, math.pi), st.floats(0.1, 3.0))
def test_cause_prior_telescopes(seed, bearing, max_range):
    rng = np.random.default_rng(seed)
    spec = GridSpec.centered(2.0, 2.0, 0.1)
    b = random_belief(spec, rng, bins=11)
    x, y = rng.uniform(-0.99, 0.99, 2)
    cp = cause_prior(b, cast(spec, Ray.from_bearing(x, y, bearing, max_range)))
    assert np.all(cp.weights >= 0)
    assert math.fsum(cp.weights) == pytest.approx(1.0, abs=1e-12)


def test_gaussian_likelihood_values():
    s = SensorSpec(noise_var=0.04)
    cone = line_cone(line_grid(6))
    cause = cause_prior(init_prior(line_grid(6)), cone).causes[4]  # range 0.45
    peak = 1.0 / math.sqrt(2 * math.pi * 0.04)
    assert likelihood_given_cause(0.45, cause, s) == pytest.approx(peak, rel=1e-12)
    assert likelihood_given_cause(0.65, cause, s) == pytest.approx(peak * math.exp(-0.5), rel=1e-12)
    assert likelihood_given_cause(1.0, NO_HIT, s) == pytest.approx(peak, rel=1e-12)
    with pytest.raises(ValueError):
        gaussian_pdf(0.0, 0.0, 0.0)


def test_forward_model_single_solid_voxel_is_gaussian():
    spec = line_grid(1, start=0.45)  # one voxel centered at 0.5 m
    b = init_prior(spec)
    b.mean[0] = 1.0
    cone = line_cone(spec)
    z = np.linspace(-0.5, 1.5, 41)
    np.testing.assert_allclose(forward_model(z, b, cone, ONE), gaussian_pdf(z, 0.5, 0.04), rtol=1e-12)


def test_forward_model_free_line_peaks_at_max_range():
    spec = line_grid(10)
    b = belief_with_means(spec, [0.005] * 10)
    z = np.linspace(0.0, 1.0, 101)
    dens = forward_model(z, b, line_cone(spec), ONE)
    assert z[np.argmax(dens)] == pytest.approx(1.0)
    nohit = (1 - 0.005) ** 10
    assert dens[-1] == pytest.approx(nohit * gaussian_pdf(1.0, 1.0, 0.04), rel=0.02)


def test_forward_model_scalar_and_array_agree():
    spec = line_grid(4)
    b = belief_with_means(spec, [0.1, 0.6, 0.3, 0.9])
    cone = line_cone(spec)
    zs = np.array([0.05, 0.33, 0.8])
    np.testing.assert_allclose([forward_model(z, b, cone, ONE) for z in zs], forward_model(zs, b, cone, ONE))


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 2**32 - 1), st.sampled_from([0.0025, 0.01, 0.04]))
def test_forward_model_integrates_to_one(seed, var):
    rng = np.random.default_rng(seed)
    spec = line_grid(int(rng.integers(1, 9)))
    b = random_belief(spec, rng, bins=21)
    cone = line_cone(spec)
    sensor = SensorSpec(noise_var=var, pixels=1)
    pts = list(cone.ranges) + [1.0]
    total, _ = integrate.quad(lambda z: forward_model(z, b, cone, sensor), -1.0, 3.0, points=pts, limit=200)
    assert total == pytest.approx(1.0, abs=1e-6)


@settings(max_examples=50, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_point_mass_maps_give_single_first_hit_gaussian(seed):
    rng = np.random.default_rng(seed)
    n = int(rng.integers(1, 9))
    spec = line_grid(n)
    occ = rng.random(n) < 0.5
    b = init_prior(spec)
    b.mean[:] = occ.astype(float)
    cone = line_cone(spec)
    first = np.flatnonzero(occ)
    mean = cone.ranges[first[0]] if first.size else 1.0
    z = np.linspace(-0.2, 1.4, 33)
    np.testing.assert_allclose(forward_model(z, b, cone, ONE), gaussian_pdf(z, mean, 0.04), rtol=1e-12)


# scan simulation


def wall_world():
    spec = GridSpec.centered(2.0, 2.0, 0.1)
    occ = np.zeros(spec.n)
    occ[spec.centers()[:, 0] > 0.5] = 1.0
    return GroundTruthMap(spec, occ)


def test_noiseless_wall_reading():
    sensor = SensorSpec(noise_var=0.0)
    scan = simulate_scan(wall_world(), Pose(0.0, 0.05, 0.0), sensor, np.random.default_rng(0))
    assert len(scan) == 15
    assert [m.pixel_index for m in scan] == list(range(15))
    assert scan[7].z == pytest.approx(0.55)


def test_empty_corridor_reads_max_range():
    spec = GridSpec.centered(2.0, 2.0, 0.1)
    truth = GroundTruthMap(spec, np.zeros(spec.n))
    scan = simulate_scan(truth, Pose(0, 0, 1.0), SensorSpec(noise_var=0.0), np.random.default_rng(1))
    assert all(m.z == 1.0 for m in scan)


def test_readings_clamped_to_sensor_range():
    sensor = SensorSpec(noise_var=4.0)
    scan = simulate_scan(wall_world(), Pose(0, 0, 0), sensor, np.random.default_rng(2))
    assert all(0.0 < m.z <= 1.0 for m in scan)


def test_simulation_is_seeded():
    a = simulate_scan(wall_world(), Pose(0, 0, 0.3), SensorSpec(), np.random.default_rng(9))
    b = simulate_scan(wall_world(), Pose(0, 0, 0.3), SensorSpec(), np.random.default_rng(9))
    assert a == b


@pytest.mark.parametrize("fill, expected", [(0.0, 1.0), (1.0, 0.05)])
def test_continuous_mode_extremes(fill, expected):
    spec = line_grid(5)
    truth = GroundTruthMap(spec, np.full(5, fill), mode="continuous")
    z = simulate_scan(truth, LINE_POSE, SensorSpec(noise_var=0.0, pixels=1), np.random.default_rng(0))[0].z
    assert z == pytest.approx(expected)


def test_continuous_mode_hit_frequency():
    # a half-filled first voxel in front of a solid one
    spec = line_grid(2)
    truth = GroundTruthMap(spec, [0.5, 1.0], mode="continuous")
    rng = np.random.default_rng(3)
    s = SensorSpec(noise_var=0.0, pixels=1)
    zs = np.array([simulate_scan(truth, LINE_POSE, s, rng)[0].z for _ in range(4000)])
    assert set(np.round(zs, 9)) == {0.05, 0.15}
    assert np.mean(np.isclose(zs, 0.05)) == pytest.approx(0.5, abs=0.03)


@given(st.floats(0.01, 10.0))
def test_disparity_round_trip(r):
    s = SensorSpec(focal_length=2.0, baseline=0.12)
    assert float(disparity_to_range(range_to_disparity(r, s), s)) == pytest.approx(r, rel=1e-12)


@pytest.mark.parametrize("kw", [{"max_range": 0}, {"pixels": 0}, {"noise_var": -1.0}, {"fov": 0.0}])
def test_sensor_validation(kw):
    with pytest.raises(ValueError):
        SensorSpec(**kw)

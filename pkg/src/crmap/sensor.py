"""Forward range-sensor model on stochastic maps, plus the scan simulator."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .grid import GroundTruthMap, MapBelief, Pose
from .raycast import PixelCone, trace_ray

# smallest reading the simulator will report
MIN_RANGE = 1e-6


@dataclass(frozen=True)
class SensorSpec:
    """Ranging sensor with ``pixels`` rays spread evenly over ``fov`` radians.

    Readings are ranges in meters with additive Gaussian noise of variance
    ``noise_var``. ``focal_length`` and ``baseline`` only matter for the
    range/disparity conversions.
    """

    max_range: float = 1.0
    fov: float = math.radians(28.0)
    pixels: int = 15
    rate: float = 10.0
    noise_var: float = 0.04
    focal_length: float = 1.0
    baseline: float = 0.1

    def __post_init__(self):
        for name in ("max_range", "fov", "rate", "focal_length", "baseline"):
            if not getattr(self, name) > 0:
                raise ValueError(f"sensor {name} must be positive")
        # zero noise is allowed for simulation; the mapper needs noise_var > 0
        if self.noise_var < 0:
            raise ValueError("sensor noise_var must be nonnegative")
        if self.pixels < 1:
            raise ValueError("sensor needs at least one pixel")


def range_to_disparity(r, sensor: SensorSpec):
    return sensor.focal_length * sensor.baseline / np.asarray(r, dtype=float)


def disparity_to_range(z, sensor: SensorSpec):
    return sensor.focal_length * sensor.baseline / np.asarray(z, dtype=float)


@dataclass(frozen=True)
class Cause:
    """A voxel that may have produced a reading; all-None fields mean no hit."""

    voxel: int | None = None
    local: int | None = None
    range: float | None = None

    @property
    def is_nohit(self) -> bool:
        return self.voxel is None


NO_HIT = Cause()


@dataclass
class CauseDistribution:
    """Probabilities over the cone voxels (nearest first) followed by NO_HIT."""

    causes: list
    weights: np.ndarray

    def __post_init__(self):
        self.weights = np.asarray(self.weights, dtype=float)
        if len(self.causes) != self.weights.size:
            raise ValueError("one weight per cause required")

    @property
    def voxel_weights(self) -> np.ndarray:
        return self.weights[:-1]

    @property
    def nohit_weight(self) -> float:
        return float(self.weights[-1])

    def weight(self, cause: Cause) -> float:
        return float(self.weights[self.causes.index(cause)])


@dataclass(frozen=True)
class Measurement:
    pixel_index: int
    z: float
    pose: Pose


def cone_causes(cone: PixelCone) -> list:
    causes = [
        Cause(int(v), local + 1, float(r))
        for local, (v, r) in enumerate(zip(cone.voxels, cone.ranges))
    ]
    causes.append(NO_HIT)
    return causes


def bounce_prob(belief: MapBelief, c: int) -> float:
    return float(belief.mean[c])


def reach_prob(belief: MapBelief, cone: PixelCone, c_local: int) -> float:
    if not 1 <= c_local <= len(cone):
        raise IndexError(f"local index {c_local} outside cone of {len(cone)} voxels")
    prob = 1.0
    for v in cone.voxels[: c_local - 1]:
        prob *= 1.0 - belief.mean[v]
    return prob


def cause_prior(belief: MapBelief, cone: PixelCone) -> CauseDistribution:
    """Probability that each cone voxel (or nothing) bounces the ray back.

    A voxel is the cause when it bounces the ray and every nearer voxel lets
    it through; whatever mass is left after the last voxel belongs to NO_HIT,
    so the weights telescope to exactly one.
    """
    m = belief.mean[cone.voxels]
    weights = np.empty(len(cone) + 1)
    reach = 1.0
    for k, mk in enumerate(m):
        weights[k] = mk * reach
        reach *= 1.0 - mk
    weights[-1] = reach
    return CauseDistribution(cone_causes(cone), weights)


def gaussian_pdf(z, mean, var):
    if var <= 0:
        raise ValueError("Gaussian density needs a positive variance")
    z = np.asarray(z, dtype=float)
    return np.exp(-((z - mean) ** 2) / (2.0 * var)) / math.sqrt(2.0 * math.pi * var)


def likelihood_given_cause(z, cause: Cause, sensor: SensorSpec):
    mean = sensor.max_range if cause.is_nohit else cause.range
    return gaussian_pdf(z, mean, sensor.noise_var)


def cause_means(cone: PixelCone, sensor: SensorSpec) -> np.ndarray:
    return np.append(cone.ranges, sensor.max_range)


def forward_model(z, belief: MapBelief, cone: PixelCone, sensor: SensorSpec):
    """Density of reading ``z`` (scalar or array) given the map belief."""
    prior = cause_prior(belief, cone).weights
    means = cause_means(cone, sensor)
    zz = np.asarray(z, dtype=float)
    dens = gaussian_pdf(zz[..., None], means, sensor.noise_var) @ prior
    return float(dens) if dens.ndim == 0 else dens


def _first_hit(truth: GroundTruthMap, cone: PixelCone, rng: np.random.Generator) -> int | None:
    occ = truth.occupancy[cone.voxels]
    if truth.mode == "binary":
        hits = np.flatnonzero(occ >= 1.0)
    else:
        hits = np.flatnonzero(rng.random(occ.size) < occ)
    return int(hits[0]) if hits.size else None


def simulate_scan(
    truth: GroundTruthMap, pose: Pose, sensor: SensorSpec, rng: np.random.Generator
) -> list:
    """One noisy reading per pixel, in ascending pixel order.

    The reading is the first-hit voxel's range (``max_range`` when nothing is
    hit) plus Gaussian noise, clamped into ``(0, max_range]``.
    """
    sigma = math.sqrt(sensor.noise_var)
    scan = []
    for pixel in range(sensor.pixels):
        cone = trace_ray(truth.spec, pose, pixel, sensor)
        hit = _first_hit(truth, cone, rng)
        true_range = sensor.max_range if hit is None else float(cone.ranges[hit])
        z = true_range + rng.normal(0.0, sigma)
        z = min(max(z, MIN_RANGE), sensor.max_range)
        scan.append(Measurement(pixel, z, pose))
    return scan

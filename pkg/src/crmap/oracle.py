"""Exact Bayesian inference on single-ray binary worlds by enumeration.

Every one of the ``2**n`` binary maps is scored with the exact likelihood
(the reading is Gaussian around the nearest occupied voxel, or around
``max_range`` when the ray hits nothing). This is the ground truth the
approximate mappers are measured against.
"""

from __future__ import annotations

import dataclasses
import math
from dataclasses import dataclass

import numpy as np

from .crm import update_map
from .grid import GridSpec, GroundTruthMap, Pose, init_prior
from .ism import IsmParams, LogOddsMap, logodds_mean_variance, logodds_update
from .sensor import Measurement, SensorSpec, simulate_scan

MAX_VOXELS = 12
LEMMA_MAX_VOXELS = 8


class EnumerationTooLarge(ValueError):
    pass


@dataclass(frozen=True)
class SmallWorld:
    ranges: tuple
    prior: float = 0.5

    def __post_init__(self):
        object.__setattr__(self, "ranges", tuple(float(r) for r in self.ranges))
        if len(self.ranges) > MAX_VOXELS:
            raise EnumerationTooLarge(f"at most {MAX_VOXELS} voxels can be enumerated")
        if any(b <= a for a, b in zip(self.ranges, self.ranges[1:])):
            raise ValueError("ranges must be strictly increasing")

    @property
    def n(self) -> int:
        return len(self.ranges)

    @classmethod
    def on_line(cls, n: int, voxel_size: float = 0.1, start: float = 0.0) -> "SmallWorld":
        return cls(tuple(start + (k + 0.5) * voxel_size for k in range(n)))


def _maps(n: int) -> np.ndarray:
    codes = np.arange(2**n)
    return ((codes[:, None] >> np.arange(n)[None, :]) & 1).astype(bool)


def _first_hits(maps: np.ndarray) -> np.ndarray:
    n = maps.shape[1]
    return np.where(maps.any(axis=1), maps.argmax(axis=1), n)


def _log_prior(maps: np.ndarray, p: float) -> np.ndarray:
    k = maps.sum(axis=1)
    return k * math.log(p) + (maps.shape[1] - k) * math.log1p(-p)


def _log_likelihood(world: SmallWorld, maps, scans, sensor: SensorSpec) -> np.ndarray:
    means = np.append(world.ranges, sensor.max_range)[_first_hits(maps)]
    z = np.asarray(scans, dtype=float)
    return -((z[None, :] - means[:, None]) ** 2).sum(axis=1) / (2.0 * sensor.noise_var)


def _normalized(logw: np.ndarray) -> np.ndarray:
    w = np.exp(logw - logw.max())
    return w / w.sum()


def exact_posterior(world: SmallWorld, scans, sensor: SensorSpec, flat: bool = False):
    """Posterior probability that each voxel is occupied, given all readings."""
    maps = _maps(world.n)
    logw = _log_prior(maps, world.prior)
    if len(scans) and not flat:
        logw = logw + _log_likelihood(world, maps, scans, sensor)
    w = _normalized(logw)
    return w @ maps


def lemma1_deviation(world: SmallWorld, sensor: SensorSpec, history=(), z_grid=None) -> float:
    """Largest change a reading makes to any voxel posterior once its cause is known.

    For every voxel, every cause with nonzero probability and every reading
    on ``z_grid``, compares P(occupied | cause, history, z) with
    P(occupied | cause, history), both by brute-force summation over maps.
    """
    if world.n > LEMMA_MAX_VOXELS:
        raise EnumerationTooLarge(f"lemma check is limited to {LEMMA_MAX_VOXELS} voxels")
    if z_grid is None:
        z_grid = np.linspace(0.0, 1.5 * sensor.max_range, 16)
    maps = _maps(world.n)
    causes = _first_hits(maps)
    logw = _log_prior(maps, world.prior)
    if len(history):
        logw = logw + _log_likelihood(world, maps, history, sensor)
    base = np.exp(logw - logw.max())
    worst = 0.0
    for c in range(world.n + 1):
        sel = causes == c
        if not base[sel].sum() > 0:
            continue
        without_z = base[sel] @ maps[sel] / base[sel].sum()
        for z in z_grid:
            # the reading is scored from each map, not from the cause
            weighted = base * np.exp(_log_likelihood(world, maps, [z], sensor))
            if not weighted[sel].sum() > 0:
                continue
            with_z = weighted[sel] @ maps[sel] / weighted[sel].sum()
            worst = max(worst, float(np.abs(with_z - without_z).max()))
    return worst


def lemma1_check(
    world: SmallWorld, sensor: SensorSpec, history=(), z_grid=None, tol: float = 1e-10
) -> bool:
    return lemma1_deviation(world, sensor, history, z_grid) < tol


# single-ray comparison of the approximate mappers against the oracle


def line_grid(n: int, voxel_size: float = 0.1, start: float = 0.0) -> GridSpec:
    """A one-row grid of ``n`` voxels seen end-on by a camera at the world origin."""
    return GridSpec(n * voxel_size, voxel_size, voxel_size, (start, -voxel_size / 2.0))


LINE_POSE = Pose(0.0, 0.0, 0.0)


def ray_sensor(sensor: SensorSpec) -> SensorSpec:
    return dataclasses.replace(sensor, pixels=1)


@dataclass
class DominanceTrial:
    seed: int
    n: int
    truth: np.ndarray
    scans: list
    exact: np.ndarray
    crm: np.ndarray
    ism: np.ndarray

    @property
    def l1_crm(self) -> float:
        return float(np.abs(self.crm - self.exact).sum())

    @property
    def l1_ism(self) -> float:
        return float(np.abs(self.ism - self.exact).sum())


def dominance_trial(
    seed: int,
    sensor: SensorSpec,
    ism_params: IsmParams | None = None,
    max_voxels: int = 8,
    n_scans: int = 5,
    bins: int = 101,
    voxel_size: float = 0.1,
) -> DominanceTrial:
    """Compare CRM and log-odds means with the exact posterior on one random line world."""
    ism_params = ism_params or IsmParams()
    rng = np.random.default_rng(seed)
    n = int(rng.integers(1, max_voxels + 1))
    occupancy = (rng.random(n) < 0.5).astype(float)
    spec = line_grid(n, voxel_size)
    truth = GroundTruthMap(spec, occupancy)
    one = ray_sensor(sensor)
    scans = [simulate_scan(truth, LINE_POSE, one, rng)[0] for _ in range(n_scans)]
    zs = [m.z for m in scans]

    world = SmallWorld.on_line(n, voxel_size)
    exact = exact_posterior(world, zs, one)
    belief = update_map(init_prior(spec, bins), scans, one)
    lmap = logodds_update(LogOddsMap.empty(spec), scans, ism_params, one)
    return DominanceTrial(
        seed, n, occupancy, zs, exact, belief.mean.copy(), logodds_mean_variance(lmap)[0]
    )


def line_measurements(zs) -> list:
    return [Measurement(0, float(z), LINE_POSE) for z in zs]

"""Log-odds occupancy mapping with a hand-shaped inverse sensor model."""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass

import numpy as np

from . import kernels
from .grid import GridSpec
from .raycast import trace_ray
from .sensor import SensorSpec

LOGODDS_LIMIT = 50.0

SWEEP_Q_OFFSETS = (0.05, 0.2, 0.4)
SWEEP_R_RAMP = (0.05, 0.1, 0.3, 1.0)
SWEEP_R_TOP = (0.05, 0.1, 0.3)


@dataclass(frozen=True)
class IsmParams:
    r_ramp: float = 0.1
    r_top: float = 0.1
    q_l: float = 0.45
    q_h: float = 0.55
    prior_logodds: float = 0.0

    def __post_init__(self):
        if not (0.0 < self.q_l <= 0.5 <= self.q_h < 1.0):
            raise ValueError("need 0 < q_l <= 0.5 <= q_h < 1")
        if self.r_ramp <= 0 or self.r_top <= 0:
            raise ValueError("r_ramp and r_top must be positive")

    @classmethod
    def symmetric(cls, q_offset: float, r_ramp: float, r_top: float) -> "IsmParams":
        return cls(r_ramp=r_ramp, r_top=r_top, q_l=0.5 - q_offset, q_h=0.5 + q_offset)


def ism_value(d: float, z: float, p: IsmParams, max_range: float) -> float:
    """Occupancy probability the model assigns to a voxel ``d`` meters down the ray.

    Voxels well short of the reading look free (``q_l``); the curve ramps
    linearly up to ``q_h`` across ``r_ramp`` centered on the reading, stays
    at ``q_h`` for ``r_top`` more, and carries no information beyond that.
    A max-range reading only marks the ray as free.
    """
    if d < 0:
        raise ValueError("distance along the ray must be nonnegative")
    if z >= max_range:
        return p.q_l if d < z else 0.5
    lo = z - 0.5 * p.r_ramp
    hi = z + 0.5 * p.r_ramp
    if d < lo:
        return p.q_l
    if d <= hi:
        return p.q_l + (p.q_h - p.q_l) * (d - lo) / p.r_ramp
    if d <= hi + p.r_top:
        return p.q_h
    return 0.5


@dataclass
class LogOddsMap:
    spec: GridSpec
    l: np.ndarray

    @classmethod
    def empty(cls, spec: GridSpec, prior_logodds: float = 0.0) -> "LogOddsMap":
        return cls(spec, np.full(spec.n, float(prior_logodds)))

    def copy(self) -> "LogOddsMap":
        return LogOddsMap(self.spec, self.l.copy())


def logodds_update(
    lmap: LogOddsMap,
    scan,
    p: IsmParams,
    sensor: SensorSpec,
    limit: float = LOGODDS_LIMIT,
) -> LogOddsMap:
    """Add the inverse-model log-odds of every cone voxel, in place."""
    for meas in scan:
        cone = trace_ray(lmap.spec, meas.pose, meas.pixel_index, sensor)
        kernels.ism_cone_update(
            lmap.l,
            cone.voxels,
            cone.ranges,
            float(meas.z),
            p.q_l,
            p.q_h,
            p.r_ramp,
            p.r_top,
            float(sensor.max_range),
            p.prior_logodds,
            limit,
        )
    return lmap


def ism_sweep_configs() -> list:
    """The 36 inverse models of the parameter sweep.

    Ordered lexicographically by (q offset, r_ramp, r_top).
    """
    return [
        IsmParams.symmetric(q, ramp, top)
        for q, ramp, top in itertools.product(SWEEP_Q_OFFSETS, SWEEP_R_RAMP, SWEEP_R_TOP)
    ]


def logodds_mean_variance(lmap: LogOddsMap):
    """Bernoulli mean and variance per voxel."""
    mean = 1.0 / (1.0 + np.exp(-lmap.l))
    return mean, mean * (1.0 - mean)


def logit(p: float) -> float:
    return math.log(p / (1.0 - p))

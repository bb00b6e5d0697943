"""Confidence-rich map update: sensor cause model and per-voxel pdf reweighting.

Every reading updates all voxels of its pixel cone at once. For voxel ``i``
the prior pdf is multiplied by an affine function ``a*m + b`` of its
occupancy value, whose coefficients come from how the posterior over causes
splits into causes nearer than ``i``, ``i`` itself, and causes beyond ``i``
(including no hit at all).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import kernels
from .grid import MapBelief, VoxelBelief
from .raycast import PixelCone, trace_ray
from .sensor import CauseDistribution, SensorSpec, cause_means, cause_prior

# occupancy means are kept this far away from 0 and 1 before dividing
SATURATION_EPS = 1e-6


class DegenerateReading(ArithmeticError):
    """The reading has zero density under the current map; nothing can be learned."""


class DegenerateUpdate(ArithmeticError):
    """A reweighted voxel pdf has no positive mass left."""


@dataclass
class ScmResult:
    posterior: CauseDistribution
    log_evidence: float

    @property
    def normalizer(self) -> float:
        """Inverse of the forward density of the reading."""
        return math.exp(-self.log_evidence)


@dataclass(frozen=True)
class UpdateCoefficients:
    a: float
    b: float

    def __call__(self, m):
        return self.a * np.asarray(m, dtype=float) + self.b


def sensor_cause_model(
    belief: MapBelief, cone: PixelCone, z: float, sensor: SensorSpec, flat: bool = False
) -> ScmResult:
    """Posterior over the causes of reading ``z``.

    With ``flat=True`` the per-cause likelihood is replaced by a constant,
    which makes the posterior equal to the cause prior.
    """
    prior = cause_prior(belief, cone)
    with np.errstate(divide="ignore"):
        logw = np.log(prior.weights)
    if not flat:
        if sensor.noise_var <= 0:
            raise ValueError("mapping needs a positive noise variance")
        means = cause_means(cone, sensor)
        logw = logw - (z - means) ** 2 / (2.0 * sensor.noise_var)
        logw -= 0.5 * math.log(2.0 * math.pi * sensor.noise_var)
    top = logw.max()
    if not math.isfinite(top):
        raise DegenerateReading(f"reading z={z} has zero density under the map")
    w = np.exp(logw - top)
    total = w.sum()
    return ScmResult(CauseDistribution(prior.causes, w / total), top + math.log(total))


def update_coefficients(
    belief: MapBelief,
    cone: PixelCone,
    i_local: int,
    scm: ScmResult,
    eps: float = SATURATION_EPS,
) -> UpdateCoefficients:
    """Affine multiplier for the pdf of the voxel at 1-based local index ``i_local``.

    Causes nearer than the voxel leave it untouched, the voxel itself scales
    its pdf by ``m / mean`` and every farther cause (no hit included) by
    ``(1 - m) / (1 - mean)``.
    """
    if not 1 <= i_local <= len(cone):
        raise IndexError(f"local index {i_local} outside cone of {len(cone)} voxels")
    w = scm.posterior.weights
    k = i_local - 1
    near = math.fsum(w[:k])
    own = float(w[k])
    far = math.fsum(w[k + 1 :])
    mh = min(max(float(belief.mean[cone.voxels[k]]), eps), 1.0 - eps)
    return UpdateCoefficients(own / mh - far / (1.0 - mh), near + far / (1.0 - mh))


def update_voxel(prior: VoxelBelief, coeff: UpdateCoefficients) -> VoxelBelief:
    mass = prior.bin_mass * coeff(prior.centers)
    total = mass.sum()
    if not total > 0.0:
        raise DegenerateUpdate("voxel posterior has no positive mass")
    return VoxelBelief(mass / total)


@dataclass
class UpdateStats:
    """Diagnostics accumulated over calls to :func:`update_map`."""

    pixels: int = 0
    skipped: int = 0
    degenerate: int = 0
    min_multiplier: float = math.inf
    min_mass: float = math.inf

    def record(self, status: int, min_mult: float, min_mass: float) -> None:
        self.pixels += 1
        if status == kernels.SKIPPED:
            self.skipped += 1
        elif status == kernels.DEGENERATE:
            self.degenerate += 1
        self.min_multiplier = min(self.min_multiplier, min_mult)
        self.min_mass = min(self.min_mass, min_mass)


def update_cone(
    belief: MapBelief,
    cone: PixelCone,
    z: float,
    sensor: SensorSpec,
    flat: bool = False,
    eps: float = SATURATION_EPS,
):
    """Apply one reading to its cone in place; returns the kernel status triple."""
    if not flat and sensor.noise_var <= 0:
        raise ValueError("mapping needs a positive noise variance")
    return kernels.crm_cone_update(
        belief.mass,
        belief.mean,
        belief.centers,
        cone.voxels,
        cone.ranges,
        float(z),
        float(sensor.noise_var),
        float(sensor.max_range),
        flat,
        eps,
    )


def update_map(
    belief: MapBelief,
    scan,
    sensor: SensorSpec,
    flat: bool = False,
    stats: UpdateStats | None = None,
    eps: float = SATURATION_EPS,
) -> MapBelief:
    """Fold a scan into ``belief`` in place and return it.

    Pixels are applied in the order given (ascending pixel index for
    simulated scans), each against the map already updated by the previous
    ones. Readings with zero density and degenerate voxel updates leave the
    map untouched for that pixel and are counted in ``stats``.
    """
    for meas in scan:
        cone = trace_ray(belief.spec, meas.pose, meas.pixel_index, sensor)
        result = update_cone(belief, cone, meas.z, sensor, flat=flat, eps=eps)
        if stats is not None:
            stats.record(*result)
    return belief

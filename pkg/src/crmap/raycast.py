"""Pixel rays and their ordered voxel cones."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import kernels
from .grid import GridSpec, Pose


@dataclass(frozen=True)
class Ray:
    origin: tuple[float, float]
    direction: tuple[float, float]
    max_range: float

    def __post_init__(self):
        norm = math.hypot(*self.direction)
        if abs(norm - 1.0) > 1e-9:
            raise ValueError("ray direction must be a unit vector")
        if self.max_range <= 0:
            raise ValueError("max_range must be positive")

    @classmethod
    def from_bearing(cls, x: float, y: float, bearing: float, max_range: float) -> "Ray":
        return cls((x, y), (math.cos(bearing), math.sin(bearing)), max_range)

    def point(self, t: float) -> tuple[float, float]:
        return (self.origin[0] + t * self.direction[0], self.origin[1] + t * self.direction[1])


@dataclass(frozen=True)
class PixelCone:
    """Voxels crossed by one pixel ray, nearest first.

    ``entry_distance`` is where the ray enters each voxel and ``ranges``
    the distance to the middle of its chord through the voxel; ``ranges``
    is what the sensor model treats as the voxel's distance from the camera.
    Local indices are 1-based: local index ``l`` is ``voxels[l - 1]``.
    """

    ray: Ray
    voxels: np.ndarray
    entry_distance: np.ndarray
    ranges: np.ndarray

    def __len__(self) -> int:
        return int(self.voxels.shape[0])


def pixel_bearing(theta: float, pixel_index: int, fov: float, pixels: int) -> float:
    return theta + fov * (pixel_index + 0.5) / pixels - fov / 2.0


def cast(spec: GridSpec, ray: Ray) -> PixelCone:
    voxels, entry, ranges = kernels.trace(
        spec.origin[0],
        spec.origin[1],
        spec.voxel_size,
        spec.nx,
        spec.ny,
        ray.origin[0],
        ray.origin[1],
        ray.direction[0],
        ray.direction[1],
        ray.max_range,
    )
    return PixelCone(ray, voxels, entry, ranges)


def trace_ray(spec: GridSpec, pose: Pose, pixel_index: int, sensor) -> PixelCone:
    if not 0 <= pixel_index < sensor.pixels:
        raise IndexError(f"pixel {pixel_index} outside sensor of {sensor.pixels} pixels")
    bearing = pixel_bearing(pose.theta, pixel_index, sensor.fov, sensor.pixels)
    return cast(spec, Ray.from_bearing(pose.x, pose.y, bearing, sensor.max_range))


def local_to_global(cone: PixelCone, i_local: int) -> int:
    if not 1 <= i_local <= len(cone):
        raise IndexError(f"local index {i_local} outside cone of {len(cone)} voxels")
    return int(cone.voxels[i_local - 1])


def global_to_local(cone: PixelCone, i_global: int) -> int | None:
    """Inverse of :func:`local_to_global`; None when the voxel is not in the cone."""
    hits = np.flatnonzero(cone.voxels == i_global)
    if hits.size == 0:
        return None
    return int(hits[0]) + 1

"""Grid geometry, ground-truth maps and histogram beliefs over voxel occupancy."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

DEFAULT_BINS = 101


@dataclass(frozen=True)
class GridSpec:
    """Axis-aligned 2D voxel grid.

    Voxel ``i`` sits at column ``i % nx`` and row ``i // nx``; row 0 is the
    bottom row (smallest y).
    """

    extent_x: float
    extent_y: float
    voxel_size: float
    origin: tuple[float, float] = (0.0, 0.0)

    def __post_init__(self):
        if self.extent_x <= 0 or self.extent_y <= 0 or self.voxel_size <= 0:
            raise ValueError("grid extents and voxel size must be positive")
        for extent in (self.extent_x, self.extent_y):
            count = extent / self.voxel_size
            if abs(count - round(count)) > 1e-9 * max(1.0, count):
                raise ValueError(
                    f"extent {extent} is not a whole number of {self.voxel_size} m voxels"
                )
        object.__setattr__(self, "origin", (float(self.origin[0]), float(self.origin[1])))

    @property
    def nx(self) -> int:
        return int(round(self.extent_x / self.voxel_size))

    @property
    def ny(self) -> int:
        return int(round(self.extent_y / self.voxel_size))

    @property
    def n(self) -> int:
        return self.nx * self.ny

    @classmethod
    def centered(cls, extent_x: float, extent_y: float, voxel_size: float) -> "GridSpec":
        return cls(extent_x, extent_y, voxel_size, (-extent_x / 2.0, -extent_y / 2.0))

    def index(self, ix: int, iy: int) -> int:
        return iy * self.nx + ix

    def cell_of(self, x: float, y: float) -> int | None:
        """Index of the voxel containing a world point, or None outside the grid."""
        fx = (x - self.origin[0]) / self.voxel_size
        fy = (y - self.origin[1]) / self.voxel_size
        if not (0.0 <= fx <= self.nx and 0.0 <= fy <= self.ny):
            return None
        ix = min(int(math.floor(fx)), self.nx - 1)
        iy = min(int(math.floor(fy)), self.ny - 1)
        return self.index(ix, iy)

    def centers(self) -> np.ndarray:
        """All voxel centers as an ``(n, 2)`` array in index order."""
        ix = np.arange(self.n) % self.nx
        iy = np.arange(self.n) // self.nx
        return np.column_stack(
            (
                self.origin[0] + (ix + 0.5) * self.voxel_size,
                self.origin[1] + (iy + 0.5) * self.voxel_size,
            )
        )


def voxel_center(spec: GridSpec, i: int) -> tuple[float, float]:
    if not 0 <= i < spec.n:
        raise IndexError(f"voxel index {i} outside grid of {spec.n} voxels")
    ix, iy = i % spec.nx, i // spec.nx
    return (
        spec.origin[0] + (ix + 0.5) * spec.voxel_size,
        spec.origin[1] + (iy + 0.5) * spec.voxel_size,
    )


@dataclass
class GroundTruthMap:
    """True occupancy per voxel: 0/1 in binary mode, a fill fraction in continuous mode."""

    spec: GridSpec
    occupancy: np.ndarray
    mode: str = "binary"

    def __post_init__(self):
        self.occupancy = np.asarray(self.occupancy, dtype=float)
        if self.occupancy.shape != (self.spec.n,):
            raise ValueError(
                f"expected {self.spec.n} occupancy values, got shape {self.occupancy.shape}"
            )
        if self.mode == "binary":
            if not np.all((self.occupancy == 0.0) | (self.occupancy == 1.0)):
                raise ValueError("binary ground truth must hold only 0 and 1")
        elif self.mode == "continuous":
            if np.any(self.occupancy < 0.0) or np.any(self.occupancy > 1.0):
                raise ValueError("continuous occupancy must lie in [0, 1]")
        else:
            raise ValueError(f"unknown ground-truth mode {self.mode!r}")


def normalize_angle(theta: float) -> float:
    """Wrap an angle into (-pi, pi]."""
    wrapped = math.fmod(theta, 2.0 * math.pi)
    if wrapped <= -math.pi:
        wrapped += 2.0 * math.pi
    elif wrapped > math.pi:
        wrapped -= 2.0 * math.pi
    return wrapped


@dataclass(frozen=True)
class Pose:
    x: float
    y: float
    theta: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "theta", normalize_angle(float(self.theta)))


def bin_centers(bins: int) -> np.ndarray:
    return (np.arange(bins) + 0.5) / bins


@dataclass
class VoxelBelief:
    """Histogram pdf over the occupancy value of a single voxel."""

    bin_mass: np.ndarray

    def __post_init__(self):
        self.bin_mass = np.asarray(self.bin_mass, dtype=float)
        if self.bin_mass.ndim != 1 or self.bin_mass.size < 2:
            raise ValueError("a voxel belief needs at least two bins")
        if np.any(self.bin_mass < 0.0):
            raise ValueError("bin masses must be nonnegative")
        if abs(self.bin_mass.sum() - 1.0) > 1e-9:
            raise ValueError("bin masses must sum to 1")

    @property
    def bins(self) -> int:
        return self.bin_mass.size

    @property
    def centers(self) -> np.ndarray:
        return bin_centers(self.bins)

    @classmethod
    def uniform(cls, bins: int = DEFAULT_BINS) -> "VoxelBelief":
        return cls(np.full(bins, 1.0 / bins))

    @classmethod
    def point_mass(cls, bin_index: int, bins: int = DEFAULT_BINS) -> "VoxelBelief":
        mass = np.zeros(bins)
        mass[bin_index] = 1.0
        return cls(mass)


def belief_mean(b: VoxelBelief) -> float:
    return float(np.dot(b.bin_mass, b.centers))


def belief_variance(b: VoxelBelief) -> float:
    centers = b.centers
    mean = float(np.dot(b.bin_mass, centers))
    return float(np.dot(b.bin_mass, (centers - mean) ** 2))


@dataclass
class MapBelief:
    """Per-voxel histogram beliefs stored as one ``(n, K)`` mass array.

    ``mean`` caches the expected occupancy of every voxel and is refreshed
    by every mutation that goes through this package.
    """

    spec: GridSpec
    mass: np.ndarray
    mean: np.ndarray = field(default=None)

    def __post_init__(self):
        self.mass = np.ascontiguousarray(self.mass, dtype=float)
        if self.mass.ndim != 2 or self.mass.shape[0] != self.spec.n:
            raise ValueError(f"mass must have shape ({self.spec.n}, K)")
        if self.mean is None:
            self.refresh()
        else:
            self.mean = np.ascontiguousarray(self.mean, dtype=float)

    @property
    def bins(self) -> int:
        return self.mass.shape[1]

    @property
    def centers(self) -> np.ndarray:
        return bin_centers(self.bins)

    def refresh(self, voxels=None) -> None:
        if voxels is None:
            self.mean = self.mass @ self.centers
        else:
            self.mean[voxels] = self.mass[voxels] @ self.centers

    def voxel(self, i: int) -> VoxelBelief:
        return VoxelBelief(self.mass[i].copy())

    def set_voxel(self, i: int, belief: VoxelBelief) -> None:
        if belief.bins != self.bins:
            raise ValueError("bin count mismatch")
        self.mass[i] = belief.bin_mass
        self.mean[i] = belief_mean(belief)

    def variance(self) -> np.ndarray:
        """Per-voxel variance of the occupancy value."""
        dev = self.centers[None, :] - self.mean[:, None]
        return np.einsum("ij,ij->i", self.mass, dev * dev)

    def copy(self) -> "MapBelief":
        return MapBelief(self.spec, self.mass.copy(), self.mean.copy())


def init_prior(spec: GridSpec, bins: int = DEFAULT_BINS) -> MapBelief:
    if bins < 2:
        raise ValueError("need at least two bins")
    mass = np.full((spec.n, bins), 1.0 / bins)
    return MapBelief(spec, mass)

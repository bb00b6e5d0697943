"""Belief-space path evaluation and RRT candidate generation."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .crm import update_map
from .grid import GridSpec, MapBelief, Pose
from .raycast import trace_ray
from .sensor import Measurement, SensorSpec, forward_model

Z_RESOLUTION = 0.01
STEP_LENGTH = 0.1
GOAL_BIAS = 0.1
GOAL_RADIUS = 0.1
MAX_TURN = math.pi / 2.0


class NoPlanError(RuntimeError):
    pass


class OutsideGridError(ValueError):
    pass


@dataclass
class Path:
    """Waypoints with the (speed, turn rate) control applied between consecutive ones.

    Controls act over one unit of time.
    """

    waypoints: list
    controls: list = field(default_factory=list)

    def __post_init__(self):
        if self.waypoints and len(self.controls) != len(self.waypoints) - 1:
            raise ValueError("need exactly one control per step")

    def __len__(self) -> int:
        return len(self.waypoints)

    def split(self, k: int) -> tuple["Path", "Path"]:
        """Two paths sharing waypoint ``k``."""
        return (
            Path(self.waypoints[: k + 1], self.controls[:k]),
            Path(self.waypoints[k:], self.controls[k:]),
        )


@dataclass
class PlanResult:
    chosen: Path
    cost: float
    per_candidate_costs: list
    index: int = 0


def unicycle_step(pose: Pose, speed: float, turn_rate: float, dt: float = 1.0) -> Pose:
    """Exact unicycle integration over ``dt``."""
    th = pose.theta
    if abs(turn_rate) < 1e-12:
        return Pose(pose.x + speed * dt * math.cos(th), pose.y + speed * dt * math.sin(th), th)
    r = speed / turn_rate
    th2 = th + turn_rate * dt
    return Pose(
        pose.x + r * (math.sin(th2) - math.sin(th)),
        pose.y - r * (math.cos(th2) - math.cos(th)),
        th2,
    )


def z_grid(sensor: SensorSpec, resolution: float = Z_RESOLUTION) -> np.ndarray:
    count = int(round(sensor.max_range / resolution))
    return np.arange(1, count + 1) * resolution


def most_likely_observation(
    belief: MapBelief, pose: Pose, pixel: int, sensor: SensorSpec, grid: np.ndarray | None = None
) -> float:
    """Mode of the forward density on a 1 cm grid over ``(0, max_range]``; ties go to the nearer reading."""
    cone = trace_ray(belief.spec, pose, pixel, sensor)
    if len(cone) == 0:
        return float(sensor.max_range)
    grid = z_grid(sensor) if grid is None else grid
    return float(grid[int(np.argmax(forward_model(grid, belief, cone, sensor)))])


def most_likely_scan(belief: MapBelief, pose: Pose, sensor: SensorSpec) -> list:
    grid = z_grid(sensor)
    return [
        Measurement(p, most_likely_observation(belief, pose, p, sensor, grid), pose)
        for p in range(sensor.pixels)
    ]


def predict_map_belief(belief: MapBelief, path: Path, sensor: SensorSpec) -> list:
    """Map beliefs at each waypoint under most-likely future readings.

    The first entry is a copy of ``belief`` (the robot is already at the
    first waypoint); every later waypoint folds in the most likely scan
    predicted from the previous belief. ``belief`` is never modified.
    """
    current = belief.copy()
    beliefs = [current]
    for pose in path.waypoints[1:]:
        scan = most_likely_scan(current, pose, sensor)
        current = update_map(current.copy(), scan, sensor)
        beliefs.append(current)
    return beliefs


def one_step_cost(belief: MapBelief, pose: Pose, variance_power: float = 1.0) -> float:
    """Expected occupancy plus (by default) variance of the voxel under the robot."""
    j = belief.spec.cell_of(pose.x, pose.y)
    if j is None:
        raise OutsideGridError(f"pose ({pose.x:.3f}, {pose.y:.3f}) is outside the grid")
    mean = belief.mean[j]
    dev = belief.centers - mean
    var = max(float(belief.mass[j] @ (dev * dev)), 0.0)
    return float(mean + var**variance_power)


def path_cost(
    belief: MapBelief, path: Path, sensor: SensorSpec, variance_power: float = 1.0
) -> float:
    if len(path) == 0:
        return 0.0
    beliefs = predict_map_belief(belief, path, sensor)
    return math.fsum(
        one_step_cost(b, pose, variance_power) for b, pose in zip(beliefs, path.waypoints)
    )


def select_path(
    belief: MapBelief, candidates: list, sensor: SensorSpec, variance_power: float = 1.0
) -> PlanResult:
    if not candidates:
        raise NoPlanError("no candidate paths to choose from")
    costs = [path_cost(belief, p, sensor, variance_power) for p in candidates]
    best = 0
    for k, c in enumerate(costs):
        if c < costs[best]:
            best = k
    return PlanResult(candidates[best], costs[best], costs, best)


def _inside(spec: GridSpec, x: float, y: float) -> bool:
    return (
        spec.origin[0] <= x <= spec.origin[0] + spec.extent_x
        and spec.origin[1] <= y <= spec.origin[1] + spec.extent_y
    )


def rrt_candidates(
    start: Pose,
    goal: tuple,
    spec: GridSpec,
    rng: np.random.Generator,
    count: int,
    iterations: int = 2000,
    step: float = STEP_LENGTH,
    goal_bias: float = GOAL_BIAS,
    goal_radius: float = GOAL_RADIUS,
    max_turn: float = MAX_TURN,
) -> list:
    """Grow a unicycle RRT from ``start`` and return up to ``count`` paths into the goal region.

    Each extension drives one unit of time at ``step`` m/s with a turn rate
    (bounded by ``max_turn``) that points the robot at the sample.
    """
    if count < 1:
        raise ValueError("count must be at least 1")
    gx, gy = float(goal[0]), float(goal[1])
    if math.hypot(start.x - gx, start.y - gy) <= 1e-12:
        return [Path([start], [])]

    nodes = [start]
    parent = [-1]
    control = [None]
    xy = [(start.x, start.y)]
    found = []
    for _ in range(iterations):
        if rng.random() < goal_bias:
            sx, sy = gx, gy
        else:
            sx = spec.origin[0] + rng.random() * spec.extent_x
            sy = spec.origin[1] + rng.random() * spec.extent_y
        pts = np.asarray(xy)
        near = int(np.argmin((pts[:, 0] - sx) ** 2 + (pts[:, 1] - sy) ** 2))
        node = nodes[near]
        heading = math.atan2(sy - node.y, sx - node.x)
        dtheta = math.remainder(heading - node.theta, 2.0 * math.pi)
        turn = max(-max_turn, min(max_turn, dtheta))
        new = unicycle_step(node, step, turn)
        if not _inside(spec, new.x, new.y):
            continue
        nodes.append(new)
        parent.append(near)
        control.append((step, turn))
        xy.append((new.x, new.y))
        if math.hypot(new.x - gx, new.y - gy) <= goal_radius:
            found.append(len(nodes) - 1)
            if len(found) >= count:
                break

    paths = []
    for leaf in found:
        waypoints, controls = [], []
        k = leaf
        while k != -1:
            waypoints.append(nodes[k])
            if control[k] is not None:
                controls.append(control[k])
            k = parent[k]
        paths.append(Path(waypoints[::-1], controls[::-1]))
    return paths

"""Seeded scenario runs and the experiment sweeps built on them.

Random streams: the world of map ``k`` is drawn from
``PCG64(SeedSequence([world.seed + k, 1]))`` and its readings from
``PCG64(SeedSequence([sim.seed + k, 2]))``; oracle worlds use stream 3 and
RRT stream 4. Mappers being compared always
consume the same list of scans.
"""

from __future__ import annotations

import logging
import math
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import io
from .config import ScenarioConfig, from_dict
from .crm import UpdateStats, update_map
from .grid import GridSpec, GroundTruthMap, MapBelief, Pose, init_prior
from .ism import IsmParams, LogOddsMap, ism_sweep_configs, logodds_mean_variance, logodds_update
from .metrics import ErrorSeries, inconsistency, map_error
from .oracle import SmallWorld, dominance_trial, lemma1_deviation
from .planner import PlanResult, one_step_cost, predict_map_belief, rrt_candidates, select_path
from .sensor import SensorSpec, simulate_scan

log = logging.getLogger(__name__)

RNG_ALGORITHM = "numpy.random.PCG64"
WORLD_STREAM = 1
SCAN_STREAM = 2
ORACLE_STREAM = 3
PLAN_STREAM = 4


def make_rng(seed: int, stream: int) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence([int(seed), stream])))


def generate_world(
    spec: GridSpec, seed: int, free_radius: float, center: tuple = (0.0, 0.0)
) -> GroundTruthMap:
    """Independent fair-coin occupancy, cleared within ``free_radius`` of ``center``."""
    if free_radius < 0:
        raise ValueError("free_radius must be nonnegative")
    rng = make_rng(seed, WORLD_STREAM)
    occ = (rng.random(spec.n) < 0.5).astype(float)
    c = spec.centers()
    occ[np.hypot(c[:, 0] - center[0], c[:, 1] - center[1]) <= free_radius] = 0.0
    return GroundTruthMap(spec, occ)


def scan_poses(cfg: ScenarioConfig) -> list:
    """Robot poses at each scan time; the robot spins in place."""
    start = cfg.start_pose()
    omega = math.radians(cfg.robot.omega_deg_per_s)
    dt = 1.0 / cfg.sensor.rate_hz
    return [Pose(start.x, start.y, start.theta + omega * k * dt) for k in range(cfg.n_scans)]


def scan_stream(truth: GroundTruthMap, cfg: ScenarioConfig, sensor: SensorSpec, seed: int) -> list:
    rng = make_rng(seed, SCAN_STREAM)
    return [simulate_scan(truth, pose, sensor, rng) for pose in scan_poses(cfg)]


class CrmMapper:
    method = "crm"

    def __init__(self, spec: GridSpec, sensor: SensorSpec, bins: int):
        self.sensor = sensor
        self.belief = init_prior(spec, bins)
        self.stats = UpdateStats()

    def update(self, scan) -> None:
        update_map(self.belief, scan, self.sensor, stats=self.stats)

    def mean(self) -> np.ndarray:
        return self.belief.mean

    def mean_variance(self):
        return self.belief.mean.copy(), self.belief.variance()


class IsmMapper:
    method = "ism"

    def __init__(self, spec: GridSpec, sensor: SensorSpec, params: IsmParams):
        self.sensor = sensor
        self.params = params
        self.lmap = LogOddsMap.empty(spec, params.prior_logodds)
        self.stats = None

    def update(self, scan) -> None:
        logodds_update(self.lmap, scan, self.params, self.sensor)

    def mean(self) -> np.ndarray:
        return logodds_mean_variance(self.lmap)[0]

    def mean_variance(self):
        return logodds_mean_variance(self.lmap)


@dataclass
class RunRecord:
    config: dict
    method: str
    series: ErrorSeries
    final_mean: np.ndarray
    final_variance: np.ndarray
    final_error: float
    ic: float
    rng_algorithm: str = RNG_ALGORITHM
    wall_time: float = 0.0
    stats: UpdateStats | None = None
    truth: GroundTruthMap | None = None
    extra: dict = field(default_factory=dict)


def run_mapper(mapper, truth: GroundTruthMap, scans, rate: float, config: dict) -> RunRecord:
    t0 = time.perf_counter()
    times, errors = [], []
    for k, scan in enumerate(scans):
        mapper.update(scan)
        times.append((k + 1) / rate)
        errors.append(map_error(mapper.mean(), truth))
    mean, var = mapper.mean_variance()
    return RunRecord(
        config=config,
        method=mapper.method,
        series=ErrorSeries(np.array(times), np.array(errors)),
        final_mean=mean,
        final_variance=var,
        final_error=map_error(mean, truth),
        ic=inconsistency(mean, var, truth),
        wall_time=time.perf_counter() - t0,
        stats=mapper.stats,
        truth=truth,
    )


def make_mapper(kind: str, cfg: ScenarioConfig, sensor: SensorSpec, params: IsmParams | None = None):
    spec = cfg.grid_spec()
    if kind == "crm":
        return CrmMapper(spec, sensor, cfg.mapper.bins)
    return IsmMapper(spec, sensor, params or cfg.ism_params())


def paired_runs(cfg: ScenarioConfig, mappers, map_index: int = 0, noise_var: float | None = None):
    """Run several mappers on one world and one shared scan stream."""
    sensor = cfg.sensor_spec(noise_var)
    truth = generate_world(cfg.grid_spec(), cfg.world.seed + map_index, cfg.world.free_radius)
    scans = scan_stream(truth, cfg, sensor, cfg.sim.seed + map_index)
    records = []
    for kind, params in mappers:
        mapper = make_mapper(kind, cfg, sensor, params)
        records.append(run_mapper(mapper, truth, scans, cfg.sensor.rate_hz, cfg.to_dict()))
    return records


def run_scenario(cfg: ScenarioConfig) -> RunRecord:
    return paired_runs(cfg, [(cfg.mapper.kind, None)])[0]


def _parallel_map(fn, tasks: list, jobs: int) -> list:
    """Evaluate ``fn`` over ``tasks``; results always come back in task order."""
    if jobs <= 1 or len(tasks) <= 1:
        return [fn(t) for t in tasks]
    with ProcessPoolExecutor(max_workers=jobs) as pool:
        return list(pool.map(fn, tasks))


def _strip(record: RunRecord) -> RunRecord:
    record.truth = None
    return record


def _ism_sweep_task(task):
    cfg_dict, params = task
    cfg = from_dict(cfg_dict)
    kind = "crm" if params is None else "ism"
    return _strip(paired_runs(cfg, [(kind, params)])[0])


@dataclass
class SweepRow:
    config_id: int
    method: str
    params: IsmParams | None
    error: float
    inconsistency: float
    record: RunRecord


def run_ism_sweep(cfg: ScenarioConfig, jobs: int = 1) -> list:
    """The 36 inverse models plus one CRM run, all on the same world and readings."""
    configs = ism_sweep_configs()
    tasks = [(cfg.to_dict(), p) for p in configs] + [(cfg.to_dict(), None)]
    records = _parallel_map(_ism_sweep_task, tasks, jobs)
    rows = []
    for k, (rec, (_, params)) in enumerate(zip(records, tasks)):
        rows.append(SweepRow(k, rec.method, params, rec.final_error, rec.ic, rec))
    return rows


def _noise_task(task):
    cfg_dict, noise_var = task
    cfg = from_dict(cfg_dict)
    return [_strip(r) for r in paired_runs(cfg, [("crm", None), ("ism", None)], noise_var=noise_var)]


def run_noise_sweep(cfg: ScenarioConfig, jobs: int = 1) -> list:
    """CRM and log-odds runs per noise variance; returns ``(noise_var, crm, ism)`` triples."""
    variances = list(cfg.noise_sweep.noise_vars)
    results = _parallel_map(_noise_task, [(cfg.to_dict(), v) for v in variances], jobs)
    return [(v, crm, ism) for v, (crm, ism) in zip(variances, results)]


@dataclass
class MonteCarloRow:
    map_index: int
    world_seed: int
    scan_seed: int
    error_crm: float
    error_ism: float
    ic_crm: float
    ic_ism: float


def _montecarlo_task(task):
    cfg_dict, k = task
    cfg = from_dict(cfg_dict)
    crm, ism = paired_runs(cfg, [("crm", None), ("ism", None)], map_index=k)
    return MonteCarloRow(
        k, cfg.world.seed + k, cfg.sim.seed + k, crm.final_error, ism.final_error, crm.ic, ism.ic
    )


def run_montecarlo(cfg: ScenarioConfig, n_maps: int | None = None, jobs: int = 1) -> list:
    n_maps = cfg.montecarlo.n_maps if n_maps is None else n_maps
    if n_maps < 1:
        raise ValueError("n_maps must be at least 1")
    return _parallel_map(_montecarlo_task, [(cfg.to_dict(), k) for k in range(n_maps)], jobs)


@dataclass
class PlanRun:
    result: PlanResult
    candidates: list
    belief: MapBelief
    start: Pose


def run_plan(cfg: ScenarioConfig, belief: MapBelief | None = None) -> PlanRun:
    """Warm up a CRM map with the configured spin, then pick the cheapest RRT path.

    Raises :class:`~crmap.planner.NoPlanError` when RRT finds no path.
    """
    spec = cfg.grid_spec()
    goal = (cfg.plan.goal_x, cfg.plan.goal_y)
    if spec.cell_of(*goal) is None:
        raise ValueError(f"goal {goal} is outside the grid")
    sensor = cfg.sensor_spec()
    if belief is None:
        belief = init_prior(spec, cfg.mapper.bins)
        truth = generate_world(spec, cfg.world.seed, cfg.world.free_radius)
        for scan in scan_stream(truth, cfg, sensor, cfg.sim.seed):
            update_map(belief, scan, sensor)
    poses = scan_poses(cfg)
    start = poses[-1] if poses else cfg.start_pose()
    rng = make_rng(cfg.sim.seed, PLAN_STREAM)
    candidates = rrt_candidates(
        start, goal, spec, rng, cfg.plan.candidates, iterations=cfg.plan.iterations
    )
    result = select_path(belief, candidates, sensor, cfg.plan.variance_power)
    return PlanRun(result, candidates, belief, start)


@dataclass
class OracleReport:
    lemma_deviations: list
    trials: list

    @property
    def lemma_ok(self) -> bool:
        return all(d < 1e-10 for d in self.lemma_deviations)

    @property
    def dominance_rate(self) -> float:
        wins = sum(t.l1_crm < t.l1_ism for t in self.trials)
        return wins / len(self.trials) if self.trials else 0.0


def run_oracle_check(cfg: ScenarioConfig) -> OracleReport:
    sensor = cfg.sensor_spec()
    o = cfg.oracle
    deviations = []
    for k in range(o.lemma_worlds):
        rng = make_rng(cfg.sim.seed + k, ORACLE_STREAM)
        ranges = np.sort(rng.uniform(0.0, sensor.max_range, o.lemma_voxels))
        history = rng.uniform(0.0, sensor.max_range, 3)
        deviations.append(lemma1_deviation(SmallWorld(tuple(ranges)), sensor, history))
    trials = [
        dominance_trial(cfg.sim.seed + k, sensor, cfg.ism_params(), o.max_voxels, o.scans,
                        cfg.mapper.bins, cfg.grid.voxel_size)
        for k in range(o.trials)
    ]
    return OracleReport(deviations, trials)


# artifact writers


def write_run(record: RunRecord, spec: GridSpec, out: Path, run_id: str = "0") -> None:
    out = Path(out)
    io.write_csv(out / "error_series.csv", ("t", "error"), zip(record.series.time, record.series.total_abs_error))
    io.write_csv(out / "inconsistency.csv", ("run_id", "method", "I_c"), [(run_id, record.method, record.ic)])
    io.write_map_csv(out / "map.csv", spec, record.final_mean, record.final_variance)
    io.write_pgm(out / "map_mean.pgm", spec, record.final_mean)
    if record.truth is not None:
        io.write_pgm(out / "truth.pgm", spec, record.truth.occupancy)


def write_ism_sweep(rows: list, out: Path) -> None:
    body = []
    for r in rows:
        p = r.params
        body.append(
            (r.config_id, r.method,
             None if p is None else round(p.q_h - 0.5, 12),
             None if p is None else p.r_ramp,
             None if p is None else p.r_top,
             r.error, r.inconsistency)
        )
    io.write_csv(Path(out) / "bars.csv",
                 ("config_id", "method", "q_offset", "r_ramp", "r_top", "error", "inconsistency"), body)


def write_noise_sweep(results: list, out: Path) -> None:
    out = Path(out)
    summary, series = [], []
    run_id = 0
    for var, crm, ism in results:
        for rec in (crm, ism):
            summary.append((run_id, rec.method, var, rec.final_error, rec.ic))
            series.extend((run_id, rec.method, var, t, e)
                          for t, e in zip(rec.series.time, rec.series.total_abs_error))
            run_id += 1
    io.write_csv(out / "noise_sweep.csv", ("run_id", "method", "noise_var", "final_error", "I_c"), summary)
    io.write_csv(out / "error_series.csv", ("run_id", "method", "noise_var", "t", "error"), series)
    io.write_csv(out / "inconsistency.csv", ("run_id", "method", "I_c"), [(r[0], r[1], r[4]) for r in summary])


def write_montecarlo(rows: list, out: Path) -> None:
    out = Path(out)
    io.write_csv(out / "montecarlo.csv",
                 ("map_index", "world_seed", "scan_seed", "error_crm", "error_ism", "ic_crm", "ic_ism"),
                 [(r.map_index, r.world_seed, r.scan_seed, r.error_crm, r.error_ism, r.ic_crm, r.ic_ism)
                  for r in rows])
    inc = []
    for r in rows:
        inc.append((r.map_index, "crm", r.ic_crm))
        inc.append((r.map_index, "ism", r.ic_ism))
    io.write_csv(out / "inconsistency.csv", ("run_id", "method", "I_c"), inc)


def write_plan(run: PlanRun, sensor: SensorSpec, out: Path, variance_power: float = 1.0) -> None:
    out = Path(out)
    path = run.result.chosen
    beliefs = predict_map_belief(run.belief, path, sensor)
    steps = []
    rows = []
    for k, (b, pose) in enumerate(zip(beliefs, path.waypoints)):
        steps.append(one_step_cost(b, pose, variance_power))
        rows.append((k, pose.x, pose.y, pose.theta, math.fsum(steps)))
    io.write_csv(out / "plan.csv", ("step", "x", "y", "theta", "cumulative_cost"), rows)
    io.write_csv(out / "candidates.csv", ("candidate", "waypoints", "cost", "chosen"),
                 [(k, len(p), c, int(k == run.result.index))
                  for k, (p, c) in enumerate(zip(run.candidates, run.result.per_candidate_costs))])


def write_oracle(report: OracleReport, out: Path) -> None:
    out = Path(out)
    io.write_csv(out / "lemma.csv", ("world", "max_deviation"), enumerate(report.lemma_deviations))
    io.write_csv(out / "oracle.csv", ("trial", "seed", "n", "l1_crm", "l1_ism", "crm_closer"),
                 [(k, t.seed, t.n, t.l1_crm, t.l1_ism, int(t.l1_crm < t.l1_ism))
                  for k, t in enumerate(report.trials)])

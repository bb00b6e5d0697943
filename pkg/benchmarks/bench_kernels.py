"""Time the compiled and pure-Python kernels side by side.

    python benchmarks/bench_kernels.py [--repeat 5] [--scans 100]

Each kernel is called on realistic inputs from the default scenario; the
last row times a full CRM run of ``--scans`` scans through each backend.
"""

import argparse
import math
import timeit

import numpy as np

from crmap import experiments as ex
from crmap import kernels
from crmap.config import ScenarioConfig
from crmap.crm import update_map
from crmap.grid import init_prior
from crmap.raycast import pixel_bearing


def kernel_cases(cfg):
    spec, sensor = cfg.grid_spec(), cfg.sensor_spec()
    rng = np.random.default_rng(0)
    bearings = [pixel_bearing(t, p, sensor.fov, sensor.pixels)
                for t in rng.uniform(-math.pi, math.pi, 20) for p in range(sensor.pixels)]
    geometry = (*spec.origin, spec.voxel_size, spec.nx, spec.ny)
    rays = [(0.0, 0.0, math.cos(b), math.sin(b), sensor.max_range) for b in bearings]
    cones = [kernels._pykernels.trace(*geometry, *r)[::2] for r in rays]
    belief = init_prior(spec, cfg.mapper.bins)
    lvals = np.zeros(spec.n)
    p = cfg.ism_params()

    def trace(mod):
        for r in rays:
            mod.trace(*geometry, *r)

    def crm(mod):
        b = belief.copy()
        for voxels, ranges in cones:
            mod.crm_cone_update(b.mass, b.mean, b.centers, voxels, ranges, 0.5, sensor.noise_var,
                                sensor.max_range, False, 1e-6)

    def ism(mod):
        l = lvals.copy()
        for voxels, ranges in cones:
            mod.ism_cone_update(l, voxels, ranges, 0.5, p.q_l, p.q_h, p.r_ramp, p.r_top,
                                sensor.max_range, 0.0, 50.0)

    return {f"trace x{len(rays)}": trace, f"crm_cone_update x{len(cones)}": crm,
            f"ism_cone_update x{len(cones)}": ism}


def full_run(cfg, scans):
    sensor = cfg.sensor_spec()
    truth = ex.generate_world(cfg.grid_spec(), 0, cfg.world.free_radius)
    stream = ex.scan_stream(truth, cfg, sensor, 0)[:scans]

    def run(mod):
        saved = {n: getattr(kernels, n) for n in ("trace", "crm_cone_update")}
        try:
            kernels.trace, kernels.crm_cone_update = mod.trace, mod.crm_cone_update
            b = init_prior(cfg.grid_spec(), cfg.mapper.bins)
            for scan in stream:
                update_map(b, scan, sensor)
        finally:
            for n, f in saved.items():
                setattr(kernels, n, f)

    return run


def main(argv=None):
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--repeat", type=int, default=5)
    parser.add_argument("--scans", type=int, default=100)
    args = parser.parse_args(argv)

    cfg = ScenarioConfig()
    cases = kernel_cases(cfg)
    cases[f"crm mapping, {args.scans} scans"] = full_run(cfg, args.scans)
    mods = kernels.backends()
    names = sorted(mods)

    print(f"{'case':<32}" + "".join(f"{n + ' (ms)':>16}" for n in names) + f"{'speedup':>10}")
    for label, fn in cases.items():
        best = {n: min(timeit.repeat(lambda: fn(mods[n]), number=1, repeat=args.repeat)) for n in names}
        speedup = best["python"] / best["cython"] if "cython" in best else float("nan")
        print(f"{label:<32}" + "".join(f"{best[n] * 1e3:>16.2f}" for n in names) + f"{speedup:>9.1f}x")
    if "cython" not in mods:
        print("compiled backend not built; only the fallback was timed")


if __name__ == "__main__":
    main()

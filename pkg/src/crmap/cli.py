"""Command-line entry point.

Exit codes: 0 success, 1 usage or configuration error, 2 no plan found.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

from . import experiments as ex
from . import kernels
from .config import ConfigError, ScenarioConfig, load_config, validate
from .planner import NoPlanError

log = logging.getLogger("crmap")

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_NO_PLAN = 2


def _write_record_json(out: Path, payload: dict) -> None:
    out.mkdir(parents=True, exist_ok=True)
    (out / "run.json").write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n")


def cmd_simulate(cfg: ScenarioConfig, out: Path, args) -> int:
    record = ex.run_scenario(cfg)
    ex.write_run(record, cfg.grid_spec(), out)
    _write_record_json(out, {
        "config": record.config,
        "method": record.method,
        "rng": record.rng_algorithm,
        "scans": len(record.series),
        "final_error": record.final_error,
        "I_c": record.ic,
    })
    print(f"{record.method}: final error {record.final_error:.3f}, I_c {record.ic:.3f} "
          f"({len(record.series)} scans, {record.wall_time:.2f}s)")
    return EXIT_OK


def cmd_sweep_ism(cfg: ScenarioConfig, out: Path, args) -> int:
    rows = ex.run_ism_sweep(cfg, jobs=args.jobs)
    ex.write_ism_sweep(rows, out)
    crm = rows[-1]
    ism_errors = sorted(r.error for r in rows[:-1])
    print(f"crm error {crm.error:.3f} I_c {crm.inconsistency:.3f}; "
          f"ism error range [{ism_errors[0]:.3f}, {ism_errors[-1]:.3f}]")
    return EXIT_OK


def cmd_sweep_noise(cfg: ScenarioConfig, out: Path, args) -> int:
    results = ex.run_noise_sweep(cfg, jobs=args.jobs)
    ex.write_noise_sweep(results, out)
    for var, crm, ism in results:
        print(f"noise {var:g}: crm {crm.final_error:.3f}  ism {ism.final_error:.3f}")
    return EXIT_OK


def cmd_montecarlo(cfg: ScenarioConfig, out: Path, args) -> int:
    rows = ex.run_montecarlo(cfg, args.maps, jobs=args.jobs)
    ex.write_montecarlo(rows, out)
    err_wins = sum(r.error_crm < r.error_ism for r in rows)
    ic_wins = sum(r.ic_crm < r.ic_ism for r in rows)
    print(f"crm lower error on {err_wins}/{len(rows)} maps, lower I_c on {ic_wins}/{len(rows)}")
    return EXIT_OK


def cmd_plan(cfg: ScenarioConfig, out: Path, args) -> int:
    try:
        run = ex.run_plan(cfg)
    except NoPlanError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_NO_PLAN
    ex.write_plan(run, cfg.sensor_spec(), out, cfg.plan.variance_power)
    print(f"chose candidate {run.result.index} of {len(run.candidates)}, cost {run.result.cost:.4f}")
    return EXIT_OK


def cmd_oracle_check(cfg: ScenarioConfig, out: Path, args) -> int:
    report = ex.run_oracle_check(cfg)
    ex.write_oracle(report, out)
    worst = max(report.lemma_deviations, default=0.0)
    print(f"lemma: max deviation {worst:.3g} ({'pass' if report.lemma_ok else 'FAIL'}); "
          f"crm closer to exact posterior in {report.dominance_rate:.1%} of {len(report.trials)} trials")
    return EXIT_OK


COMMANDS = {
    "simulate": (cmd_simulate, "run one mapping scenario"),
    "sweep-ism": (cmd_sweep_ism, "36 inverse sensor models plus CRM on one world"),
    "sweep-noise": (cmd_sweep_noise, "CRM and log-odds across noise variances"),
    "montecarlo": (cmd_montecarlo, "CRM and log-odds over many random worlds"),
    "plan": (cmd_plan, "select a path through the mapped belief"),
    "oracle-check": (cmd_oracle_check, "compare against exact enumeration"),
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="crmap", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)
    for name, (_, help_text) in COMMANDS.items():
        p = sub.add_parser(name, help=help_text)
        p.add_argument("--config", type=Path, help="JSON scenario config (defaults if omitted)")
        p.add_argument("--out", type=Path, required=True, help="output directory")
        p.add_argument("--seed", type=int, help="override world and simulation seeds")
        if name in ("sweep-ism", "sweep-noise", "montecarlo"):
            p.add_argument("--jobs", type=int, default=1, help="worker processes")
        if name == "montecarlo":
            p.add_argument("--maps", type=int, help="override montecarlo.n_maps")
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code == 0 else EXIT_USAGE
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING)
    log.debug("kernel backend: %s", kernels.BACKEND)
    try:
        cfg = load_config(args.config) if args.config else validate(ScenarioConfig())
        if args.seed is not None:
            if args.seed < 0:
                raise ConfigError("--seed must be nonnegative")
            cfg = cfg.with_seed(args.seed)
        if getattr(args, "jobs", 1) < 1:
            raise ConfigError("--jobs must be at least 1")
        if getattr(args, "maps", None) is not None and args.maps < 1:
            raise ConfigError("--maps must be at least 1")
        handler = COMMANDS[args.command][0]
        return handler(cfg, args.out, args)
    except (ConfigError, FileNotFoundError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except ValueError as exc:
        # e.g. a goal outside the grid
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())

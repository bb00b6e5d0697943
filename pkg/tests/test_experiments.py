import json
import math

import numpy as np
import pytest

from crmap import experiments as ex
from crmap.config import ConfigError, ScenarioConfig, from_dict, load_config, validate
from crmap.io import pgm_bytes, read_pgm, write_pgm
from crmap.grid import GridSpec


def short(duration=1.0, **sections):
    data = {"sim": {"duration_s": duration}}
    data.update(sections)
    return from_dict(data)


# configuration


def test_defaults_validate_and_match_shipped_file(tmp_path):
    cfg = validate(ScenarioConfig())
    shipped = load_config(__file__.rsplit("/tests/", 1)[0] + "/configs/default.json")
    assert shipped.to_dict() == cfg.to_dict()
    assert cfg.n_scans == 500
    assert cfg.grid_spec().n == 400
    assert cfg.sensor_spec().fov == pytest.approx(math.radians(28))


@pytest.mark.parametrize(
    "data, where",
    [
        ({"sensor": {"noise": 1}}, "sensor.noise"),
        ({"bogus": {}}, "bogus"),
        ({"mapper": {"ism_params": {"qh": 0.6}}}, "mapper.ism_params.qh"),
    ],
)
def test_unknown_keys_rejected_with_path(data, where):
    with pytest.raises(ConfigError, match=f"^{where}: unknown key"):
        from_dict(data)


@pytest.mark.parametrize(
    "data",
    [
        {"sensor": {"noise_var": 0}},
        {"sensor": {"pixels": 1.5}},
        {"grid": {"extent_x": 1.05}},
        {"mapper": {"kind": "other"}},
        {"mapper": {"ism_params": {"q_l": 0.7}}},
        {"sim": {"seed": -1}},
        {"sim": "fast"},
        {"montecarlo": {"n_maps": 0}},
    ],
)
def test_invalid_values_rejected(data):
    with pytest.raises(ConfigError):
        from_dict(data)


def test_bad_json(tmp_path):
    p = tmp_path / "c.json"
    p.write_text("{nope")
    with pytest.raises(ConfigError):
        load_config(p)


def test_with_seed_sets_both_seeds_and_copies():
    cfg = ScenarioConfig()
    seeded = cfg.with_seed(9)
    assert (seeded.sim.seed, seeded.world.seed) == (9, 9)
    assert cfg.sim.seed == 0


# experiment pieces


def test_world_generation():
    spec = GridSpec.centered(2.0, 2.0, 0.1)
    a = ex.generate_world(spec, 3, 0.3)
    assert np.array_equal(a.occupancy, ex.generate_world(spec, 3, 0.3).occupancy)
    assert not np.array_equal(a.occupancy, ex.generate_world(spec, 4, 0.3).occupancy)
    near = np.hypot(*spec.centers().T) <= 0.3
    assert np.all(a.occupancy[near] == 0)
    assert 0.3 < a.occupancy[~near].mean() < 0.7


def test_free_radius_covering_grid_gives_empty_world():
    spec = GridSpec.centered(2.0, 2.0, 0.1)
    assert not ex.generate_world(spec, 0, 1.5).occupancy.any()
    with pytest.raises(ValueError):
        ex.generate_world(spec, 0, -0.1)


def test_default_spin_is_two_turns():
    poses = ex.scan_poses(ScenarioConfig())
    assert len(poses) == 500
    turned = sum(math.remainder(b.theta - a.theta, 2 * math.pi) for a, b in zip(poses, poses[1:]))
    # 500 scans at 1.5 degrees apart, about two full turns
    assert math.degrees(turned) == pytest.approx(499 * 1.5)


def test_robot_spins_in_place():
    poses = ex.scan_poses(short(2.0))
    assert len(poses) == 20
    assert all((p.x, p.y) == (0.0, 0.0) for p in poses)
    assert poses[1].theta - poses[0].theta == pytest.approx(math.radians(1.5))


@pytest.mark.parametrize("kind", ["crm", "ism"])
def test_no_scans_leaves_prior_error(kind):
    rec = ex.run_scenario(short(0.0, mapper={"kind": kind}))
    assert len(rec.series) == 0
    assert rec.final_error == pytest.approx(200.0, abs=1e-9)


def test_run_records_error_series():
    rec = ex.run_scenario(short(1.0))
    assert rec.method == "crm"
    np.testing.assert_allclose(rec.series.time, np.arange(1, 11) / 10.0)
    assert rec.series.total_abs_error[-1] == pytest.approx(rec.final_error)
    assert rec.series.total_abs_error[-1] < 200.0
    assert rec.stats.pixels == 150 and rec.stats.skipped == 0


def test_paired_runs_share_world_and_readings():
    cfg = short(1.0)
    crm, ism = ex.paired_runs(cfg, [("crm", None), ("ism", None)])
    assert crm.truth is ism.truth or np.array_equal(crm.truth.occupancy, ism.truth.occupancy)
    assert (crm.method, ism.method) == ("crm", "ism")


def test_sweep_rows_in_order():
    rows = ex.run_ism_sweep(short(0.3))
    assert len(rows) == 37
    assert [r.config_id for r in rows] == list(range(37))
    assert rows[-1].method == "crm" and rows[-1].params is None
    assert all(r.method == "ism" for r in rows[:-1])
    # every run saw the same scans, so runs with equal models agree exactly
    again = ex.run_ism_sweep(short(0.3))
    assert [r.error for r in again] == [r.error for r in rows]


def test_plan_goal_outside_grid():
    with pytest.raises(ValueError):
        ex.run_plan(short(0.5, plan={"goal_x": 5.0}))


def test_oracle_report_small():
    rep = ex.run_oracle_check(short(0.0, oracle={"trials": 10, "lemma_worlds": 2}))
    assert rep.lemma_ok
    assert len(rep.trials) == 10
    assert 0.0 <= rep.dominance_rate <= 1.0


# files


def test_pgm_round_trip(tmp_path):
    spec = GridSpec(0.3, 0.2, 0.1)
    values = np.array([0.0, 0.5, 1.0, 0.25, 0.75, 1.0])
    img = read_pgm(write_pgm(tmp_path / "m.pgm", spec, values))
    # top image row is the top grid row
    np.testing.assert_array_equal(img, [[64, 191, 255], [0, 128, 255]])
    assert pgm_bytes(spec, values).startswith(b"P5\n3 2\n255\n")

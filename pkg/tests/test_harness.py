import math
import os
from dataclasses import replace

import numpy as np
import pytest

from collabsim import cli, compression, exchange, harness
from collabsim.harness import Ablations, ExperimentConfig
from collabsim.scenario import WorldConfig

SMALL = ExperimentConfig(
    world=WorldConfig(grid_height=32, grid_width=48, num_agents=3, num_objects=8, duration=8, sensing_range=12.0),
    n_L=32, codebook_iters=5, calibration_seeds=(500,), calibration_stride=2, seeds=(1, 2))

INI = """
[world]
grid_height = 32
grid_width = 48
num_agents = 3
num_objects = 8
duration = 6
sensing_range = 12.0

[experiment]
budgets = 0.0, 0.05, 1.0   ; fractions of the grid
n_L = 32
codebook_iters = 5
calibration_seeds = 500
calibration_stride = 2
seeds = 1-2

[sweep]
intervals = 1 3
codebooks = 16x1, 32x2
"""


@pytest.fixture(scope="module")
def full():
    return harness.run_episode(SMALL, 1, baseline=True)


def test_parse_config():
    cfg = harness.parse_config(INI + "\n[channel]\nlatency = 2\n\n[ablations]\npredictor = no\n\n[tracker]\ndeath_after = 5\n")
    assert cfg.world.grid_width == 48 and cfg.world.duration == 6
    assert cfg.budgets == (0.0, 0.05, 1.0) and cfg.budget == 1.0 and cfg.seeds == (1, 2)
    assert cfg.calibration_seeds == (500,)
    assert cfg.intervals == (1, 3) and cfg.codebooks == ((16, 1), (32, 2))
    assert cfg.channel.latency == 2 and not cfg.ablations.predictor and cfg.ablations.spatial
    assert cfg.tracking.death_after == 5
    with pytest.raises(ValueError):
        harness.parse_config("[experiment]\ninterval = 0\n")
    with pytest.raises(ValueError):
        harness.parse_config("[world]\nnum_agents = 0\n")


def test_config_validation():
    with pytest.raises(ValueError):
        replace(SMALL, budgets=(-0.1,)).validate()
    with pytest.raises(ValueError):
        replace(SMALL, budgets=()).validate()
    assert SMALL.cells_for(0.05) == round(0.05 * 32 * 48)
    assert Ablations().without("channel") == Ablations(channel=False)


def test_collaboration_off_equals_single_agent_arm(full):
    solo = harness.run_episode(replace(SMALL, ablations=Ablations(collaboration=False)), 1)
    assert solo.ledger == [] and solo.baseline is None
    assert solo.detections_csv() == full.baseline.detections_csv()
    assert solo.tracks_csv() == full.baseline.tracks_csv()
    assert (solo.ap50, solo.mota) == (full.baseline.ap50, full.baseline.mota)


def test_zero_budget_sends_nothing_and_matches_single_agent(full):
    res = harness.run_episode(replace(SMALL, budgets=(0.0,)), 1)
    assert res.raw_bytes == 0 and res.ledger == []
    assert res.detections_csv() == full.baseline.detections_csv()
    assert abs(res.ap50 - full.baseline.ap50) <= 0.01


def test_same_seed_is_byte_identical(full, tmp_path):
    again = harness.run_episode(SMALL, 1, baseline=True)
    assert again.detections_csv() == full.detections_csv()
    assert again.tracks_csv() == full.tracks_csv()
    full.write(tmp_path / "a")
    again.write(tmp_path / "b")
    for name in ("detections.csv", "tracks.csv", "ledger.csv", "summary.csv"):
        assert (tmp_path / "a" / name).read_bytes() == (tmp_path / "b" / name).read_bytes()


def test_episode_invariants(full):
    assert full.ledger and full.raw_bytes > 0
    assert full.unsolicited_cells == 0 and full.adjacency_mismatch == 0
    assert full.max_sender_cells <= full.budget_cells
    assert full.min_covariance_eigenvalue >= -1e-9
    assert full.baseline.min_covariance_eigenvalue >= -1e-9
    assert full.sampled == tuple(range(SMALL.world.duration))
    for e in full.ledger:
        assert e.sender != e.receiver
        assert e.payload_bits == e.cells * 5  # ceil(log2 32) bits, one index per cell
        assert e.raw_bytes == exchange.HEADER_BYTES + exchange.CELL_BYTES * e.cells + math.ceil(e.payload_bits / 8)
        assert e.paper_metric == pytest.approx(math.log2(5 / 8))
    assert 0 <= full.ap70 <= full.ap50 <= 1


def test_budget_caps_each_sender():
    res = harness.run_episode(replace(SMALL, budgets=(0.01,)), 2)
    assert res.budget_cells == round(0.01 * 32 * 48)
    assert 0 < res.max_sender_cells <= res.budget_cells


def test_raw_channel_costs_full_floats(full):
    raw = harness.run_episode(replace(SMALL, ablations=Ablations(channel=False)), 1)
    assert raw.ledger
    for e in raw.ledger:
        assert e.payload_bits == e.cells * 64 * 32 and e.paper_metric == 8.0
    assert raw.raw_bytes > full.raw_bytes


def test_temporal_sampling_skips_steps():
    res = harness.run_episode(replace(SMALL, interval=3, threshold=1e9), 1)
    assert res.sampled == (0, 3, 6)
    assert {e.t for e in res.ledger} <= {0, 3, 6}


def test_latency_delays_delivery(full):
    for ab in (Ablations(), Ablations(predictor=False)):
        res = harness.run_episode(replace(SMALL, channel=exchange.ChannelModel(latency=2), ablations=ab), 1)
        assert res.ledger and res.unsolicited_cells == 0
        # nothing has arrived before t=2, so the first frames are ego-only
        for key in [(t, j) for t in (0, 1) for j in range(3)]:
            assert res.detections[key] == full.baseline.detections[key]
        assert any(res.detections[(t, j)] != full.baseline.detections[(t, j)] for t in range(2, 8) for j in range(3))


def test_pose_error_runs_and_is_seeded():
    cfg = replace(SMALL, pose_error_std=0.6)
    a, b = harness.run_episode(cfg, 1), harness.run_episode(cfg, 1)
    assert a.detections_csv() == b.detections_csv()


def test_sweep_averages_seeds_and_orders_by_bytes(tmp_path):
    cfg = replace(SMALL, budgets=(0.0, 0.01, 1.0), output_dir=str(tmp_path))
    recs = harness.sweep(cfg, "budget", seeds=(1, 2))
    assert [r.budget for r in recs] == [0.0, 0.01, 1.0]
    assert [r.raw_bytes for r in recs] == sorted(r.raw_bytes for r in recs)
    runs = [harness.run_episode(replace(cfg, budgets=(0.01,)), s) for s in (1, 2)]
    assert recs[1].ap50 == pytest.approx(np.mean([r.ap50 for r in runs]))
    assert recs[1].raw_bytes == pytest.approx(np.mean([r.raw_bytes for r in runs]))
    assert recs[0].paper_metric == -math.inf
    for name in ("sweep_budget.csv", "sweep_budget_runs.csv", "plot_tradeoff.py"):
        assert (tmp_path / name).exists()
    with pytest.raises(ValueError):
        harness.sweep(cfg, "bandwidth")


def test_ablate_rows(tmp_path):
    cfg = replace(SMALL, world=replace(SMALL.world, duration=4), output_dir=str(tmp_path))
    recs = harness.ablate(cfg, seeds=(1,))
    labels = {r.budget for r in recs}
    assert labels == {"full"} | {f"no_{s}" for s in harness.STAGES}
    by = {r.budget: r for r in recs}
    assert by["no_collaboration"].raw_bytes == 0
    assert by["no_channel"].raw_bytes > by["full"].raw_bytes


def test_calibration_is_deterministic_and_monotone(tmp_path):
    harness._CODEBOOKS.clear()
    a = harness.calibrate_codebook(SMALL, path=str(tmp_path / "book.bin"))
    harness._CODEBOOKS.clear()
    b = harness.calibrate_codebook(SMALL)
    assert a == b and compression.load_codebook(str(tmp_path / "book.bin")) == a
    for trace in a.objective_trace:
        assert all(y <= x * (1 + 1e-12) for x, y in zip(trace, trace[1:]))
    two = harness.calibrate_codebook(replace(SMALL, n_R=2))
    assert two.n_R == 2 and len(two.objective_trace) == 2 and not two.codes[0].any()
    with pytest.raises(ValueError):
        harness.calibrate_codebook(SMALL, seeds=())


def write_ini(tmp_path):
    path = tmp_path / "small.ini"
    path.write_text(INI)
    return str(path)


def test_cli_run_is_byte_identical(tmp_path, capsys):
    ini = write_ini(tmp_path)
    for out in ("a", "b"):
        assert cli.main(["run", "--config", ini, "--seed", "7", "--out", str(tmp_path / out)]) == 0
    names = sorted(os.listdir(tmp_path / "a"))
    assert {"detections.csv", "tracks.csv", "ledger.csv", "summary.csv", "ground_truth.csv"} <= set(names)
    for name in names:
        assert (tmp_path / "a" / name).read_bytes() == (tmp_path / "b" / name).read_bytes()
    assert "seed=7" in capsys.readouterr().out


def test_cli_other_commands(tmp_path):
    ini = write_ini(tmp_path)
    assert cli.main(["calibrate", "--config", ini, "--out", str(tmp_path)]) == 0
    assert (tmp_path / "codebook.bin").exists()
    assert cli.main(["sweep", "--config", ini, "--axis", "interval", "--seed", "1", "--out", str(tmp_path)]) == 0
    assert (tmp_path / "sweep_interval.csv").read_text().count("\n") == 3


def test_cli_errors(tmp_path, capsys):
    assert cli.main(["run", "--seed", "-1"]) == 2
    assert cli.main(["run", "--config", str(tmp_path / "missing.ini")]) == 1
    bad = tmp_path / "bad.ini"
    bad.write_text("[experiment]\ninterval = 0\n")
    assert cli.main(["run", "--config", str(bad)]) == 1
    assert "error:" in capsys.readouterr().err
    with pytest.raises(SystemExit):
        cli.main(["sweep"])


def test_single_code_calibration_decodes_everything_to_it():
    book = harness.calibrate_codebook(replace(SMALL, n_L=1))
    assert book.n_L == 1 and book.bits_per_index == 0
    feats = np.random.default_rng(8).random((4, 4, 64))
    z = compression.select_content(feats, *(np.ones((4, 4), bool),) * 3)
    idx = compression.quantize(z, book)
    assert np.all(idx.indices == 0)
    assert np.array_equal(compression.reconstruct(idx, book), np.tile(book.codes[0], (16, 1)))


def test_more_codes_quantize_held_out_features_no_worse():
    from collabsim import perception, scenario
    world = replace(SMALL.world, seed=777)
    frame = scenario.generate_world(world)[3]
    feats = [perception.encode(scenario.sense(frame, p, world, 777), world) for p in scenario.place_agents(world)]
    z = [compression.select_content(f, *(np.ones(world.shape, bool),) * 3) for f in feats]
    err = {}
    for n_L in (4, 256):
        book = harness.calibrate_codebook(replace(SMALL, n_L=n_L))
        err[n_L] = np.mean(np.concatenate([
            np.square(compression.reconstruct(compression.quantize(s, book), book) - s.values).sum(1) for s in z]))
    assert err[256] <= err[4]


def test_recalibration_writes_identical_bytes(tmp_path):
    harness._CODEBOOKS.clear()
    harness.calibrate_codebook(SMALL, path=str(tmp_path / "a.bin"))
    harness._CODEBOOKS.clear()
    harness.calibrate_codebook(SMALL, path=str(tmp_path / "b.bin"))
    assert (tmp_path / "a.bin").read_bytes() == (tmp_path / "b.bin").read_bytes()


def test_sweep_averages_match_per_seed_csv(tmp_path):
    import csv
    cfg = replace(SMALL, world=replace(SMALL.world, duration=4), intervals=(1, 2), output_dir=str(tmp_path))
    recs = harness.sweep(cfg, "interval", seeds=(1, 2, 3))
    with open(tmp_path / "sweep_interval_runs.csv") as fh:
        rows = list(csv.DictReader(fh))
    for rec in recs:
        mine = [float(r["ap50"]) for r in rows if r["budget"] == str(rec.budget)]
        assert len(mine) == 3 and rec.ap50 == pytest.approx(np.mean(mine), abs=1e-6)
    one = harness.sweep(replace(cfg, intervals=(2,)), "interval", seeds=(1,), write=False)
    assert len(one) == 1 and one[0].budget == 2

from pathlib import Path

import numpy as np
import pytest

from mvsrefine.main import EXIT_DATA, EXIT_OK, EXIT_USAGE, cli
from mvsrefine.parsers.pfm_parser import read_pfm, write_pfm
from mvsrefine.parsers.ply_parser import read_ply
from mvsrefine.parsers.report_parser import read_report, read_trace
from mvsrefine.parsers.workspace import Workspace


def run_pipeline(root: Path, workers: int) -> Path:
    ws = root / "ws"
    common = ["--workers", str(workers)]
    assert cli(common + ["synth", str(ws), "--bundled", "two_plane"]) == EXIT_OK
    assert cli(common + ["depth", str(ws), "--seed", "3"]) == EXIT_OK
    assert cli(common + ["refine", str(ws), "--steps", "20"]) == EXIT_OK
    assert cli(common + ["fuse", str(ws), "--min-views", "2"]) == EXIT_OK
    report = root / "cloud.txt"
    assert cli(["eval-cloud", str(ws / "fused.ply"), str(ws / "gt_cloud.ply"), "--report", str(report)]) == EXIT_OK
    return ws


def tree_bytes(root: Path):
    return {
        str(path.relative_to(root)): path.read_bytes()
        for path in sorted(root.rglob("*"))
        if path.is_file()
    }


def test_unknown_subcommand_is_a_usage_error(capsys):
    assert cli(["frobnicate"]) == EXIT_USAGE
    assert "frobnicate" in capsys.readouterr().err


def test_invalid_flag_value_is_a_usage_error(tmp_path):
    assert cli(["depth", str(tmp_path), "--window", "4"]) == EXIT_USAGE
    assert cli(["fuse", str(tmp_path), "--stage", "final"]) == EXIT_USAGE
    assert cli(["--log-level", "LOUD", "depth", str(tmp_path)]) == EXIT_USAGE


def test_missing_input_file_is_a_usage_error(tmp_path):
    assert cli(["eval-cloud", str(tmp_path / "a.ply"), str(tmp_path / "b.ply")]) == EXIT_USAGE


def test_eval_depth_with_mismatched_sizes_is_a_data_error(tmp_path, capsys):
    write_pfm(tmp_path / "est.pfm", np.full((4, 4), 5.0))
    write_pfm(tmp_path / "gt.pfm", np.full((4, 6), 5.0))
    assert cli(["eval-depth", str(tmp_path / "est.pfm"), str(tmp_path / "gt.pfm")]) == EXIT_DATA
    assert "DimensionMismatch" in capsys.readouterr().err


def test_malformed_pfm_is_a_data_error(tmp_path):
    (tmp_path / "est.pfm").write_bytes(b"PF\n1 1\n-1.0\n" + bytes(12))
    write_pfm(tmp_path / "gt.pfm", np.ones((1, 1)))
    assert cli(["eval-depth", str(tmp_path / "est.pfm"), str(tmp_path / "gt.pfm")]) == EXIT_DATA


def test_invalid_scene_file_is_a_data_error(tmp_path):
    (tmp_path / "bad.scene").write_text("background 600\nrect 0 1 0 1 800\n")
    assert cli(["synth", str(tmp_path / "ws"), "--scene", str(tmp_path / "bad.scene")]) == EXIT_DATA


def test_eval_depth_reports_metrics(tmp_path):
    gt = np.full((8, 8), 100.0)
    gt[:, 4:] = 200.0
    write_pfm(tmp_path / "gt.pfm", gt)
    write_pfm(tmp_path / "est.pfm", gt + 2.0)
    write_pfm(tmp_path / "base.pfm", gt[::2, ::2] + 4.0)
    report = tmp_path / "depth.txt"
    code = cli([
        "eval-depth", str(tmp_path / "est.pfm"), str(tmp_path / "gt.pfm"),
        "--baseline", str(tmp_path / "base.pfm"), "--report", str(report),
    ])
    assert code == EXIT_OK
    values = read_report(report)
    assert values["mae"] == 2.0
    assert values["baseline_mae"] == 4.0
    assert values["mae_reduction_pct"] == 50.0


def test_synth_writes_a_workspace(tmp_path):
    ws = tmp_path / "ws"
    assert cli(["synth", str(ws), "--bundled", "plane", "--seed", "5"]) == EXIT_OK
    assert (ws / "scene.txt").read_text().count("seed 5") == 1
    for name in ("00000000", "00000001", "00000002"):
        assert (ws / "images" / f"{name}.png").is_file()
        assert read_pfm(ws / "gt" / f"{name}.pfm").shape == (64, 64)
    assert len(read_ply(ws / "gt_cloud.ply")) == 3 * 128 * 128


def test_synth_saves_boundary_masks(tmp_path):
    ws = tmp_path / "ws"
    assert cli(["synth", str(ws), "--bundled", "two_plane"]) == EXIT_OK
    boundary = Workspace(ws).load_boundary("00000000").grid
    assert np.flatnonzero(boundary.any(axis=0)).tolist() == [31, 32]
    assert boundary[:, 31].all()


@pytest.mark.slow
def test_full_pipeline_end_to_end(tmp_path):
    ws = run_pipeline(tmp_path, workers=1)
    assert read_pfm(ws / "depth" / "00000000.pfm").shape == (32, 32)
    assert read_pfm(ws / "refined" / "00000000.pfm").shape == (64, 64)
    trace = read_trace(ws / "refined" / "00000000_trace.csv")
    assert len(trace) == 21
    assert len(read_ply(ws / "fused.ply")) > 0
    metrics = read_report(tmp_path / "cloud.txt")
    assert set(metrics) == {"accuracy", "completeness", "overall", "precision_pct", "recall_pct", "fscore"}

    report = tmp_path / "losses.json"
    assert cli(["losses", str(ws), "--report", str(report)]) == EXIT_OK
    assert set(read_report(report)) >= {"l_gt", "l_ed", "l_sm", "l_bi", "l_total"}
    assert cli([
        "eval-depth", str(ws / "refined" / "00000000.pfm"), str(ws / "gt" / "00000000.pfm"),
        "--baseline", str(ws / "depth" / "00000000.pfm"),
    ]) == EXIT_OK


@pytest.mark.slow
def test_pipeline_is_byte_identical_across_runs_and_workers(tmp_path):
    first = run_pipeline(tmp_path / "a", workers=1)
    second = run_pipeline(tmp_path / "b", workers=2)
    assert tree_bytes(first) == tree_bytes(second)
    assert (tmp_path / "a" / "cloud.txt").read_bytes() == (tmp_path / "b" / "cloud.txt").read_bytes()

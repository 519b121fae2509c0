import json

import numpy as np
import pytest

from mvsrefine.exceptions import FormatError, InvalidSpec, MalformedCamFile, MalformedHeader, UnexpectedEof
from mvsrefine.models.cloud import PointCloud
from mvsrefine.models.depth import BimodalDepthMap
from mvsrefine.models.scene import SceneSpec
from mvsrefine.parsers.cam_parser import CameraParameters, format_cam, parse_cam, read_cam, write_cam
from mvsrefine.parsers.image_parser import read_png, to_bytes, write_png
from mvsrefine.parsers.pfm_parser import decode_pfm, read_bimodal, read_pfm, write_bimodal, write_pfm
from mvsrefine.parsers.ply_parser import read_ply, write_ply
from mvsrefine.parsers.report_parser import TRACE_COLUMNS, read_report, read_trace, write_report, write_trace
from mvsrefine.parsers.scene_parser import format_scene_spec, parse_scene_spec

from conftest import make_view

REFERENCE_CAM = """extrinsic
1 0 0 0
0 1 0 0
0 0 1 0
0 0 0 1

intrinsic
100 0 50
0 100 50
0 0 1

0.5 0.049479166666666664 192 10
"""


def test_pfm_single_value(tmp_path):
    write_pfm(tmp_path / "one.pfm", np.array([[42.0]]))
    grid = read_pfm(tmp_path / "one.pfm")
    assert grid.dtype == np.float32
    assert grid.tolist() == [[42.0]]
    assert (tmp_path / "one.pfm").read_bytes().startswith(b"Pf\n1 1\n-1.0\n")


def test_pfm_keeps_row_order(tmp_path):
    grid = np.array([[1.5, -2.25, 3.0], [4.0, 5.125, 6e-8]], dtype=np.float32)
    write_pfm(tmp_path / "grid.pfm", grid)
    back = read_pfm(tmp_path / "grid.pfm")
    assert back.tobytes() == grid.tobytes()
    # bottom row first on disk
    payload = (tmp_path / "grid.pfm").read_bytes()[len(b"Pf\n3 2\n-1.0\n"):]
    assert np.frombuffer(payload, dtype="<f4")[:3].tolist() == grid[1].tolist()


def test_pfm_reads_big_endian():
    data = b"Pf\n2 1\n1.0\n" + np.array([7.0, 8.0], dtype=">f4").tobytes()
    assert decode_pfm(data).tolist() == [[7.0, 8.0]]


def test_pfm_rejects_color_and_garbage():
    with pytest.raises(MalformedHeader):
        decode_pfm(b"PF\n1 1\n-1.0\n" + bytes(12))
    with pytest.raises(MalformedHeader):
        decode_pfm(b"P6\n1 1\n255\n" + bytes(3))
    with pytest.raises(MalformedHeader):
        decode_pfm(b"Pf\n1")


def test_pfm_truncated_payload():
    with pytest.raises(UnexpectedEof):
        decode_pfm(b"Pf\n2 2\n-1.0\n" + bytes(12))


def test_bimodal_planes_round_trip(tmp_path):
    theta = BimodalDepthMap(
        alpha=np.full((2, 3), 0.75),
        mu1=np.full((2, 3), 400.0),
        sigma1=np.full((2, 3), 0.5),
        mu2=np.full((2, 3), 600.0),
        sigma2=np.full((2, 3), 2.0),
    )
    paths = write_bimodal(tmp_path, "00000000", theta)
    expected = ["00000000.alpha.pfm", "00000000.mu1.pfm", "00000000.mu2.pfm", "00000000.sigma1.pfm", "00000000.sigma2.pfm"]
    assert sorted(p.name for p in tmp_path.iterdir()) == expected
    assert sorted(p.name for p in paths.values()) == expected
    back = read_bimodal(tmp_path, "00000000")
    for name, plane in theta.planes().items():
        np.testing.assert_array_equal(getattr(back, name), plane)


def test_cam_round_trip(tmp_path):
    view = make_view(center=(0.1, -0.2, 0.3), fx=100.0, width=101, height=101, cx=50.0, cy=50.0)
    params = CameraParameters.from_view(view)
    write_cam(tmp_path / "cam.txt", params)
    back = read_cam(tmp_path / "cam.txt")
    assert back == params
    rebuilt = back.to_view(np.zeros((101, 101)))
    np.testing.assert_array_equal(rebuilt.pose.translation, view.pose.translation)
    assert rebuilt.intrinsics == view.intrinsics


def test_reference_cam_parses():
    params = parse_cam(REFERENCE_CAM)
    assert params.extrinsic == np.eye(4).tolist()
    assert params.intrinsic == [[100.0, 0.0, 50.0], [0.0, 100.0, 50.0], [0.0, 0.0, 1.0]]
    assert (params.depth_min, params.depth_max, params.depth_sample_count) == (0.5, 10.0, 192.0)
    assert parse_cam(format_cam(params)) == params


def test_cam_missing_depth_line():
    text = REFERENCE_CAM.rsplit("\n", 2)[0] + "\n"
    with pytest.raises(MalformedCamFile):
        parse_cam(text)


def test_cam_bad_rows():
    with pytest.raises(MalformedCamFile):
        parse_cam(REFERENCE_CAM.replace("0 0 1 0\n", "0 0 1\n", 1))
    with pytest.raises(MalformedCamFile):
        parse_cam(REFERENCE_CAM.replace("intrinsic", "intrinsics"))
    with pytest.raises(MalformedCamFile):
        parse_cam(REFERENCE_CAM.replace("1 0 0 0", "2 0 0 0")).to_view(np.zeros((100, 100)))


def test_ply_round_trip(tmp_path, rng):
    colors = to_bytes(rng.uniform(0, 1, (25, 3))) / 255.0
    cloud = PointCloud(
        points=rng.normal(0, 100, (25, 3)),
        colors=colors,
        view_ids=rng.integers(0, 3, 25),
        consistency=rng.integers(1, 4, 25),
    )
    write_ply(tmp_path / "cloud.ply", cloud)
    back = read_ply(tmp_path / "cloud.ply")
    np.testing.assert_array_equal(back.points, cloud.points)
    np.testing.assert_array_equal(back.colors, cloud.colors)
    np.testing.assert_array_equal(back.view_ids, cloud.view_ids)
    np.testing.assert_array_equal(back.consistency, cloud.consistency)
    assert (tmp_path / "cloud.ply").read_bytes().startswith(b"ply\nformat binary_little_endian 1.0\n")


def test_ply_empty_and_broken(tmp_path):
    write_ply(tmp_path / "empty.ply", PointCloud.empty())
    assert len(read_ply(tmp_path / "empty.ply")) == 0
    (tmp_path / "broken.ply").write_bytes(b"not a ply file")
    with pytest.raises(FormatError):
        read_ply(tmp_path / "broken.ply")


def test_png_quantization(tmp_path):
    image = np.array([[0.0, 0.5, 1.0], [0.2, 1.2, -0.1]])
    write_png(tmp_path / "gray.png", image)
    back = read_png(tmp_path / "gray.png")
    assert (back * 255).round().astype(int).tolist() == [[0, 128, 255], [51, 255, 0]]
    (tmp_path / "bad.png").write_bytes(b"nope")
    with pytest.raises(FormatError):
        read_png(tmp_path / "bad.png")


def test_scene_spec_parses_with_comments_and_defaults():
    spec = parse_scene_spec(
        """
        # a slab in front of a wall
        size 32 24
        rect -10 10 -5 5 300   # foreground
        background 500
        rig ring 4 50
        """
    )
    assert (spec.width, spec.height, spec.focal) == (32, 24, 64.0)
    assert spec.rectangles[0].depth == 300.0
    assert (spec.rig.kind, spec.rig.count, spec.rig.baseline) == ("ring", 4, 50.0)
    assert parse_scene_spec(format_scene_spec(spec)) == spec


@pytest.mark.parametrize(
    "text",
    [
        "size 64\n",
        "spin 3\n",
        "focal abc\n",
        "background 600\nrect 0 10 0 10 700\n",
        "depth_range 900 100\n",
        "rig lateral 1 10\n",
        "texture value_checker seed 1 size 3\n",
        "background 1000\n",
    ],
)
def test_invalid_scene_specs(text):
    with pytest.raises(InvalidSpec):
        parse_scene_spec(text)


def test_default_scene_spec_is_valid():
    assert parse_scene_spec("") == SceneSpec()


def test_report_formats(tmp_path):
    values = {"accuracy": 0.1, "points": 12, "fscore": 2.0 / 3.0}
    write_report(tmp_path / "metrics.txt", values)
    text = (tmp_path / "metrics.txt").read_text()
    assert text.splitlines()[0] == "accuracy = 0.10000000000000001"
    assert "points = 12" in text
    assert read_report(tmp_path / "metrics.txt") == values

    write_report(tmp_path / "metrics.json", values)
    assert list(json.loads((tmp_path / "metrics.json").read_text())) == ["accuracy", "fscore", "points"]
    assert read_report(tmp_path / "metrics.json") == values


def test_report_rejects_malformed_lines(tmp_path):
    (tmp_path / "bad.txt").write_text("accuracy 0.1\n")
    with pytest.raises(FormatError):
        read_report(tmp_path / "bad.txt")


def test_trace_csv(tmp_path):
    rows = [
        {"step": 0, "total": 1.5, "l_gt": 1.0, "l_ed": 0.1, "l_sm": 0.02, "l_bi": 0.3},
        {"step": 1, "total": 1.25, "l_gt": 0.8, "l_ed": 0.1, "l_sm": 0.01, "l_bi": 0.2},
    ]
    write_trace(tmp_path / "trace.csv", rows)
    assert (tmp_path / "trace.csv").read_text().splitlines()[0] == ",".join(TRACE_COLUMNS)
    frame = read_trace(tmp_path / "trace.csv")
    assert frame["step"].tolist() == [0, 1]
    assert frame["total"].tolist() == [1.5, 1.25]
    (tmp_path / "short.csv").write_text("step,total\n0,1\n")
    with pytest.raises(FormatError):
        read_trace(tmp_path / "short.csv")

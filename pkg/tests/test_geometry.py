import numpy as np
import pytest
from pydantic import ValidationError

from conftest import make_view, random_rotation
from mvsrefine.exceptions import BehindCamera, DimensionMismatch, NonPositiveDepth
from mvsrefine.models.camera import Intrinsics, Pose
from mvsrefine.services.geometry_service import (
    homography_warp,
    in_bounds,
    plane_homography,
    project,
    project_points,
    relative_pose,
    unproject,
    unproject_pixels,
    warp_pixels,
)


def test_pose_rejects_non_orthonormal_rotation():
    with pytest.raises(ValidationError):
        Pose(rotation=np.diag([1.0, 1.0, 1.001]), translation=np.zeros(3))


def test_pose_rejects_reflection():
    with pytest.raises(ValidationError):
        Pose(rotation=np.diag([1.0, 1.0, -1.0]), translation=np.zeros(3))


def test_intrinsics_inverse_matches_numpy():
    k = Intrinsics(fx=120.0, fy=80.0, cx=40.5, cy=30.25, width=81, height=61)
    assert np.allclose(k.inverse, np.linalg.inv(k.matrix), atol=1e-15)


def test_downsampled_intrinsics_follow_pixel_center_convention():
    k = Intrinsics(fx=64.0, fy=64.0, cx=31.5, cy=31.5, width=64, height=64).downsampled(1)
    assert (k.fx, k.cx, k.width) == (32.0, 15.5, 32)


def test_corner_principal_point_survives_downsampling():
    k = Intrinsics(fx=100.0, fy=100.0, cx=0.0, cy=2.0, width=64, height=64)
    assert k.downsampled(1).cx == -0.25
    assert k.downsampled(3).cy == pytest.approx(2.5 / 8 - 0.5)
    assert k.downsampled(3).width == 8


def test_input_intrinsics_still_require_an_inside_principal_point():
    with pytest.raises(ValidationError):
        Intrinsics(fx=100.0, fy=100.0, cx=-0.25, cy=0.0, width=64, height=64)


def test_crop_keeps_a_principal_point_in_the_cut_margin():
    view = make_view(width=70, height=64, cx=66.0, cy=10.0)
    crop = view.cropped(64, 64)
    assert crop.shape == (64, 64)
    assert (crop.intrinsics.cx, crop.intrinsics.cy) == (66.0, 10.0)
    np.testing.assert_array_equal(crop.intrinsics.matrix, view.intrinsics.matrix)


def test_project_unproject_identity_camera():
    view = make_view()
    point = unproject(np.array([49.5, 49.5]), 2.0, view)
    assert np.allclose(point, [0.0, 0.0, 2.0])
    pixel, depth = project(point, view)
    assert np.allclose(pixel, [49.5, 49.5])
    assert depth == pytest.approx(2.0)


def test_project_behind_camera_raises():
    with pytest.raises(BehindCamera):
        project(np.array([0.0, 0.0, -1.0]), make_view())


def test_unproject_non_positive_depth_raises():
    with pytest.raises(NonPositiveDepth):
        unproject(np.array([10.0, 10.0]), 0.0, make_view())


def test_project_unproject_round_trip_random(rng):
    for _ in range(1000):
        view = make_view(center=rng.uniform(-1, 1, 3), rotation=random_rotation(rng))
        pixel = rng.uniform(0, 99, 2)
        depth = rng.uniform(0.5, 10.0)
        back, back_depth = project(unproject(pixel, depth, view), view)
        assert np.max(np.abs(back - pixel)) < 1e-9
        assert abs(back_depth - depth) < 1e-9


def test_homography_agrees_with_composition(rng):
    for _ in range(1000):
        ref = make_view(center=rng.uniform(-0.2, 0.2, 3))
        src = make_view(center=rng.uniform(-0.2, 0.2, 3))
        pixel = rng.uniform(0, 99, 2)
        depth = rng.uniform(1.0, 10.0)
        try:
            expected, _ = project(unproject(pixel, depth, ref), src)
        except BehindCamera:
            continue
        assert np.max(np.abs(homography_warp(pixel, depth, ref, src) - expected)) < 1e-9


def test_identical_views_warp_to_identity():
    view = make_view()
    assert np.allclose(plane_homography(3.0, view, view), np.eye(3), atol=1e-12)
    assert np.allclose(homography_warp(np.array([12.0, 70.0]), 3.0, view, view), [12.0, 70.0])


def test_disparity_matches_focal_times_baseline_over_depth():
    ref = make_view()
    src = make_view(center=(0.1, 0.0, 0.0))
    warped = homography_warp(np.array([49.5, 49.5]), 1.0, ref, src)
    assert warped[0] == pytest.approx(49.5 - 10.0, abs=1e-9)
    assert warped[1] == pytest.approx(49.5, abs=1e-12)


def test_infinite_depth_limit_has_zero_disparity():
    ref = make_view()
    src = make_view(center=(0.1, 0.0, 0.0))
    warped = homography_warp(np.array([20.0, 30.0]), 1e12, ref, src)
    assert np.allclose(warped, [20.0, 30.0], atol=1e-9)


def test_relative_pose_composes_world_transforms(rng):
    ref = make_view(center=rng.uniform(-1, 1, 3), rotation=random_rotation(rng))
    src = make_view(center=rng.uniform(-1, 1, 3), rotation=random_rotation(rng))
    rotation, translation = relative_pose(ref, src)
    point = rng.uniform(-1, 1, 3)
    in_ref = ref.pose.rotation @ point + ref.pose.translation
    in_src = src.pose.rotation @ point + src.pose.translation
    assert np.allclose(rotation @ in_ref + translation, in_src, atol=1e-12)


def test_batched_paths_match_scalar_paths(rng):
    ref = make_view()
    src = make_view(center=(0.3, -0.1, 0.05))
    xs, ys = rng.uniform(0, 99, (2, 50))
    depths = rng.uniform(1.0, 5.0, 50)
    points = unproject_pixels(xs, ys, depths, ref)
    px, py, pz = project_points(points, src)
    wx, wy, in_front = warp_pixels(xs, ys, depths, ref, src)
    assert in_front.all()
    for i in range(50):
        expected, z = project(unproject(np.array([xs[i], ys[i]]), depths[i], ref), src)
        assert np.allclose([px[i], py[i], pz[i]], [*expected, z], atol=1e-9)
        assert np.allclose([wx[i], wy[i]], expected, atol=1e-9)


def test_project_points_marks_points_behind_camera():
    xs, ys, z = project_points(np.array([[0.0, 0.0, -2.0], [0.0, 0.0, 2.0]]), make_view())
    assert np.isnan(xs[0]) and np.isnan(ys[0]) and z[0] < 0
    assert np.isfinite(xs[1])


def test_in_bounds_flags_instead_of_clamping():
    k = make_view(width=10, height=8).intrinsics
    flags = in_bounds(np.array([0.0, 9.0, 9.01, -0.01, np.nan]), np.array([0.0, 7.0, 3.0, 3.0, 1.0]), k)
    assert flags.tolist() == [True, True, False, False, False]


def test_view_downsampling_and_resizing():
    view = make_view(width=64, height=64, image=np.arange(64 * 64, dtype=float).reshape(64, 64) / 4096.0)
    half = view.downsampled(1)
    assert half.shape == (32, 32)
    assert half.image[0, 0] == pytest.approx(np.mean(view.image[:2, :2]))
    assert view.resized_to((16, 16)).shape == (16, 16)
    with pytest.raises(DimensionMismatch):
        view.resized_to((20, 20))

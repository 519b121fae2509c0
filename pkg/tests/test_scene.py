import numpy as np
import pytest

from mvsrefine.exceptions import InvalidSpec
from mvsrefine.models.scene import RigSpec, TextureSpec
from mvsrefine.services.scene_service import (
    bundled_scene_names,
    bundled_spec,
    camera_centers,
    label_boundaries,
    render_scene,
    texture_self_test,
)


def test_bundled_scenes():
    assert bundled_scene_names() == ["plane", "two_plane"]
    with pytest.raises(InvalidSpec):
        bundled_spec("teapot")


def test_lateral_rig_puts_view_zero_in_the_middle():
    spec = bundled_spec("two_plane")
    centers = camera_centers(spec)
    assert [c[0] for c in centers] == [0.0, -100.0, 100.0]


def test_ring_rig_sits_on_a_circle():
    spec = bundled_spec("plane").model_copy(update={"rig": RigSpec(kind="ring", count=4, baseline=30.0)})
    centers = np.array(camera_centers(spec))
    np.testing.assert_allclose(np.hypot(centers[:, 0], centers[:, 1]), 30.0)
    assert np.all(centers[:, 2] == 0.0)


def test_single_plane_has_constant_depth(plane_scene):
    for gt in plane_scene.gt_depths:
        assert gt.validity.all()
        assert np.all(gt.depth == 600.0)
    assert not any(mask.grid.any() for mask in plane_scene.gt_boundaries)


def test_step_ground_truth_matches_closed_form(two_plane_scene):
    spec = two_plane_scene.spec
    cx = (spec.width - 1) / 2.0
    xs = np.arange(spec.width)
    for view, gt in zip(two_plane_scene.views, two_plane_scene.gt_depths):
        center_x = view.pose.center[0]
        hits_slab = center_x + (xs - cx) / spec.focal * 450.0 <= 0.0
        expected = np.where(hits_slab, 450.0, 600.0)
        np.testing.assert_array_equal(gt.depth, np.broadcast_to(expected, gt.shape))


def test_step_boundary_in_reference_view(two_plane_scene):
    boundary = two_plane_scene.gt_boundaries[0].grid
    columns = np.flatnonzero(boundary.any(axis=0))
    assert columns.tolist() == [31, 32]
    assert boundary[:, 31].all() and boundary[:, 32].all()


def test_label_boundaries_marks_both_sides():
    label = np.zeros((4, 5), dtype=int)
    label[1:3, 1:3] = 1
    boundary = label_boundaries(label)
    assert boundary[0, 1] and boundary[1, 0] and boundary[1, 1]
    assert not boundary[0, 0] and not boundary[3, 4]


def test_rendering_is_deterministic(two_plane_scene):
    again = render_scene(two_plane_scene.spec)
    for a, b in zip(two_plane_scene.views, again.views):
        np.testing.assert_array_equal(a.image, b.image)
    np.testing.assert_array_equal(two_plane_scene.gt_cloud.points, again.gt_cloud.points)


def test_seed_changes_the_texture(plane_scene):
    spec = plane_scene.spec.model_copy(update={"texture": TextureSpec(seed=12, cell_px=3.0)})
    other = render_scene(spec)
    assert not np.array_equal(other.views[0].image, plane_scene.views[0].image)


def test_images_are_textured_everywhere(two_plane_scene, plane_scene):
    for scene in (two_plane_scene, plane_scene):
        for view in scene.views:
            assert view.image.shape == (64, 64, 3)
            assert view.image.min() >= 0.0 and view.image.max() <= 1.0
            assert texture_self_test(view.image)
    assert not texture_self_test(np.full((16, 16), 0.5))


def test_views_are_named_and_calibrated(two_plane_scene):
    views = two_plane_scene.views
    assert [v.name for v in views] == ["00000000", "00000001", "00000002"]
    assert all((v.depth_min, v.depth_max) == (100.0, 900.0) for v in views)


def test_reference_cloud_lies_on_the_planes(two_plane_scene):
    cloud = two_plane_scene.gt_cloud
    z = cloud.points[:, 2]
    on_plane = (np.abs(z - 450.0) < 1e-9) | (np.abs(z - 600.0) < 1e-9)
    assert on_plane.all()
    assert len(cloud) == 3 * 128 * 128

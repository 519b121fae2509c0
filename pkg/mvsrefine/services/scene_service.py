"""Analytic rendering of piecewise-planar synthetic scenes.

Every camera looks down +z with an identity rotation, so the ground-truth
depth of a plane at world z = d seen from a camera centered at c is exactly
d - c_z. Images are rendered by evaluating a world-space procedural texture
at the surface hit by each pixel center; there is no anti-aliasing across
depth edges.
"""
from pathlib import Path
from typing import List, Tuple

import numpy as np
import structlog

from ..exceptions import InvalidSpec
from ..models.camera import CalibratedView, Intrinsics, Pose
from ..models.cloud import PointCloud
from ..models.depth import BoundaryMask, GroundTruth
from ..models.scene import SceneSpec, SyntheticScene
from ..utils.rng import lattice_uniforms, stream_key
from ..utils.sampling import pixel_grid, to_gray, window_offsets
from .geometry_service import unproject_pixels

logger = structlog.get_logger()

SCENES_DIR = Path(__file__).resolve().parent.parent / "data" / "scenes"

# octave scale and weight of the value noise, in texture cells
NOISE_OCTAVES = ((1.0, 0.5), (2.0, 0.3), (4.0, 0.2))
# per-plane RGB tints; label 0 is the background
TINTS = np.array([[0.95, 0.80, 0.60], [0.55, 0.75, 0.95], [0.70, 0.95, 0.65], [0.95, 0.65, 0.85]])
CLOUD_SUPERSAMPLING = 2
TEXTURE_MIN_VARIANCE = 1e-6


def camera_centers(spec: SceneSpec) -> List[np.ndarray]:
    """World camera centers; view 0 sits closest to the rig center."""
    rig = spec.rig
    if rig.kind == "lateral":
        offsets = [(i - (rig.count - 1) / 2.0) * rig.baseline for i in range(rig.count)]
        offsets.sort(key=lambda o: (abs(o), o))
        return [np.array([o, 0.0, 0.0]) for o in offsets]
    angles = [2.0 * np.pi * i / rig.count for i in range(rig.count)]
    return [np.array([rig.baseline * np.cos(a), rig.baseline * np.sin(a), 0.0]) for a in angles]


def scene_intrinsics(spec: SceneSpec) -> Intrinsics:
    return Intrinsics(
        fx=spec.focal,
        fy=spec.focal,
        cx=(spec.width - 1) / 2.0,
        cy=(spec.height - 1) / 2.0,
        width=spec.width,
        height=spec.height,
    )


def plane_depths(spec: SceneSpec) -> np.ndarray:
    return np.array([spec.background_depth] + [r.depth for r in spec.rectangles])


def ray_hits(
    spec: SceneSpec, center: np.ndarray, xs: np.ndarray, ys: np.ndarray
) -> Tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
    """Nearest surface hit along the rays through (xs, ys).

    Returns (depth, label, world_x, world_y). Label 0 is the background plane,
    label i the i-th rectangle. Depth is NaN where no surface lies in front.
    """
    k = scene_intrinsics(spec)
    ray_x, ray_y = (xs - k.cx) / k.fx, (ys - k.cy) / k.fy
    depth = np.full(xs.shape, np.nan)
    label = np.full(xs.shape, -1, dtype=np.int64)
    for index, plane_z in enumerate(plane_depths(spec)):
        s = plane_z - center[2]
        if not s > 0:
            continue
        hit_x, hit_y = center[0] + s * ray_x, center[1] + s * ray_y
        if index == 0:
            inside = np.ones(xs.shape, dtype=bool)
        else:
            r = spec.rectangles[index - 1]
            inside = (hit_x >= r.x_min) & (hit_x <= r.x_max) & (hit_y >= r.y_min) & (hit_y <= r.y_max)
        with np.errstate(invalid="ignore"):
            nearer = inside & ~(depth <= s)
        depth = np.where(nearer, s, depth)
        label = np.where(nearer, index, label)
    world_x = center[0] + depth * ray_x
    world_y = center[1] + depth * ray_y
    return depth, label, world_x, world_y


def _value_noise(key: int, u: np.ndarray, v: np.ndarray) -> np.ndarray:
    iu, iv = np.floor(u), np.floor(v)
    fu, fv = u - iu, v - iv
    su, sv = fu * fu * (3.0 - 2.0 * fu), fv * fv * (3.0 - 2.0 * fv)
    iu, iv = iu.astype(np.int64), iv.astype(np.int64)
    n00 = lattice_uniforms(key, iu, iv)
    n10 = lattice_uniforms(key, iu + 1, iv)
    n01 = lattice_uniforms(key, iu, iv + 1)
    n11 = lattice_uniforms(key, iu + 1, iv + 1)
    top = n00 + su * (n10 - n00)
    bottom = n01 + su * (n11 - n01)
    return top + sv * (bottom - top)


def texture_intensity(spec: SceneSpec, label: np.ndarray, world_x: np.ndarray, world_y: np.ndarray) -> np.ndarray:
    """Value-noise and checker blend in [0.1, 0.9], anchored to each plane."""
    depths = plane_depths(spec)
    intensity = np.zeros(label.shape)
    for index, plane_z in enumerate(depths):
        on_plane = label == index
        if not on_plane.any():
            continue
        cell = spec.texture.cell_px * plane_z / spec.focal
        u, v = world_x[on_plane] / cell, world_y[on_plane] / cell
        noise = np.zeros(u.shape)
        for octave, weight in NOISE_OCTAVES:
            key = stream_key(spec.texture.seed, index, int(octave))
            noise += weight * _value_noise(key, u / octave, v / octave)
        checker = 0.5 + 0.5 * np.sin(np.pi * u) * np.sin(np.pi * v)
        intensity[on_plane] = 0.1 + 0.8 * (0.5 * noise + 0.5 * checker)
    return intensity


def shade(spec: SceneSpec, label: np.ndarray, world_x: np.ndarray, world_y: np.ndarray) -> np.ndarray:
    intensity = texture_intensity(spec, label, world_x, world_y)
    tint = TINTS[np.clip(label, 0, None) % len(TINTS)]
    return np.clip(intensity[..., None] * tint + 0.05, 0.0, 1.0)


def label_boundaries(label: np.ndarray) -> np.ndarray:
    """Pixels whose surface label differs from any 4-neighbor."""
    boundary = np.zeros(label.shape, dtype=bool)
    vertical = label[1:, :] != label[:-1, :]
    horizontal = label[:, 1:] != label[:, :-1]
    boundary[1:, :] |= vertical
    boundary[:-1, :] |= vertical
    boundary[:, 1:] |= horizontal
    boundary[:, :-1] |= horizontal
    return boundary


def texture_self_test(image: np.ndarray, window: int = 5) -> bool:
    """True when every window of the gray image has non-negligible variance."""
    gray = to_gray(image)
    h, w = gray.shape
    half = window // 2
    dy, dx = window_offsets(window)
    samples = np.stack(
        [gray[half + int(oy):h - half + int(oy), half + int(ox):w - half + int(ox)] for oy, ox in zip(dy, dx)]
    )
    return bool(np.all(samples.var(axis=0) > TEXTURE_MIN_VARIANCE))


def _cloud_samples(spec: SceneSpec, view: CalibratedView, center: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    n = CLOUD_SUPERSAMPLING
    xs, ys = pixel_grid(spec.height * n, spec.width * n)
    xs, ys = (xs + 0.5) / n - 0.5, (ys + 0.5) / n - 0.5
    depth, label, world_x, world_y = ray_hits(spec, center, xs, ys)
    hit = np.isfinite(depth)
    points = unproject_pixels(xs[hit], ys[hit], depth[hit], view)
    return points, shade(spec, label, world_x, world_y)[hit]


def render_scene(spec: SceneSpec) -> SyntheticScene:
    intrinsics = scene_intrinsics(spec)
    xs, ys = pixel_grid(spec.height, spec.width)
    views, gt_depths, gt_boundaries = [], [], []
    cloud_points, cloud_colors = [], []
    for index, center in enumerate(camera_centers(spec)):
        depth, label, world_x, world_y = ray_hits(spec, center, xs, ys)
        view = CalibratedView(
            image=shade(spec, label, world_x, world_y),
            intrinsics=intrinsics,
            pose=Pose(rotation=np.eye(3), translation=-center),
            depth_min=spec.depth_min,
            depth_max=spec.depth_max,
            name=f"{index:08d}",
        )
        views.append(view)
        gt_depths.append(GroundTruth.from_grid(depth))
        gt_boundaries.append(BoundaryMask(grid=label_boundaries(label)))
        points, colors = _cloud_samples(spec, view, center)
        cloud_points.append(points)
        cloud_colors.append(colors)
        if not texture_self_test(view.image):
            logger.warning("Rendered view has flat 5x5 windows.", view=view.name)

    gt_cloud = PointCloud.from_points(np.concatenate(cloud_points), np.concatenate(cloud_colors))
    logger.info("Rendered synthetic scene.", views=len(views), planes=1 + len(spec.rectangles), cloud=len(gt_cloud))
    return SyntheticScene(
        spec=spec, views=views, gt_depths=gt_depths, gt_boundaries=gt_boundaries, gt_cloud=gt_cloud
    )


def bundled_scene_names() -> List[str]:
    return sorted(path.stem for path in SCENES_DIR.glob("*.scene"))


def bundled_spec(name: str) -> SceneSpec:
    """Loads one of the scene descriptions shipped with the package."""
    from ..parsers.scene_parser import read_scene_spec

    path = SCENES_DIR / f"{name}.scene"
    if not path.is_file():
        raise InvalidSpec(f"unknown bundled scene '{name}' (available: {', '.join(bundled_scene_names())})")
    return read_scene_spec(path)


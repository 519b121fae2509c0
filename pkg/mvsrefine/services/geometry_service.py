"""Pinhole projection, unprojection and plane-induced homographies.

Pixel centers sit at integer coordinates with (0, 0) the top-left pixel.
Poses map world to camera: x_cam = R @ x_world + t.
"""
from typing import Tuple

import numpy as np

from ..exceptions import BehindCamera, NonPositiveDepth
from ..models.camera import CalibratedView, Intrinsics
from ..utils.sampling import in_image

# Fronto-parallel plane normal in the reference camera frame
PLANE_NORMAL = np.array([0.0, 0.0, 1.0])


def relative_pose(ref: CalibratedView, src: CalibratedView) -> Tuple[np.ndarray, np.ndarray]:
    """(R, t) mapping reference-camera coordinates into source-camera coordinates."""
    r_ref, t_ref = ref.pose.rotation, ref.pose.translation
    r_src, t_src = src.pose.rotation, src.pose.translation
    rotation = r_src @ r_ref.T
    return rotation, t_src - rotation @ t_ref


def project(point: np.ndarray, view: CalibratedView) -> Tuple[np.ndarray, float]:
    x_cam = view.pose.rotation @ np.asarray(point, dtype=np.float64) + view.pose.translation
    z = x_cam[2]
    if not z > 0:
        raise BehindCamera(f"point has camera-frame depth {z}")
    k = view.intrinsics
    pixel = np.array([k.fx * x_cam[0] / z + k.cx, k.fy * x_cam[1] / z + k.cy])
    return pixel, float(z)


def unproject(pixel: np.ndarray, depth: float, view: CalibratedView) -> np.ndarray:
    if not depth > 0:
        raise NonPositiveDepth(f"cannot unproject at depth {depth}")
    k = view.intrinsics
    x_cam = np.array([(pixel[0] - k.cx) / k.fx * depth, (pixel[1] - k.cy) / k.fy * depth, depth])
    return view.pose.rotation.T @ (x_cam - view.pose.translation)


def plane_homography(depth: float, ref: CalibratedView, src: CalibratedView) -> np.ndarray:
    """H = K_src (R + t n^T / d) K_ref^-1 for the plane n^T X = d in the reference frame."""
    rotation, translation = relative_pose(ref, src)
    return src.intrinsics.matrix @ (rotation + np.outer(translation, PLANE_NORMAL) / depth) @ ref.intrinsics.inverse


def homography_warp(pixel: np.ndarray, depth: float, ref: CalibratedView, src: CalibratedView) -> np.ndarray:
    h = plane_homography(depth, ref, src)
    q = h @ np.array([pixel[0], pixel[1], 1.0])
    if not q[2] > 0:
        raise BehindCamera("warped point lies behind the source camera")
    return q[:2] / q[2]


def project_points(points: np.ndarray, view: CalibratedView) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Batched projection of (..., 3) world points.

    Returns (xs, ys, depths); points at or behind the camera get NaN pixels.
    """
    x_cam = points @ view.pose.rotation.T + view.pose.translation
    z = x_cam[..., 2]
    k = view.intrinsics
    with np.errstate(divide="ignore", invalid="ignore"):
        front = z > 0
        xs = np.where(front, k.fx * x_cam[..., 0] / z + k.cx, np.nan)
        ys = np.where(front, k.fy * x_cam[..., 1] / z + k.cy, np.nan)
    return xs, ys, z


def unproject_pixels(xs: np.ndarray, ys: np.ndarray, depths: np.ndarray, view: CalibratedView) -> np.ndarray:
    """Batched unprojection to world points of shape (..., 3)."""
    k = view.intrinsics
    x_cam = np.stack([(xs - k.cx) / k.fx * depths, (ys - k.cy) / k.fy * depths, depths], axis=-1)
    return (x_cam - view.pose.translation) @ view.pose.rotation


def warp_pixels(
    xs: np.ndarray, ys: np.ndarray, depths: np.ndarray, ref: CalibratedView, src: CalibratedView
) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Batched fronto-parallel warp of reference pixels into the source view.

    Returns (xs, ys, in_front). Pixels that land behind the source camera
    have NaN coordinates and in_front False.
    """
    rotation, translation = relative_pose(ref, src)
    kr, ks = ref.intrinsics, src.intrinsics
    rays = np.stack([(xs - kr.cx) / kr.fx, (ys - kr.cy) / kr.fy, np.ones_like(xs)], axis=-1)
    x_src = depths[..., None] * (rays @ rotation.T) + translation
    z = x_src[..., 2]
    in_front = z > 0
    with np.errstate(divide="ignore", invalid="ignore"):
        wx = np.where(in_front, ks.fx * x_src[..., 0] / z + ks.cx, np.nan)
        wy = np.where(in_front, ks.fy * x_src[..., 1] / z + ks.cy, np.nan)
    return wx, wy, in_front


def in_bounds(xs: np.ndarray, ys: np.ndarray, intrinsics: Intrinsics) -> np.ndarray:
    """True where (x, y) lies inside the sampling support of the image."""
    with np.errstate(invalid="ignore"):
        return in_image(xs, ys, intrinsics.width, intrinsics.height)

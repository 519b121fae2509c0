"""Photo-geometric filtering of per-view depth maps and fusion into one cloud."""
from typing import List, Optional, Sequence, Tuple

import numpy as np
import structlog

from ..exceptions import TooFewViews
from ..models.camera import CalibratedView
from ..models.cloud import PointCloud
from ..models.configs import FusionConfig
from ..models.depth import DepthMap
from ..tasks.view_tasks import run_per_view
from ..utils.sampling import pixel_grid
from .geometry_service import project_points, unproject_pixels
from .photometric_service import PatchCostEvaluator

logger = structlog.get_logger()


def _matching_view(view: CalibratedView, depth: DepthMap) -> CalibratedView:
    if view.shape == depth.shape:
        return view
    return view.resized_to(depth.shape)


def reprojection_check(
    ref_depth: DepthMap,
    ref: CalibratedView,
    src_depth: DepthMap,
    src: CalibratedView,
    config: FusionConfig,
) -> Tuple[np.ndarray, np.ndarray]:
    """Forward-backward reprojection through the source depth map.

    Returns the consistency mask and the depth each consistent pixel gets
    back in the reference view (NaN elsewhere).
    """
    ref = _matching_view(ref, ref_depth)
    src = _matching_view(src, src_depth)
    h, w = ref_depth.shape
    src_h, src_w = src_depth.shape
    xs, ys = pixel_grid(h, w)
    depth = ref_depth.grid
    valid = ref_depth.validity & (depth > 0)

    points = unproject_pixels(xs, ys, np.where(valid, depth, 1.0), ref)
    qx, qy, _ = project_points(points, src)
    with np.errstate(invalid="ignore"):
        qx_round, qy_round = np.floor(qx + 0.5), np.floor(qy + 0.5)
        inside = valid & (qx_round >= 0) & (qx_round < src_w) & (qy_round >= 0) & (qy_round < src_h)
    qi = np.where(inside, qx_round, 0).astype(np.int64)
    qj = np.where(inside, qy_round, 0).astype(np.int64)
    src_values = src_depth.grid[qj, qi]
    found = inside & src_depth.validity[qj, qi] & (src_values > 0)

    back = unproject_pixels(qi.astype(np.float64), qj.astype(np.float64), np.where(found, src_values, 1.0), src)
    px, py, reprojected = project_points(back, ref)
    with np.errstate(invalid="ignore"):
        error = np.hypot(px - xs, py - ys)
        relative = np.abs(reprojected - depth) / np.where(valid, depth, 1.0)
        consistent = found & (error <= config.max_reproj_px) & (relative <= config.max_rel_depth)
    return consistent, np.where(consistent, reprojected, np.nan)


def geometric_consistency(
    ref_depth: DepthMap,
    ref: CalibratedView,
    src_depth: DepthMap,
    src: CalibratedView,
    config: FusionConfig,
) -> np.ndarray:
    consistent, _ = reprojection_check(ref_depth, ref, src_depth, src, config)
    return consistent


class FusionService:
    def __init__(self, config: Optional[FusionConfig] = None, workers: Optional[int] = None):
        self.config = config or FusionConfig()
        self.workers = workers

    def _fuse_reference(
        self, index: int, views: List[Tuple[CalibratedView, DepthMap]]
    ) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
        config = self.config
        ref, ref_depth = views[index]
        others = [pair for j, pair in enumerate(views) if j != index]
        h, w = ref_depth.shape
        count = np.zeros((h, w), dtype=np.int64)
        depth_sum = np.where(ref_depth.validity, ref_depth.grid, 0.0)

        photometric = None
        if config.use_photometric and ref_depth.validity.any():
            photometric = PatchCostEvaluator(ref, [src for src, _ in others], config.window)
        filled = np.where(ref_depth.validity, ref_depth.grid, ref.depth_min)

        for j, (src, src_depth) in enumerate(others):
            consistent, reprojected = reprojection_check(ref_depth, ref, src_depth, src, config)
            if photometric is not None:
                ncc, usable, flat = photometric.source_ncc(filled, j)
                consistent &= usable & ~flat & (ncc >= config.min_ncc)
            count += consistent
            depth_sum += np.where(consistent, reprojected, 0.0)

        keep = ref_depth.validity & (count >= config.min_consistent_views)
        averaged = depth_sum / (1 + count)
        xs, ys = pixel_grid(h, w)
        points = unproject_pixels(xs[keep], ys[keep], averaged[keep], ref)
        image = ref.image if ref.image.ndim == 3 else np.repeat(ref.image[..., None], 3, axis=2)
        return points, np.clip(image[keep], 0.0, 1.0), count[keep]

    def fuse(self, views: Sequence[Tuple[CalibratedView, DepthMap]]) -> PointCloud:
        try:
            return self._fuse(views)
        except Exception as e:
            logger.error("Fusion failed.", views=len(views), error=str(e))
            raise

    def _fuse(self, views: Sequence[Tuple[CalibratedView, DepthMap]]) -> PointCloud:
        config = self.config
        if len(views) < 2:
            raise TooFewViews(f"fusion needs at least two views, got {len(views)}")
        prepared = [(_matching_view(view, depth), depth) for view, depth in views]
        if config.min_consistent_views > len(prepared) - 1:
            logger.warning(
                "Consistency threshold exceeds the number of sources; nothing can be fused.",
                min_consistent_views=config.min_consistent_views, sources=len(prepared) - 1,
            )
            return PointCloud.empty()

        parts = run_per_view(lambda i: self._fuse_reference(i, prepared), list(range(len(prepared))), self.workers)
        points = np.concatenate([p for p, _, _ in parts]).reshape(-1, 3)
        colors = np.concatenate([c for _, c, _ in parts]).reshape(-1, 3)
        counts = np.concatenate([k for _, _, k in parts])
        view_ids = np.concatenate([np.full(len(p), i) for i, (p, _, _) in enumerate(parts)])
        cloud = PointCloud(points=points, colors=colors, view_ids=view_ids, consistency=counts)
        logger.info("Fused point cloud.", views=len(prepared), points=len(cloud))
        return cloud


def fuse(views: Sequence[Tuple[CalibratedView, DepthMap]], config: Optional[FusionConfig] = None) -> PointCloud:
    return FusionService(config).fuse(views)

"""Point-cloud and depth-map benchmark metrics."""
from typing import Dict, Literal, Tuple

import numpy as np
import structlog
from scipy.spatial import cKDTree

from ..exceptions import DimensionMismatch, EmptyCloud, NoValidPixels
from ..models.cloud import CloudMetrics, DepthMetrics, PointCloud
from ..models.depth import DepthMap, GroundTruth
from .discontinuity_service import laplacian_grid

logger = structlog.get_logger()

DEFAULT_OUTLIER_CAP = 20.0
DEFAULT_PCT_THRESHOLD = 2.0
DEFAULT_ERROR_THRESHOLD = 8.0
DEFAULT_BOUNDARY_THRESHOLD = 5.0

Method = Literal["kdtree", "brute"]


def point_distances(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Euclidean distances between paired rows, always summed in x, y, z order."""
    dx = a[..., 0] - b[..., 0]
    dy = a[..., 1] - b[..., 1]
    dz = a[..., 2] - b[..., 2]
    return np.sqrt(dx * dx + dy * dy + dz * dz)


def brute_force_nearest(query: np.ndarray, reference: np.ndarray) -> np.ndarray:
    """O(n*m) nearest-neighbor distances."""
    return point_distances(query[:, None, :], reference[None, :, :]).min(axis=1)


def nearest_distances(
    query: np.ndarray, reference: np.ndarray, upper_bound: float = np.inf, method: Method = "kdtree"
) -> np.ndarray:
    """Distance from each query point to its nearest reference point.

    With the k-d tree, points with no neighbor within `upper_bound` get inf.
    Found distances are recomputed with point_distances so both methods
    produce identical values.
    """
    if method == "brute":
        return brute_force_nearest(query, reference)
    tree = cKDTree(reference)
    bound = np.inf if not np.isfinite(upper_bound) else upper_bound * (1.0 + 1e-9) + 1e-12
    _, index = tree.query(query, k=1, distance_upper_bound=bound)
    found = index < len(reference)
    distances = np.full(len(query), np.inf)
    distances[found] = point_distances(query[found], reference[index[found]])
    return distances


def _require_points(*clouds: PointCloud) -> None:
    if any(len(cloud) == 0 for cloud in clouds):
        raise EmptyCloud("point-cloud metrics need non-empty clouds")


def cloud_accuracy(
    recon: PointCloud, reference: PointCloud, outlier_cap: float = DEFAULT_OUTLIER_CAP, method: Method = "kdtree"
) -> float:
    """Mean distance from reconstructed points to the reference; distances above the cap are dropped."""
    _require_points(recon, reference)
    distances = nearest_distances(recon.points, reference.points, outlier_cap, method)
    kept = distances[distances <= outlier_cap]
    if kept.size == 0:
        logger.warning("Every distance exceeds the outlier cap.", outlier_cap=outlier_cap, points=len(recon))
        return float(outlier_cap)
    return float(np.mean(kept))


def cloud_completeness(
    recon: PointCloud, reference: PointCloud, outlier_cap: float = DEFAULT_OUTLIER_CAP, method: Method = "kdtree"
) -> float:
    return cloud_accuracy(reference, recon, outlier_cap, method)


def cloud_pct_metrics(
    recon: PointCloud, reference: PointCloud, threshold: float = DEFAULT_PCT_THRESHOLD, method: Method = "kdtree"
) -> Tuple[float, float, float]:
    """(precision %, recall %, F-score) with distances strictly below `threshold` counting as hits."""
    _require_points(recon, reference)
    if not threshold > 0:
        raise ValueError(f"threshold must be positive, got {threshold}")
    to_reference = nearest_distances(recon.points, reference.points, threshold, method)
    to_recon = nearest_distances(reference.points, recon.points, threshold, method)
    precision = 100.0 * np.count_nonzero(to_reference < threshold) / len(recon)
    recall = 100.0 * np.count_nonzero(to_recon < threshold) / len(reference)
    fscore = 2.0 * precision * recall / (precision + recall) if precision + recall > 0 else 0.0
    return float(precision), float(recall), float(fscore)


def evaluate_clouds(
    recon: PointCloud,
    reference: PointCloud,
    outlier_cap: float = DEFAULT_OUTLIER_CAP,
    threshold: float = DEFAULT_PCT_THRESHOLD,
) -> CloudMetrics:
    accuracy = cloud_accuracy(recon, reference, outlier_cap)
    completeness = cloud_completeness(recon, reference, outlier_cap)
    precision, recall, fscore = cloud_pct_metrics(recon, reference, threshold)
    metrics = CloudMetrics(
        accuracy=accuracy,
        completeness=completeness,
        overall=(accuracy + completeness) / 2.0,
        precision_pct=precision,
        recall_pct=recall,
        fscore=fscore,
    )
    logger.info("Cloud metrics computed.", **metrics.model_dump())
    return metrics


def boundary_region(gt: GroundTruth, boundary_lap_threshold: float = DEFAULT_BOUNDARY_THRESHOLD) -> np.ndarray:
    """Pixels where |Laplacian(GT)| exceeds the threshold."""
    return np.abs(laplacian_grid(gt.depth, gt.validity)) > boundary_lap_threshold


def depth_metrics(
    est: DepthMap,
    gt: GroundTruth,
    error_threshold: float = DEFAULT_ERROR_THRESHOLD,
    boundary_lap_threshold: float = DEFAULT_BOUNDARY_THRESHOLD,
) -> DepthMetrics:
    if est.shape != gt.shape:
        raise DimensionMismatch(f"estimate is {est.shape}, ground truth is {gt.shape}")
    if not (error_threshold > 0 and boundary_lap_threshold > 0):
        raise ValueError("thresholds must be positive")
    valid = gt.validity & est.validity
    n = int(np.count_nonzero(valid))
    if n == 0:
        raise NoValidPixels("no pixel is valid in both the estimate and the ground truth")

    error = np.abs(np.where(valid, est.grid - gt.depth, 0.0))
    boundary = valid & boundary_region(gt, boundary_lap_threshold)
    smooth = valid & ~boundary
    n_boundary, n_smooth = int(np.count_nonzero(boundary)), int(np.count_nonzero(smooth))
    sum_boundary, sum_smooth = float(np.sum(error[boundary])), float(np.sum(error[smooth]))
    return DepthMetrics(
        mae=(sum_boundary + sum_smooth) / n,
        error_ratio=np.count_nonzero(error[valid] > error_threshold) / n,
        boundary_mae=sum_boundary / n_boundary if n_boundary else 0.0,
        smooth_mae=sum_smooth / n_smooth if n_smooth else 0.0,
        valid_pixels=n,
        boundary_pixels=n_boundary,
        smooth_pixels=n_smooth,
    )


def compare_depth_metrics(baseline: DepthMetrics, refined: DepthMetrics) -> Dict[str, float]:
    """Relative reduction (percent) of each error metric from baseline to refined."""
    def reduction(before: float, after: float) -> float:
        return 100.0 * (before - after) / before if before > 0 else 0.0

    return {
        f"{name}_reduction_pct": reduction(getattr(baseline, name), getattr(refined, name))
        for name in ("mae", "error_ratio", "boundary_mae", "smooth_mae")
    }

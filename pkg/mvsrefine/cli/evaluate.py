from pathlib import Path
from typing import Optional

import numpy as np
import typer

from ..models.depth import DepthMap, GroundTruth
from ..parsers.pfm_parser import read_pfm
from ..parsers.ply_parser import read_ply
from ..parsers.report_parser import write_report
from ..services.evaluation_service import (
    DEFAULT_BOUNDARY_THRESHOLD,
    DEFAULT_ERROR_THRESHOLD,
    DEFAULT_OUTLIER_CAP,
    DEFAULT_PCT_THRESHOLD,
    compare_depth_metrics,
    depth_metrics,
    evaluate_clouds,
)
from ..services.patchmatch_service import upsample_init
from .common import print_metrics


def _positive(value: float, hint: str) -> float:
    if not value > 0:
        raise typer.BadParameter("must be positive", param_hint=hint)
    return value


def eval_cloud(
    recon: Path = typer.Argument(..., exists=True, dir_okay=False, help="Reconstructed PLY."),
    reference: Path = typer.Argument(..., exists=True, dir_okay=False, help="Reference PLY."),
    cap: float = typer.Option(DEFAULT_OUTLIER_CAP, "--cap", help="Outlier cap in scene units."),
    threshold: float = typer.Option(DEFAULT_PCT_THRESHOLD, "--threshold", help="Precision/recall distance."),
    report: Optional[Path] = typer.Option(None, "--report", help="Key-value (or .json) report file."),
) -> None:
    """Accuracy, completeness and F-score of a point cloud against a reference."""
    metrics = evaluate_clouds(
        read_ply(recon), read_ply(reference), _positive(cap, "--cap"), _positive(threshold, "--threshold")
    )
    values = metrics.model_dump()
    print_metrics("point-cloud metrics", values)
    if report is not None:
        write_report(report, values)


def _read_depth(path: Path) -> DepthMap:
    return DepthMap.from_grid(read_pfm(path).astype(np.float64))


def eval_depth(
    estimate: Path = typer.Argument(..., exists=True, dir_okay=False, help="Estimated depth PFM."),
    gt: Path = typer.Argument(..., exists=True, dir_okay=False, help="Ground-truth depth PFM."),
    baseline: Optional[Path] = typer.Option(
        None, "--baseline", exists=True, dir_okay=False, help="Unrefined depth PFM to compare against."
    ),
    error_threshold: float = typer.Option(DEFAULT_ERROR_THRESHOLD, "--error-threshold"),
    boundary_threshold: float = typer.Option(DEFAULT_BOUNDARY_THRESHOLD, "--boundary-threshold"),
    report: Optional[Path] = typer.Option(None, "--report", help="Key-value (or .json) report file."),
) -> None:
    """Depth MAE, error ratio and the boundary/smooth split against ground truth.

    A half-resolution baseline is block-upsampled to the ground-truth size.
    """
    _positive(error_threshold, "--error-threshold")
    _positive(boundary_threshold, "--boundary-threshold")
    truth = GroundTruth.from_grid(read_pfm(gt).astype(np.float64))
    metrics = depth_metrics(_read_depth(estimate), truth, error_threshold, boundary_threshold)
    values = metrics.model_dump()
    if baseline is not None:
        unrefined = _read_depth(baseline)
        if (unrefined.shape[0] * 2, unrefined.shape[1] * 2) == truth.shape:
            unrefined = upsample_init(unrefined)
        reference = depth_metrics(unrefined, truth, error_threshold, boundary_threshold)
        values.update({f"baseline_{k}": v for k, v in reference.model_dump().items()})
        values.update(compare_depth_metrics(reference, metrics))
    print_metrics("depth-map metrics", values)
    if report is not None:
        write_report(report, values)

from pathlib import Path
from typing import Optional

import typer

from ..models.configs import default_tau
from ..parsers.cam_parser import read_cam
from ..parsers.report_parser import write_report
from ..parsers.workspace import Workspace
from ..services.loss_service import LossInputs, total_loss
from .common import loss_weights, print_metrics


def losses(
    workspace: Path = typer.Argument(..., exists=True, file_okay=False, help="Workspace directory."),
    view: Optional[str] = typer.Option(None, "--view", help="View name (default: the first view)."),
    tau: Optional[float] = typer.Option(None, "--tau", help="Edge threshold (default 0.5% of the depth range)."),
    beta: float = typer.Option(10.0, "--beta", help="Smoothness falloff."),
    preset: Optional[str] = typer.Option(None, "--preset", help="gt, gt_edge_smooth, gt_bimodal or full."),
    lambda1: Optional[float] = typer.Option(None, "--lambda1"),
    lambda2: Optional[float] = typer.Option(None, "--lambda2"),
    lambda3: Optional[float] = typer.Option(None, "--lambda3"),
    report: Optional[Path] = typer.Option(None, "--report", help="Key-value (or .json) report file."),
) -> None:
    """Evaluate the loss terms of a refined view against its ground truth."""
    ws = Workspace(workspace)
    name = view or ws.view_names()[0]
    weights = loss_weights(preset, lambda1, lambda2, lambda3)
    bimodal = ws.load_bimodal(name)
    gt = ws.load_gt(name).cropped(*bimodal.shape)
    if tau is None:
        cam = read_cam(ws.cam(name))
        tau = default_tau(cam.depth_min, cam.depth_max)
    if not (tau > 0 and beta > 0):
        raise typer.BadParameter("--tau and --beta must be positive")
    result = total_loss(
        LossInputs(bimodal=bimodal, edge=ws.load_edge(name), gt=gt, tau=tau, beta=beta, pyramid=ws.load_pyramid(name)),
        weights,
    )
    values = result.as_dict()
    print_metrics(f"losses ({name})", values)
    if report is not None:
        write_report(report, values)

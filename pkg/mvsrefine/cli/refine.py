from pathlib import Path
from typing import Optional

import typer

from ..models.configs import RefineConfig
from ..parsers.workspace import Workspace
from ..services.pipeline_service import PipelineService
from .common import build, loss_weights, print_rows, workers_from

MODES = {"supervised": "supervised", "self-supervised": "self_supervised", "self_supervised": "self_supervised"}


def refine(
    ctx: typer.Context,
    workspace: Path = typer.Argument(..., exists=True, file_okay=False, help="Workspace directory."),
    mode: str = typer.Option("supervised", "--mode", help="supervised or self-supervised."),
    steps: Optional[int] = typer.Option(None, "--steps", help="Descent iterations (default 400)."),
    step_size: Optional[float] = typer.Option(None, "--step-size", help="Initial step (default 0.05)."),
    final_step_size: Optional[float] = typer.Option(None, "--final-step-size", help="Final step (default 0.001)."),
    tau: Optional[float] = typer.Option(None, "--tau", help="Edge threshold (default 0.5% of the depth range)."),
    beta: Optional[float] = typer.Option(None, "--beta", help="Smoothness falloff (default 10)."),
    preset: Optional[str] = typer.Option(None, "--preset", help="gt, gt_edge_smooth, gt_bimodal or full."),
    lambda1: Optional[float] = typer.Option(None, "--lambda1", help="Edge term weight (default 4)."),
    lambda2: Optional[float] = typer.Option(None, "--lambda2", help="Smoothness term weight (default 1.25)."),
    lambda3: Optional[float] = typer.Option(None, "--lambda3", help="Bimodal term weight (default 0.5)."),
    sigma_init: Optional[float] = typer.Option(None, "--sigma-init", help="Initial sigma, fraction of range."),
    mu_offset_init: Optional[float] = typer.Option(None, "--mu-offset-init", help="Initial mode gap, fraction of range."),
    alpha_init: Optional[float] = typer.Option(None, "--alpha-init", help="Initial mixture weight (default 0.9)."),
    photometric_weight: Optional[float] = typer.Option(None, "--photometric-weight", help="Self-supervised data weight."),
    edge_target_interval: Optional[int] = typer.Option(None, "--edge-target-interval", help="Steps between edge targets."),
) -> None:
    """Refine PatchMatch depth maps at full resolution."""
    if mode not in MODES:
        raise typer.BadParameter(f"unknown mode '{mode}'", param_hint="--mode")
    config = build(
        RefineConfig,
        mode=MODES[mode],
        steps=steps,
        step_size=step_size,
        final_step_size=final_step_size,
        tau=tau,
        beta=beta,
        weights=loss_weights(preset, lambda1, lambda2, lambda3),
        sigma_init=sigma_init,
        mu_offset_init=mu_offset_init,
        alpha_init=alpha_init,
        photometric_weight=photometric_weight,
        edge_target_interval=edge_target_interval,
    )
    results = PipelineService(Workspace(workspace), workers_from(ctx)).refine(config)
    print_rows(
        f"refinement ({config.mode})",
        {
            name: {
                "initial_total": result.trace[0].total,
                "final_total": result.trace[-1].total,
                "valid_fraction": float(result.depth.validity.mean()),
            }
            for name, result in results.items()
        },
    )

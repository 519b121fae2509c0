from pathlib import Path
from typing import Optional

import typer

from ..models.configs import PatchMatchConfig
from ..parsers.workspace import Workspace
from ..services.pipeline_service import PipelineService
from .common import build, print_rows, workers_from


def depth(
    ctx: typer.Context,
    workspace: Path = typer.Argument(..., exists=True, file_okay=False, help="Workspace directory."),
    levels: Optional[int] = typer.Option(None, "--levels", help="Pyramid levels (default 3)."),
    iterations: Optional[int] = typer.Option(None, "--iterations", help="Iterations per level (default 2)."),
    window: Optional[int] = typer.Option(None, "--window", help="NCC window size, odd (default 5)."),
    hypotheses: Optional[int] = typer.Option(None, "--hypotheses", help="Hypotheses per pixel (default 8); 5 or fewer disables random search."),
    seed: Optional[int] = typer.Option(None, "--seed", help="Random seed (default 0)."),
) -> None:
    """Estimate a half-resolution depth map for every view with PatchMatch."""
    config = build(
        PatchMatchConfig,
        levels=levels,
        iterations_per_level=iterations,
        window=window,
        hypotheses_per_pixel=hypotheses,
        rng_seed=seed,
    )
    depths = PipelineService(Workspace(workspace), workers_from(ctx)).estimate_depths(config)
    print_rows(
        "PatchMatch depth",
        {
            name: {
                "height": d.shape[0],
                "width": d.shape[1],
                "valid_fraction": float(d.validity.mean()),
                "mean_depth": float(d.grid[d.validity].mean()) if d.validity.any() else float("nan"),
            }
            for name, d in depths.items()
        },
    )

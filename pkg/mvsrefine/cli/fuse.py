from pathlib import Path
from typing import Optional

import typer

from ..models.configs import FusionConfig
from ..parsers.ply_parser import write_ply
from ..parsers.workspace import Workspace
from ..services.pipeline_service import PipelineService
from .common import build, print_metrics, workers_from


def fuse(
    ctx: typer.Context,
    workspace: Path = typer.Argument(..., exists=True, file_okay=False, help="Workspace directory."),
    out: Optional[Path] = typer.Option(None, "--out", help="PLY output (default <workspace>/fused.ply)."),
    stage: str = typer.Option("refined", "--stage", help="Fuse 'refined' or raw 'depth' maps."),
    min_views: Optional[int] = typer.Option(None, "--min-views", help="Consistent sources required (default 3)."),
    reproj_px: Optional[float] = typer.Option(None, "--reproj-px", help="Reprojection tolerance (default 1 px)."),
    rel_depth: Optional[float] = typer.Option(None, "--rel-depth", help="Relative depth tolerance (default 0.01)."),
    min_ncc: Optional[float] = typer.Option(None, "--min-ncc", help="Photometric NCC floor (default 0.3)."),
    photometric: bool = typer.Option(True, "--photometric/--no-photometric", help="Apply the NCC filter."),
) -> None:
    """Filter depth maps for photo-geometric consistency and fuse them into a PLY cloud."""
    if stage not in ("refined", "depth"):
        raise typer.BadParameter(f"unknown stage '{stage}'", param_hint="--stage")
    config = build(
        FusionConfig,
        min_consistent_views=min_views,
        max_reproj_px=reproj_px,
        max_rel_depth=rel_depth,
        min_ncc=min_ncc,
        use_photometric=photometric,
    )
    cloud = PipelineService(Workspace(workspace), workers_from(ctx)).fuse(config, stage)
    out = out or workspace / "fused.ply"
    write_ply(out, cloud)
    print_metrics(f"fused cloud -> {out}", {"points": len(cloud)})

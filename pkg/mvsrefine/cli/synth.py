from pathlib import Path
from typing import Optional

import typer

from ..parsers.scene_parser import read_scene_spec
from ..parsers.workspace import Workspace
from ..services.pipeline_service import PipelineService
from ..services.scene_service import bundled_spec
from .common import print_metrics, workers_from


def synth(
    ctx: typer.Context,
    out: Path = typer.Argument(..., help="Workspace directory to create."),
    scene: Optional[Path] = typer.Option(None, "--scene", exists=True, dir_okay=False, help="Scene description file."),
    bundled: str = typer.Option("two_plane", "--bundled", help="Bundled scene used when --scene is absent."),
    seed: Optional[int] = typer.Option(None, "--seed", min=0, help="Override the texture seed."),
) -> None:
    """Render a synthetic scene with exact ground truth into a workspace."""
    spec = read_scene_spec(scene) if scene is not None else bundled_spec(bundled)
    if seed is not None:
        spec = spec.model_copy(update={"texture": spec.texture.model_copy(update={"seed": seed})})
    rendered = PipelineService(Workspace(out), workers_from(ctx)).synthesize(spec)
    print_metrics(
        f"scene -> {out}",
        {
            "views": len(rendered.views),
            "width": spec.width,
            "height": spec.height,
            "planes": 1 + len(spec.rectangles),
            "gt_cloud_points": len(rendered.gt_cloud),
        },
    )

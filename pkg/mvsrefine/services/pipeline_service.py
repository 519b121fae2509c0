"""Runs the per-view stages over a workspace directory."""
from typing import Dict, List, Literal, Optional

import structlog

from ..models.camera import CalibratedView
from ..models.cloud import PointCloud
from ..models.configs import FusionConfig, PatchMatchConfig, RefineConfig
from ..models.depth import DepthMap
from ..models.scene import SceneSpec, SyntheticScene
from ..parsers.report_parser import write_trace
from ..parsers.workspace import Workspace
from ..tasks.view_tasks import run_per_view
from .fusion_service import FusionService
from .patchmatch_service import PatchMatchService
from .refine_service import RefineResult, RefineService, init_parameters
from .scene_service import render_scene

logger = structlog.get_logger()

DepthStage = Literal["depth", "refined"]


class PipelineService:
    def __init__(self, workspace: Workspace, workers: Optional[int] = None):
        self.workspace = workspace
        self.workers = workers

    def synthesize(self, spec: SceneSpec) -> SyntheticScene:
        scene = render_scene(spec)
        self.workspace.save_scene(scene)
        return scene

    def estimate_depths(self, config: PatchMatchConfig) -> Dict[str, DepthMap]:
        """PatchMatch for every view against all others; saves the pyramid and cost."""
        views = self.workspace.load_views("pfm")
        service = PatchMatchService(config)

        def task(index: int) -> DepthMap:
            ref = views[index]
            sources = [view for j, view in enumerate(views) if j != index]
            result = service.estimate(ref, sources)
            self.workspace.save_pyramid(ref.name, result.pyramid(), result.cost)
            return result.depth

        depths = run_per_view(task, list(range(len(views))), self.workers)
        logger.info("Depth stage finished.", views=len(views))
        return {view.name: depth for view, depth in zip(views, depths)}

    def refine_view(
        self, index: int, views: List[CalibratedView], guides: List[CalibratedView], config: RefineConfig
    ) -> RefineResult:
        workspace = self.workspace
        name = views[index].name
        coarse = workspace.load_depth(name)
        h, w = coarse.shape[0] * 2, coarse.shape[1] * 2
        ref = views[index].cropped(h, w)
        service = RefineService(config)
        fine = service.upsample(coarse, guides[index].image[:h, :w])
        depth_range = (ref.depth_min, ref.depth_max)
        init = init_parameters(fine, config, depth_range)

        if config.mode == "supervised":
            gt = workspace.load_gt(name).cropped(h, w)
            result = service.refine_supervised(init, gt, depth_range, workspace.load_pyramid(name))
        else:
            sources = [view for j, view in enumerate(views) if j != index]
            result = service.refine_self_supervised(init, ref, sources)
        workspace.save_refined(name, result.depth, result.edge, result.bimodal)
        write_trace(workspace.trace(name), result.trace_rows())
        return result

    def refine(self, config: RefineConfig) -> Dict[str, RefineResult]:
        views = self.workspace.load_views("pfm")
        guides = self.workspace.load_views("png")
        results = run_per_view(
            lambda i: self.refine_view(i, views, guides, config), list(range(len(views))), self.workers
        )
        logger.info("Refine stage finished.", views=len(views), mode=config.mode)
        return {view.name: result for view, result in zip(views, results)}

    def load_stage(self, stage: DepthStage, name: str) -> DepthMap:
        if stage == "refined":
            return self.workspace.load_refined(name)
        return self.workspace.load_depth(name)

    def fuse(self, config: FusionConfig, stage: DepthStage = "refined") -> PointCloud:
        """Fuses the depth maps of one stage; colors come from the PNG images."""
        views = self.workspace.load_views("png")
        pairs = [(view, self.load_stage(stage, view.name)) for view in views]
        return FusionService(config, self.workers).fuse(pairs)

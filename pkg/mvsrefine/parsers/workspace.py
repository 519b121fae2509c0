"""Directory layout of a reconstruction workspace.

    scene.txt                   scene description (synthetic scenes only)
    images/<name>.png           8-bit color image
    images/<name>.pfm           lossless gray intensity; matching reads this copy
    cams/<name>_cam.txt         camera file
    gt/<name>.pfm               ground-truth depth, 0 where invalid
    gt/<name>_boundary.png      ground-truth discontinuity mask
    gt_cloud.ply                reference point cloud
    depth/<name>.pfm            PatchMatch depth (half resolution), 0 where invalid
    depth/<name>_cost.pfm       final matching cost
    depth/<name>_level<k>.pfm   coarser pyramid levels, k = 1 is the next coarser
    refined/<name>.pfm          refined depth (full resolution)
    refined/<name>_edge.pfm     edge probabilities, plus a PNG preview
    refined/<name>.<param>.pfm  mixture parameters (alpha, mu1, sigma1, mu2, sigma2)
    refined/<name>_trace.csv    loss trace
"""
from pathlib import Path
from typing import List, Literal, Optional, Union

import numpy as np
import structlog

from ..exceptions import FormatError
from ..models.camera import CalibratedView
from ..models.depth import BimodalDepthMap, BoundaryMask, DepthMap, EdgeMap, GroundTruth
from ..models.scene import SyntheticScene
from .cam_parser import CameraParameters, read_cam, write_cam
from .image_parser import read_png, write_png
from .pfm_parser import read_bimodal, read_pfm, write_bimodal, write_pfm
from .ply_parser import write_ply
from .scene_parser import write_scene_spec

logger = structlog.get_logger()

ImageSource = Literal["pfm", "png"]


def depth_to_grid(depth: DepthMap) -> np.ndarray:
    return depth.filled(0.0)


def grid_to_depth(grid: np.ndarray) -> DepthMap:
    return DepthMap.from_grid(np.asarray(grid, dtype=np.float64))


class Workspace:
    def __init__(self, root: Union[str, Path]):
        self.root = Path(root)

    @property
    def scene_file(self) -> Path:
        return self.root / "scene.txt"

    @property
    def gt_cloud(self) -> Path:
        return self.root / "gt_cloud.ply"

    def image_png(self, name: str) -> Path:
        return self.root / "images" / f"{name}.png"

    def image_pfm(self, name: str) -> Path:
        return self.root / "images" / f"{name}.pfm"

    def cam(self, name: str) -> Path:
        return self.root / "cams" / f"{name}_cam.txt"

    def gt(self, name: str) -> Path:
        return self.root / "gt" / f"{name}.pfm"

    def gt_boundary(self, name: str) -> Path:
        return self.root / "gt" / f"{name}_boundary.png"

    def depth(self, name: str, level: int = 0) -> Path:
        suffix = "" if level == 0 else f"_level{level}"
        return self.root / "depth" / f"{name}{suffix}.pfm"

    def cost(self, name: str) -> Path:
        return self.root / "depth" / f"{name}_cost.pfm"

    def refined(self, name: str) -> Path:
        return self.root / "refined" / f"{name}.pfm"

    def edge(self, name: str) -> Path:
        return self.root / "refined" / f"{name}_edge.pfm"

    def trace(self, name: str) -> Path:
        return self.root / "refined" / f"{name}_trace.csv"

    def view_names(self) -> List[str]:
        """View names in sorted order, taken from the camera files."""
        names = sorted(path.name[: -len("_cam.txt")] for path in (self.root / "cams").glob("*_cam.txt"))
        if not names:
            raise FormatError(f"no camera files under {self.root / 'cams'}")
        return names

    def load_view(self, name: str, source: ImageSource = "pfm") -> CalibratedView:
        """A view with either the gray PFM intensity or the color PNG as its image."""
        if source == "pfm" and self.image_pfm(name).is_file():
            image = read_pfm(self.image_pfm(name)).astype(np.float64)
        else:
            image = read_png(self.image_png(name))
        return read_cam(self.cam(name)).to_view(image, name)

    def load_views(self, source: ImageSource = "pfm") -> List[CalibratedView]:
        return [self.load_view(name, source) for name in self.view_names()]

    def save_view(self, view: CalibratedView) -> None:
        write_png(self.image_png(view.name), view.image)
        write_pfm(self.image_pfm(view.name), view.gray)
        write_cam(self.cam(view.name), CameraParameters.from_view(view))

    def load_gt(self, name: str) -> GroundTruth:
        return GroundTruth.from_grid(read_pfm(self.gt(name)).astype(np.float64))

    def save_scene(self, scene: SyntheticScene) -> None:
        self.root.mkdir(parents=True, exist_ok=True)
        write_scene_spec(self.scene_file, scene.spec)
        for view, gt, boundary in zip(scene.views, scene.gt_depths, scene.gt_boundaries):
            self.save_view(view)
            write_pfm(self.gt(view.name), gt.as_depth_map().filled(0.0))
            write_png(self.gt_boundary(view.name), boundary.grid.astype(np.float64))
        write_ply(self.gt_cloud, scene.gt_cloud)
        logger.info("Saved scene workspace.", root=str(self.root), views=len(scene.views))

    def load_depth(self, name: str, level: int = 0) -> DepthMap:
        return grid_to_depth(read_pfm(self.depth(name, level)))

    def load_pyramid(self, name: str) -> List[DepthMap]:
        """PatchMatch depth maps finest first."""
        levels, level = [], 0
        while self.depth(name, level).is_file():
            levels.append(self.load_depth(name, level))
            level += 1
        if not levels:
            raise FormatError(f"no depth map for view '{name}' under {self.root / 'depth'}")
        return levels

    def save_pyramid(self, name: str, pyramid: List[DepthMap], cost: Optional[np.ndarray] = None) -> None:
        for level, depth in enumerate(pyramid):
            write_pfm(self.depth(name, level), depth_to_grid(depth))
        if cost is not None:
            write_pfm(self.cost(name), cost)

    def load_refined(self, name: str) -> DepthMap:
        return grid_to_depth(read_pfm(self.refined(name)))

    def save_refined(self, name: str, depth: DepthMap, edge: EdgeMap, bimodal: BimodalDepthMap) -> None:
        write_pfm(self.refined(name), depth_to_grid(depth))
        write_pfm(self.edge(name), edge.grid)
        write_png(self.edge(name).with_suffix(".png"), edge.grid)
        write_bimodal(self.root / "refined", name, bimodal)

    def load_bimodal(self, name: str) -> BimodalDepthMap:
        return read_bimodal(self.root / "refined", name)

    def load_edge(self, name: str) -> EdgeMap:
        return EdgeMap(grid=np.clip(read_pfm(self.edge(name)).astype(np.float64), 0.0, 1.0))

    def load_boundary(self, name: str) -> BoundaryMask:
        return BoundaryMask(grid=read_png(self.gt_boundary(name)) > 0.5)

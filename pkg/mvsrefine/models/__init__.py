from .camera import CalibratedView, Intrinsics, Pose
from .cloud import CloudMetrics, DepthMetrics, PointCloud
from .configs import FusionConfig, LossWeights, PatchMatchConfig, RefineConfig
from .depth import BimodalDepthMap, BimodalLaplacian, BoundaryMask, DepthMap, EdgeMap, GroundTruth
from .losses import LossReport
from .scene import RectangleSpec, RigSpec, SceneSpec, SyntheticScene, TextureSpec

__all__ = [
    "BimodalDepthMap",
    "BimodalLaplacian",
    "BoundaryMask",
    "CalibratedView",
    "CloudMetrics",
    "DepthMap",
    "DepthMetrics",
    "EdgeMap",
    "FusionConfig",
    "GroundTruth",
    "Intrinsics",
    "LossReport",
    "LossWeights",
    "PatchMatchConfig",
    "PointCloud",
    "Pose",
    "RectangleSpec",
    "RefineConfig",
    "RigSpec",
    "SceneSpec",
    "SyntheticScene",
    "TextureSpec",
]

from typing import List, Literal

from pydantic import BaseModel, ConfigDict, Field, model_validator

from .base import GridModel
from .camera import CalibratedView
from .cloud import PointCloud
from .depth import BoundaryMask, GroundTruth


class RectangleSpec(BaseModel):
    """Axis-aligned fronto-parallel rectangle at world depth `depth`."""

    model_config = ConfigDict(frozen=True)

    x_min: float
    x_max: float
    y_min: float
    y_max: float
    depth: float = Field(gt=0.0)

    @model_validator(mode="after")
    def _ordered(self) -> "RectangleSpec":
        if not (self.x_min < self.x_max and self.y_min < self.y_max):
            raise ValueError("rectangle bounds must satisfy min < max")
        return self


class TextureSpec(BaseModel):
    model_config = ConfigDict(frozen=True)

    pattern: Literal["value_checker"] = "value_checker"
    seed: int = Field(default=0, ge=0)
    # texture feature size at the reference view, in pixels
    cell_px: float = Field(default=3.0, gt=0.0)


class RigSpec(BaseModel):
    model_config = ConfigDict(frozen=True)

    kind: Literal["lateral", "ring"] = "lateral"
    count: int = Field(default=3, ge=2)
    baseline: float = Field(default=100.0, gt=0.0)


class SceneSpec(BaseModel):
    """Piecewise-planar scene: a background plane plus foreground rectangles."""

    model_config = ConfigDict(frozen=True)

    width: int = Field(default=64, ge=8)
    height: int = Field(default=64, ge=8)
    focal: float = Field(default=64.0, gt=0.0)
    depth_min: float = Field(default=100.0, gt=0.0)
    depth_max: float = Field(default=900.0, gt=0.0)
    background_depth: float = Field(default=600.0, gt=0.0)
    rectangles: List[RectangleSpec] = Field(default_factory=list)
    texture: TextureSpec = Field(default_factory=TextureSpec)
    rig: RigSpec = Field(default_factory=RigSpec)

    @model_validator(mode="after")
    def _depths_ordered(self) -> "SceneSpec":
        if not self.depth_max > self.depth_min:
            raise ValueError("depth_max must exceed depth_min")
        depths = [self.background_depth] + [r.depth for r in self.rectangles]
        if any(not (self.depth_min <= d <= self.depth_max) for d in depths):
            raise ValueError("every plane depth must lie within the declared depth range")
        if any(r.depth >= self.background_depth for r in self.rectangles):
            raise ValueError("foreground rectangles must be nearer than the background")
        return self


class SyntheticScene(GridModel):
    spec: SceneSpec
    views: List[CalibratedView]
    gt_depths: List[GroundTruth]
    gt_boundaries: List[BoundaryMask]
    gt_cloud: PointCloud

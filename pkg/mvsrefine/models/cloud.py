import numpy as np
from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

from .base import GridModel, readonly


class PointCloud(GridModel):
    """Fused points with colors, originating view and consistency count."""

    points: np.ndarray
    colors: np.ndarray
    view_ids: np.ndarray
    consistency: np.ndarray

    @field_validator("points", "colors", mode="before")
    @classmethod
    def _xyz_array(cls, value):
        return readonly(np.reshape(value, (-1, 3)))

    @field_validator("view_ids", "consistency", mode="before")
    @classmethod
    def _int_array(cls, value):
        return readonly(value, dtype=np.int64, ndim=1)

    @model_validator(mode="after")
    def _consistent(self) -> "PointCloud":
        n = len(self.points)
        if not (len(self.colors) == len(self.view_ids) == len(self.consistency) == n):
            raise ValueError("point cloud attribute lengths differ")
        if not np.all(np.isfinite(self.points)):
            raise ValueError("point coordinates must be finite")
        return self

    @classmethod
    def from_points(cls, points: np.ndarray, colors=None) -> "PointCloud":
        points = np.reshape(np.asarray(points, dtype=np.float64), (-1, 3))
        n = len(points)
        if colors is None:
            colors = np.full((n, 3), 0.5)
        return cls(
            points=points,
            colors=colors,
            view_ids=np.full(n, -1),
            consistency=np.zeros(n, dtype=np.int64),
        )

    @classmethod
    def empty(cls) -> "PointCloud":
        return cls.from_points(np.zeros((0, 3)))

    def __len__(self) -> int:
        return len(self.points)


class CloudMetrics(BaseModel):
    model_config = ConfigDict(frozen=True)

    accuracy: float = Field(ge=0.0)
    completeness: float = Field(ge=0.0)
    overall: float = Field(ge=0.0)
    precision_pct: float = Field(ge=0.0, le=100.0)
    recall_pct: float = Field(ge=0.0, le=100.0)
    fscore: float = Field(ge=0.0, le=100.0)


class DepthMetrics(BaseModel):
    model_config = ConfigDict(frozen=True)

    mae: float = Field(ge=0.0)
    error_ratio: float = Field(ge=0.0, le=1.0)
    boundary_mae: float = Field(ge=0.0)
    smooth_mae: float = Field(ge=0.0)
    valid_pixels: int = Field(ge=0)
    boundary_pixels: int = Field(ge=0)
    smooth_pixels: int = Field(ge=0)

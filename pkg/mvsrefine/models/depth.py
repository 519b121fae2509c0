from typing import Optional, Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

from .base import GridModel, readonly


class DepthMap(GridModel):
    """Dense scalar depth with a per-pixel validity mask."""

    grid: np.ndarray
    validity: np.ndarray

    @field_validator("grid", mode="before")
    @classmethod
    def _grid_array(cls, value):
        return readonly(value, ndim=2)

    @field_validator("validity", mode="before")
    @classmethod
    def _validity_array(cls, value):
        return readonly(value, dtype=bool, ndim=2)

    @model_validator(mode="after")
    def _same_shape(self) -> "DepthMap":
        if self.grid.shape != self.validity.shape:
            raise ValueError("grid and validity shapes differ")
        return self

    @classmethod
    def from_grid(cls, grid: np.ndarray, validity: Optional[np.ndarray] = None) -> "DepthMap":
        """Wraps a grid; without a mask, finite positive entries are valid."""
        grid = np.asarray(grid, dtype=np.float64)
        if validity is None:
            validity = np.isfinite(grid) & (grid > 0)
        return cls(grid=grid, validity=validity)

    @property
    def shape(self) -> Tuple[int, int]:
        return self.grid.shape

    def filled(self, value: float = 0.0) -> np.ndarray:
        """The grid with invalid pixels replaced by `value`."""
        return np.where(self.validity, self.grid, value)


class GroundTruth(GridModel):
    depth: np.ndarray
    validity: np.ndarray

    @field_validator("depth", mode="before")
    @classmethod
    def _depth_array(cls, value):
        return readonly(value, ndim=2)

    @field_validator("validity", mode="before")
    @classmethod
    def _validity_array(cls, value):
        return readonly(value, dtype=bool, ndim=2)

    @model_validator(mode="after")
    def _valid_depths_positive(self) -> "GroundTruth":
        if self.depth.shape != self.validity.shape:
            raise ValueError("depth and validity shapes differ")
        valid = self.depth[self.validity]
        if not np.all(np.isfinite(valid) & (valid > 0)):
            raise ValueError("valid ground-truth depths must be positive and finite")
        return self

    @classmethod
    def from_grid(cls, depth: np.ndarray) -> "GroundTruth":
        depth = np.asarray(depth, dtype=np.float64)
        validity = np.isfinite(depth) & (depth > 0)
        return cls(depth=np.where(validity, depth, 0.0), validity=validity)

    @property
    def shape(self) -> Tuple[int, int]:
        return self.depth.shape

    def downsampled(self, scale: int) -> "GroundTruth":
        """Nearest-neighbor 2**scale reduction; never blends across discontinuities."""
        step = 2 ** scale
        return GroundTruth(depth=self.depth[::step, ::step], validity=self.validity[::step, ::step])

    def cropped(self, height: int, width: int) -> "GroundTruth":
        return GroundTruth(depth=self.depth[:height, :width], validity=self.validity[:height, :width])

    def as_depth_map(self) -> DepthMap:
        return DepthMap(grid=self.depth, validity=self.validity)


class EdgeMap(GridModel):
    """Per-pixel probability E of a depth discontinuity."""

    grid: np.ndarray

    @field_validator("grid", mode="before")
    @classmethod
    def _grid_array(cls, value):
        grid = readonly(value, ndim=2)
        if not np.all((grid >= 0.0) & (grid <= 1.0)):
            raise ValueError("edge probabilities must lie in [0, 1]")
        return grid

    @property
    def shape(self) -> Tuple[int, int]:
        return self.grid.shape


class BoundaryMask(GridModel):
    grid: np.ndarray

    @field_validator("grid", mode="before")
    @classmethod
    def _grid_array(cls, value):
        return readonly(value, dtype=bool, ndim=2)

    @property
    def shape(self) -> Tuple[int, int]:
        return self.grid.shape


class BimodalLaplacian(BaseModel):
    """Two-mode Laplace mixture over depth for a single pixel."""

    model_config = ConfigDict(frozen=True)

    alpha: float = Field(ge=0.0, le=1.0)
    mu1: float = Field(allow_inf_nan=False)
    sigma1: float = Field(gt=0.0, allow_inf_nan=False)
    mu2: float = Field(allow_inf_nan=False)
    sigma2: float = Field(gt=0.0, allow_inf_nan=False)

    def swapped(self) -> "BimodalLaplacian":
        """The same density with the modes listed in the other order."""
        return BimodalLaplacian(
            alpha=1.0 - self.alpha, mu1=self.mu2, sigma1=self.sigma2, mu2=self.mu1, sigma2=self.sigma1
        )


BIMODAL_FIELDS = ("alpha", "mu1", "sigma1", "mu2", "sigma2")


class BimodalDepthMap(GridModel):
    """Five planar grids holding one BimodalLaplacian per pixel.

    `validity` marks pixels whose parameters came from a valid depth; it
    defaults to all pixels.
    """

    alpha: np.ndarray
    mu1: np.ndarray
    sigma1: np.ndarray
    mu2: np.ndarray
    sigma2: np.ndarray
    validity: Optional[np.ndarray] = None

    @field_validator(*BIMODAL_FIELDS, mode="before")
    @classmethod
    def _plane_array(cls, value):
        return readonly(value, ndim=2)

    @field_validator("validity", mode="before")
    @classmethod
    def _validity_array(cls, value):
        return None if value is None else readonly(value, dtype=bool, ndim=2)

    @model_validator(mode="after")
    def _valid_cells(self) -> "BimodalDepthMap":
        shape = self.alpha.shape
        for name in BIMODAL_FIELDS[1:]:
            if getattr(self, name).shape != shape:
                raise ValueError(f"{name} grid shape differs from alpha")
        if self.validity is not None and self.validity.shape != shape:
            raise ValueError("validity shape differs from alpha")
        if not np.all((self.alpha >= 0.0) & (self.alpha <= 1.0)):
            raise ValueError("alpha must lie in [0, 1]")
        if not (np.all(self.sigma1 > 0) and np.all(self.sigma2 > 0)):
            raise ValueError("sigma must be positive")
        for name in ("mu1", "mu2", "sigma1", "sigma2"):
            if not np.all(np.isfinite(getattr(self, name))):
                raise ValueError(f"{name} must be finite")
        return self

    @property
    def shape(self) -> Tuple[int, int]:
        return self.alpha.shape

    @property
    def mask(self) -> np.ndarray:
        if self.validity is None:
            return np.ones(self.shape, dtype=bool)
        return self.validity

    def cell(self, y: int, x: int) -> BimodalLaplacian:
        return BimodalLaplacian(**{name: float(getattr(self, name)[y, x]) for name in BIMODAL_FIELDS})

    def planes(self) -> dict:
        return {name: getattr(self, name) for name in BIMODAL_FIELDS}

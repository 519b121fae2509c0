from typing import Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

from ..exceptions import DimensionMismatch
from ..utils.sampling import downsample_area, to_gray
from .base import GridModel, readonly

ORTHONORMAL_TOLERANCE = 1e-9


class Intrinsics(BaseModel):
    """Pinhole intrinsics. Pixel centers sit at integer coordinates."""

    model_config = ConfigDict(frozen=True)

    fx: float = Field(gt=0)
    fy: float = Field(gt=0)
    cx: float
    cy: float
    width: int = Field(gt=0)
    height: int = Field(gt=0)

    @model_validator(mode="after")
    def _principal_point_inside(self) -> "Intrinsics":
        if not (0 <= self.cx < self.width and 0 <= self.cy < self.height):
            raise ValueError(
                f"principal point ({self.cx}, {self.cy}) outside a {self.width}x{self.height} image"
            )
        return self

    @property
    def matrix(self) -> np.ndarray:
        return np.array([[self.fx, 0.0, self.cx], [0.0, self.fy, self.cy], [0.0, 0.0, 1.0]])

    @property
    def inverse(self) -> np.ndarray:
        return np.array(
            [
                [1.0 / self.fx, 0.0, -self.cx / self.fx],
                [0.0, 1.0 / self.fy, -self.cy / self.fy],
                [0.0, 0.0, 1.0],
            ]
        )

    def derived(self, **changes: float) -> "Intrinsics":
        """A copy for a resampled or cropped image of this camera.

        The principal point may leave the derived image (a corner principal
        point moves to -0.25 at half resolution), so the inside-image check
        only applies to cameras read from input.
        """
        return Intrinsics.model_construct(**{**self.model_dump(), **changes})

    def downsampled(self, levels: int) -> "Intrinsics":
        """Intrinsics of the image area-averaged by 2**levels (x' = (x + 0.5) / s - 0.5)."""
        if levels == 0:
            return self
        s = float(2 ** levels)
        return self.derived(
            fx=self.fx / s,
            fy=self.fy / s,
            cx=(self.cx + 0.5) / s - 0.5,
            cy=(self.cy + 0.5) / s - 0.5,
            width=self.width // 2 ** levels,
            height=self.height // 2 ** levels,
        )


class Pose(GridModel):
    """World-to-camera rigid transform: x_cam = rotation @ x_world + translation."""

    rotation: np.ndarray
    translation: np.ndarray

    @field_validator("rotation", mode="before")
    @classmethod
    def _rotation_array(cls, value):
        return readonly(value, shape=(3, 3))

    @field_validator("translation", mode="before")
    @classmethod
    def _translation_array(cls, value):
        return readonly(value, shape=(3,))

    @model_validator(mode="after")
    def _orthonormal(self) -> "Pose":
        r = self.rotation
        if not np.all(np.isfinite(r)) or not np.all(np.isfinite(self.translation)):
            raise ValueError("pose contains non-finite entries")
        if np.max(np.abs(r.T @ r - np.eye(3))) > ORTHONORMAL_TOLERANCE:
            raise ValueError("rotation is not orthonormal")
        if abs(np.linalg.det(r) - 1.0) > ORTHONORMAL_TOLERANCE:
            raise ValueError("rotation is not a proper rotation (det != +1)")
        return self

    @classmethod
    def identity(cls) -> "Pose":
        return cls(rotation=np.eye(3), translation=np.zeros(3))

    @classmethod
    def from_matrix(cls, matrix: np.ndarray) -> "Pose":
        matrix = np.asarray(matrix, dtype=np.float64)
        return cls(rotation=matrix[:3, :3], translation=matrix[:3, 3])

    @property
    def matrix(self) -> np.ndarray:
        m = np.eye(4)
        m[:3, :3] = self.rotation
        m[:3, 3] = self.translation
        return m

    @property
    def center(self) -> np.ndarray:
        """Camera center in world coordinates."""
        return -self.rotation.T @ self.translation


class CalibratedView(GridModel):
    """An image with its camera and the depth range it observes."""

    image: np.ndarray
    intrinsics: Intrinsics
    pose: Pose
    depth_min: float = Field(gt=0)
    depth_max: float
    name: str = "view"

    @field_validator("image", mode="before")
    @classmethod
    def _image_array(cls, value):
        image = readonly(value)
        if image.ndim not in (2, 3) or (image.ndim == 3 and image.shape[2] not in (1, 3)):
            raise ValueError(f"image must be HxW or HxWx3, got shape {image.shape}")
        if image.ndim == 3 and image.shape[2] == 1:
            image = readonly(image[..., 0])
        return image

    @model_validator(mode="after")
    def _consistent(self) -> "CalibratedView":
        if not self.depth_max > self.depth_min:
            raise ValueError("depth_max must exceed depth_min")
        if self.image.shape[:2] != (self.intrinsics.height, self.intrinsics.width):
            raise ValueError(
                f"image is {self.image.shape[1]}x{self.image.shape[0]} but intrinsics say "
                f"{self.intrinsics.width}x{self.intrinsics.height}"
            )
        return self

    @property
    def shape(self) -> Tuple[int, int]:
        return self.intrinsics.height, self.intrinsics.width

    @property
    def depth_range(self) -> float:
        return self.depth_max - self.depth_min

    @property
    def gray(self) -> np.ndarray:
        return to_gray(self.image)

    def downsampled(self, levels: int) -> "CalibratedView":
        """The view at 1/2**levels resolution, image area-averaged."""
        image = self.image
        for _ in range(levels):
            image = downsample_area(image)
        return CalibratedView(
            image=image,
            intrinsics=self.intrinsics.downsampled(levels),
            pose=self.pose,
            depth_min=self.depth_min,
            depth_max=self.depth_max,
            name=self.name,
        )

    def resized_to(self, shape: Tuple[int, int]) -> "CalibratedView":
        """The view downsampled by the power of two that yields `shape`."""
        height, width = self.shape
        for levels in range(16):
            if (height // 2 ** levels, width // 2 ** levels) == tuple(shape):
                return self.downsampled(levels)
        raise DimensionMismatch(
            f"{shape[1]}x{shape[0]} is not a power-of-two reduction of {self.shape[1]}x{self.shape[0]}"
        )

    def cropped(self, height: int, width: int) -> "CalibratedView":
        """The top-left height x width part of the view; intrinsics are unchanged apart from size."""
        if self.shape == (height, width):
            return self
        return CalibratedView(
            image=self.image[:height, :width],
            intrinsics=self.intrinsics.derived(width=width, height=height),
            pose=self.pose,
            depth_min=self.depth_min,
            depth_max=self.depth_max,
            name=self.name,
        )

"""Camera text files in the common MVS layout.

    extrinsic
    <4x4 world-to-camera matrix, row-major>

    intrinsic
    <3x3 K, row-major>

    <depth_min> <depth_interval> <depth_sample_count> <depth_max>
"""
from pathlib import Path
from typing import List, Union

import numpy as np
import structlog
from pydantic import BaseModel, ConfigDict, Field, ValidationError

from ..exceptions import MalformedCamFile
from ..models.camera import CalibratedView, Intrinsics, Pose

logger = structlog.get_logger()

PathLike = Union[str, Path]
DEFAULT_SAMPLE_COUNT = 192


class CameraParameters(BaseModel):
    """The 21 numbers of a camera file."""

    model_config = ConfigDict(frozen=True)

    extrinsic: List[List[float]]
    intrinsic: List[List[float]]
    depth_min: float
    depth_interval: float
    depth_sample_count: float = Field(default=DEFAULT_SAMPLE_COUNT)
    depth_max: float

    @classmethod
    def from_view(cls, view: CalibratedView, sample_count: int = DEFAULT_SAMPLE_COUNT) -> "CameraParameters":
        return cls(
            extrinsic=view.pose.matrix.tolist(),
            intrinsic=view.intrinsics.matrix.tolist(),
            depth_min=view.depth_min,
            depth_interval=view.depth_range / sample_count,
            depth_sample_count=sample_count,
            depth_max=view.depth_max,
        )

    def to_view(self, image: np.ndarray, name: str = "view") -> CalibratedView:
        """Binds these parameters to an image; the image fixes the intrinsic width and height."""
        k = np.asarray(self.intrinsic)
        height, width = image.shape[:2]
        try:
            return CalibratedView(
                image=image,
                intrinsics=Intrinsics(fx=k[0, 0], fy=k[1, 1], cx=k[0, 2], cy=k[1, 2], width=width, height=height),
                pose=Pose.from_matrix(np.asarray(self.extrinsic)),
                depth_min=self.depth_min,
                depth_max=self.depth_max,
                name=name,
            )
        except ValidationError as e:
            raise MalformedCamFile(f"camera '{name}' is not a valid calibrated view: {e.errors()[0]['msg']}") from e


def format_cam(params: CameraParameters) -> str:
    lines = ["extrinsic"]
    lines += [" ".join(f"{v:.17g}" for v in row) for row in params.extrinsic]
    lines += ["", "intrinsic"]
    lines += [" ".join(f"{v:.17g}" for v in row) for row in params.intrinsic]
    lines += [
        "",
        " ".join(
            f"{v:.17g}"
            for v in (params.depth_min, params.depth_interval, params.depth_sample_count, params.depth_max)
        ),
    ]
    return "\n".join(lines) + "\n"


def _numbers(line: str, count: int, what: str) -> List[float]:
    try:
        values = [float(token) for token in line.split()]
    except ValueError as e:
        raise MalformedCamFile(f"non-numeric {what} line: {line!r}") from e
    if len(values) != count:
        raise MalformedCamFile(f"{what} line has {len(values)} numbers, expected {count}")
    return values


def parse_cam(text: str) -> CameraParameters:
    lines = [line.strip() for line in text.splitlines() if line.strip()]
    if len(lines) < 10:
        raise MalformedCamFile(f"camera file has {len(lines)} non-empty lines, expected 10")
    if lines[0].lower() != "extrinsic":
        raise MalformedCamFile(f"expected 'extrinsic', found {lines[0]!r}")
    if lines[5].lower() != "intrinsic":
        raise MalformedCamFile(f"expected 'intrinsic', found {lines[5]!r}")
    extrinsic = [_numbers(line, 4, "extrinsic") for line in lines[1:5]]
    intrinsic = [_numbers(line, 3, "intrinsic") for line in lines[6:9]]
    depth = _numbers(lines[9], 4, "depth")
    return CameraParameters(
        extrinsic=extrinsic,
        intrinsic=intrinsic,
        depth_min=depth[0],
        depth_interval=depth[1],
        depth_sample_count=depth[2],
        depth_max=depth[3],
    )


def read_cam(path: PathLike) -> CameraParameters:
    return parse_cam(Path(path).read_text())


def write_cam(path: PathLike, params: CameraParameters) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(format_cam(params))

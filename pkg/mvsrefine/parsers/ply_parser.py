"""Binary little-endian PLY point clouds.

Vertices carry x, y, z (float64) and red, green, blue (uint8), plus the
originating view and consistency count as int32 properties that viewers
ignore.
"""
from pathlib import Path
from typing import Union

import numpy as np
import structlog
from plyfile import PlyData, PlyElement, PlyParseError

from ..exceptions import FormatError
from ..models.cloud import PointCloud
from .image_parser import to_bytes

logger = structlog.get_logger()

PathLike = Union[str, Path]
VERTEX_DTYPE = [
    ("x", "<f8"), ("y", "<f8"), ("z", "<f8"),
    ("red", "u1"), ("green", "u1"), ("blue", "u1"),
    ("view", "<i4"), ("consistency", "<i4"),
]


def write_ply(path: PathLike, cloud: PointCloud) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    vertices = np.empty(len(cloud), dtype=VERTEX_DTYPE)
    for axis, name in enumerate("xyz"):
        vertices[name] = cloud.points[:, axis]
    rgb = to_bytes(cloud.colors)
    for channel, name in enumerate(("red", "green", "blue")):
        vertices[name] = rgb[:, channel]
    vertices["view"] = cloud.view_ids
    vertices["consistency"] = cloud.consistency

    PlyData([PlyElement.describe(vertices, "vertex")], text=False, byte_order="<").write(str(path))
    logger.debug("Wrote point cloud.", path=str(path), points=len(cloud))


def read_ply(path: PathLike) -> PointCloud:
    try:
        data = PlyData.read(str(path))
        vertices = data["vertex"].data
    except (OSError, KeyError, ValueError, PlyParseError) as e:
        raise FormatError(f"cannot read point cloud {path}: {e}") from e
    names = vertices.dtype.names
    n = len(vertices)
    points = np.stack([np.asarray(vertices[a], dtype=np.float64) for a in "xyz"], axis=1).reshape(n, 3)
    if all(c in names for c in ("red", "green", "blue")):
        colors = np.stack([np.asarray(vertices[c], dtype=np.float64) / 255.0 for c in ("red", "green", "blue")], axis=1)
    else:
        colors = np.full((n, 3), 0.5)
    view_ids = np.asarray(vertices["view"], dtype=np.int64) if "view" in names else np.full(n, -1)
    consistency = np.asarray(vertices["consistency"], dtype=np.int64) if "consistency" in names else np.zeros(n)
    return PointCloud(points=points, colors=colors.reshape(n, 3), view_ids=view_ids, consistency=consistency)

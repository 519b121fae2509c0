from pathlib import Path
from typing import Union

import numpy as np
from PIL import Image

from ..exceptions import FormatError

PathLike = Union[str, Path]


def to_bytes(image: np.ndarray) -> np.ndarray:
    """Quantizes [0, 1] intensities to uint8 with round-half-up."""
    return np.floor(np.clip(image, 0.0, 1.0) * 255.0 + 0.5).astype(np.uint8)


def write_png(path: PathLike, image: np.ndarray) -> None:
    """Writes an HxW or HxWx3 image with values in [0, 1] as 8-bit PNG."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    Image.fromarray(to_bytes(image)).save(path, format="PNG")


def read_png(path: PathLike) -> np.ndarray:
    """Reads an 8-bit PNG as float64 in [0, 1]; RGBA and palette images become RGB."""
    try:
        with Image.open(path) as image:
            mode = "L" if image.mode in ("L", "I;16", "1") else "RGB"
            pixels = np.asarray(image.convert(mode), dtype=np.float64)
    except (OSError, ValueError) as e:
        raise FormatError(f"cannot read image {path}: {e}") from e
    return pixels / 255.0

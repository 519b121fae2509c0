from typing import Optional, Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict


class GridModel(BaseModel):
    """Frozen model that carries numpy grids as fields."""

    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)


def readonly(value, dtype=np.float64, shape: Optional[Tuple[int, ...]] = None, ndim: Optional[int] = None) -> np.ndarray:
    """Copies value into a read-only array of the given dtype, checking its shape."""
    array = np.array(value, dtype=dtype, copy=True)
    if shape is not None and array.shape != shape:
        raise ValueError(f"expected shape {shape}, got {array.shape}")
    if ndim is not None and array.ndim != ndim:
        raise ValueError(f"expected a {ndim}-dimensional array, got shape {array.shape}")
    array.setflags(write=False)
    return array

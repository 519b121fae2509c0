"""Depth Laplacian, the boundary mask phi, and the edge-aware smoothness weight."""
from typing import Optional

import numpy as np
from scipy import ndimage

from ..exceptions import ImageTooSmall, NonPositiveBeta, NonPositiveTau
from ..models.configs import default_tau
from ..models.depth import BoundaryMask, DepthMap, EdgeMap

DEFAULT_BETA = 10.0

__all__ = [
    "DEFAULT_BETA",
    "default_tau",
    "edge_iou",
    "laplacian",
    "laplacian_grid",
    "phi",
    "smoothness_weight",
    "stencil_adjoint",
    "stencil_support",
]


def stencil_support(validity: np.ndarray) -> np.ndarray:
    """Interior pixels whose whole 4-neighborhood is valid."""
    support = np.zeros(validity.shape, dtype=bool)
    support[1:-1, 1:-1] = (
        validity[1:-1, 1:-1]
        & validity[1:-1, :-2]
        & validity[1:-1, 2:]
        & validity[:-2, 1:-1]
        & validity[2:, 1:-1]
    )
    return support


def laplacian_grid(grid: np.ndarray, validity: Optional[np.ndarray] = None) -> np.ndarray:
    """4-neighbor Laplacian; zero on the border and around invalid pixels."""
    h, w = grid.shape
    if h < 3 or w < 3:
        raise ImageTooSmall(f"the Laplacian needs at least 3x3 pixels, got {w}x{h}")
    if validity is not None:
        grid = np.where(validity, grid, 0.0)
    out = np.zeros((h, w))
    out[1:-1, 1:-1] = (
        grid[1:-1, :-2] + grid[1:-1, 2:] + grid[:-2, 1:-1] + grid[2:, 1:-1] - 4.0 * grid[1:-1, 1:-1]
    )
    if validity is not None:
        out[~stencil_support(validity)] = 0.0
    return out


def laplacian(depth: DepthMap) -> np.ndarray:
    return laplacian_grid(depth.grid, depth.validity)


def stencil_adjoint(coefficients: np.ndarray) -> np.ndarray:
    """Transpose of the Laplacian stencil: d/dD of sum(c * laplacian(D))."""
    g = -4.0 * coefficients
    g[:, :-1] += coefficients[:, 1:]
    g[:, 1:] += coefficients[:, :-1]
    g[:-1, :] += coefficients[1:, :]
    g[1:, :] += coefficients[:-1, :]
    return g


def phi(depth: DepthMap, tau: float) -> BoundaryMask:
    if not tau > 0:
        raise NonPositiveTau(f"tau must be positive, got {tau}")
    return BoundaryMask(grid=np.abs(laplacian(depth)) > tau)


def smoothness_weight(edge: EdgeMap, beta: float) -> np.ndarray:
    if not beta > 0:
        raise NonPositiveBeta(f"beta must be positive, got {beta}")
    return np.exp(-beta * edge.grid)


def edge_iou(predicted: np.ndarray, reference: np.ndarray, dilation: int = 2) -> float:
    """Intersection over union of two boolean masks after a square dilation of each."""
    structure = np.ones((2 * dilation + 1, 2 * dilation + 1), dtype=bool)
    a = ndimage.binary_dilation(predicted, structure=structure) if predicted.any() else predicted
    b = ndimage.binary_dilation(reference, structure=structure) if reference.any() else reference
    union = np.count_nonzero(a | b)
    if union == 0:
        return 1.0
    return np.count_nonzero(a & b) / union

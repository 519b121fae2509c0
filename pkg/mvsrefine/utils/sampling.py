from typing import Tuple

import numpy as np
from scipy import ndimage

# ITU-R BT.601 luma weights
LUMA = np.array([0.299, 0.587, 0.114])


def to_gray(image: np.ndarray) -> np.ndarray:
    if image.ndim == 2:
        return image
    return image[..., :3] @ LUMA


def bilinear(image: np.ndarray, xs: np.ndarray, ys: np.ndarray) -> np.ndarray:
    """Bilinear samples of a single-channel image at subpixel (x, y).

    Samples outside the image read the nearest border value; callers mask
    them with in_image().
    """
    coords = np.stack([np.ravel(ys), np.ravel(xs)])
    values = ndimage.map_coordinates(image, coords, order=1, mode="nearest", prefilter=False)
    return values.reshape(np.shape(xs))


def in_image(xs: np.ndarray, ys: np.ndarray, width: int, height: int) -> np.ndarray:
    return (xs >= 0.0) & (xs <= width - 1) & (ys >= 0.0) & (ys <= height - 1)


def downsample_area(image: np.ndarray) -> np.ndarray:
    """2x2 box average; a trailing odd row or column is dropped."""
    h, w = image.shape[0] // 2 * 2, image.shape[1] // 2 * 2
    cropped = image[:h, :w]
    return 0.25 * (
        cropped[0::2, 0::2] + cropped[1::2, 0::2] + cropped[0::2, 1::2] + cropped[1::2, 1::2]
    )


def window_offsets(window: int) -> Tuple[np.ndarray, np.ndarray]:
    """Row and column offsets of a square window, row-major."""
    half = window // 2
    dy, dx = np.mgrid[-half:half + 1, -half:half + 1]
    return dy.ravel().astype(np.float64), dx.ravel().astype(np.float64)


def pixel_grid(height: int, width: int) -> Tuple[np.ndarray, np.ndarray]:
    """Integer pixel-center coordinates (xs, ys) as float grids."""
    ys, xs = np.mgrid[0:height, 0:width]
    return xs.astype(np.float64), ys.astype(np.float64)

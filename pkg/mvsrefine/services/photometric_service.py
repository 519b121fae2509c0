"""Zero-mean NCC between a reference window and its fronto-parallel warp
into each source view. Shared by PatchMatch, self-supervised refinement and
fusion."""
from typing import List, Tuple

import numpy as np

from ..exceptions import DimensionMismatch, NoSources
from ..models.camera import CalibratedView
from ..utils.sampling import bilinear, in_image, pixel_grid, window_offsets
from .geometry_service import in_bounds, warp_pixels

NCC_EPSILON = 1e-6
WORST_COST = 2.0
MIN_INSIDE_FRACTION = 0.5


class PatchCostEvaluator:
    """Evaluates 1 - NCC per pixel for a whole depth grid at once.

    Window samples that leave the reference image are excluded. A source is
    skipped at a pixel when fewer than half of its window samples land
    inside the source image; reference windows with variance below
    NCC_EPSILON cost WORST_COST.
    """

    def __init__(self, ref: CalibratedView, sources: List[CalibratedView], window: int = 5):
        if not sources:
            raise NoSources("photometric cost needs at least one source view")
        self.ref = ref
        self.sources = sources
        self.source_grays = [src.gray for src in sources]
        h, w = ref.shape
        dy, dx = window_offsets(window)
        xs, ys = pixel_grid(h, w)
        self.wx = xs[..., None] + dx
        self.wy = ys[..., None] + dy
        self.window_size = dx.size
        self.ref_inside = in_image(self.wx, self.wy, w, h)
        self.ref_values = bilinear(ref.gray, np.clip(self.wx, 0, w - 1), np.clip(self.wy, 0, h - 1))

    @property
    def shape(self) -> Tuple[int, int]:
        return self.ref.shape

    def source_ncc(self, depth: np.ndarray, index: int) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
        """(ncc, usable, flat) grids for one source at per-pixel depths."""
        if depth.shape != self.shape:
            raise DimensionMismatch(f"depth grid {depth.shape} does not match reference {self.shape}")
        src = self.sources[index]
        depths = np.broadcast_to(depth[..., None], self.wx.shape)
        sx, sy, in_front = warp_pixels(self.wx, self.wy, depths, self.ref, src)
        inside = in_front & in_bounds(sx, sy, src.intrinsics)
        usable = np.count_nonzero(inside, axis=-1) >= MIN_INSIDE_FRACTION * self.window_size
        mask = inside & self.ref_inside
        src_values = bilinear(self.source_grays[index], np.where(inside, sx, 0.0), np.where(inside, sy, 0.0))

        n = np.maximum(np.count_nonzero(mask, axis=-1), 1)
        ref_values = np.where(mask, self.ref_values, 0.0)
        src_values = np.where(mask, src_values, 0.0)
        ref_centered = np.where(mask, ref_values - (ref_values.sum(-1) / n)[..., None], 0.0)
        src_centered = np.where(mask, src_values - (src_values.sum(-1) / n)[..., None], 0.0)
        var_ref = (ref_centered * ref_centered).sum(-1) / n
        var_src = (src_centered * src_centered).sum(-1) / n
        cov = (ref_centered * src_centered).sum(-1) / n
        ncc = np.clip(cov / np.maximum(np.sqrt(var_ref * var_src), NCC_EPSILON), -1.0, 1.0)
        return ncc, usable, var_ref < NCC_EPSILON

    def cost(self, depth: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
        """Mean 1 - NCC over usable sources, and whether any source was usable."""
        total = np.zeros(self.shape)
        count = np.zeros(self.shape, dtype=np.int64)
        for index in range(len(self.sources)):
            ncc, usable, flat = self.source_ncc(depth, index)
            cost = np.where(flat, WORST_COST, 1.0 - ncc)
            total += np.where(usable, cost, 0.0)
            count += usable
        valid = count > 0
        return np.where(valid, total / np.maximum(count, 1), WORST_COST), valid

"""Coarse-to-fine PatchMatch depth estimation with checkerboard propagation.

Level 0 is half the input resolution; level L-1 is the coarsest. Each level
alternates propagation and evaluation over the two checkerboard colors.
Candidate sets always start with the incumbent, so per-pixel best cost
never increases within a level.
"""
from typing import Dict, List, Optional, Tuple

import numpy as np
import structlog
from pydantic import field_validator

from ..exceptions import DimensionMismatch, ImageTooSmall, NoSources
from ..models.base import GridModel, readonly
from ..models.camera import CalibratedView
from ..models.configs import PatchMatchConfig
from ..models.depth import DepthMap
from ..utils.rng import pixel_uniforms, stream_key
from .photometric_service import PatchCostEvaluator

logger = structlog.get_logger()

NEIGHBOR_OFFSETS = ((-1, 0), (1, 0), (0, -1), (0, 1))
INIT_ROUND = -1
# a hypothesis must beat the incumbent by more than this to replace it
COST_TIE_TOLERANCE = 1e-12


class CandidateSet(GridModel):
    """Per-pixel depth hypotheses, slot 0 being the incumbent. NaN marks an empty slot."""

    depths: np.ndarray
    active: np.ndarray

    @field_validator("depths", mode="before")
    @classmethod
    def _depths_array(cls, value):
        return readonly(value, ndim=3)

    @field_validator("active", mode="before")
    @classmethod
    def _active_array(cls, value):
        return readonly(value, dtype=bool, ndim=2)

    @classmethod
    def incumbent(cls, depth: DepthMap) -> "CandidateSet":
        return cls(depths=depth.grid[..., None], active=np.ones(depth.shape, dtype=bool))

    @property
    def slots(self) -> int:
        return self.depths.shape[2]

    def values_at(self, y: int, x: int) -> np.ndarray:
        values = self.depths[y, x]
        return np.unique(values[np.isfinite(values)])

    def extended(self, extra: np.ndarray) -> "CandidateSet":
        """Appends hypotheses (H, W, P) for the active pixels only."""
        extra = np.where(self.active[..., None], extra, np.nan)
        return CandidateSet(depths=np.concatenate([self.depths, extra], axis=2), active=self.active)


class PatchMatchResult(GridModel):
    depth: DepthMap
    cost: np.ndarray
    # coarse to fine; the last entry is `depth`
    levels: List[DepthMap]
    cost_history: Dict[int, List[np.ndarray]]

    def pyramid(self) -> List[DepthMap]:
        """Level estimates finest first, the order loss pyramids expect."""
        return list(reversed(self.levels))


def random_init(
    level: int,
    ref: CalibratedView,
    config: PatchMatchConfig,
    depth_range: Optional[Tuple[float, float]] = None,
) -> DepthMap:
    """I.i.d. uniform depths over the view's range (or an explicit one)."""
    low, high = depth_range or (ref.depth_min, ref.depth_max)
    h, w = ref.shape
    u = pixel_uniforms(stream_key(config.rng_seed, level, INIT_ROUND), h, w)[..., 0]
    grid = np.minimum(low + (high - low) * u, high)
    return DepthMap(grid=grid, validity=np.ones((h, w), dtype=bool))


def upsample_init(coarse: DepthMap, shape: Optional[Tuple[int, int]] = None) -> DepthMap:
    """Nearest-neighbor 2x upsampling (block replication)."""
    target = (coarse.shape[0] * 2, coarse.shape[1] * 2)
    if shape is not None and tuple(shape) != target:
        raise DimensionMismatch(f"cannot upsample {coarse.shape} to {tuple(shape)}; expected {target}")
    grid = np.repeat(np.repeat(coarse.grid, 2, axis=0), 2, axis=1)
    validity = np.repeat(np.repeat(coarse.validity, 2, axis=0), 2, axis=1)
    return DepthMap(grid=grid, validity=validity)



def propagate(depth: DepthMap, parity: int) -> CandidateSet:
    """Pixels of one checkerboard color gather their 4-neighbors' depths."""
    h, w = depth.shape
    ys, xs = np.mgrid[0:h, 0:w]
    active = (ys + xs) % 2 == parity
    padded = np.pad(np.where(depth.validity, depth.grid, np.nan), 1, constant_values=np.nan)
    slots = [depth.grid]
    for dy, dx in NEIGHBOR_OFFSETS:
        neighbor = padded[1 + dy:1 + dy + h, 1 + dx:1 + dx + w]
        slots.append(np.where(active, neighbor, np.nan))
    return CandidateSet(depths=np.stack(slots, axis=2), active=active)


def perturbation_window(round_index: int, depth_range: Tuple[float, float]) -> float:
    low, high = depth_range
    return (high - low) / 4.0 * 0.5 ** round_index


def random_perturbation(
    depth: DepthMap,
    round_index: int,
    config: PatchMatchConfig,
    depth_range: Tuple[float, float],
    level: int = 0,
) -> np.ndarray:
    """(H, W, P) samples uniform in a window centered on the current depth."""
    if round_index < 0:
        raise ValueError("round index must be non-negative")
    low, high = depth_range
    h, w = depth.shape
    count = config.perturbations_per_pixel
    u = pixel_uniforms(stream_key(config.rng_seed, level, round_index), h, w, count)
    window = perturbation_window(round_index, depth_range)
    return np.clip(depth.grid[..., None] + (u - 0.5) * window, low, high)


class PatchMatchEvaluator:
    """Selects the lowest-cost hypothesis per pixel; ties (within rounding) keep the earlier slot."""

    def __init__(self, ref: CalibratedView, sources: List[CalibratedView], config: PatchMatchConfig):
        self.costs = PatchCostEvaluator(ref, sources, config.window)

    def select(
        self,
        candidates: CandidateSet,
        incumbent: Optional[Tuple[np.ndarray, np.ndarray]] = None,
    ) -> Tuple[DepthMap, np.ndarray]:
        best_depth = candidates.depths[..., 0].copy()
        if incumbent is None:
            best_cost, best_valid = self.costs.cost(best_depth)
        else:
            best_cost, best_valid = incumbent[0].copy(), incumbent[1].copy()
        for slot in range(1, candidates.slots):
            hypothesis = candidates.depths[..., slot]
            present = candidates.active & np.isfinite(hypothesis)
            if not present.any():
                continue
            cost, valid = self.costs.cost(np.where(present, hypothesis, best_depth))
            better = present & (cost < best_cost - COST_TIE_TOLERANCE)
            best_depth[better] = hypothesis[better]
            best_cost[better] = cost[better]
            best_valid[better] = valid[better]
        return DepthMap(grid=best_depth, validity=best_valid), best_cost


def evaluate(
    ref: CalibratedView,
    sources: List[CalibratedView],
    candidates: CandidateSet,
    config: PatchMatchConfig,
) -> DepthMap:
    depth, _ = PatchMatchEvaluator(ref, sources, config).select(candidates)
    return depth


class PatchMatchService:
    def __init__(self, config: Optional[PatchMatchConfig] = None):
        self.config = config or PatchMatchConfig()

    def output_shape(self, ref: CalibratedView) -> Tuple[int, int]:
        """Half-resolution output size after cropping to a multiple of 2**levels."""
        m = 2 ** self.config.levels
        h, w = ref.shape
        return h // m * (m // 2), w // m * (m // 2)

    def estimate(self, ref: CalibratedView, sources: List[CalibratedView]) -> PatchMatchResult:
        try:
            return self._estimate(ref, sources)
        except Exception as e:
            logger.error("PatchMatch failed.", view=ref.name, error=str(e))
            raise

    def _estimate(self, ref: CalibratedView, sources: List[CalibratedView]) -> PatchMatchResult:
        config = self.config
        if not sources:
            raise NoSources(f"view '{ref.name}' has no source views")
        h, w = ref.shape
        if min(h, w) < 2 ** config.levels:
            raise ImageTooSmall(f"{w}x{h} image is too small for {config.levels} pyramid levels")

        out_h, out_w = self.output_shape(ref)
        crop_h, crop_w = out_h * 2, out_w * 2
        ref = ref.cropped(crop_h, crop_w)
        sources = [src.cropped(crop_h, crop_w) if src.shape == (h, w) else src for src in sources]
        depth_range = (ref.depth_min, ref.depth_max)
        if not config.perturbations_per_pixel:
            logger.info(
                "Random search disabled; propagation only.", view=ref.name,
                hypotheses_per_pixel=config.hypotheses_per_pixel,
            )

        depth: Optional[DepthMap] = None
        cost = None
        levels: List[DepthMap] = []
        history: Dict[int, List[np.ndarray]] = {}
        for level_index, level in enumerate(reversed(range(config.levels))):
            ref_level = ref.downsampled(level + 1)
            sources_level = [src.downsampled(level + 1) for src in sources]
            if depth is None:
                depth = random_init(level, ref_level, config)
            else:
                depth = upsample_init(depth, ref_level.shape)
            evaluator = PatchMatchEvaluator(ref_level, sources_level, config)
            depth, cost = evaluator.select(CandidateSet.incumbent(depth))
            valid = depth.validity.copy()
            history[level] = [cost.copy()]

            round_in_level = 0
            for _ in range(config.iterations_per_level):
                for parity in (0, 1):
                    round_index = level_index + round_in_level
                    candidates = propagate(depth, parity)
                    if config.perturbations_per_pixel:
                        candidates = candidates.extended(
                            random_perturbation(depth, round_index, config, depth_range, level=level)
                        )
                    depth, cost = evaluator.select(candidates, incumbent=(cost, valid))
                    valid = depth.validity.copy()
                    history[level].append(cost.copy())
                    round_in_level += 1
                    logger.debug(
                        "PatchMatch round finished.", view=ref.name, level=level, round=round_index,
                        mean_cost=float(cost.mean()),
                    )
            levels.append(depth)
            logger.info(
                "PatchMatch level finished.", view=ref.name, level=level, shape=list(depth.shape),
                mean_cost=float(cost.mean()), valid_fraction=float(valid.mean()),
            )
        return PatchMatchResult(depth=depth, cost=cost, levels=levels, cost_history=history)


def run(ref: CalibratedView, sources: List[CalibratedView], config: Optional[PatchMatchConfig] = None) -> DepthMap:
    return PatchMatchService(config).estimate(ref, sources).depth

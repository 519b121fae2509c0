"""Depth-discontinuity refinement by direct minimization of the loss.

The optimizer works on unconstrained pre-images: logits for alpha and E,
softplus pre-images for sigma, and the mu grids directly. Steps use the
per-pixel sum N * L, with depth-valued parameters (mu and sigma pre-images)
stepped in units of the depth range. A step is halved until the total does
not increase, so the trace never goes up between edge-target refreshes.
"""
import math
from typing import Callable, Dict, List, Optional, Tuple

import numpy as np
import structlog
from pydantic import BaseModel, ConfigDict, field_validator
from scipy import ndimage
from scipy.special import expit, logit

from ..exceptions import DimensionMismatch, DivergedLoss, NoSources
from ..models.base import GridModel, readonly
from ..models.camera import CalibratedView
from ..models.configs import RefineConfig
from ..models.depth import BimodalDepthMap, DepthMap, EdgeMap, GroundTruth
from ..utils.sampling import downsample_area
from . import bimodal_service as bimodal
from .discontinuity_service import laplacian_grid, phi
from .loss_service import (
    LossInputs,
    combine,
    combine_gradients,
    edge_term,
    smoothness_term,
    term_values_and_gradients,
)
from .photometric_service import PatchCostEvaluator

logger = structlog.get_logger()

EDGE_MARGIN = 1e-9
# E is clamped to this before the logit; expit' is near zero above it and an edge could not be unlearned
EDGE_LOGIT_MAX = 0.95
EDGE_STEP_GAIN = 10.0
RAW_FIELDS = ("raw_alpha", "mu1", "raw_sigma1", "mu2", "raw_sigma2", "raw_edge")
NEIGHBORS_8 = ((-1, -1), (-1, 0), (-1, 1), (0, -1), (0, 1), (1, -1), (1, 0), (1, 1))


class TraceEntry(BaseModel):
    model_config = ConfigDict(frozen=True)

    step: int
    total: float
    l_gt: float
    l_ed: float
    l_sm: float
    l_bi: float


class RefineResult(GridModel):
    bimodal: BimodalDepthMap
    edge: EdgeMap
    depth: DepthMap
    trace: List[TraceEntry]

    def trace_rows(self) -> List[Dict[str, float]]:
        return [entry.model_dump() for entry in self.trace]


class RefineParameters(GridModel):
    """Unconstrained optimization variables."""

    raw_alpha: np.ndarray
    mu1: np.ndarray
    raw_sigma1: np.ndarray
    mu2: np.ndarray
    raw_sigma2: np.ndarray
    raw_edge: np.ndarray

    @field_validator(*RAW_FIELDS, mode="before")
    @classmethod
    def _plane_array(cls, value):
        return readonly(value, ndim=2)

    @classmethod
    def from_maps(cls, theta: BimodalDepthMap, edge: EdgeMap) -> "RefineParameters":
        return cls(
            raw_alpha=bimodal.mixture_weight_preimage(theta.alpha),
            mu1=theta.mu1,
            raw_sigma1=bimodal.sigma_preimage(theta.sigma1),
            mu2=theta.mu2,
            raw_sigma2=bimodal.sigma_preimage(theta.sigma2),
            raw_edge=logit(np.clip(edge.grid, EDGE_MARGIN, EDGE_LOGIT_MAX)),
        )

    def to_bimodal(self, validity: np.ndarray, depth_range: Optional[Tuple[float, float]] = None) -> BimodalDepthMap:
        mu1, mu2 = self.mu1, self.mu2
        if depth_range is not None:
            mu1, mu2 = np.clip(mu1, *depth_range), np.clip(mu2, *depth_range)
        return BimodalDepthMap(
            alpha=bimodal.mixture_weight(self.raw_alpha),
            mu1=mu1,
            sigma1=bimodal.positive_sigma(self.raw_sigma1),
            mu2=mu2,
            sigma2=bimodal.positive_sigma(self.raw_sigma2),
            validity=validity,
        )

    def to_edge(self) -> EdgeMap:
        return EdgeMap(grid=expit(self.raw_edge))

    def raw_gradients(self, grads: Dict[str, np.ndarray]) -> Dict[str, np.ndarray]:
        """Chain rule from parameter gradients to pre-image gradients."""
        e = expit(self.raw_edge)
        return {
            "raw_alpha": grads["alpha"] * bimodal.mixture_weight_derivative(self.raw_alpha),
            "mu1": grads["mu1"],
            "raw_sigma1": grads["sigma1"] * bimodal.positive_sigma_derivative(self.raw_sigma1),
            "mu2": grads["mu2"],
            "raw_sigma2": grads["sigma2"] * bimodal.positive_sigma_derivative(self.raw_sigma2),
            "raw_edge": grads["edge"] * e * (1.0 - e),
        }

    def stepped(self, raw_grads: Dict[str, np.ndarray], step: float, scales: Dict[str, float]) -> "RefineParameters":
        return RefineParameters(
            **{name: getattr(self, name) - step * scales[name] * raw_grads[name] for name in RAW_FIELDS}
        )


# (total, term values, raw gradients)
Evaluation = Tuple[float, Dict[str, float], Optional[Dict[str, np.ndarray]]]
Objective = Callable[[RefineParameters, bool], Evaluation]


def cosine_step(step: int, steps: int, initial: float, final: float) -> float:
    if steps <= 1:
        return initial
    return final + 0.5 * (initial - final) * (1.0 + math.cos(math.pi * step / (steps - 1)))


def upsample_depth(
    coarse: DepthMap,
    guide: np.ndarray,
    sigma_spatial: float = 1.0,
    sigma_color: float = 0.1,
    radius: int = 2,
) -> DepthMap:
    """Joint-bilateral 2x upsampling guided by the full-resolution image.

    Fine pixel (Y, X) sits at coarse coordinates ((Y - 0.5) / 2, (X - 0.5) / 2);
    each coarse neighbor is compared through the 2x2 guide block it covers.
    """
    h, w = coarse.shape
    guide = np.asarray(guide, dtype=np.float64)
    if guide.shape[:2] != (2 * h, 2 * w):
        raise DimensionMismatch(f"guide is {guide.shape[:2]}, expected {(2 * h, 2 * w)}")
    if guide.ndim == 2:
        guide = guide[..., None]
    guide_coarse = downsample_area(guide)

    ys, xs = np.mgrid[0:2 * h, 0:2 * w]
    yc, xc = (ys - 0.5) / 2.0, (xs - 0.5) / 2.0
    y0, x0 = np.floor(yc).astype(np.int64), np.floor(xc).astype(np.int64)
    numerator = np.zeros((2 * h, 2 * w))
    denominator = np.zeros((2 * h, 2 * w))
    for oy in range(-radius + 1, radius + 1):
        for ox in range(-radius + 1, radius + 1):
            j, i = y0 + oy, x0 + ox
            inside = (j >= 0) & (j < h) & (i >= 0) & (i < w)
            jc, ic = np.clip(j, 0, h - 1), np.clip(i, 0, w - 1)
            usable = inside & coarse.validity[jc, ic]
            spatial = np.exp(-((yc - j) ** 2 + (xc - i) ** 2) / (2.0 * sigma_spatial ** 2))
            color_distance = np.mean((guide - guide_coarse[jc, ic]) ** 2, axis=-1)
            weight = np.where(usable, spatial * np.exp(-color_distance / (2.0 * sigma_color ** 2)), 0.0)
            numerator += weight * np.where(usable, coarse.grid[jc, ic], 0.0)
            denominator += weight
    valid = denominator > 0
    grid = np.where(valid, numerator / np.where(valid, denominator, 1.0), 0.0)
    return DepthMap(grid=grid, validity=valid)


def _fill_invalid(depth: DepthMap, fallback: float) -> np.ndarray:
    """Invalid pixels take the depth of the nearest valid pixel."""
    if depth.validity.all():
        return depth.grid.copy()
    if not depth.validity.any():
        return np.full(depth.shape, fallback)
    _, (iy, ix) = ndimage.distance_transform_edt(~depth.validity, return_indices=True)
    return depth.grid[iy, ix]


def init_parameters(
    depth: DepthMap, config: RefineConfig, depth_range: Tuple[float, float]
) -> Tuple[BimodalDepthMap, EdgeMap]:
    low, high = depth_range
    span = high - low
    mu1 = _fill_invalid(depth, 0.5 * (low + high))
    h, w = depth.shape

    padded = np.pad(mu1, 1)
    padded_valid = np.pad(depth.validity, 1)
    best_diff = np.zeros((h, w))
    mu2 = mu1 + config.mu_offset_init * span
    for dy, dx in NEIGHBORS_8:
        neighbor = padded[1 + dy:1 + dy + h, 1 + dx:1 + dx + w]
        valid = padded_valid[1 + dy:1 + dy + h, 1 + dx:1 + dx + w]
        diff = np.where(valid, np.abs(neighbor - mu1), 0.0)
        better = diff > best_diff
        mu2 = np.where(better, neighbor, mu2)
        best_diff = np.where(better, diff, best_diff)

    sigma = np.full((h, w), config.sigma_init * span)
    tau = config.tau_for(low, high)
    edge = np.minimum(1.0, np.abs(laplacian_grid(mu1, depth.validity)) / tau)
    theta = BimodalDepthMap(
        alpha=np.full((h, w), config.alpha_init),
        mu1=mu1,
        sigma1=sigma,
        mu2=mu2,
        sigma2=sigma.copy(),
        validity=depth.validity,
    )
    return theta, EdgeMap(grid=edge)


class RefineService:
    def __init__(self, config: Optional[RefineConfig] = None):
        self.config = config or RefineConfig()

    def upsample(self, coarse: DepthMap, guide: np.ndarray) -> DepthMap:
        c = self.config
        return upsample_depth(coarse, guide, c.upsample_sigma_spatial, c.upsample_sigma_color, c.upsample_radius)

    def _scales(self, depth_range: Tuple[float, float], count: int) -> Dict[str, float]:
        span = depth_range[1] - depth_range[0]
        n = float(max(count, 1))
        return {
            "raw_alpha": n,
            "mu1": n * span,
            "raw_sigma1": n * span,
            "mu2": n * span,
            "raw_sigma2": n * span,
            "raw_edge": n * EDGE_STEP_GAIN,
        }

    def _descend(
        self,
        params: RefineParameters,
        objective: Objective,
        scales: Dict[str, float],
        on_step: Optional[Callable[[int, RefineParameters], bool]] = None,
    ) -> Tuple[RefineParameters, List[TraceEntry]]:
        config = self.config
        total, values, grads = objective(params, True)
        if not np.isfinite(total):
            raise DivergedLoss(f"initial objective is not finite ({total})")
        trace = [TraceEntry(step=0, total=total, **values)]
        multiplier = 1.0
        for step in range(1, config.steps + 1):
            if on_step is not None and on_step(step, params):
                total, values, grads = objective(params, True)
            eta = cosine_step(step - 1, config.steps, config.step_size, config.final_step_size)
            trial_total = math.nan
            for _ in range(config.max_backtracks + 1):
                trial = params.stepped(grads, eta * multiplier, scales)
                trial_total, trial_values, _ = objective(trial, False)
                if np.isfinite(trial_total) and trial_total <= total:
                    break
                multiplier *= 0.5
            else:
                if not np.isfinite(trial_total):
                    raise DivergedLoss(f"objective became non-finite at step {step}")
                multiplier = 1.0
                trace.append(TraceEntry(step=step, total=total, **values))
                continue
            params = trial
            total, values, grads = objective(params, True)
            multiplier = min(1.0, multiplier * 2.0)
            trace.append(TraceEntry(step=step, total=total, **values))
            if step % 50 == 0:
                logger.debug("Refinement step.", step=step, total=total, step_size=eta * multiplier)
        return params, trace

    def _result(
        self, params: RefineParameters, validity: np.ndarray, depth_range: Tuple[float, float], trace: List[TraceEntry]
    ) -> RefineResult:
        theta = params.to_bimodal(validity, depth_range)
        return RefineResult(bimodal=theta, edge=params.to_edge(), depth=bimodal.collapse(theta), trace=trace)

    def refine_supervised(
        self,
        init: Tuple[BimodalDepthMap, EdgeMap],
        gt: GroundTruth,
        depth_range: Tuple[float, float],
        pyramid: Optional[List[DepthMap]] = None,
    ) -> RefineResult:
        try:
            return self._refine_supervised(init, gt, depth_range, pyramid)
        except Exception as e:
            logger.error("Supervised refinement failed.", error=str(e))
            raise

    def _refine_supervised(
        self,
        init: Tuple[BimodalDepthMap, EdgeMap],
        gt: GroundTruth,
        depth_range: Tuple[float, float],
        pyramid: Optional[List[DepthMap]] = None,
    ) -> RefineResult:
        theta0, edge0 = init
        if theta0.shape != gt.shape or edge0.shape != gt.shape:
            raise DimensionMismatch(f"parameters are {theta0.shape}, ground truth is {gt.shape}")
        config = self.config
        tau = config.tau_for(*depth_range)
        validity = theta0.mask

        def objective(params: RefineParameters, with_gradients: bool) -> Evaluation:
            inputs = LossInputs(
                bimodal=params.to_bimodal(validity),
                edge=params.to_edge(),
                gt=gt,
                tau=tau,
                beta=config.beta,
                pyramid=pyramid or [],
            )
            values, grads = term_values_and_gradients(inputs)
            total = combine(values, config.weights)
            raw = params.raw_gradients(combine_gradients(grads, config.weights)) if with_gradients else None
            return total, values, raw

        params = RefineParameters.from_maps(theta0, edge0)
        scales = self._scales(depth_range, int(np.count_nonzero(gt.validity)))
        params, trace = self._descend(params, objective, scales)
        logger.info(
            "Supervised refinement finished.", steps=config.steps,
            initial_total=trace[0].total, final_total=trace[-1].total,
        )
        return self._result(params, validity, depth_range, trace)

    def refine_self_supervised(
        self,
        init: Tuple[BimodalDepthMap, EdgeMap],
        ref: CalibratedView,
        sources: List[CalibratedView],
    ) -> RefineResult:
        try:
            return self._refine_self_supervised(init, ref, sources)
        except Exception as e:
            logger.error("Self-supervised refinement failed.", view=ref.name, error=str(e))
            raise

    def _refine_self_supervised(
        self,
        init: Tuple[BimodalDepthMap, EdgeMap],
        ref: CalibratedView,
        sources: List[CalibratedView],
    ) -> RefineResult:
        if not sources:
            raise NoSources(f"view '{ref.name}' has no source views")
        theta0, edge0 = init
        if theta0.shape != ref.shape:
            raise DimensionMismatch(f"parameters are {theta0.shape}, reference view is {ref.shape}")
        config = self.config
        depth_range = (ref.depth_min, ref.depth_max)
        span = ref.depth_range
        tau = config.tau_for(*depth_range)
        h = config.photometric_step * span
        scale = config.photometric_weight * span
        validity = theta0.mask
        n = max(int(np.count_nonzero(validity)), 1)
        costs = PatchCostEvaluator(ref, sources, config.window)
        weights = config.weights
        state = {"target": None}

        def edge_target(params: RefineParameters) -> np.ndarray:
            depth = bimodal.collapse(params.to_bimodal(validity))
            return phi(depth, tau).grid.astype(np.float64)

        def objective(params: RefineParameters, with_gradients: bool) -> Evaluation:
            theta = params.to_bimodal(validity)
            edge = expit(params.raw_edge)
            depth = bimodal.collapse(theta)
            c1, _ = costs.cost(theta.mu1)
            c2, _ = costs.cost(theta.mu2)
            mixed = theta.alpha * c1 + (1.0 - theta.alpha) * c2
            data = scale * float(np.sum(mixed[validity]) / n)
            l_ed, grad_edge_ed = edge_term(edge, state["target"], validity)
            l_sm, grad_edge_sm, grad_depth_sm = smoothness_term(depth.grid, validity, edge, config.beta, validity)
            values = {"l_gt": data, "l_ed": l_ed, "l_sm": l_sm, "l_bi": 0.0}
            total = combine(values, weights)
            if not with_gradients:
                return total, values, None

            winner = bimodal.first_mode_wins(theta.alpha, theta.sigma1, theta.sigma2)
            dc1 = (costs.cost(theta.mu1 + h)[0] - costs.cost(theta.mu1 - h)[0]) / (2.0 * h)
            dc2 = (costs.cost(theta.mu2 + h)[0] - costs.cost(theta.mu2 - h)[0]) / (2.0 * h)
            smooth_depth = weights.lambda2 * grad_depth_sm
            grads = {
                "alpha": np.where(validity, scale * (c1 - c2) / n, 0.0),
                "mu1": np.where(validity, scale * theta.alpha * dc1 / n, 0.0) + np.where(winner, smooth_depth, 0.0),
                "sigma1": np.zeros(theta.shape),
                "mu2": np.where(validity, scale * (1.0 - theta.alpha) * dc2 / n, 0.0)
                + np.where(winner, 0.0, smooth_depth),
                "sigma2": np.zeros(theta.shape),
                "edge": weights.lambda1 * grad_edge_ed + weights.lambda2 * grad_edge_sm,
            }
            return total, values, params.raw_gradients(grads)

        def refresh_target(step: int, params: RefineParameters) -> bool:
            if step % config.edge_target_interval != 0:
                return False
            state["target"] = edge_target(params)
            return True

        params = RefineParameters.from_maps(theta0, edge0)
        state["target"] = edge_target(params)
        params, trace = self._descend(params, objective, self._scales(depth_range, n), on_step=refresh_target)
        logger.info(
            "Self-supervised refinement finished.", view=ref.name, steps=config.steps,
            initial_total=trace[0].total, final_total=trace[-1].total,
        )
        return self._result(params, validity, depth_range, trace)


def refine_supervised(
    init: Tuple[BimodalDepthMap, EdgeMap],
    gt: GroundTruth,
    config: RefineConfig,
    depth_range: Tuple[float, float],
    pyramid: Optional[List[DepthMap]] = None,
) -> RefineResult:
    return RefineService(config).refine_supervised(init, gt, depth_range, pyramid)


def refine_self_supervised(
    init: Tuple[BimodalDepthMap, EdgeMap],
    ref: CalibratedView,
    sources: List[CalibratedView],
    config: RefineConfig,
) -> RefineResult:
    return RefineService(config).refine_self_supervised(init, ref, sources)

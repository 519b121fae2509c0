"""Loss terms of the refinement objective and their closed-form gradients.

    L_total = L_gt + lambda1 * L_ed + lambda2 * L_sm + lambda3 * L_bi

Every term is a mean over a pixel mask; pixels outside the mask contribute
nothing to values or gradients. The subgradient of |x| at 0 is taken as 0.
"""
from typing import Dict, List, Tuple

import numpy as np
import structlog
from pydantic import Field

from ..exceptions import DimensionMismatch, NonPositiveBeta, NonPositiveTau
from ..models.base import GridModel
from ..models.configs import LossWeights
from ..models.depth import BimodalDepthMap, DepthMap, EdgeMap, GroundTruth
from ..models.losses import LossReport
from .bimodal_service import collapse, first_mode_wins, log_mode_terms
from .discontinuity_service import DEFAULT_BETA, laplacian_grid, phi, stencil_adjoint

logger = structlog.get_logger()

PARAMETERS = ("alpha", "mu1", "sigma1", "mu2", "sigma2", "edge", "depth")
TERMS = ("l_gt", "l_ed", "l_sm", "l_bi")


def _require_shape(name: str, shape: Tuple[int, ...], expected: Tuple[int, ...]) -> None:
    if tuple(shape) != tuple(expected):
        raise DimensionMismatch(f"{name} is {shape}, expected {expected}")


def _masked_mean(values: np.ndarray, mask: np.ndarray) -> Tuple[float, int]:
    n = int(np.count_nonzero(mask))
    if n == 0:
        return 0.0, 0
    return float(np.sum(values[mask]) / n), n


# Array-level terms, shared by supervised and self-supervised refinement.

def absolute_error_term(depth: np.ndarray, target: np.ndarray, mask: np.ndarray) -> Tuple[float, np.ndarray]:
    diff = depth - target
    value, n = _masked_mean(np.abs(diff), mask)
    grad = np.where(mask, np.sign(diff), 0.0) / max(n, 1)
    return value, grad


def edge_term(edge: np.ndarray, target: np.ndarray, mask: np.ndarray) -> Tuple[float, np.ndarray]:
    diff = edge - target
    value, n = _masked_mean(diff * diff, mask)
    grad = np.where(mask, 2.0 * diff, 0.0) / max(n, 1)
    return value, grad


def smoothness_term(
    depth: np.ndarray, depth_validity: np.ndarray, edge: np.ndarray, beta: float, mask: np.ndarray
) -> Tuple[float, np.ndarray, np.ndarray]:
    """Returns (L_sm, dL/dE, dL/dD)."""
    lap = laplacian_grid(depth, depth_validity)
    weight = np.exp(-beta * edge)
    value, n = _masked_mean(weight * np.abs(lap), mask)
    n = max(n, 1)
    grad_edge = np.where(mask, -beta * weight * np.abs(lap), 0.0) / n
    grad_depth = stencil_adjoint(np.where(mask, weight * np.sign(lap), 0.0) / n)
    return value, grad_edge, grad_depth


def bimodal_term(bimodal: BimodalDepthMap, target: np.ndarray, mask: np.ndarray) -> Tuple[float, Dict[str, np.ndarray]]:
    """Negative log-likelihood of target depths and its partials w.r.t. the five planes."""
    log1, log2 = log_mode_terms(target, bimodal)
    log_p = np.logaddexp(log1, log2)
    value, n = _masked_mean(-log_p, mask)
    n = max(n, 1)
    w1 = np.exp(log1 - log_p)
    w2 = np.exp(log2 - log_p)
    alpha, s1, s2 = bimodal.alpha, bimodal.sigma1, bimodal.sigma2
    d1, d2 = target - bimodal.mu1, target - bimodal.mu2
    ratio1 = np.divide(w1, alpha, out=np.zeros_like(w1), where=w1 > 0)
    ratio2 = np.divide(w2, 1.0 - alpha, out=np.zeros_like(w2), where=w2 > 0)
    partials = {
        "alpha": -(ratio1 - ratio2),
        "mu1": -w1 * np.sign(d1) / s1,
        "sigma1": w1 * (1.0 / s1 - np.abs(d1) / (s1 * s1)),
        "mu2": -w2 * np.sign(d2) / s2,
        "sigma2": w2 * (1.0 / s2 - np.abs(d2) / (s2 * s2)),
    }
    return value, {name: np.where(mask, g, 0.0) / n for name, g in partials.items()}


# Operation-level losses.

def depth_gt_loss(estimates: List[DepthMap], gts: List[GroundTruth]) -> float:
    """Sum over scales of the masked mean absolute depth error."""
    if len(estimates) != len(gts):
        raise DimensionMismatch(f"{len(estimates)} estimates but {len(gts)} ground truths")
    total = 0.0
    for k, (estimate, gt) in enumerate(zip(estimates, gts)):
        _require_shape(f"estimate at scale {k}", estimate.shape, gt.shape)
        value, _ = absolute_error_term(estimate.grid, gt.depth, gt.validity & estimate.validity)
        total += value
    return total


def edge_depth_loss(edge: EdgeMap, gt: GroundTruth, tau: float) -> float:
    _require_shape("edge map", edge.shape, gt.shape)
    if not tau > 0:
        raise NonPositiveTau(f"tau must be positive, got {tau}")
    target = phi(gt.as_depth_map(), tau).grid.astype(np.float64)
    value, _ = edge_term(edge.grid, target, gt.validity)
    return value


def smoothness_loss(depth: DepthMap, edge: EdgeMap, beta: float, mask: np.ndarray = None) -> float:
    """Edge-weighted mean |Laplacian|; `mask` defaults to the depth validity."""
    _require_shape("edge map", edge.shape, depth.shape)
    if not beta > 0:
        raise NonPositiveBeta(f"beta must be positive, got {beta}")
    mask = depth.validity if mask is None else mask
    _require_shape("mask", np.shape(mask), depth.shape)
    value, _, _ = smoothness_term(depth.grid, depth.validity, edge.grid, beta, mask)
    return value


def bimodal_loss(bimodal: BimodalDepthMap, gt: GroundTruth) -> float:
    _require_shape("bimodal map", bimodal.shape, gt.shape)
    value, _ = bimodal_term(bimodal, gt.depth, gt.validity)
    return value


class LossInputs(GridModel):
    """Everything the supervised objective depends on.

    `pyramid` holds coarser depth estimates, finest first; entry k-1 is
    compared against the ground truth reduced by 2**k.
    """

    bimodal: BimodalDepthMap
    edge: EdgeMap
    gt: GroundTruth
    tau: float = Field(gt=0.0)
    beta: float = Field(default=DEFAULT_BETA, gt=0.0)
    pyramid: List[DepthMap] = Field(default_factory=list)


def _check_inputs(inputs: LossInputs) -> None:
    shape = inputs.gt.shape
    _require_shape("bimodal map", inputs.bimodal.shape, shape)
    _require_shape("edge map", inputs.edge.shape, shape)
    for k, level in enumerate(inputs.pyramid, start=1):
        _require_shape(f"pyramid level {k}", level.shape, inputs.gt.downsampled(k).shape)


def term_values_and_gradients(inputs: LossInputs) -> Tuple[Dict[str, float], Dict[str, Dict[str, np.ndarray]]]:
    """Unweighted term values and per-term gradients w.r.t. every parameter.

    Depth gradients refer to the collapsed map; mu gradients already include
    the depth gradient routed to each pixel's winning mode.
    """
    _check_inputs(inputs)
    gt, bimodal = inputs.gt, inputs.bimodal
    mask = gt.validity
    zeros = np.zeros(gt.shape)
    depth = collapse(bimodal)
    winner = first_mode_wins(bimodal.alpha, bimodal.sigma1, bimodal.sigma2)

    def routed(grad_depth: np.ndarray) -> Dict[str, np.ndarray]:
        return {
            "mu1": np.where(winner, grad_depth, 0.0),
            "mu2": np.where(winner, 0.0, grad_depth),
            "depth": grad_depth,
        }

    values: Dict[str, float] = {}
    grads: Dict[str, Dict[str, np.ndarray]] = {}

    l_gt, grad_depth_gt = absolute_error_term(depth.grid, gt.depth, mask & depth.validity)
    for k, level in enumerate(inputs.pyramid, start=1):
        coarse = gt.downsampled(k)
        value, _ = absolute_error_term(level.grid, coarse.depth, coarse.validity & level.validity)
        l_gt += value
    values["l_gt"] = l_gt
    grads["l_gt"] = routed(grad_depth_gt)

    target = phi(gt.as_depth_map(), inputs.tau).grid.astype(np.float64)
    values["l_ed"], grad_edge_ed = edge_term(inputs.edge.grid, target, mask)
    grads["l_ed"] = {"edge": grad_edge_ed}

    values["l_sm"], grad_edge_sm, grad_depth_sm = smoothness_term(
        depth.grid, depth.validity, inputs.edge.grid, inputs.beta, mask
    )
    grads["l_sm"] = {"edge": grad_edge_sm, **routed(grad_depth_sm)}

    values["l_bi"], grads["l_bi"] = bimodal_term(bimodal, gt.depth, mask)

    for term in TERMS:
        grads[term] = {name: grads[term].get(name, zeros) for name in PARAMETERS}
    return values, grads


def combine(values: Dict[str, float], weights: LossWeights) -> float:
    return (
        values["l_gt"]
        + weights.lambda1 * values["l_ed"]
        + weights.lambda2 * values["l_sm"]
        + weights.lambda3 * values["l_bi"]
    )


def combine_gradients(grads: Dict[str, Dict[str, np.ndarray]], weights: LossWeights) -> Dict[str, np.ndarray]:
    scale = {"l_gt": 1.0, "l_ed": weights.lambda1, "l_sm": weights.lambda2, "l_bi": weights.lambda3}
    combined = {}
    for name in PARAMETERS:
        total = grads["l_gt"][name].copy()
        for term in TERMS[1:]:
            if scale[term] != 0.0:
                total = total + scale[term] * grads[term][name]
        combined[name] = total
    return combined


def total_loss(inputs: LossInputs, weights: LossWeights = None) -> LossReport:
    weights = weights or LossWeights()
    values, grads = term_values_and_gradients(inputs)
    report = LossReport(
        **values,
        l_total=combine(values, weights),
        weights=weights,
        gradients=combine_gradients(grads, weights),
    )
    logger.debug("Loss evaluated.", **report.as_dict())
    return report


def gradients(inputs: LossInputs, weights: LossWeights = None) -> Dict[str, np.ndarray]:
    return total_loss(inputs, weights).gradients

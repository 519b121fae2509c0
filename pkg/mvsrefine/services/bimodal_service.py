"""Bimodal Laplacian depth: density, responsibilities, collapse and the
positive/logistic reparameterizations used by the optimizer."""
import math
from typing import Tuple

import numpy as np
from scipy.special import expit, logit

from ..models.depth import BimodalDepthMap, BimodalLaplacian, DepthMap

SIGMA_FLOOR = 1e-4
ALPHA_MARGIN = 1e-4


def density(x: float, theta: BimodalLaplacian) -> float:
    first = theta.alpha / (2.0 * theta.sigma1) * math.exp(-abs(x - theta.mu1) / theta.sigma1)
    second = (1.0 - theta.alpha) / (2.0 * theta.sigma2) * math.exp(-abs(x - theta.mu2) / theta.sigma2)
    return first + second


def responsibility(theta: BimodalLaplacian) -> Tuple[float, float]:
    return theta.alpha / theta.sigma1, (1.0 - theta.alpha) / theta.sigma2


def first_mode_wins(alpha: np.ndarray, sigma1: np.ndarray, sigma2: np.ndarray) -> np.ndarray:
    """r1 >= r2 per pixel; ties go to the first mode."""
    return alpha / sigma1 >= (1.0 - alpha) / sigma2


def collapse(bimodal: BimodalDepthMap) -> DepthMap:
    """Depth of the higher-responsibility mode at every pixel."""
    winner = first_mode_wins(bimodal.alpha, bimodal.sigma1, bimodal.sigma2)
    return DepthMap(grid=np.where(winner, bimodal.mu1, bimodal.mu2), validity=bimodal.mask)


def log_mode_terms(x: np.ndarray, bimodal: BimodalDepthMap) -> Tuple[np.ndarray, np.ndarray]:
    """Log of each weighted mode term at x; -inf where a weight is zero."""
    with np.errstate(divide="ignore"):
        log1 = np.log(bimodal.alpha) - np.log(2.0 * bimodal.sigma1) - np.abs(x - bimodal.mu1) / bimodal.sigma1
        log2 = np.log1p(-bimodal.alpha) - np.log(2.0 * bimodal.sigma2) - np.abs(x - bimodal.mu2) / bimodal.sigma2
    return log1, log2


def log_density_grid(x: np.ndarray, bimodal: BimodalDepthMap) -> np.ndarray:
    log1, log2 = log_mode_terms(x, bimodal)
    return np.logaddexp(log1, log2)


def density_grid(x: np.ndarray, bimodal: BimodalDepthMap) -> np.ndarray:
    return np.exp(log_density_grid(x, bimodal))


# Reparameterizations: raw (unconstrained) values -> valid parameters.

def positive_sigma(raw: np.ndarray) -> np.ndarray:
    return SIGMA_FLOOR + np.logaddexp(0.0, raw)


def positive_sigma_derivative(raw: np.ndarray) -> np.ndarray:
    return expit(raw)


def sigma_preimage(sigma: np.ndarray) -> np.ndarray:
    y = np.maximum(np.asarray(sigma, dtype=np.float64) - SIGMA_FLOOR, 1e-12)
    return y + np.log(-np.expm1(-y))


def mixture_weight(raw: np.ndarray) -> np.ndarray:
    return ALPHA_MARGIN + (1.0 - 2.0 * ALPHA_MARGIN) * expit(raw)


def mixture_weight_derivative(raw: np.ndarray) -> np.ndarray:
    s = expit(raw)
    return (1.0 - 2.0 * ALPHA_MARGIN) * s * (1.0 - s)


def mixture_weight_preimage(alpha: np.ndarray) -> np.ndarray:
    p = (np.asarray(alpha, dtype=np.float64) - ALPHA_MARGIN) / (1.0 - 2.0 * ALPHA_MARGIN)
    return logit(np.clip(p, 1e-12, 1.0 - 1e-12))

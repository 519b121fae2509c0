from typing import Dict

import numpy as np
from pydantic import Field

from .base import GridModel
from .configs import LossWeights


class LossReport(GridModel):
    """Loss terms, their weighted total and the gradient grids.

    `gradients` is keyed by the optimized quantity: alpha, mu1, sigma1, mu2,
    sigma2, edge and depth (the collapsed map, before routing to mu).
    """

    l_gt: float
    l_ed: float
    l_sm: float
    l_bi: float
    l_total: float
    weights: LossWeights
    gradients: Dict[str, np.ndarray] = Field(default_factory=dict)

    def as_dict(self) -> Dict[str, float]:
        return {
            "l_gt": self.l_gt,
            "l_ed": self.l_ed,
            "l_sm": self.l_sm,
            "l_bi": self.l_bi,
            "l_total": self.l_total,
            "lambda1": self.weights.lambda1,
            "lambda2": self.weights.lambda2,
            "lambda3": self.weights.lambda3,
        }

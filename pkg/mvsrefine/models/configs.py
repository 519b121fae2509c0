from typing import Dict, Literal, Optional, Tuple

from pydantic import BaseModel, ConfigDict, Field, field_validator


def _odd_window(value: int) -> int:
    if value < 3 or value % 2 == 0:
        raise ValueError("window must be odd and at least 3")
    return value


class PatchMatchConfig(BaseModel):
    model_config = ConfigDict(frozen=True)

    levels: int = Field(default=3, ge=1)
    iterations_per_level: int = Field(default=2, ge=1)
    window: int = 5
    hypotheses_per_pixel: int = Field(
        default=8,
        ge=2,
        description=(
            "Candidates per pixel at evaluation: the incumbent, its four neighbors and "
            "hypotheses_per_pixel - 5 random samples. Five or fewer turns random search off."
        ),
    )
    rng_seed: int = Field(default=0, ge=0, lt=2 ** 64)

    @field_validator("window")
    @classmethod
    def _window_odd(cls, value: int) -> int:
        return _odd_window(value)

    @property
    def perturbations_per_pixel(self) -> int:
        """Samples added per pixel after the incumbent and its four neighbors; 0 when hypotheses_per_pixel <= 5."""
        return max(0, self.hypotheses_per_pixel - 5)


# Loss-term ablations: edge and smoothness terms act jointly, so they are
# switched together.
LOSS_PRESETS: Dict[str, Tuple[float, float, float]] = {
    "gt": (0.0, 0.0, 0.0),
    "gt_edge_smooth": (4.0, 1.25, 0.0),
    "gt_bimodal": (0.0, 0.0, 0.5),
    "full": (4.0, 1.25, 0.5),
}


class LossWeights(BaseModel):
    model_config = ConfigDict(frozen=True)

    lambda1: float = Field(default=4.0, ge=0.0)
    lambda2: float = Field(default=1.25, ge=0.0)
    lambda3: float = Field(default=0.5, ge=0.0)

    @classmethod
    def preset(cls, name: str) -> "LossWeights":
        try:
            l1, l2, l3 = LOSS_PRESETS[name]
        except KeyError:
            raise ValueError(f"unknown loss preset '{name}'; choose from {sorted(LOSS_PRESETS)}")
        return cls(lambda1=l1, lambda2=l2, lambda3=l3)


class RefineConfig(BaseModel):
    model_config = ConfigDict(frozen=True)

    steps: int = Field(default=400, ge=0)
    step_size: float = Field(default=0.05, gt=0.0)
    final_step_size: float = Field(default=0.001, gt=0.0)
    max_backtracks: int = Field(default=30, ge=0)
    beta: float = Field(default=10.0, gt=0.0)
    # None means 0.5% of the reference view's depth range
    tau: Optional[float] = Field(default=None, gt=0.0)
    mode: Literal["supervised", "self_supervised"] = "supervised"
    sigma_init: float = Field(default=0.01, gt=0.0, lt=1.0)
    mu_offset_init: float = Field(default=0.02, gt=0.0, lt=1.0)
    alpha_init: float = Field(default=0.9, gt=0.0, lt=1.0)
    weights: LossWeights = Field(default_factory=LossWeights)

    # Self-supervised mode
    edge_target_interval: int = Field(default=25, ge=1)
    photometric_weight: float = Field(default=1.0, gt=0.0)
    photometric_step: float = Field(default=1e-3, gt=0.0, lt=1.0)
    window: int = 5

    # Joint-bilateral upsampling
    upsample_sigma_spatial: float = Field(default=1.0, gt=0.0)
    upsample_sigma_color: float = Field(default=0.1, gt=0.0)
    upsample_radius: int = Field(default=2, ge=1)

    @field_validator("window")
    @classmethod
    def _window_odd(cls, value: int) -> int:
        return _odd_window(value)

    def tau_for(self, depth_min: float, depth_max: float) -> float:
        if self.tau is not None:
            return self.tau
        return default_tau(depth_min, depth_max)


def default_tau(depth_min: float, depth_max: float) -> float:
    return 0.005 * (depth_max - depth_min)


class FusionConfig(BaseModel):
    model_config = ConfigDict(frozen=True)

    max_reproj_px: float = Field(default=1.0, gt=0.0)
    max_rel_depth: float = Field(default=0.01, gt=0.0)
    min_consistent_views: int = Field(default=3, ge=1)
    use_photometric: bool = True
    min_ncc: float = Field(default=0.3, ge=-1.0, le=1.0)
    window: int = 5

    @field_validator("window")
    @classmethod
    def _window_odd(cls, value: int) -> int:
        return _odd_window(value)

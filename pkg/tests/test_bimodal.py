import math

import numpy as np
import pytest
from pydantic import ValidationError
from scipy import integrate

from mvsrefine.models.depth import BimodalDepthMap, BimodalLaplacian
from mvsrefine.services.bimodal_service import (
    SIGMA_FLOOR,
    collapse,
    density,
    density_grid,
    mixture_weight,
    mixture_weight_preimage,
    positive_sigma,
    responsibility,
    sigma_preimage,
)


def random_theta(rng) -> BimodalLaplacian:
    return BimodalLaplacian(
        alpha=rng.uniform(0.0, 1.0),
        mu1=rng.uniform(-5.0, 5.0),
        sigma1=rng.uniform(0.05, 2.0),
        mu2=rng.uniform(-5.0, 5.0),
        sigma2=rng.uniform(0.05, 2.0),
    )


def test_density_integrates_to_one(rng):
    for _ in range(100):
        theta = random_theta(rng)
        breakpoints = sorted([theta.mu1, theta.mu2])
        lo = min(breakpoints) - 60 * max(theta.sigma1, theta.sigma2)
        hi = max(breakpoints) + 60 * max(theta.sigma1, theta.sigma2)
        total = 0.0
        for a, b in zip([lo] + breakpoints, breakpoints + [hi]):
            piece, _ = integrate.quad(lambda x: density(x, theta), a, b, limit=200)
            total += piece
        assert total == pytest.approx(1.0, abs=1e-6)


def test_single_mode_density_at_center():
    theta = BimodalLaplacian(alpha=1.0, mu1=2.0, sigma1=0.5, mu2=0.0, sigma2=1.0)
    assert density(2.0, theta) == pytest.approx(1.0)


def test_density_swap_symmetry():
    # dyadic parameters keep 1 - alpha exact
    theta = BimodalLaplacian(alpha=0.375, mu1=1.0, sigma1=0.5, mu2=3.0, sigma2=0.25)
    for x in (-1.0, 0.5, 1.0, 2.25, 3.0, 7.0):
        assert density(x, theta) == density(x, theta.swapped())


def test_responsibility_scores():
    theta = BimodalLaplacian(alpha=0.6, mu1=0.0, sigma1=0.3, mu2=1.0, sigma2=0.1)
    r1, r2 = responsibility(theta)
    assert r1 == pytest.approx(2.0)
    assert r2 == pytest.approx(4.0)


@pytest.mark.parametrize(
    "alpha,sigma1,sigma2,expected",
    [(0.9, 1.0, 1.0, 5.0), (0.5, 0.1, 1.0, 5.0), (0.5, 1.0, 0.1, 7.0), (0.5, 1.0, 1.0, 5.0)],
)
def test_collapse_picks_higher_responsibility(alpha, sigma1, sigma2, expected):
    grid = lambda v: np.full((2, 2), v)  # noqa: E731
    bimodal = BimodalDepthMap(
        alpha=grid(alpha), mu1=grid(5.0), sigma1=grid(sigma1), mu2=grid(7.0), sigma2=grid(sigma2)
    )
    depth = collapse(bimodal)
    assert np.all(depth.grid == expected)
    assert depth.validity.all()


def test_density_grid_matches_scalar_density(rng):
    shape = (3, 4)
    bimodal = BimodalDepthMap(
        alpha=rng.uniform(0, 1, shape),
        mu1=rng.uniform(0, 1, shape),
        sigma1=rng.uniform(0.1, 1, shape),
        mu2=rng.uniform(0, 1, shape),
        sigma2=rng.uniform(0.1, 1, shape),
    )
    x = rng.uniform(0, 1, shape)
    grid = density_grid(x, bimodal)
    for y in range(shape[0]):
        for i in range(shape[1]):
            assert grid[y, i] == pytest.approx(density(x[y, i], bimodal.cell(y, i)), rel=1e-12)


def test_invalid_cells_are_rejected():
    with pytest.raises(ValidationError):
        BimodalLaplacian(alpha=1.5, mu1=0.0, sigma1=1.0, mu2=0.0, sigma2=1.0)
    with pytest.raises(ValidationError):
        BimodalLaplacian(alpha=0.5, mu1=0.0, sigma1=0.0, mu2=0.0, sigma2=1.0)
    with pytest.raises(ValidationError):
        BimodalDepthMap(
            alpha=np.full((2, 2), 0.5),
            mu1=np.zeros((2, 2)),
            sigma1=np.full((2, 2), -1.0),
            mu2=np.zeros((2, 2)),
            sigma2=np.ones((2, 2)),
        )


def test_reparameterizations_stay_valid_and_invert():
    raw = np.linspace(-40.0, 40.0, 81)
    sigma = positive_sigma(raw)
    alpha = mixture_weight(raw)
    assert np.all(sigma >= SIGMA_FLOOR)
    assert np.all((alpha > 0.0) & (alpha < 1.0))
    moderate = np.linspace(-5.0, 5.0, 11)
    assert np.allclose(sigma_preimage(positive_sigma(moderate)), moderate, atol=1e-9)
    assert np.allclose(mixture_weight_preimage(mixture_weight(moderate)), moderate, atol=1e-9)
    assert math.isfinite(float(sigma_preimage(np.array(SIGMA_FLOOR))))

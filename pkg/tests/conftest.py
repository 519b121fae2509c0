import os
import sys

import numpy as np
import pytest

# Resolve `mvsrefine` imports from the project root, as the scripts do.
PROJECT_ROOT = os.path.join(os.path.dirname(os.path.abspath(__file__)), "..")
if PROJECT_ROOT not in sys.path:
    sys.path.insert(0, PROJECT_ROOT)

from mvsrefine.models.camera import CalibratedView, Intrinsics, Pose  # noqa: E402
from mvsrefine.models.configs import PatchMatchConfig  # noqa: E402
from mvsrefine.services.patchmatch_service import PatchMatchService  # noqa: E402
from mvsrefine.services.scene_service import bundled_spec, render_scene  # noqa: E402


def make_view(
    center=(0.0, 0.0, 0.0),
    rotation=None,
    fx=100.0,
    fy=None,
    width=100,
    height=100,
    cx=None,
    cy=None,
    depth_min=0.5,
    depth_max=10.0,
    image=None,
    name="view",
) -> CalibratedView:
    """A pinhole view centered at `center` (world coordinates)."""
    rotation = np.eye(3) if rotation is None else np.asarray(rotation, dtype=np.float64)
    center = np.asarray(center, dtype=np.float64)
    if image is None:
        image = np.zeros((height, width))
    return CalibratedView(
        image=image,
        intrinsics=Intrinsics(
            fx=fx,
            fy=fx if fy is None else fy,
            cx=(width - 1) / 2.0 if cx is None else cx,
            cy=(height - 1) / 2.0 if cy is None else cy,
            width=width,
            height=height,
        ),
        pose=Pose(rotation=rotation, translation=-rotation @ center),
        depth_min=depth_min,
        depth_max=depth_max,
        name=name,
    )


def random_rotation(rng: np.random.Generator) -> np.ndarray:
    q, r = np.linalg.qr(rng.normal(size=(3, 3)))
    q = q @ np.diag(np.sign(np.diag(r)))
    if np.linalg.det(q) < 0:
        q[:, 0] = -q[:, 0]
    return q


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


@pytest.fixture(scope="session")
def two_plane_scene():
    return render_scene(bundled_spec("two_plane"))


@pytest.fixture(scope="session")
def plane_scene():
    return render_scene(bundled_spec("plane"))


@pytest.fixture(scope="session")
def two_plane_patchmatch(two_plane_scene):
    views = two_plane_scene.views
    return PatchMatchService(PatchMatchConfig()).estimate(views[0], views[1:])

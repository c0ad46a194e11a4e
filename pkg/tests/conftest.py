import pytest

from depthnav.geometry import centered_intrinsics
from depthnav.primitives import generate_primitives
from depthnav.simulator import Box, RobotPose, SceneWorld, render_depth


@pytest.fixture(scope="session")
def small_k():
    """64x48 camera with a ~90 degree horizontal field of view."""
    return centered_intrinsics(64, 48, 32.0)


@pytest.fixture(scope="session")
def prims():
    return generate_primitives()


def make_world(boxes, extent=12.0):
    bounds = Box([-extent, -extent, -2.0], [extent, extent, extent])
    return SceneWorld(tuple(boxes), bounds)


def render_boxes(boxes, k, max_range=8.0, pose=None):
    world = make_world(boxes)
    if pose is None:
        pose = RobotPose([0.0, 0.0, 0.0], 0.0)
    return render_depth(world, pose, k, max_range)


def random_boxes(rng, n=3, z_range=(1.0, 5.5), x_range=(-3.5, 3.5)):
    """Boxes strictly in front of the camera, never touching the origin."""
    boxes = []
    for _ in range(n):
        cx = rng.uniform(*x_range)
        cz = rng.uniform(*z_range)
        cy = rng.uniform(-1.0, 1.0)
        sx, sy, sz = rng.uniform(0.3, 1.6, size=3)
        lo = [cx - sx / 2, cy - sy / 2, max(0.4, cz - sz / 2)]
        hi = [cx + sx / 2, cy + sy / 2, max(0.4, cz - sz / 2) + sz]
        boxes.append(Box(lo, hi))
    return boxes

"""Closed-loop replanning over synthetic box worlds.

World frame: x east, z north, y up; the robot flies at a fixed altitude so
the camera-frame y = 0 trajectory plane maps to constant height. Each step
renders depth, labels it with the cost pipeline, and advances the robot
partway along the chosen primitive with its yaw following the tangent.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field

import numpy as np

from .geometry import CameraIntrinsics, DepthImage
from .labeling import CostParams, LabelRecord, label_frame
from .primitives import PrimitiveSet, TrajectoryClass, generate_primitives


@dataclass(frozen=True)
class Box:
    """Axis-aligned box, world frame, meters."""

    lo: np.ndarray
    hi: np.ndarray

    def __post_init__(self):
        lo = np.asarray(self.lo, dtype=np.float64).reshape(3)
        hi = np.asarray(self.hi, dtype=np.float64).reshape(3)
        if np.any(hi <= lo):
            raise ValueError(f"degenerate box: lo={lo}, hi={hi}")
        object.__setattr__(self, "lo", lo)
        object.__setattr__(self, "hi", hi)

    def contains(self, p: np.ndarray) -> bool:
        p = np.asarray(p, dtype=np.float64)
        return bool(np.all(p >= self.lo) and np.all(p <= self.hi))

    def distance_to(self, p: np.ndarray) -> np.ndarray:
        """Exact Euclidean distance from point(s) to the box surface or 0 inside."""
        p = np.asarray(p, dtype=np.float64)
        d = np.maximum(np.maximum(self.lo - p, p - self.hi), 0.0)
        return np.sqrt(np.sum(d * d, axis=-1))


@dataclass(frozen=True)
class SceneWorld:
    boxes: tuple[Box, ...]
    bounds: Box

    def __post_init__(self):
        object.__setattr__(self, "boxes", tuple(self.boxes))
        for b in self.boxes:
            if not (np.all(b.lo >= self.bounds.lo) and np.all(b.hi <= self.bounds.hi)):
                raise ValueError("box lies outside the world bounds")

    def clearance(self, p: np.ndarray) -> np.ndarray:
        """Distance to the nearest box (continuous point-box test)."""
        p = np.asarray(p, dtype=np.float64)
        if not self.boxes:
            shape = p.shape[:-1]
            far = float(np.linalg.norm(self.bounds.hi - self.bounds.lo))
            return np.full(shape, far) if shape else far
        return np.min(np.stack([b.distance_to(p) for b in self.boxes], axis=-1), axis=-1)

    def in_free_space(self, p: np.ndarray) -> bool:
        return not any(b.contains(p) for b in self.boxes)


@dataclass(frozen=True)
class RobotPose:
    """Position (meters) and heading yaw (radians, 0 = +z/north, + toward +x/east)."""

    position: np.ndarray
    yaw: float

    def __post_init__(self):
        pos = np.asarray(self.position, dtype=np.float64).reshape(3)
        if not np.all(np.isfinite(pos)) or not math.isfinite(self.yaw):
            raise ValueError("pose must be finite")
        object.__setattr__(self, "position", pos)

    def camera_to_world(self, pts_cam: np.ndarray) -> np.ndarray:
        """Map camera-frame points (x right, y down, z forward) to world."""
        pts = np.asarray(pts_cam, dtype=np.float64)
        c, s = math.cos(self.yaw), math.sin(self.yaw)
        x, y, z = pts[..., 0], pts[..., 1], pts[..., 2]
        out = np.empty_like(pts)
        out[..., 0] = c * x + s * z
        out[..., 1] = -y
        out[..., 2] = -s * x + c * z
        return out + self.position


@dataclass(frozen=True)
class Scene:
    """A world plus the episode's start pose and optional goal region."""

    world: SceneWorld
    start: RobotPose
    goal: Box | None = None


@dataclass(frozen=True)
class SimStep:
    pose: RobotPose
    chosen: TrajectoryClass
    min_clearance: float
    micros: float
    record: LabelRecord


@dataclass(frozen=True)
class SimLog:
    steps: tuple[SimStep, ...]
    traveled: float
    mean_obstacle_distance: float
    collided: bool
    termination: str


def render_depth(world: SceneWorld, pose: RobotPose, k: CameraIntrinsics,
                 max_range: float = 10.0) -> DepthImage:
    """Per-pixel ray/box intersection depth along the optical axis.

    Pixels with no hit within max_range read max_range and stay valid (the
    walls are the only geometry; far space is genuinely free).
    """
    if not world.in_free_space(pose.position):
        raise ValueError("camera pose lies inside an obstacle")
    u = np.arange(k.width, dtype=np.float64)
    v = np.arange(k.height, dtype=np.float64)
    xs = (u - k.cx) / k.fx
    ys = (v - k.cy) / k.fy
    dx_cam, dy_cam = np.meshgrid(xs, ys)
    dz_cam = np.ones_like(dx_cam)

    c, s = math.cos(pose.yaw), math.sin(pose.yaw)
    dirs = np.stack([c * dx_cam + s * dz_cam, -dy_cam, -s * dx_cam + c * dz_cam], axis=-1)
    origin = pose.position

    # Ray parameter t equals optical-axis depth because the camera-frame
    # direction has unit z component.
    depth = np.full(dx_cam.shape, np.inf)
    with np.errstate(divide="ignore", invalid="ignore"):
        inv = 1.0 / dirs
        for box in world.boxes:
            t0 = (box.lo - origin) * inv
            t1 = (box.hi - origin) * inv
            tn = np.fmax.reduce(np.fmin(t0, t1), axis=-1)
            tf = np.fmin.reduce(np.fmax(t0, t1), axis=-1)
            hit = (tn <= tf) & (tf > 0) & (tn > 0)
            depth = np.where(hit, np.minimum(depth, tn), depth)
    depth = np.minimum(depth, max_range)
    return DepthImage(depth)


def _advance_local(curvature: float, s: np.ndarray) -> np.ndarray:
    """Camera-frame positions after traveling arc lengths s along a primitive."""
    pts = np.zeros((len(s), 3))
    if curvature == 0.0:
        pts[:, 2] = s
    else:
        pts[:, 0] = (1.0 - np.cos(curvature * s)) / curvature
        pts[:, 2] = np.sin(curvature * s) / curvature
    return pts


@dataclass(frozen=True)
class EpisodeConfig:
    k: CameraIntrinsics
    prims: PrimitiveSet = field(default_factory=generate_primitives)
    params: CostParams = field(default_factory=CostParams)
    advance: float = 0.5
    max_steps: int = 200
    max_range: float = 10.0
    voxel_size: float = 0.10

    def __post_init__(self):
        if not (0 < self.advance <= self.prims.arc_length):
            raise ValueError("advance must be in (0, primitive arc length]")
        if self.max_steps < 1:
            raise ValueError("max_steps must be positive")


def step(world: SceneWorld, pose: RobotPose, cfg: EpisodeConfig,
         ) -> tuple[RobotPose, SimStep, bool, DepthImage]:
    """One sense-label-advance cycle.

    Returns (new pose, logged step, collided, rendered depth). The advance is
    sampled finely against exact box distances; crossing below the robot
    radius marks the episode collided.
    """
    depth = render_depth(world, pose, cfg.k, cfg.max_range)
    t0 = time.perf_counter()
    record = label_frame(depth, cfg.k, cfg.prims, cfg.params, voxel_size=cfg.voxel_size)
    micros = (time.perf_counter() - t0) * 1e6

    chosen = record.label
    curvature = cfg.prims[chosen].curvature
    n_fine = max(2, int(math.ceil(cfg.advance / 0.02)) + 1)
    s = np.linspace(0.0, cfg.advance, n_fine)
    path_world = pose.camera_to_world(_advance_local(curvature, s))
    collided = bool(np.any(world.clearance(path_world) < cfg.params.robot_radius))

    new_pose = RobotPose(path_world[-1], pose.yaw + curvature * cfg.advance)
    clearance = float(world.clearance(new_pose.position))
    logged = SimStep(pose=new_pose, chosen=chosen, min_clearance=clearance,
                     micros=micros, record=record)
    return new_pose, logged, collided, depth


def run_episode(world: SceneWorld, start: RobotPose, cfg: EpisodeConfig,
                goal: Box | None = None, on_frame=None) -> SimLog:
    """Iterate steps until collision, goal, leaving bounds, or max steps."""
    if not world.in_free_space(start.position):
        raise ValueError("start pose lies inside an obstacle")
    if not world.bounds.contains(start.position):
        raise ValueError("start pose lies outside the world bounds")

    steps: list[SimStep] = []
    pose = start
    traveled = 0.0
    collided = False
    termination = "max_steps"
    for i in range(cfg.max_steps):
        new_pose, logged, hit, depth = step(world, pose, cfg)
        if on_frame is not None:
            on_frame(i, depth)
        steps.append(logged)
        traveled += float(np.linalg.norm(new_pose.position - pose.position))
        pose = new_pose
        if hit:
            collided = True
            termination = "collision"
            break
        if goal is not None and goal.contains(pose.position):
            termination = "goal"
            break
        if not world.bounds.contains(pose.position):
            termination = "out_of_bounds"
            break
    mean_clear = float(np.mean([st.min_clearance for st in steps])) if steps else math.nan
    return SimLog(steps=tuple(steps), traveled=traveled,
                  mean_obstacle_distance=mean_clear, collided=collided,
                  termination=termination)


def run_scene(scene: Scene, cfg: EpisodeConfig, on_frame=None) -> SimLog:
    return run_episode(scene.world, scene.start, cfg, goal=scene.goal, on_frame=on_frame)


def mirror_scene(scene: Scene) -> Scene:
    """Reflect the whole scene across the x = 0 plane."""

    def flip_box(b: Box) -> Box:
        lo = b.lo.copy()
        hi = b.hi.copy()
        lo[0], hi[0] = -b.hi[0], -b.lo[0]
        return Box(lo, hi)

    world = SceneWorld(boxes=tuple(flip_box(b) for b in scene.world.boxes),
                       bounds=flip_box(scene.world.bounds))
    pos = scene.start.position.copy()
    pos[0] = -pos[0]
    start = RobotPose(pos, -scene.start.yaw)
    goal = flip_box(scene.goal) if scene.goal is not None else None
    return Scene(world, start, goal)


# ---------------------------------------------------------------------------
# Canonical evaluation scenes
# ---------------------------------------------------------------------------


def _floor_ceiling(x0: float, x1: float, z0: float, z1: float, half_h: float,
                   thickness: float = 0.3) -> tuple[Box, Box]:
    return (Box([x0, -half_h - thickness, z0], [x1, -half_h, z1]),
            Box([x0, half_h, z0], [x1, half_h + thickness, z1]))


def corridor_scene(length: float = 30.0, width: float = 3.0, wall_height: float = 8.0,
                   wall_thickness: float = 0.3) -> Scene:
    """Straight corridor along +z with side walls, floor, and ceiling; open ends."""
    half_w = width / 2.0
    half_h = wall_height / 2.0
    t = wall_thickness
    x0, x1 = -half_w - t, half_w + t
    walls = (
        Box([-half_w - t, -half_h, -1.0], [-half_w, half_h, length + 1.0]),
        Box([half_w, -half_h, -1.0], [half_w + t, half_h, length + 1.0]),
        *_floor_ceiling(x0, x1, -1.0, length + 1.0, half_h, t),
    )
    bounds = Box([x0 - 1.0, -half_h - t - 1.0, -2.0], [x1 + 1.0, half_h + t + 1.0, length + 2.0])
    return Scene(SceneWorld(walls, bounds), RobotPose([0.0, 0.0, 0.5], 0.0))


def door_scene(gap: float = 0.78, corridor_width: float = 3.0, door_z: float = 4.0,
               wall_height: float = 8.0, wall_thickness: float = 0.2,
               length: float = 12.0) -> Scene:
    """Corridor blocked by a transverse wall with a narrow centered doorway."""
    half_w = corridor_width / 2.0
    half_g = gap / 2.0
    half_h = wall_height / 2.0
    t = wall_thickness
    x0, x1 = -half_w - t, half_w + t
    boxes = (
        Box([-half_w - t, -half_h, -1.0], [-half_w, half_h, length]),
        Box([half_w, -half_h, -1.0], [half_w + t, half_h, length]),
        Box([-half_w, -half_h, door_z], [-half_g, half_h, door_z + t]),
        Box([half_g, -half_h, door_z], [half_w, half_h, door_z + t]),
        *_floor_ceiling(x0, x1, -1.0, length, half_h),
    )
    bounds = Box([x0 - 1.0, -half_h - 1.3, -2.0], [x1 + 1.0, half_h + 1.3, length + 1.0])
    goal = Box([-half_w, -half_h, door_z + 2.5], [half_w, half_h, length])
    return Scene(SceneWorld(boxes, bounds), RobotPose([0.0, 0.0, 0.5], 0.0), goal)


def dead_end_scene(size: float = 12.0, wall_height: float = 8.0,
                   wall_thickness: float = 0.3) -> Scene:
    """Fully enclosed square room; the acknowledged greedy-planner trap."""
    half = size / 2.0
    t = wall_thickness
    half_h = wall_height / 2.0
    boxes = (
        Box([-half - t, -half_h, -half - t], [-half, half_h, half + t]),
        Box([half, -half_h, -half - t], [half + t, half_h, half + t]),
        Box([-half, -half_h, half], [half, half_h, half + t]),
        Box([-half, -half_h, -half - t], [half, half_h, -half]),
        *_floor_ceiling(-half - t, half + t, -half - t, half + t, half_h, t),
    )
    bounds = Box([-half - t - 1.0, -half_h - t - 1.0, -half - t - 1.0],
                 [half + t + 1.0, half_h + t + 1.0, half + t + 1.0])
    return Scene(SceneWorld(boxes, bounds), RobotPose([0.0, 0.0, -half + 1.0], 0.0))

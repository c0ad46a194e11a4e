"""Trajectory cost functionals and per-frame ground-truth label selection.

The total cost of a trajectory is J = f_obst + w * f_smooth. The obstacle
term integrates the squared clearance shortfall below d_max along the path;
the smoothness term is half the integral of squared parametric speed on unit
time. Ties in the argmin break toward the smallest terminal heading change
(Straight first), then left before right.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, NamedTuple

import numpy as np

from .distance_field import DistanceField, compute_edt, query_distance
from .geometry import (CameraIntrinsics, DepthImage, fill_depth_holes,
                       frustum_bounds, project_depth_to_cloud, voxelize)
from .primitives import PrimitiveSet, Trajectory, TrajectoryClass, truncate

DEFAULT_VOXEL_SIZE = 0.10

# Per-class tie-break rank: prefer small |terminal heading|, then left of right.
_TIEBREAK = {
    c: (abs(c.terminal_heading), 0 if c.terminal_heading <= 0 else 1)
    for c in TrajectoryClass
}


@dataclass(frozen=True)
class CostParams:
    """Weights and thresholds of the labeling cost."""

    d_max: float = 3.5
    w: float = 0.5
    robot_radius: float = 0.30
    safety_horizon: float = 2.0

    def __post_init__(self):
        if self.d_max <= 0:
            raise ValueError("d_max must be positive")
        if self.w < 0:
            raise ValueError("w must be nonnegative")
        if self.robot_radius < 0:
            raise ValueError("robot_radius must be nonnegative")
        if self.safety_horizon <= 0:
            raise ValueError("safety_horizon must be positive")


@dataclass(frozen=True)
class CostBreakdown:
    f_obst: float
    f_smooth: float
    total: float
    min_clearance: float
    collides: bool


@dataclass(frozen=True)
class LabelRecord:
    """Per-frame labeling outcome: costs, chosen class, safety facts."""

    frame_id: str
    costs: dict[TrajectoryClass, CostBreakdown]
    label: TrajectoryClass
    top2: tuple[TrajectoryClass, TrajectoryClass]
    safe_full: dict[TrajectoryClass, bool]
    safe_truncated: dict[TrajectoryClass, bool]
    safety_horizon: float


def smoothness_cost(traj: Trajectory | np.ndarray) -> float:
    """Half the integral of squared parametric speed over unit time.

    A Trajectory is sampled at uniform arc-length stations, so its speed is
    constant at the total arc length and the sum collapses to arc_length^2/2.
    A raw (n, 3) waypoint array is treated as a polyline on a uniform time
    grid with chord-length segment speeds.
    """
    if isinstance(traj, Trajectory):
        return 0.5 * traj.arc_length * traj.arc_length
    pts = np.asarray(traj, dtype=np.float64)
    if pts.ndim != 2 or pts.shape[1] != 3 or pts.shape[0] < 2:
        raise ValueError("waypoints must be (n, 3) with n >= 2")
    n = pts.shape[0]
    dt = 1.0 / (n - 1)
    seg = np.linalg.norm(np.diff(pts, axis=0), axis=1)
    v = seg / dt
    return float(0.5 * np.sum(v * v) * dt)


def obstacle_cost(traj: Trajectory, field: DistanceField, d_max: float) -> float:
    """Left-Riemann sum of (max(0, d_max - d))^2 over the arc-length stations."""
    d = query_distance(field, traj.waypoints)
    ds = traj.arc_length / (len(traj) - 1)
    short = np.maximum(0.0, d_max - d[:-1])
    return float(np.sum(short * short) * ds)


def total_cost(traj: Trajectory, field: DistanceField, params: CostParams) -> CostBreakdown:
    """Combine obstacle and smoothness costs; also report clearance facts."""
    d = query_distance(field, traj.waypoints)
    ds = traj.arc_length / (len(traj) - 1)
    short = np.maximum(0.0, params.d_max - d[:-1])
    f_obst = float(np.sum(short * short) * ds)
    f_smooth = smoothness_cost(traj)
    min_clearance = float(d.min())
    return CostBreakdown(
        f_obst=f_obst,
        f_smooth=f_smooth,
        total=f_obst + params.w * f_smooth,
        min_clearance=min_clearance,
        collides=min_clearance < params.robot_radius,
    )


def check_collision(traj: Trajectory, field: DistanceField, radius: float,
                    horizon: float | None = None) -> tuple[bool, float]:
    """Waypoint-sampled collision test within an optional horizon.

    Returns (collides, min_clearance) where collides means any sampled
    clearance falls below the radius.
    """
    if radius < 0:
        raise ValueError("radius must be nonnegative")
    if horizon is not None and horizon < traj.arc_length:
        traj = truncate(traj, horizon)
    d = query_distance(field, traj.waypoints)
    min_clearance = float(np.min(d))
    return min_clearance < radius, min_clearance


def rank_classes(totals: dict[TrajectoryClass, float]) -> list[TrajectoryClass]:
    """Classes from lowest to highest cost with the deterministic tie-break."""
    return sorted(TrajectoryClass, key=lambda c: (totals[c],) + _TIEBREAK[c])


def label_frame(depth: DepthImage, k: CameraIntrinsics, prims: PrimitiveSet,
                params: CostParams, *, voxel_size: float = DEFAULT_VOXEL_SIZE,
                bounds: tuple[np.ndarray, np.ndarray] | None = None,
                frame_id: str = "") -> LabelRecord:
    """Run the full labeling pipeline on one frame.

    fill holes -> project -> voxelize -> distance transform -> cost all five
    primitives -> pick the argmin. Deterministic for identical inputs. Bounds
    default to the observed frustum box expanded by 0.5 m.
    """
    if not depth.valid.all():
        depth = fill_depth_holes(depth)
    cloud = project_depth_to_cloud(depth, k)
    if bounds is None:
        bounds = frustum_bounds(cloud, margin=0.5)
    grid = voxelize(cloud, voxel_size, bounds)
    field = compute_edt(grid)

    costs = {t.class_id: total_cost(t, field, params) for t in prims}
    order = rank_classes({c: costs[c].total for c in costs})
    safe_full = {c: not costs[c].collides for c in costs}
    safe_truncated = {
        t.class_id: not check_collision(t, field, params.robot_radius, params.safety_horizon)[0]
        for t in prims
    }
    return LabelRecord(
        frame_id=frame_id,
        costs=costs,
        label=order[0],
        top2=(order[0], order[1]),
        safe_full=safe_full,
        safe_truncated=safe_truncated,
        safety_horizon=params.safety_horizon,
    )


class DatasetLabels(NamedTuple):
    records: list[LabelRecord]
    distribution: dict[TrajectoryClass, float]
    failures: list[tuple[str, str]]


def label_dataset(frames: Iterable[tuple[str, DepthImage]], k: CameraIntrinsics,
                  prims: PrimitiveSet, params: CostParams, *,
                  voxel_size: float = DEFAULT_VOXEL_SIZE) -> DatasetLabels:
    """Label every frame; failures are recorded and skipped, never fatal.

    Returns records sorted by frame_id plus the class histogram normalized to
    fractions over the successfully labeled frames.
    """
    records: list[LabelRecord] = []
    failures: list[tuple[str, str]] = []
    for frame_id, depth in frames:
        try:
            records.append(label_frame(depth, k, prims, params,
                                        voxel_size=voxel_size, frame_id=frame_id))
        except (ValueError, ArithmeticError) as exc:
            failures.append((frame_id, str(exc)))
    if not records and not failures:
        raise ValueError("label_dataset needs at least one frame")
    records.sort(key=lambda r: r.frame_id)
    counts = {c: 0 for c in TrajectoryClass}
    for rec in records:
        counts[rec.label] += 1
    total = sum(counts.values())
    distribution = {c: (counts[c] / total if total else math.nan) for c in TrajectoryClass}
    return DatasetLabels(records, distribution, failures)

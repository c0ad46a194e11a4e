"""Five-member motion-primitive library: constant-curvature planar arcs.

All primitives start at the camera origin heading straight along +z, lie in
the y = 0 plane, and share one arc length. Heading is the yaw angle from +z
toward +x (x is camera-right), so left turns have negative terminal heading
and negative terminal x.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np

DEFAULT_ARC_LENGTH = 2.5
DEFAULT_N_SAMPLES = 50

# Terminal heading change per class, radians, indexed by TrajectoryClass.
TERMINAL_HEADINGS = (-math.pi / 2, -math.pi / 4, 0.0, math.pi / 4, math.pi / 2)


class TrajectoryClass(enum.IntEnum):
    LEFT_TURN = 0
    LEFT_FORWARD = 1
    STRAIGHT = 2
    RIGHT_FORWARD = 3
    RIGHT_TURN = 4

    @property
    def label(self) -> str:
        return _LABELS[self]

    @staticmethod
    def from_label(label: str) -> "TrajectoryClass":
        try:
            return _FROM_LABEL[label.strip().lower()]
        except KeyError:
            raise ValueError(f"unknown trajectory class {label!r}") from None

    @property
    def mirrored(self) -> "TrajectoryClass":
        return TrajectoryClass(4 - int(self))

    @property
    def terminal_heading(self) -> float:
        return TERMINAL_HEADINGS[int(self)]


_LABELS = {
    TrajectoryClass.LEFT_TURN: "left_turn",
    TrajectoryClass.LEFT_FORWARD: "left_forward",
    TrajectoryClass.STRAIGHT: "straight",
    TrajectoryClass.RIGHT_FORWARD: "right_forward",
    TrajectoryClass.RIGHT_TURN: "right_turn",
}
_FROM_LABEL = {v: k for k, v in _LABELS.items()}


def _arc_points(curvature: float, s: np.ndarray) -> np.ndarray:
    """Positions along a unit-speed planar arc at arc lengths s."""
    pts = np.zeros((len(s), 3))
    if curvature == 0.0:
        pts[:, 2] = s
    else:
        pts[:, 0] = (1.0 - np.cos(curvature * s)) / curvature
        pts[:, 2] = np.sin(curvature * s) / curvature
    return pts


@dataclass(frozen=True)
class Trajectory:
    """A sampled constant-curvature arc with its class identity.

    waypoints: (n, 3) positions at uniform arc-length stations, camera frame.
    headings: tangent yaw per waypoint, radians.
    """

    waypoints: np.ndarray
    headings: np.ndarray
    class_id: TrajectoryClass
    arc_length: float

    def __post_init__(self):
        wp = np.asarray(self.waypoints, dtype=np.float64)
        hd = np.asarray(self.headings, dtype=np.float64)
        if wp.ndim != 2 or wp.shape[1] != 3 or wp.shape[0] < 2:
            raise ValueError("waypoints must be (n, 3) with n >= 2")
        if hd.shape != (wp.shape[0],):
            raise ValueError("headings length must match waypoints")
        if self.arc_length <= 0:
            raise ValueError("arc_length must be positive")
        if not np.allclose(wp[0], 0.0, atol=1e-12):
            raise ValueError("trajectory must start at the origin")
        if abs(hd[0]) > 1e-12:
            raise ValueError("trajectory must start heading straight ahead")
        if np.any(np.abs(wp[:, 1]) > 1e-9):
            raise ValueError("trajectory must lie in the y = 0 plane")
        seg = np.linalg.norm(np.diff(wp, axis=0), axis=1)
        if seg.max() - seg.min() > 1e-6 * max(seg.max(), 1e-12):
            raise ValueError("waypoint spacing must be uniform")
        object.__setattr__(self, "waypoints", wp)
        object.__setattr__(self, "headings", hd)

    def __len__(self) -> int:
        return self.waypoints.shape[0]

    @property
    def curvature(self) -> float:
        return float(self.headings[-1]) / self.arc_length


def _sample_arc(class_id: TrajectoryClass, terminal_heading: float,
                arc_length: float, n_samples: int) -> Trajectory:
    s = np.linspace(0.0, arc_length, n_samples)
    kappa = terminal_heading / arc_length
    return Trajectory(_arc_points(kappa, s), kappa * s, class_id, arc_length)


def generate_primitives(arc_length: float = DEFAULT_ARC_LENGTH,
                        n_samples: int = DEFAULT_N_SAMPLES) -> "PrimitiveSet":
    """Build the five-arc library with terminal headings -90/-45/0/+45/+90 deg.

    Right-side arcs are constructed as exact reflections of the left-side
    ones, so left/right pairs mirror bitwise.
    """
    if arc_length <= 0:
        raise ValueError("arc_length must be positive")
    if n_samples < 2:
        raise ValueError("n_samples must be at least 2")
    left_turn = _sample_arc(TrajectoryClass.LEFT_TURN, TERMINAL_HEADINGS[0], arc_length, n_samples)
    left_fwd = _sample_arc(TrajectoryClass.LEFT_FORWARD, TERMINAL_HEADINGS[1], arc_length, n_samples)
    straight = _sample_arc(TrajectoryClass.STRAIGHT, 0.0, arc_length, n_samples)
    return PrimitiveSet((left_turn, left_fwd, straight, mirror(left_fwd), mirror(left_turn)))


@dataclass(frozen=True)
class PrimitiveSet:
    """Exactly five trajectories, one per class, left/right pairs mirrored."""

    trajectories: tuple[Trajectory, ...]

    def __post_init__(self):
        if len(self.trajectories) != 5:
            raise ValueError("a primitive set holds exactly 5 trajectories")
        ids = [t.class_id for t in self.trajectories]
        if sorted(ids) != list(TrajectoryClass):
            raise ValueError("class ids must be distinct and complete")
        by_id = {t.class_id: t for t in self.trajectories}
        for left, right in ((TrajectoryClass.LEFT_TURN, TrajectoryClass.RIGHT_TURN),
                            (TrajectoryClass.LEFT_FORWARD, TrajectoryClass.RIGHT_FORWARD)):
            lw, rw = by_id[left].waypoints, by_id[right].waypoints
            if lw.shape != rw.shape or not np.array_equal(lw[:, 0], -rw[:, 0]) \
                    or not np.array_equal(lw[:, 1:], rw[:, 1:]):
                raise ValueError(f"{left.label} must mirror {right.label} in x")

    def __getitem__(self, class_id: TrajectoryClass) -> Trajectory:
        return self.trajectories[int(class_id)]

    def __iter__(self):
        return iter(self.trajectories)

    @property
    def arc_length(self) -> float:
        return self.trajectories[0].arc_length

    @property
    def n_samples(self) -> int:
        return len(self.trajectories[0])


def resample(traj: Trajectory, n: int) -> Trajectory:
    """Same arc, n equally spaced arc-length stations (endpoints preserved)."""
    if n < 2:
        raise ValueError("need at least 2 samples")
    if n == len(traj):
        return traj
    return _sample_arc(traj.class_id, float(traj.headings[-1]), traj.arc_length, n)


def mirror(traj: Trajectory) -> Trajectory:
    """Reflect across the x = 0 plane: negate x and headings, swap left/right."""
    wp = traj.waypoints.copy()
    wp[:, 0] = -wp[:, 0]
    return Trajectory(wp, -traj.headings, traj.class_id.mirrored, traj.arc_length)


def truncate(traj: Trajectory, horizon: float) -> Trajectory:
    """Prefix of the arc with length min(horizon, arc_length).

    The prefix is resampled at (as close as possible to) the original station
    spacing; a horizon at or beyond the arc length returns the input unchanged.
    """
    if horizon <= 0:
        raise ValueError("horizon must be positive")
    if horizon >= traj.arc_length:
        return traj
    spacing = traj.arc_length / (len(traj) - 1)
    n = max(2, int(round(horizon / spacing)) + 1)
    kappa = traj.curvature
    return _sample_arc(traj.class_id, kappa * horizon, horizon, n)


def mirror_set(prims: PrimitiveSet) -> PrimitiveSet:
    """Mirror every member; maps the set onto itself with classes swapped."""
    mirrored = sorted((mirror(t) for t in prims), key=lambda t: int(t.class_id))
    return PrimitiveSet(tuple(mirrored))

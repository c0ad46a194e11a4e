"""Scikit-learn style front end for the trajectory cost labeler.

The labeler is stateless (nothing is learned from data), so fit only
validates parameters and builds the primitive library; predict runs the
geometric pipeline per frame. transform exposes the per-class cost matrix so
the labeler composes with downstream sklearn pipelines.
"""

from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator
from sklearn.exceptions import NotFittedError

from .geometry import CameraIntrinsics, DepthImage
from .labeling import CostParams, LabelRecord, label_frame
from .primitives import TrajectoryClass, generate_primitives

N_CLASSES = len(TrajectoryClass)


def as_depth_image(frame) -> DepthImage:
    """Accept a DepthImage or a 2-D array of meters (<=0 or nonfinite = invalid)."""
    if isinstance(frame, DepthImage):
        return frame
    arr = np.asarray(frame, dtype=np.float64)
    if arr.ndim != 2:
        raise ValueError(f"depth frame must be 2-D, got shape {arr.shape}")
    valid = np.isfinite(arr) & (arr > 0)
    return DepthImage(np.where(valid, arr, 0.0), valid)


def check_depth_batch(X) -> list[DepthImage]:
    """Validate a batch: a sequence of frames or an (n, h, w) array."""
    if isinstance(X, np.ndarray) and X.ndim == 3:
        frames = [as_depth_image(X[i]) for i in range(X.shape[0])]
    else:
        try:
            frames = [as_depth_image(f) for f in X]
        except TypeError:
            raise ValueError("X must be a sequence of depth frames or an (n, h, w) array") from None
    if not frames:
        raise ValueError("empty depth batch")
    shape = (frames[0].height, frames[0].width)
    for i, f in enumerate(frames):
        if (f.height, f.width) != shape:
            raise ValueError(f"frame {i} has shape {(f.height, f.width)}, expected {shape}")
    return frames


class TrajectoryCostLabeler(BaseEstimator):
    """Label depth frames with the lowest-cost motion primitive.

    Parameters mirror the labeling pipeline: camera intrinsics, voxel size of
    the obstacle grid, the obstacle-cost cutoff d_max, smoothness weight w,
    the robot radius used for collision flags, and the truncated safety
    horizon. predict returns class-name strings from `classes_`.

    >>> est = TrajectoryCostLabeler(intrinsics=k).fit()
    >>> est.predict(depth_frames)
    array(['straight', ...], dtype='<U13')
    """

    def __init__(self, intrinsics: CameraIntrinsics | None = None,
                 voxel_size: float = 0.10, d_max: float = 3.5, w: float = 0.5,
                 robot_radius: float = 0.30, safety_horizon: float = 2.0,
                 arc_length: float = 2.5, n_samples: int = 50):
        self.intrinsics = intrinsics
        self.voxel_size = voxel_size
        self.d_max = d_max
        self.w = w
        self.robot_radius = robot_radius
        self.safety_horizon = safety_horizon
        self.arc_length = arc_length
        self.n_samples = n_samples

    def fit(self, X=None, y=None):
        """Validate parameters and build the primitive library. X is ignored."""
        if self.intrinsics is None:
            raise ValueError("TrajectoryCostLabeler requires camera intrinsics")
        if not isinstance(self.intrinsics, CameraIntrinsics):
            raise ValueError("intrinsics must be a CameraIntrinsics instance")
        if self.voxel_size <= 0:
            raise ValueError("voxel_size must be positive")
        self.cost_params_ = CostParams(d_max=self.d_max, w=self.w,
                                       robot_radius=self.robot_radius,
                                       safety_horizon=self.safety_horizon)
        self.primitives_ = generate_primitives(self.arc_length, self.n_samples)
        self.classes_ = np.array([c.label for c in TrajectoryClass])
        return self

    def _check_fitted(self):
        if not hasattr(self, "primitives_"):
            raise NotFittedError("call fit() before using this estimator")

    def label_frames(self, X) -> list[LabelRecord]:
        """Full label records for every frame in the batch."""
        self._check_fitted()
        frames = check_depth_batch(X)
        return [
            label_frame(f, self.intrinsics, self.primitives_, self.cost_params_,
                        voxel_size=self.voxel_size, frame_id=str(i))
            for i, f in enumerate(frames)
        ]

    def predict(self, X) -> np.ndarray:
        """Lowest-cost class name per frame."""
        return np.array([r.label.label for r in self.label_frames(X)])

    def transform(self, X) -> np.ndarray:
        """(n_frames, 5) matrix of total costs, columns ordered as classes_."""
        records = self.label_frames(X)
        return np.array([[r.costs[c].total for c in TrajectoryClass] for r in records])

    def score(self, X, y) -> float:
        """Classification accuracy against class names or indices."""
        pred = self.predict(X)
        y = np.asarray(y)
        if y.shape != pred.shape:
            raise ValueError(f"y has shape {y.shape}, expected {pred.shape}")
        if np.issubdtype(y.dtype, np.integer):
            y = np.array([TrajectoryClass(int(v)).label for v in y])
        return float(np.mean(pred == y))

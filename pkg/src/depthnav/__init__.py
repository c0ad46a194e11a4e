"""depthnav: trajectory labeling from depth images via 3-D distance-field costs."""

from .distance_field import DistanceField, brute_force_edt, compute_edt, query_distance
from .estimator import TrajectoryCostLabeler
from .evaluation import (MetricsReport, PredictionSet, accuracy, compute_metrics,
                         confusion_matrix, safe_prediction_rate, top2_accuracy)
from .geometry import (CameraIntrinsics, DepthImage, OccupancyGrid, PointCloud,
                       centered_intrinsics, fill_depth_holes, project_depth_to_cloud,
                       voxelize)
from .labeling import (CostBreakdown, CostParams, LabelRecord, check_collision,
                       label_dataset, label_frame, obstacle_cost, smoothness_cost,
                       total_cost)
from .losses import (depth_loss, finite_difference_gradient, mean_softmax_cross_entropy,
                     normal_loss, softmax, softmax_cross_entropy)
from .primitives import (PrimitiveSet, Trajectory, TrajectoryClass, generate_primitives,
                         mirror, resample, truncate)
from .simulator import (Box, EpisodeConfig, RobotPose, Scene, SceneWorld, SimLog,
                        corridor_scene, dead_end_scene, door_scene, render_depth,
                        run_episode, run_scene, step)

__version__ = "0.1.0"

__all__ = [
    "Box", "CameraIntrinsics", "CostBreakdown", "CostParams", "DepthImage",
    "DistanceField", "EpisodeConfig", "LabelRecord", "MetricsReport",
    "OccupancyGrid", "PointCloud", "PredictionSet", "PrimitiveSet", "RobotPose",
    "Scene", "SceneWorld", "SimLog", "Trajectory", "TrajectoryClass",
    "TrajectoryCostLabeler", "accuracy", "brute_force_edt", "centered_intrinsics",
    "check_collision", "compute_edt", "compute_metrics", "confusion_matrix",
    "corridor_scene", "dead_end_scene", "depth_loss", "door_scene",
    "fill_depth_holes", "finite_difference_gradient", "generate_primitives",
    "label_dataset", "label_frame", "mean_softmax_cross_entropy", "mirror",
    "normal_loss", "obstacle_cost", "project_depth_to_cloud", "query_distance",
    "render_depth", "resample", "run_episode", "run_scene", "safe_prediction_rate",
    "smoothness_cost", "softmax", "softmax_cross_entropy", "step", "top2_accuracy",
    "total_cost", "truncate", "voxelize",
]

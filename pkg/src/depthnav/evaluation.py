"""Comparison metrics for trajectory predictors against labeled ground truth."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .labeling import LabelRecord
from .primitives import TrajectoryClass

N_CLASSES = len(TrajectoryClass)


@dataclass(frozen=True)
class PredictionEntry:
    frame_id: str
    predicted: TrajectoryClass
    record: LabelRecord


@dataclass(frozen=True)
class PredictionSet:
    """Per-frame predictions paired with their reference label records."""

    entries: tuple[PredictionEntry, ...]

    def __post_init__(self):
        ids = [e.frame_id for e in self.entries]
        if len(set(ids)) != len(ids):
            raise ValueError("frame_ids must be unique")
        object.__setattr__(self, "entries", tuple(self.entries))

    def __len__(self) -> int:
        return len(self.entries)

    @staticmethod
    def from_pairs(predictions: dict[str, TrajectoryClass],
                   records: list[LabelRecord]) -> "PredictionSet":
        by_id = {r.frame_id: r for r in records}
        missing = sorted(set(predictions) - set(by_id))
        if missing:
            raise ValueError(f"predictions reference unlabeled frames: {missing[:5]}")
        entries = tuple(PredictionEntry(fid, cls, by_id[fid])
                        for fid, cls in sorted(predictions.items()))
        return PredictionSet(entries)


def _require_nonempty(preds: PredictionSet):
    if len(preds) == 0:
        raise ValueError("prediction set is empty")


def accuracy(preds: PredictionSet) -> float:
    """Fraction of frames whose prediction equals the ground-truth label."""
    _require_nonempty(preds)
    hits = sum(1 for e in preds.entries if e.predicted == e.record.label)
    return hits / len(preds)


def top2_accuracy(preds: PredictionSet) -> float:
    """Fraction of frames whose prediction is among the two lowest-cost classes."""
    _require_nonempty(preds)
    hits = sum(1 for e in preds.entries if e.predicted in e.record.top2)
    return hits / len(preds)


def safe_prediction_rate(preds: PredictionSet, horizon: float | None = None) -> float:
    """Fraction of frames whose predicted path is collision-free.

    horizon=None judges the full path; a finite horizon must match the
    safety horizon the records were labeled with.
    """
    _require_nonempty(preds)
    if horizon is None:
        safe = sum(1 for e in preds.entries if e.record.safe_full[e.predicted])
    else:
        for e in preds.entries:
            if abs(e.record.safety_horizon - horizon) > 1e-9:
                raise ValueError(
                    f"records carry safety flags for horizon {e.record.safety_horizon}, "
                    f"not {horizon}")
        safe = sum(1 for e in preds.entries if e.record.safe_truncated[e.predicted])
    return safe / len(preds)


def confusion_matrix(preds: PredictionSet, normalize: bool = True) -> np.ndarray:
    """5x5 matrix, rows = true class, columns = predicted.

    Row-normalized by default; rows whose class never occurs stay zero.
    """
    _require_nonempty(preds)
    counts = np.zeros((N_CLASSES, N_CLASSES))
    for e in preds.entries:
        counts[int(e.record.label), int(e.predicted)] += 1
    if not normalize:
        return counts
    sums = counts.sum(axis=1, keepdims=True)
    return np.divide(counts, sums, out=np.zeros_like(counts), where=sums > 0)


@dataclass(frozen=True)
class MetricsReport:
    accuracy: float
    top2_accuracy: float
    safe_rate_full: float
    safe_rate_truncated: float
    confusion: np.ndarray
    n_frames: int
    n_skipped: int = 0

    def as_dict(self) -> dict[str, float]:
        out = {
            "accuracy": self.accuracy,
            "top2_accuracy": self.top2_accuracy,
            "safe_rate_full": self.safe_rate_full,
            "safe_rate_truncated": self.safe_rate_truncated,
            "n_frames": self.n_frames,
            "n_skipped": self.n_skipped,
        }
        for i in range(N_CLASSES):
            for j in range(N_CLASSES):
                key = f"confusion_{TrajectoryClass(i).label}_{TrajectoryClass(j).label}"
                out[key] = float(self.confusion[i, j])
        return out

    def format_text(self) -> str:
        lines = [
            f"frames evaluated : {self.n_frames}",
            f"frames skipped   : {self.n_skipped}",
            f"accuracy         : {self.accuracy:.4f}",
            f"top-2 accuracy   : {self.top2_accuracy:.4f}",
            f"safe (full path) : {self.safe_rate_full:.4f}",
            f"safe (truncated) : {self.safe_rate_truncated:.4f}",
            "confusion matrix (rows = true, columns = predicted):",
        ]
        header = "".join(f"{c.label:>15}" for c in TrajectoryClass)
        lines.append(" " * 15 + header)
        for i, c in enumerate(TrajectoryClass):
            row = "".join(f"{self.confusion[i, j]:15.4f}" for j in range(N_CLASSES))
            lines.append(f"{c.label:>15}{row}")
        return "\n".join(lines)


def compute_metrics(preds: PredictionSet, truncated_horizon: float | None = None,
                    n_skipped: int = 0) -> MetricsReport:
    """All report metrics in one pass."""
    horizon = truncated_horizon
    if horizon is None and len(preds):
        horizon = preds.entries[0].record.safety_horizon
    return MetricsReport(
        accuracy=accuracy(preds),
        top2_accuracy=top2_accuracy(preds),
        safe_rate_full=safe_prediction_rate(preds, None),
        safe_rate_truncated=safe_prediction_rate(preds, horizon),
        confusion=confusion_matrix(preds),
        n_frames=len(preds),
        n_skipped=n_skipped,
    )

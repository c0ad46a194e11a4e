"""Pure, gradient-checked training losses for depth, normals, and classes.

No learning framework: each loss is a plain function returning (value,
analytic gradient with respect to the prediction), verifiable against central
finite differences.
"""

from __future__ import annotations

import numpy as np


def _check_same_shape(a: np.ndarray, b: np.ndarray, what: str):
    if a.shape != b.shape:
        raise ValueError(f"{what} shapes differ: {a.shape} vs {b.shape}")


def _forward_diff(d: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Horizontal/vertical forward differences, zero at right/bottom borders."""
    gx = np.zeros_like(d)
    gy = np.zeros_like(d)
    gx[:, :-1] = d[:, 1:] - d[:, :-1]
    gy[:-1, :] = d[1:, :] - d[:-1, :]
    return gx, gy


def depth_loss(pred_log: np.ndarray, gt_log: np.ndarray) -> tuple[float, np.ndarray]:
    """Scale-invariant log-depth loss with a spatial-gradient match term.

    With d = pred_log - gt_log over n pixels:
        (1/n) sum d^2 - (1/(2 n^2)) (sum d)^2 + (1/n) sum (gx^2 + gy^2)
    where gx, gy are forward differences of d (zero-padded at the right and
    bottom edges). Returns the value and the gradient w.r.t. pred_log.
    """
    pred = np.asarray(pred_log, dtype=np.float64)
    gt = np.asarray(gt_log, dtype=np.float64)
    _check_same_shape(pred, gt, "depth field")
    if pred.ndim != 2:
        raise ValueError("depth fields must be 2-D (h, w)")
    n = pred.size
    d = pred - gt
    gx, gy = _forward_diff(d)
    s = d.sum()
    value = float(np.sum(d * d) / n - (s * s) / (2.0 * n * n) + np.sum(gx * gx + gy * gy) / n)

    grad = 2.0 * d / n - s / (n * n)
    # Adjoint of the forward differences: d/d d[i,j] of sum gx^2 is
    # 2*(gx[i,j-1] - gx[i,j]); same pattern vertically.
    adj = np.zeros_like(d)
    adj[:, 1:] += gx[:, :-1]
    adj -= gx
    adj[1:, :] += gy[:-1, :]
    adj -= gy
    grad += 2.0 * adj / n
    return value, grad


def normal_loss(pred: np.ndarray, gt: np.ndarray) -> tuple[float, np.ndarray]:
    """Negative mean dot product between predicted and unit ground-truth normals.

    pred, gt: (..., 3) per-pixel vectors. The ground truth must be unit-norm;
    predictions are consumed raw (no renormalization). Gradient w.r.t. pred is
    -gt/n with n the pixel count.
    """
    pred = np.asarray(pred, dtype=np.float64)
    gt = np.asarray(gt, dtype=np.float64)
    _check_same_shape(pred, gt, "normal field")
    if pred.shape[-1] != 3:
        raise ValueError("normal fields must have a trailing axis of size 3")
    norms = np.linalg.norm(gt.reshape(-1, 3), axis=1)
    if np.any(np.abs(norms - 1.0) > 1e-6):
        raise ValueError("ground-truth normals must be unit length")
    n = pred.reshape(-1, 3).shape[0]
    value = float(-np.sum(pred * gt) / n)
    return value, -gt / n


def softmax(z: np.ndarray) -> np.ndarray:
    """Numerically stable softmax over the last axis."""
    z = np.asarray(z, dtype=np.float64)
    m = z.max(axis=-1, keepdims=True)
    e = np.exp(z - m)
    return e / e.sum(axis=-1, keepdims=True)


def softmax_cross_entropy(z: np.ndarray, target: np.ndarray) -> tuple[float, np.ndarray]:
    """Cross entropy of softmax(z) against a one-hot target, one sample.

    Evaluated via log-sum-exp; gradient w.r.t. z is softmax(z) - target.
    """
    z = np.asarray(z, dtype=np.float64)
    t = np.asarray(target, dtype=np.float64)
    _check_same_shape(z, t, "logits/target")
    if not np.all(np.isfinite(z)):
        raise ValueError("logits must be finite")
    if abs(t.sum() - 1.0) > 1e-12 or np.count_nonzero(t) != 1:
        raise ValueError("target must be one-hot")
    m = float(z.max())
    lse = m + float(np.log(np.sum(np.exp(z - m))))
    value = lse - float(np.dot(z, t))
    return value, softmax(z) - t


def mean_softmax_cross_entropy(z: np.ndarray, target: np.ndarray) -> tuple[float, np.ndarray]:
    """Batch mean of the per-sample cross entropy; rows are samples."""
    z = np.asarray(z, dtype=np.float64)
    t = np.asarray(target, dtype=np.float64)
    _check_same_shape(z, t, "logits/target")
    if z.ndim != 2:
        raise ValueError("batched logits must be 2-D (samples, classes)")
    vals = []
    grads = np.empty_like(z)
    for i in range(z.shape[0]):
        v, g = softmax_cross_entropy(z[i], t[i])
        vals.append(v)
        grads[i] = g
    return float(np.mean(vals)), grads / z.shape[0]


def finite_difference_gradient(fn, x: np.ndarray, eps: float = 1e-6) -> np.ndarray:
    """Central-difference gradient of a scalar function of an array."""
    x = np.asarray(x, dtype=np.float64)
    grad = np.zeros_like(x)
    flat = x.reshape(-1)
    gflat = grad.reshape(-1)
    for i in range(flat.size):
        orig = flat[i]
        flat[i] = orig + eps
        hi = fn(x)
        flat[i] = orig - eps
        lo = fn(x)
        flat[i] = orig
        gflat[i] = (hi - lo) / (2.0 * eps)
    return grad


def run_gradient_checks(seed: int = 0, trials: int = 50, rel_tol: float = 1e-5) -> dict[str, int]:
    """Check every analytic gradient against central differences.

    Returns pass counts per loss over `trials` random instances each; raises
    nothing, callers compare counts against `trials`.
    """
    rng = np.random.default_rng(seed)
    passed = {"depth_loss": 0, "normal_loss": 0, "softmax_cross_entropy": 0}

    def rel_err(a, b):
        denom = max(float(np.linalg.norm(a)), float(np.linalg.norm(b)), 1e-12)
        return float(np.linalg.norm(a - b)) / denom

    for _ in range(trials):
        gt = rng.normal(size=(8, 8))
        pred = gt + 0.3 * rng.normal(size=(8, 8))
        _, g = depth_loss(pred, gt)
        fd = finite_difference_gradient(lambda p: depth_loss(p, gt)[0], pred.copy())
        if rel_err(g, fd) < rel_tol:
            passed["depth_loss"] += 1

        raw = rng.normal(size=(6, 6, 3))
        gt_n = raw / np.linalg.norm(raw, axis=-1, keepdims=True)
        pred_n = rng.normal(size=(6, 6, 3))
        _, g = normal_loss(pred_n, gt_n)
        fd = finite_difference_gradient(lambda p: normal_loss(p, gt_n)[0], pred_n.copy())
        if rel_err(g, fd) < rel_tol:
            passed["normal_loss"] += 1

        z = rng.normal(scale=2.0, size=5)
        t = np.zeros(5)
        t[rng.integers(5)] = 1.0
        _, g = softmax_cross_entropy(z, t)
        fd = finite_difference_gradient(lambda q: softmax_cross_entropy(q, t)[0], z.copy())
        if rel_err(g, fd) < rel_tol:
            passed["softmax_cross_entropy"] += 1
    return passed

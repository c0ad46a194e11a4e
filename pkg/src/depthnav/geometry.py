"""Depth-image geometry: pinhole projection, hole filling, voxel occupancy.

Camera frame convention throughout the package: x right, y down, z forward
(optical axis). Depth values are ranges along the optical axis in meters.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class CameraIntrinsics:
    """Pinhole camera parameters, all in pixels."""

    fx: float
    fy: float
    cx: float
    cy: float
    width: int
    height: int

    def __post_init__(self):
        if not (self.fx > 0 and self.fy > 0):
            raise ValueError(f"focal lengths must be positive, got fx={self.fx}, fy={self.fy}")
        if not (0 <= self.cx < self.width):
            raise ValueError(f"cx={self.cx} outside [0, {self.width})")
        if not (0 <= self.cy < self.height):
            raise ValueError(f"cy={self.cy} outside [0, {self.height})")
        if self.width < 1 or self.height < 1:
            raise ValueError("image size must be at least 1x1")


def centered_intrinsics(width: int, height: int, fx: float, fy: float | None = None) -> CameraIntrinsics:
    """Intrinsics with the principal point at the exact pixel-grid center.

    cx = (width-1)/2 makes a horizontal image flip an exact reflection of the
    projected points, which the mirror-equivariance tests rely on.
    """
    if fy is None:
        fy = fx
    return CameraIntrinsics(fx=fx, fy=fy, cx=(width - 1) / 2.0, cy=(height - 1) / 2.0,
                            width=width, height=height)


class DepthImage:
    """Dense per-pixel range in meters plus a validity mask.

    depth: (height, width) float array; valid: (height, width) bool array.
    Every valid entry must be finite and > 0.
    """

    __slots__ = ("depth", "valid")

    def __init__(self, depth: np.ndarray, valid: np.ndarray | None = None):
        depth = np.asarray(depth, dtype=np.float64)
        if depth.ndim != 2:
            raise ValueError(f"depth must be 2-D (h, w), got shape {depth.shape}")
        if valid is None:
            valid = np.isfinite(depth) & (depth > 0)
        else:
            valid = np.asarray(valid, dtype=bool)
            if valid.shape != depth.shape:
                raise ValueError("depth and valid mask shapes differ")
        bad = valid & ~(np.isfinite(depth) & (depth > 0))
        if np.any(bad):
            raise ValueError(f"{int(bad.sum())} pixels are marked valid but not finite/positive")
        self.depth = depth
        self.valid = valid

    @property
    def height(self) -> int:
        return self.depth.shape[0]

    @property
    def width(self) -> int:
        return self.depth.shape[1]

    def mirrored(self) -> "DepthImage":
        """Horizontal flip (left-right), preserving validity."""
        return DepthImage(self.depth[:, ::-1].copy(), self.valid[:, ::-1].copy())

    @staticmethod
    def from_millimeters(raw: np.ndarray) -> "DepthImage":
        """16-bit millimeter raster to meters; value 0 means invalid."""
        raw = np.asarray(raw)
        valid = raw > 0
        depth = np.where(valid, raw.astype(np.float64) / 1000.0, 0.0)
        return DepthImage(depth, valid)


@dataclass(frozen=True)
class PointCloud:
    """3-D points in the camera frame, meters. points: (n, 3) float array."""

    points: np.ndarray

    def __post_init__(self):
        pts = np.asarray(self.points, dtype=np.float64).reshape(-1, 3)
        if pts.size and not np.all(np.isfinite(pts)):
            raise ValueError("point cloud contains non-finite coordinates")
        if pts.size and not np.all(pts[:, 2] > 0):
            raise ValueError("point cloud contains points with z <= 0")
        object.__setattr__(self, "points", pts)

    def __len__(self) -> int:
        return self.points.shape[0]


@dataclass(frozen=True)
class OccupancyGrid:
    """Boolean voxel lattice. origin is the corner of voxel (0, 0, 0).

    occupied has shape dims = (nx, ny, nz); the center of voxel (i, j, k) is
    origin + (i+0.5, j+0.5, k+0.5) * voxel_size.
    """

    origin: np.ndarray
    voxel_size: float
    occupied: np.ndarray

    def __post_init__(self):
        origin = np.asarray(self.origin, dtype=np.float64).reshape(3)
        occ = np.asarray(self.occupied, dtype=bool)
        if occ.ndim != 3:
            raise ValueError("occupied must be a 3-D array")
        if self.voxel_size <= 0:
            raise ValueError("voxel_size must be positive")
        if min(occ.shape) < 1:
            raise ValueError("grid must have at least one voxel per axis")
        object.__setattr__(self, "origin", origin)
        object.__setattr__(self, "occupied", occ)

    @property
    def dims(self) -> tuple[int, int, int]:
        return self.occupied.shape

    def voxel_centers(self) -> np.ndarray:
        """(nx, ny, nz, 3) array of voxel center coordinates."""
        nx, ny, nz = self.dims
        h = self.voxel_size
        ix, iy, iz = np.meshgrid(np.arange(nx), np.arange(ny), np.arange(nz), indexing="ij")
        centers = np.stack([ix, iy, iz], axis=-1).astype(np.float64)
        return self.origin + (centers + 0.5) * h


def project_depth_to_cloud(depth: DepthImage, k: CameraIntrinsics) -> PointCloud:
    """Back-project every valid pixel through the pinhole model.

    Pixel (u, v) with range z maps to ((u-cx)*z/fx, (v-cy)*z/fy, z).
    """
    if (depth.width, depth.height) != (k.width, k.height):
        raise ValueError(
            f"depth image is {depth.width}x{depth.height} but intrinsics expect {k.width}x{k.height}")
    v, u = np.nonzero(depth.valid)
    z = depth.depth[v, u]
    x = (u - k.cx) * z / k.fx
    y = (v - k.cy) * z / k.fy
    return PointCloud(np.column_stack([x, y, z]))


def fill_depth_holes(depth: DepthImage) -> DepthImage:
    """Fill invalid pixels by diffusing from the nearest valid neighbors.

    Repeated sweeps assign each invalid pixel the mean of its valid 8-neighbors
    until no invalid pixels remain. Originally valid pixels are unchanged and
    filled values stay within the [min, max] of the original valid depths.
    """
    if not depth.valid.any():
        raise ValueError("cannot fill a fully-invalid depth image")
    if depth.valid.all():
        return depth

    d = np.where(depth.valid, depth.depth, 0.0)
    valid = depth.valid.copy()
    while not valid.all():
        acc = np.zeros_like(d)
        cnt = np.zeros_like(d)
        for dv in (-1, 0, 1):
            for du in (-1, 0, 1):
                if dv == 0 and du == 0:
                    continue
                src = np.roll(np.roll(d, dv, axis=0), du, axis=1)
                ok = np.roll(np.roll(valid, dv, axis=0), du, axis=1)
                # roll wraps around the border; mask the wrapped rows/cols out
                if dv == 1:
                    ok[0, :] = False
                elif dv == -1:
                    ok[-1, :] = False
                if du == 1:
                    ok[:, 0] = False
                elif du == -1:
                    ok[:, -1] = False
                acc += np.where(ok, src, 0.0)
                cnt += ok
        frontier = ~valid & (cnt > 0)
        d[frontier] = acc[frontier] / cnt[frontier]
        valid |= frontier
    return DepthImage(d, np.ones_like(valid))


def lattice_bounds(lo: np.ndarray, hi: np.ndarray, voxel_size: float) -> tuple[np.ndarray, np.ndarray]:
    """Snap an axis-aligned box outward onto the global voxel lattice.

    Returns integer lattice indices (i0, i1) per axis such that the box
    [i0*h, i1*h] contains [lo, hi]. Anchoring the lattice at multiples of the
    voxel size keeps mirrored inputs on exactly mirrored grids.
    """
    lo = np.asarray(lo, dtype=np.float64)
    hi = np.asarray(hi, dtype=np.float64)
    if np.any(hi <= lo):
        raise ValueError(f"degenerate bounds: lo={lo}, hi={hi}")
    i0 = np.floor(lo / voxel_size).astype(np.int64)
    i1 = np.ceil(hi / voxel_size).astype(np.int64)
    i1 = np.maximum(i1, i0 + 1)
    return i0, i1


def voxelize(cloud: PointCloud, voxel_size: float, bounds: tuple[np.ndarray, np.ndarray]) -> OccupancyGrid:
    """Mark occupied every voxel containing at least one point.

    bounds is an (lo, hi) axis-aligned box; it is snapped outward to the voxel
    lattice and points outside it are ignored.
    """
    if voxel_size <= 0:
        raise ValueError("voxel_size must be positive")
    i0, i1 = lattice_bounds(bounds[0], bounds[1], voxel_size)
    dims = tuple(int(n) for n in (i1 - i0))
    occ = np.zeros(dims, dtype=bool)
    pts = cloud.points
    if len(pts):
        idx = np.floor(pts / voxel_size).astype(np.int64) - i0
        inside = np.all((idx >= 0) & (idx < np.asarray(dims)), axis=1)
        idx = idx[inside]
        occ[idx[:, 0], idx[:, 1], idx[:, 2]] = True
    return OccupancyGrid(origin=i0.astype(np.float64) * voxel_size, voxel_size=voxel_size, occupied=occ)


def frustum_bounds(cloud: PointCloud, margin: float = 0.5) -> tuple[np.ndarray, np.ndarray]:
    """Bounding box of the observed frustum: camera origin plus all points,
    expanded by `margin` meters on every side."""
    pts = cloud.points
    if len(pts) == 0:
        raise ValueError("empty cloud has no frustum bounds")
    lo = np.minimum(pts.min(axis=0), 0.0) - margin
    hi = np.maximum(pts.max(axis=0), 0.0) + margin
    return lo, hi

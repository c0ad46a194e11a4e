"""Exact 3-D Euclidean distance transform over voxel grids plus metric queries.

The transform runs per axis with the lower-envelope-of-parabolas method on
squared distances, so every output value is an exact integer in squared-voxel
units before the final sqrt. Free space in an all-free grid gets a sentinel
equal to the grid diagonal length.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from numba import njit

from .geometry import OccupancyGrid


@dataclass(frozen=True)
class DistanceField:
    """Per-voxel unsigned Euclidean distance (meters) to the nearest occupied
    voxel center, sampled at voxel centers on the same lattice as the grid."""

    origin: np.ndarray
    voxel_size: float
    dist: np.ndarray

    def __post_init__(self):
        origin = np.asarray(self.origin, dtype=np.float64).reshape(3)
        dist = np.asarray(self.dist, dtype=np.float64)
        if dist.ndim != 3:
            raise ValueError("dist must be a 3-D array")
        object.__setattr__(self, "origin", origin)
        object.__setattr__(self, "dist", dist)

    @property
    def dims(self) -> tuple[int, int, int]:
        return self.dist.shape


def free_space_sentinel(dims, voxel_size: float) -> float:
    """Distance reported everywhere when the grid contains no obstacles."""
    d = np.asarray(dims, dtype=np.float64)
    return float(np.sqrt(np.sum(d * d)) * voxel_size)


@njit(cache=True)
def _dt1d(f, d, v, z, n):
    # Lower envelope of parabolas q -> f[q] + (x-q)^2 over one scanline.
    k = 0
    v[0] = 0
    z[0] = -1e30
    z[1] = 1e30
    for q in range(1, n):
        fq = f[q] + q * q
        while True:
            vk = v[k]
            s = (fq - (f[vk] + vk * vk)) / (2.0 * (q - vk))
            if s <= z[k]:
                k -= 1
            else:
                break
        k += 1
        v[k] = q
        z[k] = s
        z[k + 1] = 1e30
    k = 0
    for q in range(n):
        while z[k + 1] < q:
            k += 1
        vk = v[k]
        d[q] = (q - vk) * (q - vk) + f[vk]


@njit(cache=True)
def _edt3d_squared(occ, large):
    nx, ny, nz = occ.shape
    g = np.empty((nx, ny, nz), np.float64)
    for i in range(nx):
        for j in range(ny):
            for k in range(nz):
                g[i, j, k] = 0.0 if occ[i, j, k] else large

    m = max(nx, max(ny, nz))
    f = np.empty(m, np.float64)
    d = np.empty(m, np.float64)
    v = np.empty(m, np.int64)
    z = np.empty(m + 1, np.float64)

    if nz > 1:
        for i in range(nx):
            for j in range(ny):
                for q in range(nz):
                    f[q] = g[i, j, q]
                _dt1d(f, d, v, z, nz)
                for q in range(nz):
                    g[i, j, q] = d[q]
    if ny > 1:
        for i in range(nx):
            for k in range(nz):
                for q in range(ny):
                    f[q] = g[i, q, k]
                _dt1d(f, d, v, z, ny)
                for q in range(ny):
                    g[i, q, k] = d[q]
    if nx > 1:
        for j in range(ny):
            for k in range(nz):
                for q in range(nx):
                    f[q] = g[q, j, k]
                _dt1d(f, d, v, z, nx)
                for q in range(nx):
                    g[q, j, k] = d[q]
    return g


@njit(cache=True)
def _brute_squared(occ):
    nx, ny, nz = occ.shape
    n_occ = 0
    for i in range(nx):
        for j in range(ny):
            for k in range(nz):
                if occ[i, j, k]:
                    n_occ += 1
    qx = np.empty(n_occ, np.float64)
    qy = np.empty(n_occ, np.float64)
    qz = np.empty(n_occ, np.float64)
    m = 0
    for i in range(nx):
        for j in range(ny):
            for k in range(nz):
                if occ[i, j, k]:
                    qx[m] = i
                    qy[m] = j
                    qz[m] = k
                    m += 1
    out = np.empty((nx, ny, nz), np.float64)
    for i in range(nx):
        for j in range(ny):
            for k in range(nz):
                best = 1e30
                for t in range(n_occ):
                    dx = i - qx[t]
                    dy = j - qy[t]
                    dz = k - qz[t]
                    d2 = dx * dx + dy * dy + dz * dz
                    if d2 < best:
                        best = d2
                out[i, j, k] = best
    return out


def compute_edt(grid: OccupancyGrid) -> DistanceField:
    """Exact Euclidean distance transform of the occupancy grid."""
    occ = grid.occupied
    nx, ny, nz = occ.shape
    if not occ.any():
        sent = free_space_sentinel(occ.shape, grid.voxel_size)
        return DistanceField(grid.origin, grid.voxel_size, np.full(occ.shape, sent))
    large = float(nx * nx + ny * ny + nz * nz + 1)
    d2 = _edt3d_squared(np.ascontiguousarray(occ), large)
    return DistanceField(grid.origin, grid.voxel_size, np.sqrt(d2) * grid.voxel_size)


def brute_force_edt(grid: OccupancyGrid) -> DistanceField:
    """All-pairs nearest-occupied search; the test oracle for compute_edt."""
    occ = grid.occupied
    if not occ.any():
        sent = free_space_sentinel(occ.shape, grid.voxel_size)
        return DistanceField(grid.origin, grid.voxel_size, np.full(occ.shape, sent))
    d2 = _brute_squared(np.ascontiguousarray(occ))
    return DistanceField(grid.origin, grid.voxel_size, np.sqrt(d2) * grid.voxel_size)


def query_distance(field: DistanceField, p: np.ndarray) -> np.ndarray | float:
    """Trilinear interpolation of the field at point(s) p (camera frame, meters).

    Points outside the lattice clamp to the boundary sample. Accepts a single
    (3,) point or an (n, 3) batch.
    """
    pts = np.asarray(p, dtype=np.float64)
    single = pts.ndim == 1
    pts = pts.reshape(-1, 3)
    h = field.voxel_size
    dims = np.asarray(field.dims, dtype=np.int64)

    # Continuous voxel-center coordinates.
    u = (pts - field.origin) / h - 0.5
    u = np.clip(u, 0.0, (dims - 1).astype(np.float64))
    base = np.minimum(np.floor(u).astype(np.int64), np.maximum(dims - 2, 0))
    frac = np.clip(u - base, 0.0, 1.0)
    hi = np.minimum(base + 1, dims - 1)

    d = field.dist
    val = np.zeros(len(pts))
    for cx in (0, 1):
        wx = frac[:, 0] if cx else 1.0 - frac[:, 0]
        ix = hi[:, 0] if cx else base[:, 0]
        for cy in (0, 1):
            wy = frac[:, 1] if cy else 1.0 - frac[:, 1]
            iy = hi[:, 1] if cy else base[:, 1]
            for cz in (0, 1):
                wz = frac[:, 2] if cz else 1.0 - frac[:, 2]
                iz = hi[:, 2] if cz else base[:, 2]
                val += wx * wy * wz * d[ix, iy, iz]
    return float(val[0]) if single else val

"""Multi-resolution hash grid primitives.

Each level stores a fixed-size table of feature rows. A query position is
scaled into lattice units at the level's resolution, the 2^d corners of its
cell are hashed into the table, and the corner rows are blended with
d-linear weights.
"""

from dataclasses import dataclass

import numpy as np

from .errors import ConfigError, OutOfBoundsError

# Per-dimension hash multipliers; the first is 1 by convention, the rest are
# large odd primes chosen for good bit mixing.
DEFAULT_PRIMES = (1, 2654435761, 805459861)

_U32_MASK = 0xFFFFFFFF


def _is_power_of_two(n):
    return n >= 1 and (n & (n - 1)) == 0


def geometric_resolutions(base, top, levels):
    """Per-level resolutions growing geometrically from base to top."""
    if levels < 1:
        raise ConfigError("levels must be >= 1")
    if levels == 1:
        return (int(base),)
    res = np.round(np.geomspace(base, top, levels)).astype(np.int64)
    res = np.maximum.accumulate(res)  # guard against rounding inversions
    return tuple(int(r) for r in res)


@dataclass(frozen=True)
class GridConfig:
    """Full hyperparameter record of a multi-resolution hash grid."""

    dims: int
    levels: int
    resolutions: tuple
    table_size: int
    feature_dim: int
    primes: tuple = ()

    def __post_init__(self):
        if self.dims not in (1, 2, 3):
            raise ConfigError(f"dims must be 1, 2 or 3, got {self.dims}")
        if self.levels < 1:
            raise ConfigError(f"levels must be >= 1, got {self.levels}")
        res = tuple(int(r) for r in self.resolutions)
        if len(res) != self.levels:
            raise ConfigError(
                f"expected {self.levels} resolutions, got {len(res)}"
            )
        if any(r < 1 for r in res):
            raise ConfigError("resolutions must all be >= 1")
        if any(res[i] > res[i + 1] for i in range(len(res) - 1)):
            raise ConfigError("resolutions must be non-decreasing")
        if self.table_size < 2 or not _is_power_of_two(self.table_size):
            raise ConfigError(
                f"table_size must be a power of two >= 2, got {self.table_size}"
            )
        if self.feature_dim < 1:
            raise ConfigError("feature_dim must be >= 1")
        primes = tuple(int(p) for p in (self.primes or DEFAULT_PRIMES[: self.dims]))
        if len(primes) != self.dims:
            raise ConfigError(f"expected {self.dims} primes, got {len(primes)}")
        if primes[0] != 1:
            raise ConfigError("first hash multiplier must be 1")
        if any(p % 2 == 0 for p in primes):
            raise ConfigError("hash multipliers must be odd")
        if any(not 0 < p <= _U32_MASK for p in primes):
            raise ConfigError("hash multipliers must fit in unsigned 32 bits")
        object.__setattr__(self, "resolutions", res)
        object.__setattr__(self, "primes", primes)


@dataclass
class BoundingBox:
    """Axis-aligned box in scene units; strict extent on every axis."""

    min: np.ndarray
    max: np.ndarray

    def __post_init__(self):
        mn = np.asarray(self.min, np.float64).reshape(-1)
        mx = np.asarray(self.max, np.float64).reshape(-1)
        if mn.size != mx.size:
            raise ConfigError("bounding box min/max dimensionality mismatch")
        if not (np.all(np.isfinite(mn)) and np.all(np.isfinite(mx))):
            raise ConfigError("bounding box coordinates must be finite")
        bad = np.flatnonzero(mx <= mn)
        if bad.size:
            raise ConfigError(f"degenerate bounding box on axis {int(bad[0])}")
        self.min = mn
        self.max = mx

    @property
    def dims(self):
        return self.min.size

    @property
    def extent(self):
        return self.max - self.min


@dataclass
class PointSet:
    """The fixed query positions shared by encoder and decoder."""

    dims: int
    points: np.ndarray

    def __post_init__(self):
        pts = np.asarray(self.points, np.float64)
        if pts.ndim == 1:
            pts = pts.reshape(-1, self.dims)
        if pts.ndim != 2 or pts.shape[1] != self.dims:
            raise ConfigError(
                f"points must have shape (N, {self.dims}), got {pts.shape}"
            )
        if pts.shape[0] < 1:
            raise ConfigError("point set must contain at least one point")
        bad = np.flatnonzero(~np.isfinite(pts).all(axis=1))
        if bad.size:
            raise ConfigError(f"non-finite coordinate in point row {int(bad[0])}")
        self.points = pts

    def __len__(self):
        return self.points.shape[0]


@dataclass
class HashGrid:
    """Per-level feature tables, shape (levels, table_size, feature_dim)."""

    config: GridConfig
    tables: np.ndarray

    def __post_init__(self):
        t = np.asarray(self.tables, np.float64)
        want = (self.config.levels, self.config.table_size, self.config.feature_dim)
        if t.shape != want:
            raise ConfigError(f"tables shape {t.shape} does not match config {want}")
        if not np.all(np.isfinite(t)):
            raise ConfigError("grid features must be finite")
        self.tables = t


def scale_position(point, bbox, resolution):
    """Map a scene-space point into [0, resolution] lattice units per axis."""
    p = np.asarray(point, np.float64).reshape(-1)
    if p.size != bbox.dims:
        raise ConfigError(f"point has {p.size} axes, bounding box has {bbox.dims}")
    if resolution < 1:
        raise ConfigError("resolution must be >= 1")
    for k in range(p.size):
        if not bbox.min[k] <= p[k] <= bbox.max[k]:
            raise OutOfBoundsError(
                f"coordinate {p[k]} outside [{bbox.min[k]}, {bbox.max[k]}] "
                f"on axis {k}",
                axis=k,
            )
    return (p - bbox.min) / (bbox.max - bbox.min) * resolution


def corner_vertices(scaled, resolution):
    """All 2^d cell corners around a scaled position.

    The floor is clamped to resolution-1 so the +1 corner never leaves the
    lattice; order is a d-bit counter with axis 0 least significant.
    """
    s = np.asarray(scaled, np.float64).reshape(-1)
    for k in range(s.size):
        if not 0.0 <= s[k] <= resolution:
            raise OutOfBoundsError(
                f"scaled coordinate {s[k]} outside [0, {resolution}] on axis {k}",
                axis=k,
            )
    base = np.minimum(np.floor(s), resolution - 1).astype(np.int64)
    d = s.size
    return [
        tuple(int(base[k] + ((j >> k) & 1)) for k in range(d))
        for j in range(1 << d)
    ]


def hash_vertex(vertex, primes, table_size):
    """Spatial hash: XOR of per-axis products in u32 arithmetic, mod table."""
    if not _is_power_of_two(table_size):
        raise ConfigError("table_size must be a power of two")
    acc = 0
    for c, p in zip(vertex, primes):
        if c < 0:
            raise ConfigError("vertex coordinates must be non-negative")
        acc ^= (int(c) * int(p)) & _U32_MASK
    return acc % table_size


def hash_vertex_batch(vertices, primes, table_size):
    """Vectorized hash of an (N, d) integer vertex array."""
    v = np.asarray(vertices).astype(np.uint32)
    acc = v[:, 0] * np.uint32(primes[0])
    for k in range(1, v.shape[1]):
        acc = acc ^ (v[:, k] * np.uint32(primes[k]))
    return (acc & np.uint32(table_size - 1)).astype(np.int64)


def corner_weights(scaled, resolution):
    """Cell corners with their d-linear blend weights for a scaled position."""
    corners = corner_vertices(scaled, resolution)
    s = np.asarray(scaled, np.float64).reshape(-1)
    base = np.minimum(np.floor(s), resolution - 1)
    frac = s - base
    d = s.size
    weights = np.empty(1 << d)
    for j in range(1 << d):
        w = 1.0
        for k in range(d):
            w *= frac[k] if (j >> k) & 1 else 1.0 - frac[k]
        weights[j] = w
    return corners, weights


def _scale_batch(points2d, bbox, resolution):
    """Scale an (N, d) array, reporting the first out-of-bounds point."""
    outside = (points2d < bbox.min) | (points2d > bbox.max)
    if outside.any():
        i, k = np.argwhere(outside)[0]
        raise OutOfBoundsError(
            f"point {int(i)} outside bounding box on axis {int(k)}",
            axis=int(k),
            point_index=int(i),
        )
    return (points2d - bbox.min) / (bbox.max - bbox.min) * resolution


def _interp_level(table, points2d, bbox, resolution, primes, table_size):
    """d-linear interpolation of one level over an (N, d) point array."""
    scaled = _scale_batch(points2d, bbox, resolution)
    base = np.minimum(np.floor(scaled), resolution - 1)
    frac = scaled - base
    ibase = base.astype(np.int64)
    n, d = points2d.shape
    out = np.zeros((n, table.shape[1]))
    for j in range(1 << d):
        delta = np.array([(j >> k) & 1 for k in range(d)], np.int64)
        idx = hash_vertex_batch(ibase + delta, primes, table_size)
        w = np.ones(n)
        for k in range(d):
            w = w * (frac[:, k] if delta[k] else 1.0 - frac[:, k])
        out += w[:, None] * table[idx]
    return out


def interpolate(grid, level, point, bbox):
    """Interpolated feature vector of one level at a single point."""
    cfg = grid.config
    if not 0 <= level < cfg.levels:
        raise ConfigError(f"level {level} outside [0, {cfg.levels})")
    p = np.asarray(point, np.float64).reshape(1, -1)
    if p.shape[1] != cfg.dims:
        raise ConfigError(f"point has {p.shape[1]} axes, grid has {cfg.dims}")
    return _interp_level(
        grid.tables[level], p, bbox, cfg.resolutions[level], cfg.primes,
        cfg.table_size,
    )[0]


def interpolate_all(grid, points, bbox):
    """Interpolated features for every point at every level, shape (N, L, F)."""
    cfg = grid.config
    if points.dims != cfg.dims:
        raise ConfigError(
            f"point set has {points.dims} dims, grid has {cfg.dims}"
        )
    n = len(points)
    out = np.empty((n, cfg.levels, cfg.feature_dim))
    for l in range(cfg.levels):
        out[:, l, :] = _interp_level(
            grid.tables[l], points.points, bbox, cfg.resolutions[l],
            cfg.primes, cfg.table_size,
        )
    return out

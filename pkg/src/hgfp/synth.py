"""Synthetic inputs: clustered point sets and seeded feature grids.

Uses the Philox counter-based generator so fixtures are reproducible across
platforms for a given seed.
"""

from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigError
from .grid import BoundingBox, HashGrid, PointSet


def _unit_bbox(dims):
    return BoundingBox(np.zeros(dims), np.ones(dims))


@dataclass
class SynthSpec:
    """Gaussian-mixture point generator settings."""

    dims: int = 3
    n_points: int = 1000
    n_clusters: int = 1
    cluster_std: float = 0.05  # fraction of the bbox extent, per axis
    seed: int = 0
    bbox: BoundingBox = None

    def __post_init__(self):
        if self.n_points < 1:
            raise ConfigError("n_points must be >= 1")
        if self.n_clusters < 1:
            raise ConfigError("n_clusters must be >= 1")
        if not 0.0 < self.cluster_std <= 1.0:
            raise ConfigError("cluster_std must be in (0, 1]")
        if self.bbox is None:
            self.bbox = _unit_bbox(self.dims)
        if self.bbox.dims != self.dims:
            raise ConfigError("bbox dimensionality does not match dims")


def synth_points(spec):
    """Clustered points: uniform cluster centers, per-axis Gaussian spread,
    samples clamped into the bbox."""
    rng = np.random.Generator(np.random.Philox(spec.seed))
    centers = rng.uniform(spec.bbox.min, spec.bbox.max,
                          (spec.n_clusters, spec.dims))
    assign = rng.integers(0, spec.n_clusters, spec.n_points)
    std = spec.cluster_std * spec.bbox.extent
    pts = centers[assign] + rng.standard_normal(
        (spec.n_points, spec.dims)) * std
    np.clip(pts, spec.bbox.min, spec.bbox.max, out=pts)
    return PointSet(spec.dims, pts)


def random_grid(config, seed, low=-1.0, high=1.0):
    """Grid with seeded uniform feature values in [low, high]."""
    rng = np.random.Generator(np.random.Philox(seed))
    tables = rng.uniform(
        low, high,
        (config.levels, config.table_size, config.feature_dim),
    )
    return HashGrid(config, tables)

"""Validity computation and feature packing.

A table row is valid when some query point's cell corner hashes to it. Valid
rows are packed in ascending table index order, so encoder and decoder agree
on the layout with no side information; invalid rows can be regenerated with
any fill value without changing interpolation results.
"""

import itertools
from dataclasses import dataclass

import numpy as np

from .errors import ConfigError, CorruptionError, OutOfBoundsError
from .grid import HashGrid, _scale_batch, hash_vertex_batch


@dataclass
class ValidityMask:
    """Per-level boolean occupancy over table indices plus popcounts."""

    bits: np.ndarray  # (levels, table_size) bool
    valid_counts: tuple

    def __post_init__(self):
        bits = np.asarray(self.bits, bool)
        if bits.ndim != 2:
            raise ConfigError("mask bits must be a (levels, table_size) array")
        counts = tuple(int(c) for c in self.valid_counts)
        if len(counts) != bits.shape[0]:
            raise ConfigError("valid_counts length does not match level count")
        pop = tuple(int(c) for c in bits.sum(axis=1))
        if counts != pop:
            raise ConfigError("valid_counts disagree with mask popcounts")
        if any(c < 1 for c in counts):
            raise ConfigError("every level must have at least one valid entry")
        self.bits = bits
        self.valid_counts = counts

    @classmethod
    def from_bits(cls, bits):
        bits = np.asarray(bits, bool)
        return cls(bits, tuple(int(c) for c in bits.sum(axis=1)))


@dataclass
class PackedFeatures:
    """Valid rows per level, ordered by ascending table index."""

    levels: list  # list of (valid_count, feature_dim) float64 arrays


def all_valid_mask(config):
    """Mask marking every table row valid (the no-pruning baseline)."""
    return ValidityMask.from_bits(
        np.ones((config.levels, config.table_size), bool)
    )


def compute_validity(points, config, bbox):
    """Union of hashed corner indices of every point's cell, per level."""
    if points.dims != config.dims:
        raise ConfigError(
            f"point set has {points.dims} dims, config has {config.dims}"
        )
    d = config.dims
    bits = np.zeros((config.levels, config.table_size), bool)
    for l, res in enumerate(config.resolutions):
        scaled = _scale_batch(points.points, bbox, res)
        ibase = np.minimum(np.floor(scaled), res - 1).astype(np.int64)
        for j in range(1 << d):
            delta = np.array([(j >> k) & 1 for k in range(d)], np.int64)
            idx = hash_vertex_batch(ibase + delta, config.primes,
                                    config.table_size)
            bits[l, idx] = True
    return ValidityMask.from_bits(bits)


class _RecordingTable:
    """Wraps one level's table and records every row index it serves."""

    def __init__(self, table):
        self._table = table
        self.touched = set()

    def rows(self, idx):
        self.touched.update(int(i) for i in np.asarray(idx).ravel())
        return self._table[idx]


def touched_indices_oracle(points, config, bbox, grid=None):
    """Validity mask observed by actually running interpolation.

    Performs a full, independently written interpolation pass over all points
    with instrumented table reads, and returns the set of indices that were
    read. Shares only the primitive hash with compute_validity.
    """
    if points.dims != config.dims:
        raise ConfigError(
            f"point set has {points.dims} dims, config has {config.dims}"
        )
    if grid is None:
        grid = HashGrid(
            config,
            np.zeros((config.levels, config.table_size, config.feature_dim)),
        )
    pts = points.points
    d = config.dims
    bits = np.zeros((config.levels, config.table_size), bool)
    for l, res in enumerate(config.resolutions):
        rec = _RecordingTable(grid.tables[l])
        outside = (pts < bbox.min) | (pts > bbox.max)
        if outside.any():
            i, k = np.argwhere(outside)[0]
            raise OutOfBoundsError(
                f"point {int(i)} outside bounding box on axis {int(k)}",
                axis=int(k), point_index=int(i),
            )
        scaled = (pts - bbox.min) / (bbox.max - bbox.min) * res
        lower = np.floor(scaled)
        lower[lower > res - 1] = res - 1
        frac = scaled - lower
        ilower = lower.astype(np.int64)
        acc = np.zeros((pts.shape[0], config.feature_dim))
        for offsets in itertools.product((0, 1), repeat=d):
            verts = ilower + np.array(offsets, np.int64)
            idx = hash_vertex_batch(verts, config.primes, config.table_size)
            w = np.ones(pts.shape[0])
            for k, bit in enumerate(offsets):
                w = w * (frac[:, k] if bit else 1.0 - frac[:, k])
            acc += w[:, None] * rec.rows(idx)
        bits[l, sorted(rec.touched)] = True
    return ValidityMask.from_bits(bits)


def pack(grid, mask):
    """Copy valid rows out of the grid in ascending table index order."""
    cfg = grid.config
    if mask.bits.shape != (cfg.levels, cfg.table_size):
        raise ConfigError(
            f"mask shape {mask.bits.shape} does not match grid "
            f"({cfg.levels}, {cfg.table_size})"
        )
    return PackedFeatures(
        [grid.tables[l][np.flatnonzero(mask.bits[l])].copy()
         for l in range(cfg.levels)]
    )


def unpack(packed, mask, config, fill=None):
    """Rebuild a full grid: packed rows at their indices, `fill` elsewhere."""
    if fill is None:
        fill = np.zeros(config.feature_dim)
    fill = np.asarray(fill, np.float64).reshape(-1)
    if fill.size != config.feature_dim:
        raise ConfigError(
            f"fill has {fill.size} scalars, feature_dim is {config.feature_dim}"
        )
    if mask.bits.shape != (config.levels, config.table_size):
        raise ConfigError("mask shape does not match config")
    tables = np.empty(
        (config.levels, config.table_size, config.feature_dim)
    )
    tables[:] = fill
    for l in range(config.levels):
        idx = np.flatnonzero(mask.bits[l])
        rows = np.asarray(packed.levels[l], np.float64).reshape(-1, config.feature_dim)
        if rows.shape[0] != idx.size:
            raise CorruptionError(
                f"level {l}: {rows.shape[0]} packed rows for "
                f"{idx.size} valid entries"
            )
        tables[l, idx] = rows
    return HashGrid(config, tables)

"""On-disk artifacts: point sets, full grids, and run reports.

Positions are stored as float64 because they drive index computation and
must match bit-for-bit across encoder and decoder; features are stored as
float32, the usual grid storage width.
"""

import json
import struct
from dataclasses import asdict, dataclass

import numpy as np

from .errors import FormatError
from .grid import GridConfig, HashGrid, PointSet

POINTS_MAGIC = b"HGPT"
GRID_MAGIC = b"HGRD"
FORMAT_VERSION = 1


def save_points(points, path):
    with open(path, "wb") as f:
        f.write(struct.pack("<4sHBQ", POINTS_MAGIC, FORMAT_VERSION,
                            points.dims, len(points)))
        f.write(points.points.astype("<f8").tobytes())


def load_points(path):
    with open(path, "rb") as f:
        data = f.read()
    head = struct.calcsize("<4sHBQ")
    if len(data) < head:
        raise FormatError(
            f"point file truncated: {len(data)} bytes, header needs {head}"
        )
    magic, version, dims, count = struct.unpack_from("<4sHBQ", data)
    if magic != POINTS_MAGIC:
        raise FormatError(f"bad magic {magic!r}, expected {POINTS_MAGIC!r}")
    if version != FORMAT_VERSION:
        raise FormatError(f"unsupported point file version {version}")
    want = head + count * dims * 8
    if len(data) != want:
        raise FormatError(
            f"point file truncated: {len(data)} bytes, expected {want}"
        )
    pts = np.frombuffer(data, "<f8", offset=head).reshape(count, dims)
    bad = np.flatnonzero(~np.isfinite(pts).all(axis=1))
    if bad.size:
        raise FormatError(
            f"non-finite coordinate in point row {int(bad[0])}"
        )
    return PointSet(dims, pts.copy())


def _pack_config(cfg):
    return (
        struct.pack("<BBIH", cfg.dims, cfg.levels, cfg.table_size,
                    cfg.feature_dim)
        + struct.pack(f"<{cfg.levels}I", *cfg.resolutions)
        + struct.pack(f"<{cfg.dims}I", *cfg.primes)
    )


def _unpack_config(data, off):
    dims, levels, table_size, feature_dim = struct.unpack_from("<BBIH", data, off)
    off += struct.calcsize("<BBIH")
    resolutions = struct.unpack_from(f"<{levels}I", data, off)
    off += 4 * levels
    primes = struct.unpack_from(f"<{dims}I", data, off)
    off += 4 * dims
    return GridConfig(dims, levels, resolutions, table_size, feature_dim,
                      primes), off


def save_grid(grid, path):
    with open(path, "wb") as f:
        f.write(struct.pack("<4sH", GRID_MAGIC, FORMAT_VERSION))
        f.write(_pack_config(grid.config))
        f.write(grid.tables.astype("<f4").tobytes())


def load_grid(path):
    with open(path, "rb") as f:
        data = f.read()
    head = struct.calcsize("<4sH")
    if len(data) < head + struct.calcsize("<BBIH"):
        raise FormatError(f"grid file truncated: {len(data)} bytes")
    magic, version = struct.unpack_from("<4sH", data)
    if magic != GRID_MAGIC:
        raise FormatError(f"bad magic {magic!r}, expected {GRID_MAGIC!r}")
    if version != FORMAT_VERSION:
        raise FormatError(f"unsupported grid file version {version}")
    try:
        cfg, off = _unpack_config(data, head)
    except struct.error as e:
        raise FormatError(f"grid file truncated in config block: {e}") from e
    want = off + cfg.levels * cfg.table_size * cfg.feature_dim * 4
    if len(data) != want:
        raise FormatError(
            f"grid file is {len(data)} bytes, config implies {want}"
        )
    tables = np.frombuffer(data, "<f4", offset=off).astype(np.float64)
    tables = tables.reshape(cfg.levels, cfg.table_size, cfg.feature_dim)
    if not np.all(np.isfinite(tables)):
        raise FormatError("grid file contains non-finite feature values")
    return HashGrid(cfg, tables)


@dataclass
class LevelReport:
    level: int
    resolution: int
    table_size: int
    valid_count: int
    valid_ratio: float
    raw_bytes: int
    pruned_bytes: int
    reduction_pct: float


@dataclass
class RunReport:
    levels: list
    total_raw_bytes: int
    total_pruned_bytes: int
    total_reduction_pct: float


def make_report(mask, config, raw_bytes_per_level, pruned_bytes_per_level):
    """Per-level and total pruning statistics from measured byte counts."""
    levels = []
    for l in range(config.levels):
        raw = int(raw_bytes_per_level[l])
        pruned = int(pruned_bytes_per_level[l])
        levels.append(LevelReport(
            level=l,
            resolution=config.resolutions[l],
            table_size=config.table_size,
            valid_count=mask.valid_counts[l],
            valid_ratio=mask.valid_counts[l] / config.table_size,
            raw_bytes=raw,
            pruned_bytes=pruned,
            reduction_pct=100.0 * (1.0 - pruned / raw),
        ))
    total_raw = sum(r.raw_bytes for r in levels)
    total_pruned = sum(r.pruned_bytes for r in levels)
    return RunReport(
        levels=levels,
        total_raw_bytes=total_raw,
        total_pruned_bytes=total_pruned,
        total_reduction_pct=100.0 * (1.0 - total_pruned / total_raw),
    )


def emit_report(report, fmt="text"):
    """Render a RunReport as a text table or line-delimited JSON records."""
    if fmt == "records":
        lines = []
        for r in report.levels:
            rec = {"record": "level"}
            rec.update(asdict(r))
            lines.append(json.dumps(rec))
        lines.append(json.dumps({
            "record": "total",
            "raw_bytes": report.total_raw_bytes,
            "pruned_bytes": report.total_pruned_bytes,
            "reduction_pct": report.total_reduction_pct,
        }))
        return "\n".join(lines)
    if fmt != "text":
        raise ValueError(f"unknown report format {fmt!r}")
    lines = [
        f"{'level':>5} {'res':>6} {'table':>8} {'valid':>8} {'ratio':>7} "
        f"{'raw_B':>10} {'pruned_B':>10} {'reduction':>9}"
    ]
    for r in report.levels:
        lines.append(
            f"{r.level:>5} {r.resolution:>6} {r.table_size:>8} "
            f"{r.valid_count:>8} {r.valid_ratio:>7.4f} {r.raw_bytes:>10} "
            f"{r.pruned_bytes:>10} {r.reduction_pct:>8.2f}%"
        )
    lines.append(
        f"total raw {report.total_raw_bytes} B, pruned "
        f"{report.total_pruned_bytes} B, reduction "
        f"{report.total_reduction_pct:.2f}%"
    )
    return "\n".join(lines)

"""Command-line front-end: encode, decode, verify, stats, synth."""

import argparse
import json
import sys

import numpy as np

from . import codec, io_formats, pruning, synth
from .errors import (ConfigError, CorruptionError, DynamicRangeError,
                     FormatError, OutOfBoundsError, PositionMismatchError,
                     VerificationError)
from .grid import (BoundingBox, GridConfig, HashGrid,
                   geometric_resolutions, interpolate_all)

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_IO = 3
EXIT_POSITION_MISMATCH = 4
EXIT_CORRUPTION = 5
EXIT_VERIFY_FAILED = 6


def default_config(dims=3):
    return GridConfig(
        dims=dims,
        levels=8,
        resolutions=geometric_resolutions(16, 512, 8),
        table_size=1 << 13,
        feature_dim=2,
    )


def load_config(path=None, dims=3):
    """Grid config from a JSON file, with desk-scale defaults."""
    if path is None:
        return default_config(dims)
    with open(path) as f:
        raw = json.load(f)
    dims = int(raw.get("dims", dims))
    levels = int(raw.get("levels", 8))
    if "resolutions" in raw:
        resolutions = tuple(int(r) for r in raw["resolutions"])
    else:
        resolutions = geometric_resolutions(
            int(raw.get("base_resolution", 16)),
            int(raw.get("max_resolution", 512)),
            levels,
        )
    return GridConfig(
        dims=dims,
        levels=levels,
        resolutions=resolutions,
        table_size=int(raw.get("table_size", 1 << 13)),
        feature_dim=int(raw.get("feature_dim", 2)),
        primes=tuple(int(p) for p in raw.get("primes", ())),
    )


def _parse_bbox(text, dims):
    vals = [float(v) for v in text.split(",")]
    if len(vals) != 2 * dims:
        raise ConfigError(
            f"--bbox needs {2 * dims} comma-separated values "
            f"(min then max per axis), got {len(vals)}"
        )
    return BoundingBox(np.array(vals[:dims]), np.array(vals[dims:]))


def _bbox_for(points, bbox_flag):
    if bbox_flag:
        return _parse_bbox(bbox_flag, points.dims)
    return BoundingBox(points.points.min(axis=0), points.points.max(axis=0))


def _quant_params(args):
    if args.raw:
        return codec.QuantParams(mode="raw")
    return codec.QuantParams(step=args.quant_step, mode="quantized")


def cmd_encode(args):
    points = io_formats.load_points(args.points)
    grid = io_formats.load_grid(args.grid)
    bbox = _bbox_for(points, args.bbox)
    params = _quant_params(args)
    stream = codec.encode_grid(grid, points, bbox, params)
    data = stream.to_bytes()
    with open(args.out, "wb") as f:
        f.write(data)
    cfg = grid.config
    mask = pruning.compute_validity(points, cfg, bbox)
    raw = [cfg.table_size * cfg.feature_dim * 4] * cfg.levels
    pruned = [len(p) for p in stream.payloads]
    report = io_formats.make_report(mask, cfg, raw, pruned)
    print(io_formats.emit_report(report, args.report))
    print(f"wrote {len(data)} bytes to {args.out}")
    return EXIT_OK


def cmd_decode(args):
    with open(args.stream, "rb") as f:
        stream = codec.PrunedBitstream.from_bytes(f.read())
    points = io_formats.load_points(args.points)
    grid = codec.decode_grid(stream, points)
    io_formats.save_grid(grid, args.out)
    print(f"decoded grid written to {args.out}")
    return EXIT_OK


def cmd_verify(args):
    grid = io_formats.load_grid(args.grid)
    points = io_formats.load_points(args.points)
    with open(args.stream, "rb") as f:
        stream = codec.PrunedBitstream.from_bytes(f.read())
    decoded = codec.decode_grid(stream, points)
    cfg = stream.config

    # mask vs. instrumented-interpolation oracle
    mask = pruning.compute_validity(points, cfg, stream.bbox)
    oracle = pruning.touched_indices_oracle(points, cfg, stream.bbox, grid)
    if not np.array_equal(mask.bits, oracle.bits):
        lvl = next(l for l in range(cfg.levels)
                   if not np.array_equal(mask.bits[l], oracle.bits[l]))
        raise VerificationError(
            f"validity mask disagrees with interpolation oracle at level {lvl}"
        )

    # decoded valid rows must match the quantized originals exactly
    if stream.params.mode == "raw":
        reference = grid.tables.astype("<f4").astype(np.float64)
    else:
        reference = codec.dequantize_array(
            codec.quantize_array(grid.tables, stream.params.step),
            stream.params.step,
        )
    for l in range(cfg.levels):
        idx = np.flatnonzero(mask.bits[l])
        diff = np.flatnonzero(
            (decoded.tables[l, idx] != reference[l, idx]).any(axis=1)
        )
        if diff.size:
            raise VerificationError(
                f"decoded feature mismatch at level {l} "
                f"table index {int(idx[diff[0]])}"
            )

    expected = interpolate_all(HashGrid(cfg, reference), points, stream.bbox)
    actual = interpolate_all(decoded, points, stream.bbox)
    dev = float(np.max(np.abs(expected - actual))) if expected.size else 0.0
    if dev != 0.0:
        raise VerificationError(
            f"interpolation deviation {dev} (must be exactly 0)"
        )
    print(f"verify: OK, max interpolation deviation {dev}")
    return EXIT_OK


def cmd_stats(args):
    points = io_formats.load_points(args.points)
    cfg = load_config(args.config, dims=points.dims)
    bbox = _bbox_for(points, args.bbox)
    mask = pruning.compute_validity(points, cfg, bbox)
    row_bytes = cfg.feature_dim * 4
    raw = [cfg.table_size * row_bytes] * cfg.levels
    pruned = [c * row_bytes for c in mask.valid_counts]
    report = io_formats.make_report(mask, cfg, raw, pruned)
    print(io_formats.emit_report(report, args.report))
    return EXIT_OK


def cmd_synth(args):
    bbox = None
    if args.bbox:
        bbox = _parse_bbox(args.bbox, args.dims)
    spec = synth.SynthSpec(
        dims=args.dims,
        n_points=args.n_points,
        n_clusters=args.clusters,
        cluster_std=args.std,
        seed=args.seed,
        bbox=bbox,
    )
    points = synth.synth_points(spec)
    io_formats.save_points(points, args.out)
    print(f"wrote {len(points)} points to {args.out}")
    if args.grid:
        cfg = load_config(args.config, dims=args.dims)
        grid = synth.random_grid(cfg, args.seed)
        io_formats.save_grid(grid, args.grid)
        print(f"wrote synthetic grid to {args.grid}")
    return EXIT_OK


def build_parser():
    p = argparse.ArgumentParser(
        prog="hgfp",
        description="Hash-grid feature pruning: encode only the table "
                    "entries that the given query positions can reach.",
    )
    sub = p.add_subparsers(dest="command", required=True)

    enc = sub.add_parser("encode", help="prune and encode a grid")
    enc.add_argument("--points", required=True)
    enc.add_argument("--grid", required=True)
    enc.add_argument("--out", required=True)
    enc.add_argument("--quant-step", type=float, default=0.01)
    enc.add_argument("--raw", action="store_true",
                     help="store features verbatim (no quantization)")
    enc.add_argument("--bbox", help="min and max per axis, comma separated")
    enc.add_argument("--report", choices=("text", "records"), default="text")
    enc.set_defaults(func=cmd_encode)

    dec = sub.add_parser("decode", help="decode a bitstream back to a grid")
    dec.add_argument("stream")
    dec.add_argument("--points", required=True)
    dec.add_argument("--out", required=True)
    dec.set_defaults(func=cmd_decode)

    ver = sub.add_parser("verify",
                         help="check inference losslessness end to end")
    ver.add_argument("stream")
    ver.add_argument("--points", required=True)
    ver.add_argument("--grid", required=True)
    ver.set_defaults(func=cmd_verify)

    st = sub.add_parser("stats", help="validity statistics for a point set")
    st.add_argument("--points", required=True)
    st.add_argument("--config")
    st.add_argument("--bbox")
    st.add_argument("--report", choices=("text", "records"), default="text")
    st.set_defaults(func=cmd_stats)

    sy = sub.add_parser("synth", help="generate clustered synthetic points")
    sy.add_argument("--out", required=True)
    sy.add_argument("--dims", type=int, default=3)
    sy.add_argument("--n-points", type=int, default=1000)
    sy.add_argument("--clusters", type=int, default=1)
    sy.add_argument("--std", type=float, default=0.05)
    sy.add_argument("--seed", type=int, default=0)
    sy.add_argument("--bbox")
    sy.add_argument("--grid",
                    help="also write a seeded uniform feature grid here")
    sy.add_argument("--config")
    sy.set_defaults(func=cmd_synth)
    return p


def main(argv=None):
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return int(e.code or 0)
    try:
        return args.func(args)
    except PositionMismatchError as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_POSITION_MISMATCH
    except CorruptionError as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_CORRUPTION
    except VerificationError as e:
        print(f"verification failed: {e}", file=sys.stderr)
        return EXIT_VERIFY_FAILED
    except (FormatError, OSError) as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_IO
    except (ConfigError, OutOfBoundsError, DynamicRangeError,
            ValueError) as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_USAGE


def run():
    sys.exit(main())


if __name__ == "__main__":
    run()

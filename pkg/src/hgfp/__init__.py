"""Hash-grid feature pruning.

Identifies the multi-resolution hash-grid entries reachable from a fixed
set of query positions, prunes the rest, and entropy-codes only the valid
entries into a bitstream that a decoder holding the same positions expands
back into an inference-equivalent grid.
"""

from .codec import (PrunedBitstream, QuantParams, decode_grid,
                    dequantize_array, encode_grid, quantize, quantize_array)
from .errors import (ConfigError, CorruptionError, DynamicRangeError, Error,
                     FormatError, OutOfBoundsError, PositionMismatchError,
                     VerificationError)
from .grid import (DEFAULT_PRIMES, BoundingBox, GridConfig, HashGrid,
                   PointSet, corner_vertices, corner_weights,
                   geometric_resolutions, hash_vertex, hash_vertex_batch,
                   interpolate, interpolate_all, scale_position)
from .io_formats import (RunReport, emit_report, load_grid, load_points,
                         make_report, save_grid, save_points)
from .pruning import (PackedFeatures, ValidityMask, all_valid_mask,
                      compute_validity, pack, touched_indices_oracle, unpack)
from .rangecoder import entropy_decode, entropy_encode
from .synth import SynthSpec, random_grid, synth_points

__version__ = "0.1.0"

"""Union-find decoding and benchmarking for CSS codes under combined
Pauli and heralded-erasure noise."""

from .codes import (BicycleSpec, CssCode, build_bicycle,
                    build_bundled_bicycle, build_toric_2d,
                    build_toric_2plus1, load_check_matrices,
                    parse_bicycle_spec, save_check_matrices, sector_tanner)
from .decoders import ALGORITHMS, DecodeOutcome, UnionFindDecoder, Workspace
from .decoders import run_batch
from .forest import ClusterForest
from .graphs import DecodingGraph, TannerGraph
from .harness import (CrossingEstimate, PointResult, Problem, SweepConfig,
                      benchmark_timing, build_problem, estimate_crossing,
                      estimate_pseudothreshold, run_grid, run_point,
                      run_sweep, write_csv, write_json)
from .noise import NoiseParams, Shot, extract_syndrome, sample_shot
from .verifier import (is_failure, oracle_failure, residual,
                       sector_failure_mask, spacetime_failure_mask,
                       syndrome_cleared)

__all__ = [
    "ALGORITHMS", "BicycleSpec", "ClusterForest", "CrossingEstimate",
    "CssCode", "DecodeOutcome", "DecodingGraph", "NoiseParams",
    "PointResult", "Problem", "Shot", "SweepConfig", "TannerGraph",
    "UnionFindDecoder", "Workspace",
    "benchmark_timing", "build_bicycle", "build_bundled_bicycle",
    "build_problem", "build_toric_2d", "build_toric_2plus1",
    "estimate_crossing", "estimate_pseudothreshold", "extract_syndrome",
    "is_failure", "load_check_matrices", "oracle_failure",
    "parse_bicycle_spec", "residual", "run_batch", "run_grid", "run_point",
    "run_sweep", "sample_shot", "save_check_matrices",
    "sector_failure_mask", "sector_tanner", "spacetime_failure_mask",
    "syndrome_cleared", "write_csv", "write_json",
]

__version__ = "0.1.0"

"""Monte Carlo engine: sweeps, grids, estimators and timing benchmarks.

Results carry a stable delimited schema; identical configurations give
byte-identical output because shot-level RNG streams depend only on
(seed, shot index) and aggregation is order independent.
"""

from __future__ import annotations

import json
import math
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from . import _kernels as K
from .codes import (CssCode, build_bicycle, build_bundled_bicycle,
                    build_toric_2d, build_toric_2plus1,
                    load_check_matrices, parse_bicycle_spec, sector_tanner)
from .decoders import ALGORITHMS, Workspace, _alg_id, run_batch
from .graphs import TannerGraph
from .verifier import sector_failure_mask, spacetime_failure_mask

CSV_HEADER = ("code,n,k,d,L,alg,p,eps,shots,failures,logical_rate,stderr,"
              "mean_ns,p50_ns,visited_mean,nonconv_frac")


@dataclass
class Problem:
    """One decoding problem: a graph, its failure mask and labels."""
    name: str
    graph: TannerGraph
    mask: np.ndarray
    n: int
    k: int
    d: int
    L: int = 0


@dataclass
class PointResult:
    code: str
    n: int
    k: int
    d: int
    L: int
    alg: str
    p: float
    eps: float
    shots: int
    failures: int
    nonconv: int
    visited_mean: float
    visited_max: int
    mean_ns: float = 0.0
    p50_ns: float = 0.0

    @property
    def logical_rate(self) -> float:
        return self.failures / self.shots if self.shots else 0.0

    @property
    def stderr(self) -> float:
        r = self.logical_rate
        return math.sqrt(r * (1.0 - r) / self.shots) if self.shots else 0.0

    @property
    def nonconv_frac(self) -> float:
        return self.nonconv / self.shots if self.shots else 0.0

    def csv_row(self) -> str:
        return ",".join([
            self.code, str(self.n), str(self.k), str(self.d), str(self.L),
            self.alg, repr(float(self.p)), repr(float(self.eps)),
            str(self.shots), str(self.failures),
            "%.10g" % self.logical_rate, "%.10g" % self.stderr,
            "%.10g" % self.mean_ns, "%.10g" % self.p50_ns,
            "%.10g" % self.visited_mean, "%.10g" % self.nonconv_frac,
        ])

    def as_dict(self) -> dict:
        return {
            "code": self.code, "n": self.n, "k": self.k, "d": self.d,
            "L": self.L, "alg": self.alg, "p": self.p, "eps": self.eps,
            "shots": self.shots, "failures": self.failures,
            "logical_rate": self.logical_rate, "stderr": self.stderr,
            "mean_ns": self.mean_ns, "p50_ns": self.p50_ns,
            "visited_mean": self.visited_mean,
            "nonconv_frac": self.nonconv_frac,
        }


@dataclass
class SweepConfig:
    problem: Problem
    alg: str
    ps: list
    epss: list = field(default_factory=lambda: [0.0])
    shots: int = 100000
    seed: int = 0
    threads: int = 1


# ---------------------------------------------------------------------------
# Problem construction
# ---------------------------------------------------------------------------

def problem_from_code(code: CssCode, sector: str, L: int = 0) -> Problem:
    g = sector_tanner(code, sector)
    mask = sector_failure_mask(code, sector)
    return Problem(name=code.name, graph=g, mask=mask,
                   n=code.n, k=code.k, d=code.d, L=L)


def problem_toric2d(L: int, sector: str = "X") -> Problem:
    return problem_from_code(build_toric_2d(L), sector, L=L)


def problem_toric3d(L: int, T: int | None = None) -> Problem:
    T = L if T is None else T
    g = build_toric_2plus1(L, T)
    mask = spacetime_failure_mask(g)
    return Problem(name=f"toric3d-L{L}-T{T}", graph=g, mask=mask,
                   n=g.n_data, k=2, d=L, L=L)


def build_problem(spec: str, L: int = 0, T: int | None = None,
                  sector: str = "X") -> Problem:
    """Problem from a CLI-style code spec string."""
    if spec == "toric2d":
        if L < 2:
            raise ValueError("toric2d requires --L >= 2")
        return problem_toric2d(L, sector)
    if spec == "toric3d":
        if L < 2:
            raise ValueError("toric3d requires --L >= 2")
        return problem_toric3d(L, T)
    if spec.startswith("bicycle:"):
        arg = spec.split(":", 1)[1]
        if arg.isdigit():
            code = build_bundled_bicycle(int(arg))
        else:
            code = build_bicycle(parse_bicycle_spec(arg))
        return problem_from_code(code, sector)
    if spec.startswith("css:"):
        path = spec.split(":", 1)[1]
        return problem_from_code(load_check_matrices(path), sector)
    raise ValueError("unknown code spec %r" % (spec,))


# ---------------------------------------------------------------------------
# Monte Carlo points
# ---------------------------------------------------------------------------

def run_point(problem: Problem, alg: str, p: float, eps: float,
              shots: int, seed: int, threads: int = 1,
              ws: Workspace | None = None) -> PointResult:
    """One Monte Carlo point: sample -> decode -> verify, `shots` times.

    Shot-level RNG depends only on (seed, shot index), so splitting the
    shot range over threads does not change the aggregate.
    """
    if shots < 1:
        raise ValueError("shots must be >= 1")
    if threads <= 1:
        parts = [run_batch(problem.graph, problem.mask, p, eps, seed,
                           shots, alg=alg, ws=ws)]
    else:
        bounds = np.linspace(0, shots, threads + 1).astype(int)
        spans = [(int(a), int(b)) for a, b in zip(bounds[:-1], bounds[1:])
                 if b > a]
        with ThreadPoolExecutor(max_workers=len(spans)) as pool:
            parts = list(pool.map(
                lambda span: run_batch(problem.graph, problem.mask, p, eps,
                                       seed, span[1] - span[0], alg=alg,
                                       lo=span[0]),
                spans))
    failures = sum(x["failures"] for x in parts)
    nonconv = sum(x["nonconv"] for x in parts)
    vsum = sum(x["visited_mean"] * x["shots"] for x in parts)
    vmax = max(x["visited_max"] for x in parts)
    return PointResult(code=problem.name, n=problem.n, k=problem.k,
                       d=problem.d, L=problem.L, alg=alg, p=p, eps=eps,
                       shots=shots, failures=failures, nonconv=nonconv,
                       visited_mean=vsum / shots, visited_max=vmax)


def run_sweep(config: SweepConfig) -> list:
    """All (p, eps) combinations of the config, one PointResult each."""
    out = []
    ws = Workspace(config.problem.graph) if config.threads <= 1 else None
    for eps in config.epss:
        for p in config.ps:
            out.append(run_point(config.problem, config.alg, p, eps,
                                 config.shots, config.seed,
                                 threads=config.threads, ws=ws))
    return out


def run_grid(config: SweepConfig) -> list:
    """Alias with grid semantics: the p x eps product, row-major in eps."""
    return run_sweep(config)


# ---------------------------------------------------------------------------
# Estimators
# ---------------------------------------------------------------------------

@dataclass
class CrossingEstimate:
    estimate: float | None
    uncertainty: float | None
    crossings: list
    n_pairs: int
    clean: bool

    @property
    def message(self) -> str:
        if self.clean:
            return "threshold %.6g +- %.2g" % (self.estimate,
                                               self.uncertainty)
        return "no clear threshold"


def _pair_crossings(c1, c2):
    """All log-linear intersections of two (p, rate) curves on their
    shared grid; rates <= 0 break the segment."""
    out = []
    ps = [p for p, _ in c1]
    r1 = dict(c1)
    r2 = dict(c2)
    common = [p for p in ps if p in r2]
    for a, b in zip(common[:-1], common[1:]):
        y1a, y1b = r1[a], r1[b]
        y2a, y2b = r2[a], r2[b]
        if min(y1a, y1b, y2a, y2b) <= 0:
            continue
        da = math.log(y2a) - math.log(y1a)
        db = math.log(y2b) - math.log(y1b)
        if da == 0.0:
            out.append(a)
            continue
        if da * db < 0:
            t = da / (da - db)
            out.append(a + t * (b - a))
    return out


def estimate_crossing(curves: dict, spread_tol: float = 0.25) -> CrossingEstimate:
    """Threshold from pairwise crossings of rate curves per size.

    curves: {size: [(p, rate), ...]}.  Estimate is the median of all
    pairwise log-linear intersections; uncertainty is their spread.  The
    result is flagged unclean ("no clear threshold") when some size pair
    never crosses, a pair crosses more than once, or the spread of the
    crossings exceeds spread_tol (relative to the median).
    """
    sizes = sorted(curves)
    if len(sizes) < 2:
        raise ValueError("need at least two curve sizes")
    crossings = []
    clean = True
    for i in range(len(sizes)):
        for j in range(i + 1, len(sizes)):
            xs = _pair_crossings(curves[sizes[i]], curves[sizes[j]])
            if len(xs) != 1:
                clean = False
            crossings.extend(xs)
    if not crossings:
        return CrossingEstimate(None, None, [], len(sizes) * (len(sizes) - 1) // 2,
                                False)
    est = float(np.median(crossings))
    spread = float(max(crossings) - min(crossings))
    if est > 0 and spread / est > spread_tol:
        clean = False
    return CrossingEstimate(est, spread, crossings,
                            len(sizes) * (len(sizes) - 1) // 2, clean)


def estimate_pseudothreshold(curve, k: int | None = None):
    """p* where the rate curve meets the identity line rate = p.

    curve: [(p, rate), ...] ascending in p.  Uses log-log interpolation
    between the bracketing grid points; returns None without a bracket.
    When k is given, also returns the per-encoded-qubit variant against
    the line rate = p*k as the second element.
    """
    def cross(target):
        prev = None
        for p, r in curve:
            if r <= 0:
                prev = None
                continue
            diff = math.log(r) - math.log(target(p))
            if prev is not None:
                p0, d0 = prev
                if d0 <= 0 <= diff or diff <= 0 <= d0:
                    if diff == d0:
                        return p0
                    t = -d0 / (diff - d0)
                    return math.exp(math.log(p0)
                                    + t * (math.log(p) - math.log(p0)))
            prev = (p, diff)
        return None

    p_star = cross(lambda p: p)
    if k is None:
        return p_star
    p_star_k = cross(lambda p: p * k)
    return p_star, p_star_k


# ---------------------------------------------------------------------------
# Timing
# ---------------------------------------------------------------------------

def benchmark_timing(problem: Problem, alg: str, p: float, eps: float,
                     shots: int, seed: int) -> tuple:
    """Mean and median decode time per shot in nanoseconds.

    Shots are pre-sampled; only the decode call is on the clock (no
    sampling, no verification).  The mean comes from one timed pass over
    all stored shots; the median from per-shot timings and carries the
    per-call dispatch overhead of roughly a microsecond.
    """
    g = problem.graph
    ws = Workspace(g)
    alg_id = _alg_id(alg)
    erasable_list = np.flatnonzero(g.erasable_mask()).astype(np.int32)
    # Counting pass to size the flat storage exactly; sampling is a pure
    # function of (seed, shot) so the second pass sees identical shots.
    n_er_total = 0
    n_syn_total = 0
    for shot in range(shots):
        n_e, n_err, n_s = K.sample_shot(
            g.indptr, g.indices, g.n_data, erasable_list,
            float(p), float(eps), np.int64(seed), np.int64(shot),
            ws.erased, ws.err, ws.syn, ws.seen,
            ws.er_list, ws.err_list, ws.syn_list)
        n_er_total += n_e
        n_syn_total += n_s
        ws.erased[ws.er_list[:n_e]] = 0
        ws.err[ws.err_list[:n_err]] = 0
        ws.syn[ws.syn_list[:n_s]] = 0
        ws.seen[ws.syn_list[:n_s]] = 0
    er_all = np.zeros(max(1, n_er_total), dtype=np.int32)
    syn_all = np.zeros(max(1, n_syn_total), dtype=np.int32)
    er_off = np.zeros(shots + 1, dtype=np.int64)
    syn_off = np.zeros(shots + 1, dtype=np.int64)
    K.sample_batch_store(g.indptr, g.indices, g.n_data, erasable_list,
                         float(p), float(eps), np.int64(seed),
                         np.int64(0), np.int64(shots),
                         ws.erased, ws.err, ws.syn, ws.seen,
                         ws.er_list, ws.err_list, ws.syn_list,
                         er_all, er_off, syn_all, syn_off)

    def stored(lo, hi):
        return K.decode_stored(
            g.indptr, g.indices, g.n_data, alg_id, False,
            np.int64(lo), np.int64(hi), er_all, er_off, syn_all, syn_off,
            *ws.state_args(),
            ws.erased, ws.err, ws.corr, ws.syn,
            ws.L, ws.L2, ws.touched, ws.er_list, ws.err_list,
            ws.syn_list, ws.corr_list, *ws.scratch_args())

    stored(0, min(shots, 64))  # warm the JIT cache and data caches
    t0 = time.perf_counter_ns()
    stored(0, shots)
    mean_ns = (time.perf_counter_ns() - t0) / shots
    per_shot = np.empty(shots, dtype=np.float64)
    for i in range(shots):
        t0 = time.perf_counter_ns()
        stored(i, i + 1)
        per_shot[i] = time.perf_counter_ns() - t0
    p50_ns = float(np.median(per_shot))
    return float(mean_ns), p50_ns


# ---------------------------------------------------------------------------
# Output
# ---------------------------------------------------------------------------

def write_csv(results, fh) -> None:
    fh.write(CSV_HEADER + "\n")
    for r in results:
        fh.write(r.csv_row() + "\n")


def write_json(results, fh) -> None:
    json.dump([r.as_dict() for r in results], fh, indent=2)
    fh.write("\n")

"""Monte Carlo harness and CLI: schema, reproducibility, estimators."""

import io
import json
import math
import subprocess
import sys

import numpy as np
import pytest

from ufdec.cli import main
from ufdec.harness import (CSV_HEADER, PointResult, SweepConfig,
                           benchmark_timing, build_problem,
                           estimate_crossing, estimate_pseudothreshold,
                           problem_toric2d, run_point, run_sweep, write_csv,
                           write_json)


def test_csv_header_frozen():
    assert CSV_HEADER == ("code,n,k,d,L,alg,p,eps,shots,failures,"
                          "logical_rate,stderr,mean_ns,p50_ns,"
                          "visited_mean,nonconv_frac")


def test_point_result_stats():
    r = PointResult(code="c", n=10, k=1, d=3, L=0, alg="improved",
                    p=0.1, eps=0.0, shots=400, failures=100, nonconv=4,
                    visited_mean=3.0, visited_max=9)
    assert r.logical_rate == 0.25
    assert abs(r.stderr - math.sqrt(0.25 * 0.75 / 400)) < 1e-15
    assert r.nonconv_frac == 0.01
    row = r.csv_row()
    assert len(row.split(",")) == len(CSV_HEADER.split(","))
    assert row.split(",")[0] == "c"
    assert set(r.as_dict()) == set(CSV_HEADER.split(","))


def test_build_problem_variants():
    p2 = build_problem("toric2d", L=4)
    assert (p2.n, p2.k, p2.d) == (32, 2, 4)
    p3 = build_problem("toric3d", L=3, T=2)
    assert p3.graph.n_check == 9 * 2
    pb = build_problem("bicycle:72")
    assert pb.n == 72 and pb.k == 12
    pz = build_problem("bicycle:72", sector="z")
    assert pz.n == 72
    with pytest.raises(ValueError):
        build_problem("nonsense:thing")


def test_run_point_zero_and_sure_failure():
    prob = problem_toric2d(4)
    clean = run_point(prob, "improved", 0.0, 0.0, shots=500, seed=1)
    assert clean.failures == 0 and clean.logical_rate == 0.0
    noisy = run_point(prob, "improved", 0.5, 0.0, shots=500, seed=1)
    assert noisy.failures > 0


def test_run_point_threads_equivalent():
    prob = problem_toric2d(6)
    a = run_point(prob, "improved", 0.09, 0.1, shots=3000, seed=3)
    b = run_point(prob, "improved", 0.09, 0.1, shots=3000, seed=3, threads=4)
    assert a.failures == b.failures
    assert a.nonconv == b.nonconv
    assert abs(a.visited_mean - b.visited_mean) < 1e-9


def test_run_sweep_order_and_size():
    prob = problem_toric2d(4)
    cfg = SweepConfig(problem=prob, alg="improved", ps=[0.01, 0.02],
                      epss=[0.0, 0.1], shots=200, seed=2)
    rows = run_sweep(cfg)
    assert [(r.eps, r.p) for r in rows] == [(0.0, 0.01), (0.0, 0.02),
                                            (0.1, 0.01), (0.1, 0.02)]


def test_write_csv_and_json_shapes():
    prob = problem_toric2d(4)
    rows = [run_point(prob, "simple", 0.05, 0.0, shots=100, seed=0)]
    buf = io.StringIO()
    write_csv(rows, buf)
    lines = buf.getvalue().strip().split("\n")
    assert lines[0] == CSV_HEADER and len(lines) == 2
    buf = io.StringIO()
    write_json(rows, buf)
    data = json.loads(buf.getvalue())
    assert data[0]["shots"] == 100


def test_crossing_recovers_planted_value():
    # synthetic scaling form: rate = f((p - pc) * L), monotone in p,
    # so every size pair crosses exactly once at pc
    pc = 0.10372
    ps = np.linspace(0.08, 0.13, 11)
    curves = {L: [(float(p), float(0.2 * math.exp((p - pc) * L * 8)))
                  for p in ps] for L in (8, 16, 24, 32)}
    est = estimate_crossing(curves)
    assert est.clean
    assert abs(est.estimate - pc) / pc < 5e-4
    assert est.message.startswith("threshold ")


def test_crossing_unclean_when_no_crossing():
    ps = [0.08, 0.10, 0.12]
    curves = {8: [(p, 0.1) for p in ps],
              16: [(p, 0.2) for p in ps]}   # parallel: never cross
    est = estimate_crossing(curves)
    assert not est.clean
    assert est.message == "no clear threshold"


def test_crossing_needs_two_sizes():
    with pytest.raises(ValueError):
        estimate_crossing({8: [(0.1, 0.1)]})


def test_pseudothreshold_quadratic():
    # rate = 10 p^2 meets rate = p at p = 0.1
    curve = [(p, 10 * p * p) for p in np.geomspace(0.01, 0.5, 40)]
    p_star = estimate_pseudothreshold(curve)
    assert abs(p_star - 0.1) < 1e-3
    p_star, p_star_k = estimate_pseudothreshold(curve, k=4)
    # against rate = 4p: 10 p^2 = 4p at p = 0.4
    assert abs(p_star_k - 0.4) < 5e-3


def test_pseudothreshold_no_bracket():
    curve = [(p, 5.0 * p) for p in (0.01, 0.02, 0.04)]  # always above
    assert estimate_pseudothreshold(curve) is None


def test_benchmark_timing_positive():
    prob = problem_toric2d(8)
    mean_ns, p50_ns = benchmark_timing(prob, "improved", 0.05, 0.1,
                                       shots=300, seed=9)
    assert mean_ns > 0 and p50_ns > 0
    assert mean_ns < 1e7  # under 10 ms per shot on any sane machine


def _run_cli(args):
    out, err = io.StringIO(), io.StringIO()
    old = sys.stdout, sys.stderr
    sys.stdout, sys.stderr = out, err
    try:
        rc = main(args)
    finally:
        sys.stdout, sys.stderr = old
    return rc, out.getvalue(), err.getvalue()


def test_cli_point_csv():
    rc, out, _ = _run_cli(["point", "--code", "toric2d", "--L", "4",
                           "--p", "0.0", "--shots", "100"])
    assert rc == 0
    lines = out.strip().split("\n")
    assert lines[0] == CSV_HEADER
    row = lines[1].split(",")
    assert row[0].startswith("toric2d") and row[9] == "0"


def test_cli_reproducible_bytes(tmp_path):
    f1, f2 = tmp_path / "a.csv", tmp_path / "b.csv"
    args = ["sweep", "--code", "toric2d", "--L", "6", "--p", "0.08,0.1",
            "--shots", "2000", "--seed", "11", "--out"]
    assert main(args + [str(f1)]) == 0
    assert main(args + [str(f2), "--threads", "3"]) == 0
    assert f1.read_bytes() == f2.read_bytes()


def test_cli_json_and_grid(tmp_path):
    f = tmp_path / "g.json"
    rc, _, _ = _run_cli(["grid", "--code", "toric2d", "--L", "4",
                         "--p", "0.01,0.02", "--eps", "0.0,0.1",
                         "--shots", "200", "--format", "json",
                         "--out", str(f)])
    assert rc == 0
    data = json.loads(f.read_text())
    assert len(data) == 4


def test_cli_config_errors_exit_1():
    rc, _, err = _run_cli(["point", "--code", "toric2d", "--L", "4",
                           "--p", "0.1", "--frobnicate"])
    assert rc == 1 and err
    rc, _, err = _run_cli(["point", "--code", "bicycle:notafile",
                           "--p", "0.1", "--shots", "10"])
    assert rc == 1 and err


def test_cli_nonconv_exit_2():
    import argparse

    from ufdec.cli import _nonconv_exit
    args = argparse.Namespace(max_nonconv=0.01)
    good = PointResult(code="c", n=8, k=1, d=2, L=0, alg="improved",
                       p=0.1, eps=0.0, shots=1000, failures=10, nonconv=5,
                       visited_mean=1.0, visited_max=1)
    bad = PointResult(code="c", n=8, k=1, d=2, L=0, alg="improved",
                      p=0.1, eps=0.0, shots=1000, failures=30, nonconv=25,
                      visited_mean=1.0, visited_max=1)
    old = sys.stderr
    sys.stderr = io.StringIO()
    try:
        assert _nonconv_exit([good], args) == 0
        assert _nonconv_exit([good, bad], args) == 2
    finally:
        sys.stderr = old


def test_cli_plot_renders_png(tmp_path):
    f = tmp_path / "r.csv"
    rc, _, _ = _run_cli(["sweep", "--code", "toric2d", "--L", "4",
                         "--p", "0.05,0.1", "--shots", "200",
                         "--out", str(f), "--plot"])
    assert rc == 0
    png = f.with_suffix(".png")
    assert png.exists() and png.read_bytes()[:8] == b"\x89PNG\r\n\x1a\n"


def test_cli_entry_point_installed():
    proc = subprocess.run(["ufdec", "--help"], capture_output=True, text=True)
    assert proc.returncode == 0
    assert "selftest" in proc.stdout

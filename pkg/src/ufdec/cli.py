"""Command line front end.

Exit codes: 0 on success, 1 on configuration errors (including unknown
flags), 2 when the decoder failed to converge on more than the tolerated
fraction of shots.
"""

from __future__ import annotations

import argparse
import sys

from . import harness as H


class _ConfigError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    """argparse with exit code 1 on usage errors instead of 2."""

    def error(self, message):
        raise _ConfigError(message)


def _parse_floats(text):
    try:
        return [float(x) for x in text.split(",") if x != ""]
    except ValueError:
        raise _ConfigError("expected a comma separated list of "
                           "numbers, got %r" % text)


def _default_ps(code_spec: str):
    if code_spec in ("toric2d", "toric3d"):
        return [round(0.01 * i, 3) for i in range(1, 16)]  # up to 0.15
    return [round(0.004 * i, 4) for i in range(1, 11)]     # up to 0.04


def _default_epss():
    return [round(0.05 * i, 3) for i in range(0, 12)]      # up to 0.55


def _add_common(sp):
    sp.add_argument("--code", required=True,
                    help="toric2d | toric3d | bicycle:<specfile or bundled n>"
                         " | css:<file>")
    sp.add_argument("--L", type=int, default=0, help="lattice size")
    sp.add_argument("--T", type=int, default=None,
                    help="time extent (toric3d, default L)")
    sp.add_argument("--alg", default="improved",
                    choices=["simple", "improved", "variant", "qldpc"])
    sp.add_argument("--eps", default="0", help="erasure rate(s), comma list")
    sp.add_argument("--shots", type=int, default=100000)
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--threads", type=int, default=1)
    sp.add_argument("--sector", default="X", choices=["X", "Z", "x", "z"])
    sp.add_argument("--out", default=None, help="output path (default stdout)")
    sp.add_argument("--format", default="csv", choices=["csv", "json"])
    sp.add_argument("--max-nonconv", type=float, default=0.01,
                    help="tolerated non-convergence fraction (exit 2 above)")
    sp.add_argument("--plot", action="store_true",
                    help="also render a figure next to --out")


def _build(args):
    try:
        return H.build_problem(args.code, L=args.L, T=args.T,
                               sector=args.sector)
    except (ValueError, OSError) as exc:
        raise _ConfigError(str(exc))


def _emit(results, args, plot_fn=None):
    if args.out:
        with open(args.out, "w") as fh:
            if args.format == "csv":
                H.write_csv(results, fh)
            else:
                H.write_json(results, fh)
        if args.plot and plot_fn is not None:
            from . import plots
            fig_path = args.out.rsplit(".", 1)[0] + ".png"
            plot_fn(plots, results, fig_path)
    else:
        if args.format == "csv":
            H.write_csv(results, sys.stdout)
        else:
            H.write_json(results, sys.stdout)
        if args.plot:
            raise _ConfigError("--plot requires --out")


def _nonconv_exit(results, args):
    shots = sum(r.shots for r in results)
    nonconv = sum(r.nonconv for r in results)
    if shots and nonconv / shots > args.max_nonconv:
        print("non-convergence fraction %.4g above tolerated %.4g"
              % (nonconv / shots, args.max_nonconv), file=sys.stderr)
        return 2
    return 0


def _cmd_point(args):
    problem = _build(args)
    ps = _parse_floats(args.p)
    epss = _parse_floats(args.eps)
    if len(ps) != 1 or len(epss) != 1:
        raise _ConfigError("point takes exactly one --p and one --eps")
    r = H.run_point(problem, args.alg, ps[0], epss[0], args.shots,
                    args.seed, threads=args.threads)
    if args.timing:
        r.mean_ns, r.p50_ns = H.benchmark_timing(
            problem, args.alg, ps[0], epss[0],
            min(args.shots, args.timing_shots), args.seed)
    _emit([r], args, lambda m, res, path: m.plot_rates(res, path))
    return _nonconv_exit([r], args)


def _cmd_sweep(args):
    epss = _parse_floats(args.eps)
    ps = _parse_floats(args.p) if args.p else _default_ps(args.code)
    Ls = ([int(x) for x in args.Ls.split(",")] if args.Ls
          else ([args.L] if args.L else [0]))
    results = []
    curves = {}
    for L in Ls:
        args.L = L
        problem = _build(args)
        cfg = H.SweepConfig(problem=problem, alg=args.alg, ps=ps, epss=epss,
                            shots=args.shots, seed=args.seed,
                            threads=args.threads)
        rows = H.run_sweep(cfg)
        results.extend(rows)
        curves[L] = [(r.p, r.logical_rate) for r in rows
                     if r.eps == epss[0]]
    _emit(results, args, lambda m, res, path: m.plot_rates(res, path))
    if len(curves) >= 2:
        est = H.estimate_crossing(curves)
        print(est.message, file=sys.stderr)
    return _nonconv_exit(results, args)


def _cmd_grid(args):
    problem = _build(args)
    ps = _parse_floats(args.p) if args.p else _default_ps(args.code)
    epss = (_parse_floats(args.eps) if args.eps != "0"
            else _default_epss())
    cfg = H.SweepConfig(problem=problem, alg=args.alg, ps=ps, epss=epss,
                        shots=args.shots, seed=args.seed,
                        threads=args.threads)
    results = H.run_grid(cfg)
    _emit(results, args, lambda m, res, path: m.plot_grid(res, path))
    return _nonconv_exit(results, args)


def _cmd_bench_time(args):
    ps = _parse_floats(args.p)
    epss = _parse_floats(args.eps)
    results = []
    for eps in epss:
        for p in ps:
            problem = _build(args)
            r = H.run_point(problem, args.alg, p, eps,
                            min(args.shots, 1000), args.seed)
            r.mean_ns, r.p50_ns = H.benchmark_timing(
                problem, args.alg, p, eps, args.shots, args.seed)
            r.shots = args.shots
            results.append(r)
    _emit(results, args, lambda m, res, path: m.plot_rates(res, path))
    return 0


def _cmd_selftest(args):
    from .selftest import run_selftest
    return 0 if run_selftest() else 1


def main(argv=None) -> int:
    parser = _Parser(prog="ufdec",
                     description="union-find decoding benchmarks for CSS "
                                 "codes under Pauli and erasure noise")
    sub = parser.add_subparsers(dest="command", required=True)

    sp = sub.add_parser("point", help="one Monte Carlo point")
    _add_common(sp)
    sp.add_argument("--p", required=True, help="physical error rate")
    sp.add_argument("--timing", action="store_true",
                    help="also time the decode path")
    sp.add_argument("--timing-shots", type=int, default=2000)
    sp.set_defaults(fn=_cmd_point)

    sp = sub.add_parser("sweep", help="sweep p (and sizes) at fixed eps")
    _add_common(sp)
    sp.add_argument("--p", default=None, help="comma list (default grid)")
    sp.add_argument("--Ls", default=None,
                    help="comma list of sizes; >=2 adds a crossing estimate")
    sp.set_defaults(fn=_cmd_sweep)

    sp = sub.add_parser("grid", help="p x eps product grid")
    _add_common(sp)
    sp.add_argument("--p", default=None, help="comma list (default grid)")
    sp.set_defaults(fn=_cmd_grid)

    sp = sub.add_parser("bench-time", help="decode-only timing benchmark")
    _add_common(sp)
    sp.add_argument("--p", required=True, help="comma list")
    sp.set_defaults(fn=_cmd_bench_time)

    sp = sub.add_parser("selftest", help="run the invariant suites")
    sp.set_defaults(fn=_cmd_selftest)

    try:
        args = parser.parse_args(argv)
        return args.fn(args)
    except _ConfigError as exc:
        print("error: %s" % exc, file=sys.stderr)
        print(parser.format_usage(), file=sys.stderr, end="")
        return 1


if __name__ == "__main__":
    sys.exit(main())

"""Command line front end.

::

    specvalset abscissa --system DIR --eps 0.1 [--method direct] [--report out.json]
    specvalset radius   --system DIR --eps 0.1 [--seed 7 --random-angles 5]
    specvalset contour  --system DIR --eps 0.1 --grid 200x200 --window -2,1,-1.5,1.5
    specvalset bench    --dir SUITE [--eps 0.1] [--mode abscissa]

Errors are reported on stderr as a one-line JSON object with the error class
and message, and the exit status is non-zero.
"""
from __future__ import annotations

import argparse
import json
import sys
import time

from .bench import format_table, run_bench
from .errors import ParseError, SvsError
from .files import emit_contour, load_system, write_report
from .options import SolverOptions, Tolerances
from .solvers import solve
from .system import SvsProblem
from .transfer import TransferEvaluator

EXIT_ERROR = 1


def _grid(text):
    try:
        nx, ny = (int(v) for v in text.lower().split("x"))
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected NxM, got {text!r}") from None
    if nx < 1 or ny < 1:
        raise argparse.ArgumentTypeError("grid sizes must be positive")
    return nx, ny


def _window(text):
    try:
        vals = tuple(float(v) for v in text.split(","))
    except ValueError:
        vals = ()
    if len(vals) != 4:
        raise argparse.ArgumentTypeError(f"expected x0,x1,y0,y1, got {text!r}")
    return vals


def _solver_args(p):
    p.add_argument("--system", required=True, help="system directory or manifest")
    p.add_argument("--eps", type=float, help="epsilon (overrides the manifest)")
    p.add_argument("--method", choices=("improved", "direct"), default="improved")
    p.add_argument("--seed", type=int, default=100)
    p.add_argument("--random-angles", type=int, default=3)
    p.add_argument("--include", choices=("all", "ctrb-obsv"), default="all")
    p.add_argument("--horizontal-first", action="store_true",
                   help="direct method: start with a horizontal search")
    p.add_argument("--evaluation", choices=("auto", "lu", "hessenberg"), default="auto")
    p.add_argument("--path", choices=("auto", "sigma-min", "full"), default="auto")
    p.add_argument("--svd-driver", choices=("gesdd", "gesvd"), default="gesdd")
    p.add_argument("--max-iterations", type=int, default=100)
    defaults = Tolerances()
    for name in ("eig", "root", "simple", "dedup", "split"):
        p.add_argument(f"--tol-{name}", type=float, default=getattr(defaults, name))
    p.add_argument("--report", help="write a JSON report to this path")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="specvalset",
        description="Abscissa and radius of spectral value sets of descriptor systems.")
    sub = parser.add_subparsers(dest="command", required=True)
    for mode in ("abscissa", "radius"):
        _solver_args(sub.add_parser(mode, help=f"compute the {mode}"))
    c = sub.add_parser("contour", help="sample ||G|| on a grid as CSV")
    c.add_argument("--system", required=True)
    c.add_argument("--eps", type=float)
    c.add_argument("--grid", type=_grid, required=True)
    c.add_argument("--window", type=_window, required=True)
    c.add_argument("--out", help="output file (default stdout)")
    b = sub.add_parser("bench", help="time both methods on a suite of systems")
    b.add_argument("--dir", required=True)
    b.add_argument("--eps", type=float)
    b.add_argument("--mode", choices=("abscissa", "radius", "both"), default="both")
    b.add_argument("--jobs", type=int, default=1)
    b.add_argument("--json", help="also write the rows as JSON to this path")
    return parser


def _epsilon(args, loaded):
    eps = args.eps if args.eps is not None else loaded.epsilon
    if eps is None:
        raise ParseError("no --eps given and the manifest has no epsilon", args.system)
    return eps


def _options(args):
    tol = Tolerances(eig=args.tol_eig, root=args.tol_root, simple=args.tol_simple,
                     dedup=args.tol_dedup, split=args.tol_split)
    return SolverOptions(method=args.method, horizontal_first=args.horizontal_first,
                         random_angles=args.random_angles, seed=args.seed,
                         evaluation=args.evaluation, path=args.path,
                         svd_driver=args.svd_driver, max_iterations=args.max_iterations,
                         tolerances=tol)


def _run_solver(args, out):
    loaded = load_system(args.system)
    problem = SvsProblem(loaded.system, _epsilon(args, loaded), inclusion=args.include,
                         mode=args.command, options=_options(args))
    t0 = time.perf_counter()
    report = solve(problem)
    wall = time.perf_counter() - t0
    if args.report:
        write_report(args.report, report, wall)
    out.write(f"{report.eta!r}\n")
    return 0


def _run_contour(args, out):
    loaded = load_system(args.system)
    eps = _epsilon(args, loaded)
    ev = TransferEvaluator(loaded.system)
    if args.out:
        with open(args.out, "w") as fh:
            failures = emit_contour(ev, args.grid, args.window, eps, fh)
    else:
        failures = emit_contour(ev, args.grid, args.window, eps, out)
    if failures:
        sys.stderr.write(f"warning: {failures} grid points could not be evaluated\n")
    return 0


def _run_bench(args, out):
    modes = ("abscissa", "radius") if args.mode == "both" else (args.mode,)
    rows = run_bench(args.dir, args.eps, modes, args.jobs)
    out.write(format_table(rows) + "\n")
    if args.json:
        with open(args.json, "w") as fh:
            json.dump([r.as_dict() for r in rows], fh, indent=2, default=float)
    return 0


def _glue_window(argv):
    # A window such as "-1,1,-1,1" starts with '-' and would be taken for a flag.
    out = []
    it = iter(argv)
    for tok in it:
        if tok == "--window":
            nxt = next(it, None)
            out.append(tok if nxt is None else f"--window={nxt}")
        else:
            out.append(tok)
    return out


def main(argv=None, out=None) -> int:
    out = out or sys.stdout
    argv = sys.argv[1:] if argv is None else list(argv)
    args = build_parser().parse_args(_glue_window(argv))
    handlers = {"abscissa": _run_solver, "radius": _run_solver,
                "contour": _run_contour, "bench": _run_bench}
    try:
        return handlers[args.command](args, out)
    except SvsError as exc:
        sys.stderr.write(json.dumps({"error": type(exc).__name__, "code": exc.code,
                                     "message": str(exc)}) + "\n")
        return EXIT_ERROR
    except (ValueError, OSError) as exc:
        sys.stderr.write(json.dumps({"error": type(exc).__name__, "code": "invalid-input",
                                     "message": str(exc)}) + "\n")
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())

"""Command-line front end.

Exit codes: 0 every contract held, 1 usage or input error, 2 some result
was inconclusive, 3 a mathematical contract was violated (the report then
carries the violating instance).
"""

from __future__ import annotations

import argparse
import contextlib
import signal
import sys
from importlib import metadata
from pathlib import Path

import numpy as np

from . import io
from .associated import MaxNormOracle, MinNormOracle, Side
from .diagnostics import (
    CSV_COLUMNS,
    Tag,
    boundedly_complete_profile,
    norming_profile,
    shrinking_profile,
    verdict,
)
from .exemplars import bundled, from_kind
from .extraction import Status, extract_basic, extract_unconditional, random_blocks
from .frames import (
    SignMode,
    hilbert_frame_bounds,
    projection_constant,
    reconstruction_residual,
    unconditional_constant,
)
from .norms import Method
from .verify import verify_frame

EXIT_OK, EXIT_USAGE, EXIT_INCONCLUSIVE, EXIT_VIOLATION = 0, 1, 2, 3
KINDS = ("canonical", "l1-pathological", "l2-tight", "random-parseval", "mercedes")


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _floats(text: str) -> list[float]:
    try:
        return [float(t) for t in text.split(",") if t.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from None


def _ints(text: str) -> list[int]:
    try:
        return [int(t) for t in text.split(",") if t.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}") from None


def _versions() -> dict:
    out = {}
    for pkg in ("schauder", "numpy", "scipy", "cvxpy"):
        try:
            out[pkg] = metadata.version(pkg)
        except metadata.PackageNotFoundError:
            out[pkg] = None
    return out


def _run_meta(args) -> dict:
    return {
        "command": args.command,
        "seed": args.seed,
        "tol": args.tol,
        "threads": args.threads,
        "versions": _versions(),
    }


def _emit(args, text: str) -> None:
    if args.out:
        Path(args.out).write_text(text)
    else:
        sys.stdout.write(text)


def _report(args, body: dict) -> None:
    _emit(args, io.dumps({"run": _run_meta(args), **body}))


# commands ------------------------------------------------------------------


def cmd_gen(args) -> int:
    params = {"p": args.p, "dim": args.dim, "n": args.n, "seed": args.seed, "groups": args.groups}
    if args.c is not None:
        params["c"] = args.c
    params = {k: v for k, v in params.items() if v is not None}
    frame = from_kind(args.kind, **params)
    _emit(args, io.dumps(io.frame_to_dict(frame)))
    return EXIT_OK


def cmd_constants(args) -> int:
    frame = io.load_frame(args.frame)
    K = projection_constant(frame)
    mode = SignMode.EXACT_SIGNS if args.signs == "exact" else SignMode.RANDOMIZED
    Ku = unconditional_constant(frame, mode, seed=args.seed, trials=args.trials)
    body = {
        "frame": frame.name,
        "N": frame.N,
        "dim": frame.dim,
        "p": io._p_value(frame.p),
        "K": K.to_dict() | {"witness": K.witness},
        "K_u": Ku.to_dict() | {"witness": Ku.witness},
        "residuals": [reconstruction_residual(frame, x) for x in frame.span_sample()],
    }
    if frame.p == 2.0:
        A, B = hilbert_frame_bounds(frame)
        body["hilbert_bounds"] = {"A": A, "B": B}
    status = EXIT_OK
    if mode is SignMode.RANDOMIZED or K.method is Method.MESH:
        # only a lower bound (or a loose enclosure) is available
        body["inconclusive"] = ["K_u"] if mode is SignMode.RANDOMIZED else ["K"]
        status = EXIT_INCONCLUSIVE
    _report(args, body)
    return status


def cmd_norms(args) -> int:
    frame = io.load_frame(args.frame)
    if args.min is None and args.max is None:
        raise ValueError("give --min and/or --max coefficients")
    body = {"frame": frame.name}
    status = EXIT_OK
    if args.min is not None:
        side = Side.FUNCTIONALS if args.functionals else Side.VECTORS
        value, (m, n) = MinNormOracle(frame, side).detail(args.min)
        body["min"] = {"coefficients": args.min, "side": side.value, "value": value, "interval": [m, n]}
    if args.max is not None:
        b = MaxNormOracle(frame, tol=args.tol)(args.max)
        body["max"] = {"coefficients": args.max, **b.to_dict(), "converged": b.converged}
        if not b.converged:
            status = EXIT_INCONCLUSIVE
    _report(args, body)
    return status


def cmd_profile(args) -> int:
    frame = io.load_frame(args.frame)
    grid = args.grid
    if args.norming is not None:
        prof = norming_profile(frame, args.norming, grid)
    elif args.boundedly_complete:
        prof = boundedly_complete_profile(frame, args.m, grid)
    else:
        prof = shrinking_profile(frame, args.m, grid)
    v = verdict(prof, args.tau, args.window)
    if args.format == "csv":
        _emit(args, prof.to_csv())
        sys.stderr.write(f"verdict: {v.tag.value}\n")
    else:
        rows = [dict(zip(CSV_COLUMNS, r)) for r in prof.csv_rows()]
        for r in rows:
            r["lower"], r["upper"] = float(r["lower"]), float(r["upper"])
        _report(args, {"profile": rows, "verdict": v.to_dict()})
    inexact = any(b.method is Method.MESH for b in prof.values)
    return EXIT_INCONCLUSIVE if inexact and v.tag is Tag.INCONCLUSIVE else EXIT_OK


def cmd_extract(args) -> int:
    frame = io.load_frame(args.frame)
    if args.blocks is not None:
        blocks = io.load_blocks(args.blocks)
    else:
        blocks = random_blocks(frame, args.random_blocks, seed=args.seed)
    if args.mode == "basic":
        rep = extract_basic(frame, blocks, args.eps, tol=args.tol)
    else:
        rep = extract_unconditional(frame, blocks, args.eps, tol=args.tol)
    _report(args, {"frame": frame.name, "blocks": np.asarray(blocks).tolist(), "report": rep.to_dict()})
    if rep.status is Status.SUCCESS:
        return EXIT_OK
    # a selected sequence whose recomputed constant exceeds the target breaks the guarantee
    if rep.achieved is not None and rep.achieved.lower > rep.target + args.tol:
        return EXIT_VIOLATION
    return EXIT_INCONCLUSIVE


def cmd_verify(args) -> int:
    if args.bundled:
        frames = bundled()
    elif args.frame:
        frames = [io.load_frame(args.frame)]
    else:
        raise ValueError("give a frame file or --bundled")
    reports = [verify_frame(f, seed=args.seed, tol=max(args.tol * 1e-2, 1e-12)) for f in frames]
    body = {"frames": [r.to_dict() for r in reports]}
    if any(r.violated for r in reports):
        body["reproducers"] = {
            r.frame: io.frame_to_dict(f) for r, f in zip(reports, frames) if r.violated
        }
    _report(args, body)
    if any(r.violated for r in reports):
        return EXIT_VIOLATION
    if any(r.inconclusive for r in reports):
        return EXIT_INCONCLUSIVE
    return EXIT_OK


# parser ----------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    common = _Parser(add_help=False)
    common.add_argument("--tol", type=float, default=1e-6, help="solver tolerance (default 1e-6)")
    common.add_argument("--seed", type=int, default=0, help="random seed (default 0)")
    common.add_argument("--threads", type=int, default=1, help="accepted for compatibility; runs single-threaded")
    common.add_argument("--time-limit", type=float, default=None, help="seconds before giving up (exit 2)")
    common.add_argument("--out", "-o", default=None, help="write the report here instead of stdout")

    parser = _Parser(prog="schauder", description="Finite-truncation computations for Schauder frames.")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    g = sub.add_parser("gen", parents=[common], help="write a built-in frame as JSON")
    g.add_argument("kind", choices=KINDS)
    g.add_argument("--p", default=None, help="norm exponent for canonical frames: 1, 2 or inf")
    g.add_argument("--dim", type=int, default=None)
    g.add_argument("--n", type=int, default=None, help="number of frame elements")
    g.add_argument("--groups", type=int, default=None, help="block-diagonal groups (random-parseval)")
    g.add_argument("--c", type=_floats, default=None, help="weights c_i for l2-tight, e.g. 0.6,0.48")
    g.set_defaults(func=cmd_gen)

    c = sub.add_parser("constants", parents=[common], help="projection and unconditional constants")
    c.add_argument("frame")
    c.add_argument("--signs", choices=("exact", "randomized"), default="exact")
    c.add_argument("--trials", type=int, default=2000)
    c.set_defaults(func=cmd_constants)

    n = sub.add_parser("norms", parents=[common], help="minimal and maximal associated norms")
    n.add_argument("frame")
    n.add_argument("--min", type=_floats, default=None, metavar="A1,A2,...")
    n.add_argument("--max", type=_floats, default=None, metavar="A1,A2,...")
    n.add_argument("--functionals", action="store_true", help="evaluate --min against the functionals")
    n.set_defaults(func=cmd_norms)

    p = sub.add_parser("profile", parents=[common], help="tail restriction-norm profiles")
    p.add_argument("frame")
    kind = p.add_mutually_exclusive_group()
    kind.add_argument("--shrinking", action="store_true", help="f_m on tail vector spans (default)")
    kind.add_argument("--boundedly-complete", action="store_true", help="x_m on tail functional spans")
    kind.add_argument("--norming", type=_floats, default=None, metavar="X1,X2,...")
    p.add_argument("--m", type=int, default=1)
    p.add_argument("--grid", type=_ints, default=None, metavar="N1,N2,...")
    p.add_argument("--tau", type=float, default=1e-3)
    p.add_argument("--window", type=int, default=3)
    p.add_argument("--format", choices=("csv", "json"), default="csv")
    p.set_defaults(func=cmd_profile)

    e = sub.add_parser("extract", parents=[common], help="basic or unconditional subsequence extraction")
    e.add_argument("frame")
    src = e.add_mutually_exclusive_group(required=True)
    src.add_argument("--blocks", default=None, help="blocks JSON file")
    src.add_argument("--random-blocks", type=int, default=None, metavar="M", help="draw M blocks from --seed")
    e.add_argument("--mode", choices=("basic", "unconditional"), default="basic")
    e.add_argument("--eps", type=float, default=0.5)
    e.set_defaults(func=cmd_extract)

    v = sub.add_parser("verify", parents=[common], help="run the inequality suite")
    v.add_argument("frame", nargs="?", default=None)
    v.add_argument("--bundled", action="store_true", help="verify every built-in exemplar")
    v.set_defaults(func=cmd_verify)
    return parser


class _Timeout(Exception):
    pass


@contextlib.contextmanager
def _deadline(seconds):
    if not seconds or not hasattr(signal, "SIGALRM"):
        yield
        return

    def _raise(signum, frame):
        raise _Timeout()

    old = signal.signal(signal.SIGALRM, _raise)
    signal.setitimer(signal.ITIMER_REAL, seconds)
    try:
        yield
    finally:
        signal.setitimer(signal.ITIMER_REAL, 0)
        signal.signal(signal.SIGALRM, old)


def main(argv=None) -> int:
    try:
        args = build_parser().parse_args(argv)
    except SystemExit as exc:  # argparse usage errors and --help
        return exc.code if isinstance(exc.code, int) else EXIT_USAGE
    try:
        with _deadline(args.time_limit):
            return args.func(args)
    except _Timeout:
        sys.stderr.write(f"schauder: time limit of {args.time_limit}s exceeded\n")
        return EXIT_INCONCLUSIVE
    except (ValueError, IndexError, OSError) as exc:
        sys.stderr.write(f"schauder: error: {exc}\n")
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())

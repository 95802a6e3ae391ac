"""Command line front end.

Verbs: run (iterate a problem, optionally dumping a CSV trace), verify
(run one named check against a problem), example (print a ready-to-edit
config for a built-in problem).

Exit codes: 0 converged or check clean, 1 check violations, 2 iteration
budget exhausted, 3 a step had no usable solution, 4 file I/O trouble,
64 bad usage, bad config, or an unknown name.
"""

from __future__ import annotations

import argparse
import csv
import math
import sys
import textwrap
from dataclasses import replace
from pathlib import Path

import numpy as np

from .builtins import PROBLEM_NAMES, ProblemSpec, get_problem
from .config import parse_problem
from .errors import DegenPpaError, ParseError, UnknownExample
from .iteration import StopRule, fejer_margins, iterate
from .resolvent import STRATEGIES
from .verify import CHECK_NAMES, run_check

__all__ = ["main"]

EXIT_OK = 0
EXIT_VIOLATIONS = 1
EXIT_MAX_ITERS = 2
EXIT_SOLVER_FAILURE = 3
EXIT_IO = 4
EXIT_USAGE = 64

_STOP_EXIT = {"tol": EXIT_OK, "max_iters": EXIT_MAX_ITERS,
              "solver_failure": EXIT_SOLVER_FAILURE}


class _UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):  # argparse would exit(2), which run reserves
        raise _UsageError(message)


def _load_problem(spec: str) -> ProblemSpec:
    if spec in PROBLEM_NAMES:
        return get_problem(spec)
    if Path(spec).exists() or spec.endswith(".toml"):
        return parse_problem(spec)
    raise UnknownExample(
        f"{spec!r} is neither a built-in problem ({', '.join(PROBLEM_NAMES)}) "
        "nor a config file"
    )


def _write_trace(path: str, trace, ref) -> None:
    d = trace.iterates[0].shape[0]
    margins = None
    if ref is not None and trace.k > 0:
        margins = fejer_margins(trace, ref)
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["k"] + [f"x_{i}" for i in range(d)]
                   + [f"xr_{i}" for i in range(d)] + ["q_residual", "fejer_gap"])
        for k in range(1, trace.k + 1):
            gap = float(margins[k - 1]) if margins is not None else math.nan
            row = ([k]
                   + [f"{v:.17g}" for v in trace.iterates[k]]
                   + [f"{v:.17g}" for v in trace.range_parts[k]]
                   + [f"{trace.q_residuals[k - 1]:.17g}", f"{gap:.17g}"])
            w.writerow(row)


def _cmd_run(args) -> int:
    prob = _load_problem(args.problem)
    stop = prob.stop or StopRule()
    if args.max_iters is not None:
        stop = replace(stop, max_iters=args.max_iters)
    if args.tol is not None:
        stop = replace(stop, q_res_tol=args.tol)
    trace = iterate(prob.op, prob.metric, prob.x0, stop, strategy=args.strategy)
    if args.trace:
        _write_trace(args.trace, trace, prob.known_fixed_point)
    last = trace.q_residuals[-1] if trace.q_residuals else math.nan
    print(f"problem {prob.name}: stop={trace.stop_reason} iters={trace.k} "
          f"last_q_residual={last:.6g}")
    if trace.stop_reason == "solver_failure":
        print(f"step {trace.failure_index} had no single-valued solution "
              f"({trace.outcomes[-1]})")
    print("final " + np.array2string(trace.final, precision=12))
    return _STOP_EXIT[trace.stop_reason]


def _cmd_verify(args) -> int:
    name = args.problem if args.problem is not None else args.problem_opt
    if name is None:
        raise _UsageError("verify needs a problem (positional or --problem)")
    if args.problem is not None and args.problem_opt is not None \
            and args.problem != args.problem_opt:
        raise _UsageError("conflicting problem names given twice")
    prob = _load_problem(name)
    report = run_check(prob, args.check, n=args.n, seed=args.seed)
    text = report.to_text()
    print(text)
    if args.report:
        Path(args.report).write_text(text + "\n")
    return EXIT_OK if report.clean else EXIT_VIOLATIONS


def _cmd_example(args) -> int:
    prob = get_problem(args.name)
    for line in textwrap.wrap(prob.description, width=74):
        print(f"# {line}")
    print(prob.toml_text, end="")
    return EXIT_OK


def _build_parser() -> _Parser:
    p = _Parser(prog="degenppa",
                description="degenerate-metric proximal iterations: run, "
                            "verify, and example configs")
    sub = p.add_subparsers(dest="cmd", required=True)

    runp = sub.add_parser("run", help="iterate a problem")
    runp.add_argument("--problem", required=True,
                      help="built-in name or TOML config path")
    runp.add_argument("--trace", help="CSV path for the iterate trace")
    runp.add_argument("--max-iters", type=int)
    runp.add_argument("--tol", type=float, help="relative shift tolerance")
    runp.add_argument("--strategy", choices=STRATEGIES, default="auto")
    runp.set_defaults(fn=_cmd_run)

    verp = sub.add_parser("verify", help="run one check against a problem")
    verp.add_argument("check", help=f"one of: {', '.join(CHECK_NAMES)}")
    verp.add_argument("problem", nargs="?",
                      help="built-in name or TOML config path")
    verp.add_argument("--problem", dest="problem_opt")
    verp.add_argument("--n", type=int, help="sample count override")
    verp.add_argument("--seed", type=int, default=0)
    verp.add_argument("--report", help="write the report text to this file")
    verp.set_defaults(fn=_cmd_verify)

    exp = sub.add_parser("example", help="print a built-in problem's config")
    exp.add_argument("name")
    exp.set_defaults(fn=_cmd_example)
    return p


def main(argv=None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except _UsageError as e:
        print(f"usage error: {e}", file=sys.stderr)
        return EXIT_USAGE
    try:
        return args.fn(args)
    except _UsageError as e:
        print(f"usage error: {e}", file=sys.stderr)
        return EXIT_USAGE
    except ParseError as e:
        print(f"config error: {e}", file=sys.stderr)
        return EXIT_USAGE
    except OSError as e:
        print(f"io error: {e}", file=sys.stderr)
        return EXIT_IO
    except DegenPpaError as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    raise SystemExit(main())

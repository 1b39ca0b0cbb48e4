"""Command line: ``oplinear {reduce,trace,render,metrics,verify} [input]``.

Input is a file path or ``-`` for stdin (the default). Exit codes: 0 ok,
1 numeric verification failed, 2 bad input, 3 internal invariant violated.
"""

from __future__ import annotations

import argparse
import sys

from .exprio import ParseError, format_trace, parse, print_integral, print_operator, render_dot
from .numeric import BindingError, Bindings, VerifyConfig, verify_equivalence
from .rewrite import InvariantViolation, reduce
from .scalar import ScalarSyntaxError
from .trees import metrics

EXIT_OK, EXIT_FAIL, EXIT_INPUT, EXIT_INTERNAL = 0, 1, 2, 3


class InputError(Exception):
    pass


def _read(path: str) -> str:
    try:
        if path == "-":
            return sys.stdin.buffer.read().decode("utf-8")
        with open(path, "rb") as fh:
            return fh.read().decode("utf-8")
    except UnicodeDecodeError as exc:
        raise InputError(f"{path}: input is not valid UTF-8 ({exc.reason} at byte {exc.start})")
    except OSError as exc:
        raise InputError(f"{path}: {exc.strerror}")


def _samples(text: str) -> tuple[float, ...]:
    try:
        values = tuple(float(v) for v in text.split(",") if v.strip())
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad sample list {text!r}")
    if not values:
        raise argparse.ArgumentTypeError("sample list is empty")
    return values


def _even(text: str) -> int:
    try:
        n = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"{text!r} is not an integer")
    if n < 2 or n % 2:
        raise argparse.ArgumentTypeError(f"--n must be even and >= 2, got {n}")
    return n


def _positive(text: str) -> float:
    try:
        v = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"{text!r} is not a number")
    if not v > 0:
        raise argparse.ArgumentTypeError(f"--tol must be positive, got {v}")
    return v


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="oplinear",
        description="Reduce separable Volterra integral polynomials to operator-linear form.")
    sub = parser.add_subparsers(dest="command", required=True, metavar="COMMAND")

    def command(name, help_text):
        p = sub.add_parser(name, help=help_text, description=help_text)
        p.add_argument("input", nargs="?", default="-", help="expression file (default: stdin)")
        p.add_argument("-o", "--output", help="write to this file instead of stdout")
        return p

    p = command("reduce", "print the reduced, branch-free forest")
    p.add_argument("--integral", action="store_true", help="print nested-integral notation")
    command("trace", "print one record per rewrite step")
    command("render", "print Graphviz DOT, one digraph per tree")
    command("metrics", "print E, N, D for each tree")
    p = command("verify", "check numerically that the reduction preserves value")
    p.add_argument("--bindings", required=True, help="kernel/function bindings file")
    p.add_argument("--against", help="compare with this forest instead of the reduction")
    defaults = VerifyConfig()
    p.add_argument("--samples", type=_samples, default=defaults.samples,
                   help="comma-separated sample points (default: 0.25,0.5,1.0)")
    p.add_argument("--n", type=_even, default=defaults.n, help="Simpson subintervals (default: 64)")
    p.add_argument("--tol", type=_positive, default=defaults.tol, help="relative tolerance (default: 1e-6)")
    return parser


def run(args: argparse.Namespace) -> tuple[str, int]:
    forest = parse(_read(args.input))
    if args.command == "reduce":
        out, _ = reduce(forest)
        return (print_integral(out) if args.integral else print_operator(out)) + "\n", EXIT_OK
    if args.command == "trace":
        _, trace = reduce(forest)
        return format_trace(trace), EXIT_OK
    if args.command == "render":
        return render_dot(forest), EXIT_OK
    if args.command == "metrics":
        return "".join(f"{metrics(t)}\n" for t, _ in forest), EXIT_OK
    # verify
    try:
        bindings = Bindings.load(args.bindings)
    except OSError as exc:
        raise InputError(f"{args.bindings}: {exc.strerror}")
    if args.against:
        other = parse(_read(args.against))
    else:
        other, _ = reduce(forest)
    report = verify_equivalence(forest, other, bindings, args.samples, args.n, args.tol)
    return str(report) + "\n", EXIT_OK if report.passed else EXIT_FAIL


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        text, code = run(args)
    except (ParseError, BindingError, ScalarSyntaxError, InputError) as exc:
        print(f"oplinear: error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except InvariantViolation as exc:
        print(f"oplinear: internal error: {exc}", file=sys.stderr)
        return EXIT_INTERNAL
    if args.output:
        with open(args.output, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return code


if __name__ == "__main__":
    sys.exit(main())

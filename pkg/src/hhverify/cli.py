"""Command-line entry point: ``verify``, ``certify-convex`` and ``example``."""

from __future__ import annotations

import argparse
import logging
import re
import sys

from .errors import ConfigInvalid, HHVerifyError
from .harness import (
    EXIT_CONFIG,
    SuiteConfig,
    certify_convex_command,
    example_command,
    run_suite,
)

log = logging.getLogger("hhverify")

_NEG_VALUE = re.compile(r"^-[\d.]")


def split_top_level(text: str) -> list[str]:
    """Split on commas that are not inside parentheses."""
    parts, depth, cur = [], 0, []
    for ch in text:
        if ch == "," and depth == 0:
            parts.append("".join(cur))
            cur = []
            continue
        depth += (ch == "(") - (ch == ")")
        cur.append(ch)
    parts.append("".join(cur))
    return [p.strip() for p in parts]


def _interval(text):
    try:
        lo, hi = (float(v) for v in text.split(","))
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected lo,hi, got {text!r}") from None
    return lo, hi


def _int_list(text):
    try:
        return tuple(int(v) for v in text.split(","))
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}") from None


def _functions(text):
    if text.strip() == "sweep":
        return "sweep"
    parts = split_top_level(text)
    if len(parts) != 2:
        raise argparse.ArgumentTypeError(f"expected f,g or sweep, got {text!r}")
    return tuple(parts)


def _seed(text):
    v = int(text, 0)
    if not 0 <= v < 2**64:
        raise argparse.ArgumentTypeError("seed must be an unsigned 64-bit integer")
    return v


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_CONFIG, f"{self.prog}: CONFIG_INVALID: {message}\n")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="hhverify", description=__doc__)
    parser.add_argument("-v", "--verbose", action="count", default=0)
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    v = sub.add_parser("verify", help="run inequality suites on random Hermitian matrices")
    v.add_argument("--suite", default="all", help="suite id, comma-separated ids, or 'all'")
    v.add_argument("--dim", type=_int_list, default=(1, 2, 4, 8))
    v.add_argument("--trials", type=int, default=250)
    v.add_argument("--probes", type=int, default=8)
    v.add_argument("--interval", type=_interval, default=None)
    v.add_argument("--functions", type=_functions, default=("identity", "square"))
    v.add_argument("--seed", type=_seed, default=0)
    v.add_argument("--tol-abs", type=float, default=1e-9)
    v.add_argument("--tol-rel", type=float, default=1e-9)
    v.add_argument("--quad-panels", type=int, default=8)
    v.add_argument("--quad-nodes", type=int, default=8)
    v.add_argument("--report", default=None)
    v.add_argument("--format", choices=("json", "csv"), default="json")
    v.add_argument("--allow-signed", action="store_true", help="also run thm4-2.7 and thm5-2.9 on functions that take negative values")

    c = sub.add_parser("certify-convex", help="randomized search for an operator-convexity violation")
    c.add_argument("--function", required=True)
    c.add_argument("--interval", type=_interval, required=True)
    c.add_argument("--dim", type=int, required=True)
    c.add_argument("--trials", type=int, required=True)
    c.add_argument("--seed", type=_seed, default=0)

    e = sub.add_parser("example", help="the identity/square worked example on [0,1] and [-1,0]")
    e.add_argument("--seed", type=_seed, default=0)
    e.add_argument("--report", default=None)
    e.add_argument("--dim", type=_int_list, default=(1, 2, 3, 4))
    e.add_argument("--trials", type=int, default=250)
    e.add_argument("--format", choices=("json", "csv"), default="json")
    return parser


def _join_negative_values(argv):
    """Let ``--interval -1,0`` through argparse, which would read it as a flag."""
    out = []
    it = iter(argv)
    for arg in it:
        if arg == "--interval":
            nxt = next(it, None)
            if nxt is not None and _NEG_VALUE.match(nxt):
                out.append(f"--interval={nxt}")
                continue
            out.append(arg)
            if nxt is not None:
                out.append(nxt)
            continue
        out.append(arg)
    return out


def _print_summary(summary):
    print(
        f"checks={summary.total_checks} passes={summary.passes} "
        f"violations={summary.violations} skips={summary.skips} "
        f"wall_time={summary.wall_time:.2f}s"
    )
    if summary.worst_context is not None:
        w = summary.worst_context
        print(
            f"worst margin {summary.worst_margin:.6g} at {w['id']} dim={w['dim']} "
            f"trial={w['trial']} probe={w['probe']} functions={','.join(w['functions'])}"
        )


def main(argv=None) -> int:
    argv = _join_negative_values(sys.argv[1:] if argv is None else list(argv))
    args = build_parser().parse_args(argv)
    logging.basicConfig(
        level=logging.WARNING - 10 * args.verbose, format="%(levelname)s %(name)s: %(message)s"
    )
    try:
        if args.command == "verify":
            suites = tuple(s.strip() for s in args.suite.split(","))
            config = SuiteConfig(
                suites=suites, dims=args.dim, trials=args.trials, probes=args.probes,
                interval=args.interval, functions=args.functions, seed=args.seed,
                tol_abs=args.tol_abs, tol_rel=args.tol_rel, quad_panels=args.quad_panels,
                quad_nodes=args.quad_nodes, report_path=args.report, report_format=args.format,
                allow_signed=args.allow_signed,
            )
            summary, _ = run_suite(config)
            _print_summary(summary)
            return summary.exit_code
        if args.command == "certify-convex":
            verdict, code = certify_convex_command(args.function, args.interval, args.dim, args.trials, args.seed)
            print(f"{args.function}: {verdict.status.value} after {verdict.trials_used} trials")
            cx = verdict.counterexample
            if cx is not None:
                print(f"counterexample: trial={cx.trial_index} lambda={cx.lam:.6g} min_eig_of_gap={cx.min_eig_of_gap:.6g}")
            return code
        summary, _ = example_command(args.seed, args.report, args.dim, args.trials, fmt=args.format)
        _print_summary(summary)
        return summary.exit_code
    except ConfigInvalid as exc:
        print(f"CONFIG_INVALID: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except HHVerifyError as exc:
        print(f"{exc.code}: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except OSError as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())

"""Command-line entry point: ``coopcheck analyze`` and ``coopcheck fixtures``."""

from __future__ import annotations

import argparse
import logging
import sys

from coopcheck.causal import build_agent_graph, build_icgs
from coopcheck.dot import export_dot
from coopcheck.errors import ProblemError
from coopcheck.fixtures import FIXTURES
from coopcheck.oracle import DEFAULT_MAX_STATES
from coopcheck.problem_io import load_problem, serialize_problem
from coopcheck.report import AnalysisOptions, analyze
from coopcheck.signatures import is_homogeneous_team

EXIT_OK = 0
EXIT_INPUT = 2
EXIT_CAPS = 3
EXIT_INTERNAL = 4


def _positive(text: str) -> int:
    n = int(text)
    if n <= 0:
        raise argparse.ArgumentTypeError("must be positive")
    return n


def _assignment(text: str) -> tuple[str, str]:
    name, sep, value = text.rpartition("=")
    if not sep or not name or not value:
        raise argparse.ArgumentTypeError("expected VS=VALUE")
    return name, value


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="coopcheck", description="Required-cooperation analysis for multi-agent planning problems.")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    a = sub.add_parser("analyze", help="analyze a problem file")
    a.add_argument("problem")
    a.add_argument("--minimal-k", action="store_true", help="search for the smallest solving team")
    a.add_argument("--max-states", type=_positive, default=DEFAULT_MAX_STATES)
    a.add_argument("--dot", metavar="OUT", help="write the ICGS (or the first agent's graph) as DOT")
    a.add_argument("--json", metavar="OUT", help="write the JSON report")
    a.add_argument("--check-bounds", action="store_true", help="confirm applicable bounds with the oracle")
    a.add_argument("--union-ic-limit", type=_positive, default=1, metavar="K")
    a.add_argument("--super-init", type=_assignment, action="append", default=[], metavar="VS=VALUE",
                   help="initial value for a super-agent variable the agents disagree on")

    f = sub.add_parser("fixtures", help="print a built-in fixture as JSON")
    f.add_argument("name", choices=sorted(FIXTURES))
    return parser


def _analyze(args) -> int:
    try:
        problem = load_problem(args.problem)
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    options = AnalysisOptions(
        minimal_k=args.minimal_k,
        max_states=args.max_states,
        check_bounds=args.check_bounds,
        union_ic_limit=args.union_ic_limit,
        super_init=dict(args.super_init) or None,
    )
    report = analyze(problem, options)
    sys.stdout.write(report.summary())
    if args.json:
        with open(args.json, "w", encoding="utf-8") as fh:
            fh.write(report.to_json())
    if args.dot:
        if is_homogeneous_team(problem):
            g = build_icgs(problem)
        else:
            g = build_agent_graph(problem, problem.agents[0])
        export_dot(g, args.dot)
    return EXIT_CAPS if report.indeterminate else EXIT_OK


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING)
    try:
        if args.command == "fixtures":
            sys.stdout.write(serialize_problem(FIXTURES[args.name]()))
            return EXIT_OK
        return _analyze(args)
    except ProblemError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except Exception as exc:  # noqa: BLE001 - exit-code contract
        logging.getLogger(__name__).debug("internal error", exc_info=True)
        print(f"internal error: {exc!r}", file=sys.stderr)
        return EXIT_INTERNAL


if __name__ == "__main__":
    sys.exit(main())

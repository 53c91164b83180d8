"""Command line entry point.

Exit codes: 0 clean run, 1 verification failure or error state reached,
2 usage or load error, 3 exploration bound hit.
"""
from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path
from typing import Any, Sequence

from .benchmarks import FAMILIES, generate
from .errors import BoundExceeded, CorruptionError, DefinitionError, UnfporError
from .explorer import ExploreOptions, Explorer, calltree_dot, parse_cache_policy
from .oracle import cross_check
from .system import SystemDef, petri_net_from_dict, syntactic_independence, system_from_dict

EXIT_OK, EXIT_FAIL, EXIT_USAGE, EXIT_BOUND = 0, 1, 2, 3


def _cache_arg(text: str) -> str:
    try:
        parse_cache_policy(text)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None
    return text


def _nonneg(text: str) -> int:
    try:
        n = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected an integer, got {text!r}") from None
    if n < 0:
        raise argparse.ArgumentTypeError(f"expected a non-negative integer, got {n}")
    return n


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="unfpor", description="Unfolding-based partial order reduction explorer.")
    sub = p.add_subparsers(dest="command", required=True)

    r = sub.add_parser("run", help="explore a system file or a generated benchmark")
    r.add_argument("input", nargs="?", help="system or Petri net JSON file")
    r.add_argument("--gen", metavar="FAMILY:PARAM", help="explore a generated benchmark instead of a file")
    r.add_argument("--frontend", choices=["auto", "system", "petri-net"], default="auto")
    r.add_argument("--dependence", choices=["syntactic", "classic-net", "read-arcs", "explicit"], default=None,
                   help="default: as declared in a system file, classic-net for Petri nets")
    r.add_argument("--no-cutoffs", action="store_true")
    r.add_argument("--order", choices=["size", "total"], default="size")
    r.add_argument("--policy", choices=["ordered", "random"], default="ordered")
    r.add_argument("--seed", type=int, default=0)
    r.add_argument("--max-events", type=_nonneg, default=None)
    r.add_argument("--max-depth", type=_nonneg, default=None)
    r.add_argument("--stats", metavar="PATH")
    r.add_argument("--dot-unfolding", metavar="PATH")
    r.add_argument("--dot-calltree", metavar="PATH")
    r.add_argument("--verify", action="store_true", help="cross-check against the brute-force oracle")
    r.add_argument("--cache", type=_cache_arg, default="none", help="none, all or lru:N")

    g = sub.add_parser("gen", help="write a benchmark family instance as JSON")
    g.add_argument("family", metavar="FAMILY:PARAM", help=f"one of {', '.join(FAMILIES)}")
    g.add_argument("-o", "--output", metavar="PATH", help="output file (default: stdout)")
    return p


def _detect_frontend(doc: Any) -> str:
    if isinstance(doc, dict) and "places" in doc:
        return "petri-net"
    return "system"


def load_input(doc: Any, frontend: str, dependence: str | None, name: str) -> SystemDef:
    """Build the system for ``doc`` honouring the frontend and dependence flags."""
    if frontend == "auto":
        frontend = _detect_frontend(doc)
    if frontend == "petri-net":
        mode = {None: "classic", "classic-net": "classic", "read-arcs": "read-arcs"}.get(dependence)
        if mode is None:
            if dependence == "syntactic":
                sys_ = petri_net_from_dict(doc, "classic", name=name)
                return sys_.with_independence(syntactic_independence(sys_))
            raise DefinitionError(f"--dependence {dependence} does not apply to Petri nets", name)
        return petri_net_from_dict(doc, mode, name=name)
    if dependence in ("classic-net", "read-arcs"):
        raise DefinitionError(f"--dependence {dependence} needs a Petri net input", name)
    if dependence == "explicit" and not isinstance(doc.get("independence") if isinstance(doc, dict) else None, dict):
        raise DefinitionError("--dependence explicit needs an 'independence': {'dependent': [...]} entry", name)
    sys_ = system_from_dict(doc, name=name)
    if dependence == "syntactic":
        sys_ = sys_.with_independence(syntactic_independence(sys_))
    return sys_


def _read_doc(path: str) -> Any:
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise DefinitionError(exc.strerror or str(exc), path) from None
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise DefinitionError(exc.msg, f"{path}: line {exc.lineno}, column {exc.colno}") from None


def _write(path: str, text: str) -> None:
    Path(path).write_text(text, encoding="utf-8")


def _cmd_gen(args: argparse.Namespace) -> int:
    doc, _ = generate(args.family)
    text = json.dumps(doc, indent=2) + "\n"
    if args.output:
        _write(args.output, text)
    else:
        sys.stdout.write(text)
    return EXIT_OK


def _cmd_run(args: argparse.Namespace) -> int:
    if (args.input is None) == (args.gen is None):
        raise DefinitionError("give exactly one of INPUT or --gen", "arguments")
    if args.gen is not None:
        doc, frontend = generate(args.gen)
        name = args.gen
        if args.frontend != "auto" and args.frontend != frontend:
            raise DefinitionError(f"{args.gen} is a {frontend} benchmark", "--frontend")
    else:
        doc = _read_doc(args.input)
        frontend = args.frontend
        name = args.input
    try:
        system = load_input(doc, frontend, args.dependence, name)
    except DefinitionError as exc:
        if args.input is not None and not str(exc).startswith(args.input):
            raise DefinitionError(str(exc), args.input) from None
        raise

    opts = ExploreOptions(
        cutoffs=not args.no_cutoffs, order=args.order, policy=args.policy, seed=args.seed,
        max_events=args.max_events, max_depth=args.max_depth, cache=args.cache,
        record_tree=args.dot_calltree is not None,
    )
    explorer = Explorer(system, opts)
    try:
        report = explorer.run()
    except BoundExceeded as exc:
        print(f"error: exploration aborted, {exc}", file=sys.stderr)
        return EXIT_BOUND

    stats = report.stats()
    code = EXIT_OK
    if report.assertion_violations:
        print(f"assertion violation reached; witness: {' '.join(report.witness or []) or '(empty run)'}",
              file=sys.stderr)
        code = EXIT_FAIL
    if args.verify:
        verdict = cross_check(system, report)
        stats["verify"] = verdict.summary()
        for name_, c in verdict.checks.items():
            print(f"verify {name_}: {c.status} ({c.detail})", file=sys.stderr)
        if not verdict.ok:
            code = EXIT_FAIL

    text = json.dumps(stats, indent=2, sort_keys=True) + "\n"
    if args.stats:
        _write(args.stats, text)
    else:
        sys.stdout.write(text)
    if args.dot_unfolding:
        _write(args.dot_unfolding, explorer.store.to_dot(sorted(explorer.ever_in_U)))
    if args.dot_calltree and report.tree is not None:
        _write(args.dot_calltree, calltree_dot(report.tree))
    return code


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code == 0 else EXIT_USAGE
    try:
        if args.command == "gen":
            return _cmd_gen(args)
        return _cmd_run(args)
    except BoundExceeded as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_BOUND
    except CorruptionError as exc:
        print(f"internal error: {exc}", file=sys.stderr)
        return EXIT_FAIL
    except (UnfporError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())

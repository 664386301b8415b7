"""Command-line entry point: ``microasp <command> ...``.

Exit codes: 0 ok, 1 usage, 2 parse error, 3 validation error, 4 unsupported
feature; solve/oracle/check/dl-solve/dl-query use 10 (models, stable, yes)
and 20 (none, not stable, no).
"""

from __future__ import annotations

import argparse
import os
import sys
from typing import Optional, Sequence

from . import default_logic as dl
from .grounder import ground, ground_stats
from .model import GroundProgram, UnsupportedFeature, ValidationError, errors_of, validate
from .oracle import (
    LIMIT_ENV, OracleLimitExceeded, clark_completion, enumerate_bruteforce, is_stable,
    is_tight, oracle_limit,
)
from .parser import ParseError, parse_default_theory, parse_program
from .solver import HEURISTICS, IncompleteSearch, SearchConfig, Solver
from .theorybase import BenchmarkError, BenchmarkSpec, PROBLEMS, encode, graph_from_id, program_text

EXIT_OK, EXIT_USAGE, EXIT_PARSE, EXIT_VALIDATION, EXIT_UNSUPPORTED = 0, 1, 2, 3, 4
EXIT_SAT, EXIT_UNSAT = 10, 20


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def _read(path: str) -> str:
    if path == "-":
        return sys.stdin.read()
    try:
        with open(path, encoding="ascii", newline="") as fh:
            return fh.read()
    except (OSError, UnicodeDecodeError) as exc:
        raise UsageError(f"cannot read {path}: {exc}") from None


def _load_ground(path: str) -> GroundProgram:
    program = parse_program(_read(path))
    diags = validate(program)
    for d in diags:
        if d.severity == "warning":
            print(f"warning: {d}", file=sys.stderr)
    if errors_of(diags):
        raise ValidationError(errors_of(diags))
    return ground(program)


def _print_models(out, gp: GroundProgram, models: Sequence[tuple], more: bool) -> int:
    for i, m in enumerate(models, 1):
        out.write(f"Answer: {i}\n")
        out.write(" ".join(gp.name(a) for a in m) + "\n")
    out.write(f"Models: {len(models)}{'+' if more else ''}\n")
    return EXIT_SAT if models else EXIT_UNSAT


def cmd_ground(args, out) -> int:
    gp = _load_ground(args.file)
    if args.stats:
        out.write(f"{ground_stats(gp)}\n")
    else:
        out.write(gp.to_text())
    return EXIT_OK


def cmd_solve(args, out) -> int:
    gp = _load_ground(args.file)
    n = args.models
    if n < 0:
        raise UsageError("-n must be >= 0")
    cfg = SearchConfig(max_models=n + 1 if n else 0, heuristic=args.heuristic, seed=args.seed,
                       conflict_limit=args.conflict_limit, lookahead=args.lookahead)
    try:
        models = Solver(gp, cfg).solve().models
    except IncompleteSearch as exc:
        shown = exc.models.models[:n] if n else exc.models.models
        _print_models(out, gp, shown, more=True)
        raise
    more = bool(n) and len(models) > n
    return _print_models(out, gp, models[:n] if n else models, more)


def cmd_check(args, out) -> int:
    gp = _load_ground(args.file)
    ids = gp.ids_by_name()
    names = args.model.split()
    if all(name in ids for name in names) and is_stable(gp, {ids[name] for name in names}):
        out.write("STABLE\n")
        return EXIT_SAT
    out.write("NOT STABLE\n")
    return EXIT_UNSAT


def cmd_oracle(args, out) -> int:
    gp = _load_ground(args.file)
    limit = args.limit if args.limit is not None else oracle_limit()
    models = enumerate_bruteforce(gp, limit)
    return _print_models(out, gp, models.models, more=False)


def cmd_complete(args, out) -> int:
    gp = _load_ground(args.file)
    formula = clark_completion(gp)
    for line in formula.render(gp):
        out.write(line + "\n")
    out.write("TIGHT\n" if is_tight(gp) else "NOT TIGHT\n")
    return EXIT_OK


def cmd_bench(args, out) -> int:
    graph = graph_from_id(args.graph)
    if args.emit == "graph":
        out.write(graph.to_text())
        return EXIT_OK
    if args.problem is None:
        raise UsageError("--problem is required unless --emit graph")
    spec = BenchmarkSpec(args.problem, graph, args.k, "default" if args.emit == "default" else "program")
    if spec.target == "program":
        out.write(program_text(spec))
    else:
        out.write(str(encode(spec)))
    return EXIT_OK


def _print_extensions(out, exts: dl.ExtensionSet) -> int:
    for i, e in enumerate(exts, 1):
        out.write(f"Extension: {i}\n")
        if e.consistent:
            out.write(" ".join(str(l) for l in e.sorted_literals()) + "\n")
        else:
            out.write("INCONSISTENT\n")
    out.write(f"Extensions: {len(exts)}\n")
    return EXIT_SAT if len(exts) else EXIT_UNSAT


def cmd_dl_solve(args, out) -> int:
    theory = parse_default_theory(_read(args.file))
    return _print_extensions(out, dl.extensions(theory))


def cmd_dl_query(args, out) -> int:
    theory = parse_default_theory(_read(args.file))
    if not args.lit or args.lit.strip("-") == "":
        raise UsageError("--lit needs a literal such as 'a' or '-a'")
    answer = dl.query(theory, dl.lit(args.lit.strip()), args.mode)
    out.write("YES\n" if answer else "NO\n")
    return EXIT_SAT if answer else EXIT_UNSAT


def cmd_translate(args, out) -> int:
    gp = _load_ground(args.file)
    out.write(str(dl.program_to_defaults(gp)))
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="microasp", description="ground, solve and check small answer-set programs")
    sub = p.add_subparsers(dest="command", parser_class=_Parser)

    s = sub.add_parser("ground", help="print the ground program")
    s.add_argument("file")
    group = s.add_mutually_exclusive_group()
    group.add_argument("--stats", action="store_true")
    group.add_argument("--text", action="store_true", help="canonical ground program (default)")
    s.set_defaults(func=cmd_ground)

    s = sub.add_parser("solve", help="enumerate stable models")
    s.add_argument("file")
    s.add_argument("-n", dest="models", type=int, default=1, help="models to print, 0 for all")
    s.add_argument("--heuristic", choices=HEURISTICS, default="occurrence")
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--conflict-limit", type=int, default=None)
    s.add_argument("--lookahead", action="store_true")
    s.set_defaults(func=cmd_solve)

    s = sub.add_parser("check", help="test one candidate set for stability")
    s.add_argument("file")
    s.add_argument("--model", required=True, help='space-separated atoms, e.g. "a b"')
    s.set_defaults(func=cmd_check)

    s = sub.add_parser("oracle", help="brute-force enumeration of stable models")
    s.add_argument("file")
    s.add_argument("--limit", type=int, default=None,
                   help=f"open-atom cap (default 20, or ${LIMIT_ENV})")
    s.set_defaults(func=cmd_oracle)

    s = sub.add_parser("complete", help="print the completion and tightness")
    s.add_argument("file")
    s.set_defaults(func=cmd_complete)

    s = sub.add_parser("bench", help="generate a benchmark instance")
    s.add_argument("--problem", choices=PROBLEMS)
    s.add_argument("--graph", required=True, help="FAMILY(PARAMS), e.g. cycle(8) or random(10,20,42)")
    s.add_argument("--k", type=int, default=None)
    s.add_argument("--emit", choices=("program", "default", "graph"), default="program")
    s.set_defaults(func=cmd_bench)

    s = sub.add_parser("dl-solve", help="compute extensions of a default theory")
    s.add_argument("file")
    s.set_defaults(func=cmd_dl_solve)

    s = sub.add_parser("dl-query", help="brave or skeptical membership of a literal")
    s.add_argument("file")
    s.add_argument("--lit", required=True)
    s.add_argument("--mode", choices=("brave", "skeptical"), required=True)
    s.set_defaults(func=cmd_dl_query)

    s = sub.add_parser("translate", help="translate a program into a default theory")
    s.add_argument("file")
    s.add_argument("--to", choices=("default",), required=True)
    s.set_defaults(func=cmd_translate)
    return p


def run(argv: Optional[Sequence[str]] = None, out=None) -> int:
    out = out or sys.stdout
    try:
        args = build_parser().parse_args(argv)
        if args.command is None:
            raise UsageError("a command is required")
        return args.func(args, out)
    except UsageError as exc:
        code, msg = EXIT_USAGE, str(exc)
    except ParseError as exc:
        code, msg = EXIT_PARSE, f"parse error at {exc}"
    except ValidationError as exc:
        code, msg = EXIT_VALIDATION, f"invalid program: {exc}"
    except UnsupportedFeature as exc:
        code, msg = EXIT_UNSUPPORTED, f"unsupported feature: {exc}"
    except OracleLimitExceeded as exc:
        code, msg = EXIT_USAGE, str(exc)
    except BenchmarkError as exc:
        code, msg = EXIT_USAGE, str(exc)
    except IncompleteSearch as exc:
        code, msg = EXIT_UNSAT if not len(exc.models) else EXIT_SAT, f"incomplete: {exc}"
    except SystemExit as exc:  # --help
        return int(exc.code or 0)
    print(f"error: {msg}", file=sys.stderr)
    return code


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()

"""Model-based fault localization for MiniLang programs.

Exit status: 0 success / consistent, 1 anomaly detected, 2 usage or input
error, 3 internal or oracle error.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path
from typing import Sequence

from . import __version__
from .depmodel import (
    Granularity, compare_dependences, compute_dependences, dep_oracle,
    format_deps, read_deps,
)
from .diagnosis import (
    DEFAULT_MAX_CARDINALITY, diagnose, format_diagnoses, minimal_hitting_sets, read_conflicts,
)
from .errors import CorpusInconsistent, MBDebugError, NotApplicable, OracleError, ParseError, SemanticError
from .faultlab import ALL_KINDS, CORPUS_DIR, MutationKind, inject_mutation, load_manifest, run_benchmark
from .minilang import Limits, header, parse_file, pretty, roman
from .valuemodel import read_test, value_oracle

EXIT_OK, EXIT_ANOMALY, EXIT_USAGE, EXIT_INTERNAL = 0, 1, 2, 3


class UsageError(Exception):
    pass


def _emit(args, inputs: dict, result, text: str) -> None:
    if args.format == "json":
        doc = {"command": args.command, "inputs": inputs, "result": result, "version": __version__}
        sys.stdout.write(json.dumps(doc, indent=2) + "\n")
    else:
        sys.stdout.write(text)


def _load_program(path):
    try:
        return parse_file(path)
    except OSError as exc:
        raise UsageError(f"{path}: cannot read: {exc.strerror or exc}") from exc
    except (ParseError, SemanticError) as exc:
        raise UsageError(f"{path}: {exc}") from exc


def _load(reader, path):
    try:
        return reader(path)
    except OSError as exc:
        raise UsageError(f"{path}: cannot read: {exc.strerror or exc}") from exc
    except ValueError as exc:
        raise UsageError(f"{path}: {exc}") from exc


def _label(sid: int) -> str:
    return roman(sid)


def _set_text(ids) -> str:
    return "{" + ", ".join(_label(i) for i in sorted(ids)) + "}"


def _pairs(pairs) -> list[list[str]]:
    return [list(p) for p in sorted(pairs)]


# ---------------------------------------------------------------------------
# Subcommands


def cmd_parse(args) -> int:
    program = _load_program(args.program)
    text = pretty(program)
    result = {
        "source": text,
        "statements": [
            {"id": s.id, "label": _label(s.id), "line": s.line, "text": header(s)}
            for s in program.statements()
        ],
    }
    _emit(args, {"program": args.program}, result, text)
    return EXIT_OK


def cmd_deps(args) -> int:
    program = _load_program(args.program)
    deps = compute_dependences(program, Granularity(args.granularity))
    result = {
        "granularity": args.granularity,
        "pairs": [
            {"target": t, "source": s, "statements": sorted(deps.provenance[(t, s)])}
            for t, s in sorted(deps.pairs)
        ],
    }
    _emit(args, {"program": args.program, "granularity": args.granularity}, result, format_deps(deps))
    return EXIT_OK


def cmd_check(args) -> int:
    program = _load_program(args.program)
    spec = _load(read_deps, args.spec)
    computed = compute_dependences(program, Granularity(args.granularity))
    diff = compare_dependences(computed, spec)
    lines = [f"missing {t} <- {s}\n" for t, s in sorted(diff.missing)]
    lines += [f"spurious {t} <- {s}\n" for t, s in sorted(diff.spurious)]
    result = {"missing": _pairs(diff.missing), "spurious": _pairs(diff.spurious),
              "consistent": diff.consistent}
    _emit(args, {"program": args.program, "spec": args.spec, "granularity": args.granularity},
          result, "".join(lines))
    return EXIT_OK if diff.consistent else EXIT_ANOMALY


def cmd_localize(args) -> int:
    program = _load_program(args.program)
    limits = Limits(args.loop_limit)
    inputs = {"program": args.program, "model": args.model, "max_card": args.max_card}
    if args.model == "value":
        if not args.test:
            raise UsageError("--model value needs at least one --test")
        tests = [_load(read_test, p) for p in args.test]
        try:
            oracle = value_oracle(program, tests, limits)
        except ValueError as exc:
            raise UsageError(str(exc)) from exc
        inputs["tests"] = list(args.test)
    else:
        if not args.spec:
            raise UsageError("--model dep needs --spec")
        spec = _load(read_deps, args.spec)
        granularity = Granularity(args.granularity)
        oracle = dep_oracle(program, spec, granularity)
        inputs.update(spec=args.spec, granularity=args.granularity)
    report = diagnose(oracle, program.assignment_ids(), args.max_card, minimize=args.minimize)

    anomaly = report.diagnoses != [frozenset()]
    stmts = {s.id: s for s in program.statements()}
    lines = [f"model: {args.model}\n"]
    if args.model == "dep":
        diff = compare_dependences(compute_dependences(program, granularity), spec)
        lines += [f"missing {t} <- {s}\n" for t, s in sorted(diff.missing)]
        lines += [f"spurious {t} <- {s}\n" for t, s in sorted(diff.spurious)]
    if not anomaly:
        lines.append("no anomaly: program is consistent with its specification\n")
    else:
        lines.append("conflicts: " + " ".join(_set_text(c) for c in report.conflicts_used) + "\n")
        lines.append(f"diagnoses ({len(report.diagnoses)}):\n")
        for d in report.diagnoses:
            lines.append(f"  {_set_text(d)}\n")
            for sid in sorted(d):
                s = stmts[sid]
                lines.append(f"      {_label(sid):>5}  line {s.line:<4} {header(s)}\n")
        if not report.diagnoses:
            lines.append(f"  none within {args.max_card} statements\n")
    lines.append(f"oracle calls: {report.oracle_calls}\n")

    result = {
        "anomaly": anomaly,
        "diagnoses": [
            [{"id": sid, "label": _label(sid), "line": stmts[sid].line} for sid in sorted(d)]
            for d in report.diagnoses
        ],
        "conflicts": [sorted(c) for c in report.conflicts_used],
        "oracle_calls": report.oracle_calls,
    }
    _emit(args, inputs, result, "".join(lines))
    return EXIT_ANOMALY if anomaly else EXIT_OK


def cmd_inject(args) -> int:
    program = _load_program(args.program)
    kind = MutationKind(args.kind)
    try:
        mutant, mutation = inject_mutation(program, args.seed, kind)
    except NotApplicable as exc:
        raise UsageError(f"{args.program}: {exc}") from exc
    text = f"# {mutation.describe()}\n" + pretty(mutant)
    result = {"mutation": mutation.to_dict(), "source": pretty(mutant)}
    _emit(args, {"program": args.program, "kind": kind.value, "seed": args.seed}, result, text)
    return EXIT_OK


def cmd_bench(args) -> int:
    manifest = Path(args.manifest) if args.manifest else CORPUS_DIR / "manifest.txt"
    try:
        corpus = load_manifest(manifest)
    except OSError as exc:
        raise UsageError(f"{manifest}: cannot read: {exc.strerror or exc}") from exc
    except (ValueError, ParseError, SemanticError) as exc:
        raise UsageError(f"{manifest}: {exc}") from exc
    kinds = [MutationKind(k) for k in args.kinds] if args.kinds else list(ALL_KINDS)
    seeds = list(range(args.seed, args.seed + args.seeds))
    report = run_benchmark(corpus, seeds, kinds, limits=Limits(args.loop_limit),
                           max_cardinality=args.max_card, jobs=args.jobs)
    inputs = {
        "manifest": str(args.manifest or "<bundled>"),
        "seeds": seeds,
        "kinds": [k.value for k in kinds],
        "max_card": args.max_card,
    }
    _emit(args, inputs, report.to_dict(), report.table())
    return EXIT_OK


def cmd_hs(args) -> int:
    conflicts = _load(read_conflicts, args.conflicts)
    if any(not c for c in conflicts):
        raise UsageError(f"{args.conflicts}: empty conflict")
    result = minimal_hitting_sets(conflicts, args.max_card)
    _emit(args, {"conflicts": args.conflicts, "max_card": args.max_card},
          [sorted(d) for d in result], format_diagnoses(result))
    return EXIT_OK


# ---------------------------------------------------------------------------


def _positive(text: str) -> int:
    value = int(text)
    if value < 1:
        raise argparse.ArgumentTypeError("must be >= 1")
    return value


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="mbdebug", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, *, granularity=False, card=False, limit=False):
        p.add_argument("--format", choices=("text", "json"), default="text")
        if granularity:
            p.add_argument("--granularity", choices=("local", "global"), default="local")
        if card:
            p.add_argument("--max-card", type=_positive, default=DEFAULT_MAX_CARDINALITY)
        if limit:
            p.add_argument("--loop-limit", type=_positive, default=Limits().max_loop_iterations)

    p = sub.add_parser("parse", help="parse and pretty-print a program")
    p.add_argument("program")
    common(p)
    p.set_defaults(func=cmd_parse)

    p = sub.add_parser("deps", help="list the dependences of a program")
    p.add_argument("--program", required=True)
    common(p, granularity=True)
    p.set_defaults(func=cmd_deps)

    p = sub.add_parser("check", help="compare dependences against a specification")
    p.add_argument("--program", required=True)
    p.add_argument("--spec", required=True)
    common(p, granularity=True)
    p.set_defaults(func=cmd_check)

    p = sub.add_parser("localize", help="compute minimal diagnoses")
    p.add_argument("--model", choices=("value", "dep"), required=True)
    p.add_argument("--program", required=True)
    p.add_argument("--test", action="append", help="test case file (repeatable)")
    p.add_argument("--spec")
    p.add_argument("--minimize", action="store_true", help="shrink conflicts by greedy deletion")
    common(p, granularity=True, card=True, limit=True)
    p.set_defaults(func=cmd_localize)

    p = sub.add_parser("inject", help="inject a single-statement fault")
    p.add_argument("--program", required=True)
    p.add_argument("--kind", choices=[k.value for k in MutationKind], required=True)
    p.add_argument("--seed", type=int, default=0)
    common(p)
    p.set_defaults(func=cmd_inject)

    p = sub.add_parser("bench", help="compare both models on seeded mutants")
    p.add_argument("--manifest", help="corpus manifest (default: bundled corpus)")
    p.add_argument("--seed", type=int, default=0, help="first seed")
    p.add_argument("--seeds", type=_positive, default=4, help="number of seeds per kind")
    p.add_argument("--kinds", nargs="+", choices=[k.value for k in MutationKind])
    p.add_argument("--jobs", type=_positive, default=1)
    common(p, card=True, limit=True)
    p.set_defaults(func=cmd_bench)

    p = sub.add_parser("hs", help="minimal hitting sets of a conflict file")
    p.add_argument("conflicts")
    common(p, card=True)
    p.set_defaults(func=cmd_hs)
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code else EXIT_OK
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"mbdebug {args.command}: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except CorpusInconsistent as exc:
        print(f"mbdebug {args.command}: {exc}", file=sys.stderr)
        return EXIT_INTERNAL
    except OracleError as exc:
        print(f"mbdebug {args.command}: {exc}", file=sys.stderr)
        return EXIT_INTERNAL
    except MBDebugError as exc:
        print(f"mbdebug {args.command}: internal error: {exc}", file=sys.stderr)
        return EXIT_INTERNAL


if __name__ == "__main__":
    sys.exit(main())

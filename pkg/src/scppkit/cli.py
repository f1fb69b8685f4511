"""Command line: transform, generate, reduce, compare and oracle.

Exit status is 0 on success or equivalence, 1 on inequivalence and 2 on
any error.
"""
from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from .engine import EngineError
from .environment import ConfigError
from .frontend import MooError, parse_source
from .interpreter import InterpError, run_program
from .pipeline import TransformFailed, generate, models_for
from .project import ProjectError, load_project, source_path
from .statespace import (AutFormatError, ExplorationError, compare, dump_structured, export_aut,
                         import_aut, minimize)
from .statespace.equivalence import DeterminizationLimit

EXIT_OK, EXIT_INEQUIVALENT, EXIT_ERROR = 0, 1, 2


def _write(text: str, out):
    if out is None or out == "-":
        sys.stdout.write(text)
    else:
        Path(out).write_text(text)


def _read_aut(path):
    try:
        return import_aut(Path(path).read_text())
    except OSError as e:
        raise AutFormatError(f"cannot read {path}: {e.strerror}") from None
    except AutFormatError as e:
        raise AutFormatError(f"{path}: {e}") from None


def cmd_transform(args) -> int:
    project = load_project(args.project)
    path = source_path(project, args.project)
    models = models_for(path.read_text(), str(path))
    text = "\n".join(models[name].dump() for name in models)
    _write(text, args.output)
    status = EXIT_OK
    for m in models.values():
        for d in m.diagnostics:
            print(f"{path}:{d}", file=sys.stderr)
            if d.severity == "error":
                status = EXIT_ERROR
    return status


def cmd_generate(args) -> int:
    project = load_project(args.project)
    gen = generate(project, args.project)
    lts = gen.lts
    if args.relation:
        lts = minimize(lts, args.relation, args.keep_tau_loops)
    _write(export_aut(lts), args.output)
    if args.structured:
        Path(args.structured).write_text(dump_structured(lts))
    return EXIT_OK


def cmd_reduce(args) -> int:
    lts = _read_aut(args.input)
    _write(export_aut(minimize(lts, args.relation, args.keep_tau_loops)), args.output)
    return EXIT_OK


def cmd_compare(args) -> int:
    a, b = _read_aut(args.left), _read_aut(args.right)
    verdict = compare(a, b, args.relation)
    if verdict.equivalent:
        print("equivalent")
        return EXIT_OK
    print("inequivalent")
    if verdict.counterexample:
        print(f"counterexample (accepted by {verdict.accepted_by} only):")
        for lbl in verdict.counterexample:
            print(f"  {lbl}")
    else:
        print("no distinguishing trace: the branching structure differs")
    return EXIT_INEQUIVALENT


def cmd_oracle(args) -> int:
    tu = parse_source(Path(args.source).read_text(), args.source)
    try:
        script = json.loads(Path(args.script).read_text())
    except json.JSONDecodeError as e:
        raise ProjectError(f"{args.script}:{e.lineno}:{e.colno}: {e.msg}") from None
    res = run_program(tu, script)
    _write("".join(line + "\n" for line in res.log), args.output)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="scppkit", description="Extract behavioral models from MOO classes.")
    sub = p.add_subparsers(dest="command", required=True)

    t = sub.add_parser("transform", help="print the SCPP form of every class")
    t.add_argument("project")
    t.add_argument("-o", "--output")
    t.set_defaults(func=cmd_transform)

    g = sub.add_parser("generate", help="explore the configured system into an .aut file")
    g.add_argument("project")
    g.add_argument("-o", "--output")
    g.add_argument("--relation", choices=("strong", "branching"), help="minimize before writing")
    g.add_argument("--keep-tau-loops", action="store_true")
    g.add_argument("--structured", metavar="FILE", help="also write a JSON dump of the LTS")
    g.set_defaults(func=cmd_generate)

    r = sub.add_parser("reduce", help="minimize an .aut file")
    r.add_argument("input")
    r.add_argument("--relation", choices=("strong", "branching"), default="branching")
    r.add_argument("--keep-tau-loops", action="store_true")
    r.add_argument("-o", "--output")
    r.set_defaults(func=cmd_reduce)

    c = sub.add_parser("compare", help="check two .aut files for equivalence")
    c.add_argument("left")
    c.add_argument("right")
    c.add_argument("--relation", choices=("strong", "branching", "weak-trace"), default="weak-trace")
    c.set_defaults(func=cmd_compare)

    o = sub.add_parser("oracle", help="run a script with the reference interpreter")
    o.add_argument("source")
    o.add_argument("script")
    o.add_argument("-o", "--output")
    o.set_defaults(func=cmd_oracle)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except TransformFailed as e:
        print(f"error: transformation failed\n{e}", file=sys.stderr)
    except ExplorationError as e:
        print(f"error: {e}", file=sys.stderr)
    except (MooError, ProjectError, ConfigError, EngineError, InterpError, AutFormatError,
            DeterminizationLimit, OSError, ValueError) as e:
        print(f"error: {e}", file=sys.stderr)
    return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())

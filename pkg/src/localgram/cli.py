"""Command-line entry point: compile, annotate, eval, count, export, suggest, dot.

Exit codes: 0 success, 1 validation or parse failure, 2 runtime error.
"""
from __future__ import annotations

import argparse
import logging
import sys
from contextlib import contextmanager
from pathlib import Path

from .annotator import AnnotationError, annotate_corpus, suggest
from .compiler import (CompileError, compile_graphset, family_counts, format_count, parse_rtn,
                       serialize_rtn, count_paths, flatten)
from .document import TAG_RE
from .evaluation import AlignmentError, score
from .graph import GraphError, emit_dot, validate_graphset
from .lexicon import LexiconError
from .resources import load_graphs, load_lexicon, load_schema, read_text
from .schema import (ENTITY_LABEL, AnnotatedTextError, SchemaError, export_bio,
                     parse_annotated, validate_label)

log = logging.getLogger("localgram")

VALIDATION_ERRORS = (LexiconError, GraphError, SchemaError, CompileError, AnnotatedTextError,
                     AlignmentError, AnnotationError)


class UsageError(Exception):
    pass


def _require(path, what: str) -> Path:
    if path is None:
        raise UsageError(f"--{what} is required")
    p = Path(path)
    if not p.exists():
        raise UsageError(f"{what} not found: {p}")
    return p


@contextmanager
def _output(path):
    if path is None or path == "-":
        yield sys.stdout
    else:
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            yield fh


def _input_lines(path):
    if path is None or path == "-":
        return sys.stdin
    return open(_require(path, "in"), encoding="utf-8")


def _load_lexicon(args):
    if args.lexicon is None:
        return None
    rules = _require(args.rules, "rules") if args.rules else None
    return load_lexicon(_require(args.lexicon, "lexicon"), rules)


def _check_labels(gs, schema) -> list[str]:
    problems = []
    for g in gs.graphs.values():
        for box in g.boxes:
            if not box.output:
                continue
            for m in TAG_RE.finditer(box.output):
                closing, label, attr = m.group(1), m.group(2), m.group(3)
                if closing:
                    continue
                try:
                    if label == ENTITY_LABEL:
                        validate_label(attr or "", schema)
                    else:
                        validate_label(label, schema)
                except SchemaError as exc:
                    problems.append(f"ERROR {g.name} box {box.id}: {exc}")
    return problems


def _load_rtn(args):
    if getattr(args, "artifact", None):
        return parse_rtn(read_text(_require(args.artifact, "artifact")))
    gs = load_graphs(_require(args.graphs, "graphs"), args.main)
    return compile_graphset(gs)


def cmd_compile(args) -> int:
    lexicon = _load_lexicon(args)
    gs = load_graphs(_require(args.graphs, "graphs"), args.main)
    report = validate_graphset(gs)
    lines = report.lines()
    if args.schema:
        lines = _check_labels(gs, load_schema(_require(args.schema, "schema"))) + lines
    for line in lines:
        print(line, file=sys.stderr)
    if not report.ok or any(l.startswith("ERROR") for l in lines):
        return 1
    rtn = compile_graphset(gs)
    with _output(args.out) as fh:
        fh.write(serialize_rtn(rtn))
    n_forms = sum(1 for _ in lexicon.forms) if lexicon is not None else 0
    print(f"compiled {len(rtn.automata)} graphs; lexicon forms: {n_forms}", file=sys.stderr)
    return 0


def cmd_annotate(args) -> int:
    lexicon = _load_lexicon(args)
    rtn = _load_rtn(args)
    errors: list = []
    with _output(args.out) as fh:
        for doc in annotate_corpus(_input_lines(args.inp), rtn, lexicon, errors,
                                   workers=args.workers):
            fh.write(doc.serialize() + "\n")
    for lineno, msg in errors:
        print(f"line {lineno}: {msg}", file=sys.stderr)
    return 2 if errors else 0


def _read_annotated(path) -> list:
    docs = []
    for lineno, line in enumerate(read_text(path).splitlines(), 1):
        try:
            docs.append(parse_annotated(line))
        except AnnotatedTextError as exc:
            raise AnnotatedTextError(f"{path} line {lineno}: {exc}", exc.offset) from None
    return docs


def cmd_eval(args) -> int:
    gold = _read_annotated(_require(args.gold, "gold"))
    pred = _read_annotated(_require(args.pred or args.inp, "pred"))
    report = score(gold, pred)
    print(report.table(args.name), end="")
    if args.out:
        with _output(args.out) as fh:
            fh.write(report.dump())
    return 0


def cmd_count(args) -> int:
    rtn = _load_rtn(args)
    families = args.family or None
    counts = family_counts(rtn, families, args.depth_limit)
    total = count_paths(flatten(rtn, args.depth_limit))
    width = max([len(rtn.main)] + [len(k) for k in counts]) + 2
    with _output(args.out) as fh:
        fh.write(f"{'Graph family':<{width}}# of patterns\n")
        for name, n in counts.items():
            fh.write(f"{name:<{width}}{format_count(n)}\n")
        fh.write(f"{rtn.main:<{width}}{format_count(total)}\n")
        fh.write("(each lexical mask counts as one pattern)\n")
    return 0


def cmd_export(args) -> int:
    schema = load_schema(_require(args.schema, "schema")) if args.schema else None
    with _output(args.out) as fh:
        for lineno, line in enumerate(_input_lines(args.inp), 1):
            try:
                doc = parse_annotated(line.rstrip("\r\n"))
            except AnnotatedTextError as exc:
                raise AnnotatedTextError(f"line {lineno}: {exc}", exc.offset) from None
            if schema is not None:
                for ann in doc.annotations:
                    validate_label(ann.attribute if ann.label == ENTITY_LABEL else ann.label,
                                   schema)
            fh.write(export_bio(doc))
    return 0


def cmd_suggest(args) -> int:
    lexicon = _load_lexicon(args)
    rtn = _load_rtn(args)
    table = suggest(_input_lines(args.inp), rtn, lexicon, args.n)
    if args.top:
        table = table[:args.top]
    with _output(args.out) as fh:
        for gram, count in table:
            fh.write(f"{count}\t{' '.join(gram)}\n")
    return 0


def cmd_dot(args) -> int:
    gs = load_graphs(_require(args.graphs, "graphs"), args.main)
    names = args.graph or list(gs.graphs)
    for name in names:
        if name not in gs.graphs:
            raise UsageError(f"no graph named {name}")
    if args.out and len(names) > 1:
        out = Path(args.out)
        out.mkdir(parents=True, exist_ok=True)
        for name in names:
            (out / f"{name}.dot").write_text(emit_dot(gs.graphs[name]), encoding="utf-8")
        return 0
    with _output(args.out) as fh:
        for name in names:
            fh.write(emit_dot(gs.graphs[name]))
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="localgram", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, resources=True):
        p.add_argument("--in", dest="inp", help="input file (default stdin)")
        p.add_argument("--out", help="output file (default stdout)")
        if resources:
            p.add_argument("--lexicon")
            p.add_argument("--rules")
            p.add_argument("--graphs", help="graph file or directory of *.lgg files")
            p.add_argument("--main", default="ASPECT_VALUE", help="main graph name")
            p.add_argument("--schema")
        return p

    p = common(sub.add_parser("compile", help="validate resources and write the automaton"))
    p.set_defaults(func=cmd_compile)

    p = common(sub.add_parser("annotate", help="annotate a corpus, one document per line"))
    p.add_argument("--artifact", help="compiled automaton (instead of --graphs)")
    p.add_argument("--workers", type=int, default=1)
    p.set_defaults(func=cmd_annotate)

    p = common(sub.add_parser("eval", help="score predictions against gold"), resources=False)
    p.add_argument("--gold", required=True)
    p.add_argument("--pred", help="predicted annotated file (or --in)")
    p.add_argument("--name", default="EVAD", help="row name in the table")
    p.set_defaults(func=cmd_eval)

    p = common(sub.add_parser("count", help="count recognized patterns per family"))
    p.add_argument("--artifact")
    p.add_argument("--family", action="append", help="graph to count (repeatable)")
    p.add_argument("--depth-limit", type=int, default=None)
    p.set_defaults(func=cmd_count)

    p = common(sub.add_parser("export", help="annotated text to BIO"), resources=False)
    p.add_argument("--schema")
    p.set_defaults(func=cmd_export)

    p = common(sub.add_parser("suggest", help="frequent unannotated n-grams"))
    p.add_argument("--artifact")
    p.add_argument("-n", type=int, default=2)
    p.add_argument("--top", type=int, default=0)
    p.set_defaults(func=cmd_suggest)

    p = common(sub.add_parser("dot", help="write Graphviz descriptions of graphs"))
    p.add_argument("--graph", action="append", help="graph name (repeatable)")
    p.set_defaults(func=cmd_dot)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.ERROR,
                        format="%(levelname)s %(message)s")
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except VALIDATION_ERRORS as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except (OSError, RuntimeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())

"""Command-line entry point.

Subcommands: build, check, eval, derive-fp, export-xml.  Diagnostics go
to standard error, one per line, as `path:line:col: CODE: message`.
Exit codes: 0 success, 1 any parse/elaboration error, 2 step limit.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from .document import ContextBlock, Document, DocumentAST, DocumentStore
from .context import Equation
from .errors import LeibnizError, StepLimitExceeded, UnknownLabel
from .exprs import parse_term, render_term
from .fp_derive import derive_fp
from .htmlview import render_html
from .rewrite import DEFAULT_STEP_LIMIT, is_ground, normalize
from .xmlio import emit_xml


def main(argv: list[str] | None = None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        return args.handler(args)
    except StepLimitExceeded as e:
        print(e.diagnostic(str(args.document)), file=sys.stderr)
        return 2
    except LeibnizError as e:
        print(e.diagnostic(str(args.document)), file=sys.stderr)
        return 1
    except OSError as e:
        print(f"{args.document}:0:0: IOError: {e}", file=sys.stderr)
        return 1


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="lzd", description=__doc__)
    sub = parser.add_subparsers(dest="subcommand", required=True)

    p = sub.add_parser("build", help="write the reader view (HTML) and machine view (XML)")
    p.add_argument("document", type=Path)
    p.add_argument("-o", "--output-dir", type=Path, default=Path("."))
    p.add_argument("--steps", type=int, default=DEFAULT_STEP_LIMIT)
    p.set_defaults(handler=_cmd_build)

    p = sub.add_parser("check", help="elaborate only; report diagnostics")
    p.add_argument("document", type=Path)
    p.set_defaults(handler=_cmd_check)

    p = sub.add_parser("eval", help="normalize an expression (or #label asset) in a context")
    p.add_argument("document", type=Path)
    p.add_argument("context")
    p.add_argument("expr", metavar="EXPR-or-#label")
    p.add_argument("--steps", type=int, default=DEFAULT_STEP_LIMIT)
    p.add_argument("--trace", action="store_true", help="write the rewrite trace to stderr")
    p.set_defaults(handler=_cmd_eval)

    p = sub.add_parser("derive-fp", help="append the binary64 derivation of a context")
    p.add_argument("document", type=Path)
    p.add_argument("context")
    p.add_argument("-o", "--output", type=Path, required=True)
    p.add_argument("--steps", type=int, default=DEFAULT_STEP_LIMIT)
    p.set_defaults(handler=_cmd_derive)

    p = sub.add_parser("export-xml", help="write the machine view only")
    p.add_argument("document", type=Path)
    p.add_argument("-o", "--output", type=Path, required=True)
    p.add_argument("--steps", type=int, default=DEFAULT_STEP_LIMIT)
    p.set_defaults(handler=_cmd_export)

    return parser


def _cmd_build(args) -> int:
    doc = DocumentStore(step_limit=args.steps).load(args.document)
    args.output_dir.mkdir(parents=True, exist_ok=True)
    (args.output_dir / f"{doc.name}.html").write_bytes(render_html(doc))
    (args.output_dir / f"{doc.name}.xml").write_bytes(emit_xml(doc))
    return 0


def _cmd_check(args) -> int:
    DocumentStore(run_evals=False).load(args.document)
    return 0


def _cmd_eval(args) -> int:
    doc = DocumentStore(step_limit=args.steps).load(args.document)
    ctx = doc.context(args.context)
    if args.expr.startswith("#"):
        value = ctx.lookup_asset(args.expr[1:])
        if isinstance(value, Equation):
            left = _normalized(value.left, ctx, args)
            right = _normalized(value.right, ctx, args)
            print(f"{left} = {right}")
            return 0
        term = value
    else:
        term = parse_term(args.expr, ctx)
    print(_normalized(term, ctx, args))
    return 0


def _normalized(term, ctx, args) -> str:
    if not is_ground(term):
        raise UnknownLabel("cannot evaluate a term containing variables")
    nf, trace = normalize(term, ctx, args.steps)
    if args.trace:
        rendered = trace.render()
        if rendered:
            print(rendered, file=sys.stderr)
    return render_term(nf)


def _cmd_derive(args) -> int:
    doc = DocumentStore(step_limit=args.steps).load(args.document)
    ctx = doc.context(args.context)
    derived, report = derive_fp(ctx)
    for conv in report.inexact:
        print(
            f"inexact: {args.context}: {conv.where}: {conv.value} -> 0x{conv.bits:016X}",
            file=sys.stderr,
        )
    extended = Document(
        doc.name,
        DocumentAST(doc.name, doc.ast.imports, doc.ast.blocks + (ContextBlock(derived.name, ()),)),
        doc.contexts + (derived,),
        doc.evaluated,
    )
    args.output.parent.mkdir(parents=True, exist_ok=True)
    args.output.write_bytes(emit_xml(extended))
    return 0


def _cmd_export(args) -> int:
    doc = DocumentStore(step_limit=args.steps).load(args.document)
    args.output.parent.mkdir(parents=True, exist_ok=True)
    args.output.write_bytes(emit_xml(doc))
    return 0


if __name__ == "__main__":
    sys.exit(main())

"""Author documents: parsing `.lzd` markup and building resolved documents.

A document is narrative text with embedded commands.  At the top level
only `@import{name = path}` and `@context{NAME}{body}` are recognized;
inside a context body the commands are `@use`, `@extend`, `@sort`,
`@op`, `@var`, `@rule`, `@term`, `@equation` and `@eval`.  Everything
else is narrative.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Union

from .builtins import BUILTINS_DOCUMENT, builtin_context
from .context import CONTEXT_DECL_KINDS, Context, Decl, elaborate_context
from .errors import (
    ImportCycle,
    ImportNotFound,
    LeibnizError,
    ParseError,
    UnknownReference,
)
from .exprs import line_col, parse_term
from .rewrite import DEFAULT_STEP_LIMIT, is_ground, normalize
from .terms import Term

LZD_SUFFIX = ".lzd"


@dataclass(frozen=True)
class NarrativeBlock:
    text: str


@dataclass(frozen=True)
class EvalRequest:
    body: str
    line: int
    col: int


@dataclass(frozen=True)
class ImportDecl:
    name: str
    path: str
    line: int
    col: int


BodyItem = Union[NarrativeBlock, Decl, EvalRequest]


@dataclass(frozen=True)
class ContextBlock:
    name: str
    items: tuple[BodyItem, ...]
    line: int = 0
    col: int = 0


@dataclass(frozen=True)
class DocumentAST:
    name: str
    imports: tuple[ImportDecl, ...]
    blocks: tuple[Union[NarrativeBlock, ContextBlock], ...]


@dataclass(frozen=True)
class EvalResult:
    input: Term
    normal_form: Term


@dataclass(frozen=True, eq=True)
class Document:
    name: str
    ast: DocumentAST
    contexts: tuple[Context, ...]
    evaluated: dict[tuple[str, int], EvalResult]

    __hash__ = None

    def context(self, name: str) -> Context:
        for ctx in self.contexts:
            if ctx.name == name:
                return ctx
        raise UnknownReference(f"document {self.name} has no context {name!r}")

    def formal_content(self):
        """Everything the machine view carries (narrative excluded)."""
        return self.contexts, self.evaluated


# ---------------------------------------------------------------------------
# parsing

_TOP_COMMANDS = ("import", "context")
_BODY_COMMANDS = CONTEXT_DECL_KINDS + ("eval",)


def parse_document(text: str, name: str = "document") -> DocumentAST:
    imports: list[ImportDecl] = []
    blocks: list[Union[NarrativeBlock, ContextBlock]] = []
    context_names: set[str] = set()
    narrative_start = 0
    i = 0
    n = len(text)

    def flush_narrative(upto: int):
        chunk = text[narrative_start:upto]
        if chunk.strip():
            blocks.append(NarrativeBlock(chunk))

    while i < n:
        hit = _command_at(text, i, _TOP_COMMANDS)
        if hit is None:
            i += 1
            continue
        kind, body_open = hit
        flush_narrative(i)
        cmd_line, cmd_col = line_col(text, i)
        body, after = _brace_group(text, body_open)
        if kind == "import":
            imp_name, sep, imp_path = body.partition("=")
            if not sep or not imp_name.strip() or not imp_path.strip():
                raise ParseError("@import needs 'name = relative-path'").at(cmd_line, cmd_col)
            if any(d.name == imp_name.strip() for d in imports):
                raise ParseError(f"duplicate import name {imp_name.strip()!r}").at(cmd_line, cmd_col)
            imports.append(ImportDecl(imp_name.strip(), imp_path.strip(), cmd_line, cmd_col))
            i = after
        else:
            ctx_name = body.strip()
            if not ctx_name:
                raise ParseError("@context needs a name").at(cmd_line, cmd_col)
            if ctx_name in context_names:
                raise ParseError(f"duplicate context name {ctx_name!r}").at(cmd_line, cmd_col)
            context_names.add(ctx_name)
            j = after
            while j < n and text[j].isspace():
                j += 1
            if j >= n or text[j] != "{":
                raise ParseError("@context needs a body: @context{NAME}{...}").at(cmd_line, cmd_col)
            body_text, after_body = _brace_group(text, j)
            items = _parse_body(text, j + 1, body_text)
            blocks.append(ContextBlock(ctx_name, items, cmd_line, cmd_col))
            i = after_body
        narrative_start = i
    flush_narrative(n)
    return DocumentAST(name, tuple(imports), tuple(blocks))


def _command_at(text: str, i: int, commands: tuple[str, ...]) -> tuple[str, int] | None:
    """A recognized `@kind{` at offset i; returns (kind, offset of '{')."""
    if text[i] != "@":
        return None
    for kind in commands:
        end = i + 1 + len(kind)
        if text.startswith(kind, i + 1) and end < len(text) and text[end] == "{":
            return kind, end
    return None


def _brace_group(text: str, open_idx: int) -> tuple[str, int]:
    """Content of the balanced {...} starting at open_idx, and the offset
    just past the closing brace."""
    depth = 0
    for j in range(open_idx, len(text)):
        if text[j] == "{":
            depth += 1
        elif text[j] == "}":
            depth -= 1
            if depth == 0:
                return text[open_idx + 1 : j], j + 1
    line, col = line_col(text, len(text))
    raise ParseError("unbalanced braces: '}' missing before end of file").at(line, col)


def _parse_body(text: str, body_offset: int, body: str) -> tuple[BodyItem, ...]:
    items: list[BodyItem] = []
    narrative_start = 0
    i = 0
    n = len(body)

    def flush(upto: int):
        chunk = body[narrative_start:upto]
        if chunk.strip():
            items.append(NarrativeBlock(chunk))

    while i < n:
        hit = _command_at(body, i, _BODY_COMMANDS)
        if hit is None:
            i += 1
            continue
        kind, body_open = hit
        flush(i)
        inner, after = _brace_group(body, body_open)
        line, col = line_col(text, body_offset + body_open + 1)
        if kind == "eval":
            items.append(EvalRequest(inner, line, col))
        else:
            items.append(Decl(kind, inner, line, col))
        i = after
        narrative_start = i
    flush(n)
    return tuple(items)


# ---------------------------------------------------------------------------
# building

ImportLoader = Callable[[str], "Document"]


def build_document(
    ast: DocumentAST,
    import_loader: ImportLoader | None = None,
    *,
    step_limit: int = DEFAULT_STEP_LIMIT,
    run_evals: bool = True,
) -> Document:
    """Elaborate all contexts in order and run every @eval request.

    Fails atomically on the first error, which carries a source
    position.  `import_loader` maps an @import path to a built Document.
    """
    imported: dict[str, Document] = {}
    for imp in ast.imports:
        if import_loader is None:
            raise ImportNotFound(f"no import loader for {imp.path!r}").at(imp.line, imp.col)
        try:
            imported[imp.name] = import_loader(imp.path)
        except (OSError, FileNotFoundError) as e:
            raise ImportNotFound(f"cannot load import {imp.path!r}: {e}").at(imp.line, imp.col) from None
        except LeibnizError as e:
            if isinstance(e, (ImportCycle, ImportNotFound)) and e.line is None:
                e.at(imp.line, imp.col)
            raise

    contexts: list[Context] = []
    evaluated: dict[tuple[str, int], EvalResult] = {}

    def resolver(ref: str) -> Context:
        doc_name, _, ctx_name = ref.rpartition("/")
        if not doc_name or doc_name == ast.name:
            for ctx in contexts:
                if ctx.name == ctx_name:
                    return ctx
            raise UnknownReference(f"no context {ctx_name!r} defined before this point")
        if doc_name == BUILTINS_DOCUMENT:
            return builtin_context(ctx_name)
        if doc_name in imported:
            return imported[doc_name].context(ctx_name)
        raise UnknownReference(f"unknown document {doc_name!r} (missing @import?)")

    for block in ast.blocks:
        if not isinstance(block, ContextBlock):
            continue
        decls = [item for item in block.items if isinstance(item, Decl)]
        ctx = elaborate_context(block.name, decls, resolver, document=ast.name)
        contexts.append(ctx)
        if not run_evals:
            continue
        ordinal = 0
        for item in block.items:
            if not isinstance(item, EvalRequest):
                continue
            try:
                term = parse_term(item.body, ctx)
                if not is_ground(term):
                    raise ParseError("@eval needs a ground term (no variables)")
                nf, _ = normalize(term, ctx, step_limit)
            except LeibnizError as e:
                raise _rebase(e, item.line, item.col)
            evaluated[(block.name, ordinal)] = EvalResult(term, nf)
            ordinal += 1

    return Document(ast.name, ast, tuple(contexts), evaluated)


def _rebase(e: LeibnizError, line: int, col: int) -> LeibnizError:
    if e.line is None:
        e.line, e.col = line, col
    else:
        e.col = e.col + col - 1 if e.line == 1 else e.col
        e.line = line + e.line - 1
    return e


class DocumentStore:
    """Loads and caches documents by path, following imports.

    Paths in @import declarations are relative to the importing file.
    XML files load through the machine view; anything else is parsed as
    author markup.  Import cycles are detected across both.
    """

    def __init__(self, *, step_limit: int = DEFAULT_STEP_LIMIT, run_evals: bool = True):
        self.step_limit = step_limit
        self.run_evals = run_evals
        self._cache: dict[Path, Document] = {}
        self._loading: list[Path] = []

    def load(self, path: str | Path) -> Document:
        path = Path(path).resolve()
        if path in self._cache:
            return self._cache[path]
        if path in self._loading:
            chain = " -> ".join(p.name for p in self._loading) + f" -> {path.name}"
            raise ImportCycle(f"import cycle: {chain}")
        if not path.exists():
            raise ImportNotFound(f"no such document: {path}")
        self._loading.append(path)
        try:
            if path.suffix == ".xml":
                from .xmlio import load_xml  # local import: xmlio depends on this module

                doc = load_xml(path.read_bytes(), resolver=self._name_resolver(path.parent))
            else:
                ast = parse_document(path.read_text(encoding="utf-8"), name=path.stem)
                doc = build_document(
                    ast,
                    lambda rel: self.load(path.parent / rel),
                    step_limit=self.step_limit,
                    run_evals=self.run_evals,
                )
        finally:
            self._loading.pop()
        self._cache[path] = doc
        return doc

    def _name_resolver(self, directory: Path) -> Callable[[str], "Document"]:
        def resolve(doc_name: str) -> Document:
            for candidate in (directory / f"{doc_name}{LZD_SUFFIX}", directory / f"{doc_name}.xml"):
                if candidate.exists():
                    return self.load(candidate)
            raise ImportNotFound(f"no document named {doc_name!r} next to the XML file")

        return resolve

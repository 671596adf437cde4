"""The reader view: one self-contained HTML file per document.

Authored formal fragments sit on a blue background (class leibniz-code),
computed results on green (leibniz-computed).  A context produced by the
floating-point derivation is machine output, so all of its fragments are
green-tinted.  Every code span holds canonical text that parses back to
the stored object.
"""

from __future__ import annotations

import html

from . import exprs
from .context import Context, Decl, Equation
from .document import ContextBlock, Document, EvalRequest, NarrativeBlock
from .errors import LeibnizError

_STYLE = """\
body { font-family: Georgia, serif; max-width: 46em; margin: 2em auto; padding: 0 1em; line-height: 1.5; }
h1, h2 { font-family: Helvetica, Arial, sans-serif; }
code.leibniz-code { background: #d6e5f5; padding: 0.1em 0.35em; border-radius: 2px; }
code.leibniz-computed { background: #d9f0d3; padding: 0.1em 0.35em; border-radius: 2px; }
div.decl { margin: 0.4em 0; }
"""


def render_html(doc: Document) -> bytes:
    parts: list[str] = [
        "<!DOCTYPE html>",
        '<html lang="en">',
        "<head>",
        '<meta charset="utf-8"/>',
        f"<title>{html.escape(doc.name)}</title>",
        f"<style>\n{_STYLE}</style>",
        "</head>",
        "<body>",
        f"<h1>{html.escape(doc.name)}</h1>",
    ]
    for block in doc.ast.blocks:
        if isinstance(block, NarrativeBlock):
            parts.extend(_paragraphs(block.text))
        else:
            parts.extend(_context_section(block, doc))
    parts.append("</body>")
    parts.append("</html>")
    return ("\n".join(parts) + "\n").encode("utf-8")


def _paragraphs(text: str) -> list[str]:
    out = []
    for para in text.split("\n\n"):
        collapsed = " ".join(para.split())
        if collapsed:
            out.append(f"<p>{html.escape(collapsed)}</p>")
    return out


def _context_section(block: ContextBlock, doc: Document) -> list[str]:
    ctx = doc.context(block.name)
    code_class = "leibniz-computed" if ctx.is_derived else "leibniz-code"
    parts = [
        f'<section class="leibniz-context" id="context-{html.escape(block.name, quote=True)}">',
        f"<h2>{html.escape(block.name)}</h2>",
    ]
    if block.items:
        ordinal = 0
        for item in block.items:
            if isinstance(item, NarrativeBlock):
                parts.extend(_paragraphs(item.text))
            elif isinstance(item, EvalRequest):
                result = doc.evaluated.get((block.name, ordinal))
                ordinal += 1
                parts.append(_eval_div(item.body, result, ctx, code_class))
            else:
                parts.append(_decl_div(item, ctx, code_class))
    else:
        parts.extend(_formal_summary(ctx, doc, code_class))
    parts.append("</section>")
    return parts


def _span(kind: str, text: str, code_class: str) -> str:
    return f'<code class="{code_class}" data-kind="{kind}">{html.escape(text)}</code>'


def _decl_div(item: Decl, ctx: Context, code_class: str) -> str:
    return f'<div class="decl">{_span(item.kind, _canonical_decl(item, ctx), code_class)}</div>'


def _eval_div(body: str, result, ctx: Context, code_class: str) -> str:
    input_text = exprs.render_term(exprs.parse_term(body, ctx))
    inner = _span("eval", input_text, code_class)
    if result is not None:
        inner += " &#8594; " + f'<code class="leibniz-computed">{html.escape(exprs.render_term(result.normal_form))}</code>'
    return f'<div class="decl">{inner}</div>'


def _canonical_decl(item: Decl, ctx: Context) -> str:
    """Re-derive the canonical text of a declaration from the elaborated
    context, so each blue fragment is exactly re-parsable."""
    if item.kind in ("use", "extend"):
        return _canonical_inclusion(item.body)
    if item.kind == "sort":
        parsed = exprs.parse_sort_decl(item.body)
        if hasattr(parsed, "name"):
            return _resolve(ctx, parsed.name)
        return f"{_resolve(ctx, parsed.lesser)} ⊆ {_resolve(ctx, parsed.greater)}"
    if item.kind == "op":
        syntax = exprs.parse_op_decl(item.body)
        from .terms import OperatorDecl

        decl = OperatorDecl(
            syntax.name,
            syntax.fixity,
            tuple(_resolve(ctx, s) for s in syntax.arg_sorts),
            _resolve(ctx, syntax.result_sort),
        )
        return exprs.render_op_decl(decl)
    if item.kind == "var":
        name, sort = exprs.parse_var_decl(item.body)
        return exprs.render_var_decl(name, _resolve(ctx, sort))
    if item.kind == "rule":
        pattern, replacement = exprs.parse_rule_text(item.body, ctx)
        return exprs.render_rule(pattern, replacement)
    if item.kind in ("term", "equation"):
        label = item.body.split(":", 1)[0].strip()
        value = ctx.assets[label]
        if isinstance(value, Equation):
            return f"{label} : {exprs.render_term(value.left)} = {exprs.render_term(value.right)}"
        return f"{label} : {exprs.render_term(value)}"
    raise LeibnizError(f"cannot render declaration of kind {item.kind!r}")


def _canonical_inclusion(body: str) -> str:
    ref, sep, renames = body.partition("|")
    text = ref.strip().replace("->", "→")
    if sep:
        pairs = renames.strip()
        if pairs.startswith("rename:"):
            pairs = pairs[len("rename:") :]
        cleaned = ", ".join(p.strip().replace("->", "→") for p in pairs.split(",") if p.strip())
        text += f" | rename: {cleaned}"
    return text


def _resolve(ctx: Context, sort_name: str) -> str:
    from . import lattice

    if ctx.graph.has(sort_name):
        return sort_name
    alias = lattice.ASCII_SORT_ALIASES.get(sort_name)
    if alias is not None and ctx.graph.has(alias):
        return alias
    return sort_name


def _formal_summary(ctx: Context, doc: Document, code_class: str) -> list[str]:
    """Fallback for documents loaded from the machine view, which carry
    no narrative or item layout."""
    parts = []
    for rec in ctx.provenance:
        if rec.mode in ("use", "extend"):
            text = f"{rec.document}/{rec.context}"
            pairs = [f"{f}→{t}" for f, t in rec.renaming.sort_pairs + rec.renaming.op_pairs]
            if pairs:
                text += " | rename: " + ", ".join(pairs)
            parts.append(f'<div class="decl">{_span(rec.mode, text, code_class)}</div>')
    for s in sorted(ctx.own_sorts):
        parts.append(f'<div class="decl">{_span("sort", s, code_class)}</div>')
    for lo, hi in sorted(ctx.own_edges):
        parts.append(f'<div class="decl">{_span("sort", f"{lo} ⊆ {hi}", code_class)}</div>')
    for d in sorted(ctx.own_ops, key=lambda d: (d.name, d.fixity.value, d.arg_sorts)):
        parts.append(f'<div class="decl">{_span("op", exprs.render_op_decl(d), code_class)}</div>')
    for v in sorted(ctx.own_vars, key=lambda v: v.name):
        parts.append(f'<div class="decl">{_span("var", exprs.render_var_decl(v.name, v.sort), code_class)}</div>')
    for r in ctx.own_rules:
        parts.append(f'<div class="decl">{_span("rule", exprs.render_rule(r.pattern, r.replacement), code_class)}</div>')
    for label in sorted(ctx.own_asset_labels):
        value = ctx.assets[label]
        if isinstance(value, Equation):
            text = f"{label} : {exprs.render_term(value.left)} = {exprs.render_term(value.right)}"
            kind = "equation"
        else:
            text = f"{label} : {exprs.render_term(value)}"
            kind = "term"
        parts.append(f'<div class="decl">{_span(kind, text, code_class)}</div>')
    for (cname, ordinal) in sorted(k for k in doc.evaluated if k[0] == ctx.name):
        res = doc.evaluated[(cname, ordinal)]
        inner = _span("eval", exprs.render_term(res.input), code_class)
        inner += " &#8594; " + f'<code class="leibniz-computed">{html.escape(exprs.render_term(res.normal_form))}</code>'
        parts.append(f'<div class="decl">{inner}</div>')
    return parts

"""The machine-readable view: a rigid XML schema, namespace urn:leibniz-rw:v1.

Only formal content is serialized (never narrative): per context its
inclusions by reference, own declarations, rules, assets, and computed
results.  Element and attribute order are canonical, so emitting the
same document twice gives identical bytes.  Loading re-elaborates and
revalidates everything, including recomputing every stored result.
"""

from __future__ import annotations

import xml.etree.ElementTree as ET
from fractions import Fraction
from typing import Callable

from .builtins import BUILTINS_DOCUMENT, builtin_context
from .context import Context, ContextBuilder, Equation, Renaming
from .document import Document, DocumentAST, ContextBlock, EvalResult
from .errors import LeibnizError, SchemaError, UnknownReference
from .rewrite import DEFAULT_STEP_LIMIT, RewriteRule, normalize
from .terms import App, ContextView, Fixity, FP64Term, OperatorDecl, RationalTerm, Term, VarRef, fp64_term, make_term

NAMESPACE = "urn:leibniz-rw:v1"

ET.register_namespace("", NAMESPACE)


def _tag(name: str) -> str:
    return f"{{{NAMESPACE}}}{name}"


def emit_xml(doc: Document) -> bytes:
    root = ET.Element(_tag("leibniz-document"), {"name": doc.name})
    for ctx in doc.contexts:
        root.append(_emit_context(ctx, doc))
    tree = ET.ElementTree(root)
    ET.indent(tree, space="  ")
    return ET.tostring(root, encoding="utf-8", xml_declaration=True) + b"\n"


def _emit_context(ctx: Context, doc: Document) -> ET.Element:
    el = ET.Element(_tag("context"), {"name": ctx.name})
    for rec in ctx.provenance:
        if rec.mode not in ("use", "extend"):
            continue  # derivation provenance has no schema representation
        inc = ET.SubElement(el, _tag(rec.mode), {"document": rec.document, "context": rec.context})
        for frm, to in rec.renaming.sort_pairs:
            ET.SubElement(inc, _tag("rename"), {"kind": "sort", "from": frm, "to": to})
        for frm, to in rec.renaming.op_pairs:
            ET.SubElement(inc, _tag("rename"), {"kind": "op", "from": frm, "to": to})
    for s in sorted(ctx.own_sorts):
        ET.SubElement(el, _tag("sort"), {"id": s})
    for lo, hi in sorted(ctx.own_edges):
        ET.SubElement(el, _tag("subsort"), {"lesser": lo, "greater": hi})
    for d in sorted(ctx.own_ops, key=lambda d: (d.name, d.fixity.value, d.arg_sorts, d.result_sort)):
        op = ET.SubElement(el, _tag("op"), {"id": d.name, "fixity": d.fixity.value})
        for a in d.arg_sorts:
            ET.SubElement(op, _tag("arg"), {"sort": a})
        ET.SubElement(op, _tag("result"), {"sort": d.result_sort})
    for v in sorted(ctx.own_vars, key=lambda v: v.name):
        ET.SubElement(el, _tag("var"), {"id": v.name, "sort": v.sort})
    for i, r in enumerate(ctx.own_rules):
        rule = ET.SubElement(el, _tag("rule"), {"index": str(i)})
        _encode_term(ET.SubElement(rule, _tag("pattern")), r.pattern)
        _encode_term(ET.SubElement(rule, _tag("replacement")), r.replacement)
    for label in sorted(ctx.own_asset_labels):
        asset = ET.SubElement(el, _tag("asset"), {"label": label})
        value = ctx.assets[label]
        if isinstance(value, Equation):
            eq = ET.SubElement(asset, _tag("equation"))
            _encode_term(ET.SubElement(eq, _tag("left")), value.left)
            _encode_term(ET.SubElement(eq, _tag("right")), value.right)
        else:
            _encode_term(ET.SubElement(asset, _tag("term")), value)
    ordinals = sorted(o for (c, o) in doc.evaluated if c == ctx.name)
    for o in ordinals:
        res = doc.evaluated[(ctx.name, o)]
        computed = ET.SubElement(el, _tag("computed"), {"ordinal": str(o)})
        _encode_term(ET.SubElement(computed, _tag("input")), res.input)
        _encode_term(ET.SubElement(computed, _tag("normal-form")), res.normal_form)
    return el


def _encode_term(parent: ET.Element, t: Term) -> None:
    if isinstance(t, App):
        el = ET.SubElement(parent, _tag("app"), {"op": t.op, "fixity": t.fixity.value})
        for a in t.args:
            _encode_term(el, a)
    elif isinstance(t, VarRef):
        ET.SubElement(parent, _tag("var-ref"), {"id": t.name})
    elif isinstance(t, RationalTerm):
        ET.SubElement(
            parent, _tag("rational"), {"num": str(t.value.numerator), "denom": str(t.value.denominator)}
        )
    elif isinstance(t, FP64Term):
        ET.SubElement(parent, _tag("fp64"), {"hex-bits": f"{t.bits:016X}"})
    else:
        raise SchemaError(f"cannot serialize term node {t!r}")


# ---------------------------------------------------------------------------
# loading

DocResolver = Callable[[str], Document]


def load_xml(
    data: bytes,
    resolver: DocResolver | None = None,
    *,
    step_limit: int = DEFAULT_STEP_LIMIT,
) -> Document:
    """Rebuild a Document from machine-view bytes.

    Loaded data is not trusted: contexts are re-elaborated from the
    serialized declarations, all invariants are re-checked, and every
    <computed> result is recomputed and compared.  `resolver` supplies
    imported documents by name; builtins resolve without it.
    """
    try:
        root = ET.fromstring(data)
    except ET.ParseError as e:
        raise SchemaError(f"not well-formed XML: {e}") from None
    if root.tag != _tag("leibniz-document"):
        raise SchemaError(f"root element must be {{{NAMESPACE}}}leibniz-document, found {root.tag}")
    doc_name = _require_attr(root, "name")
    contexts: list[Context] = []
    evaluated: dict[tuple[str, int], EvalResult] = {}

    def doc_resolver(name: str) -> Document:
        if resolver is None:
            raise UnknownReference(f"document {name!r} referenced but no resolver supplied")
        return resolver(name)

    for child in root:
        if child.tag != _tag("context"):
            raise SchemaError(f"unexpected element {child.tag} under leibniz-document")
        ctx, computed = _load_context(child, doc_name, contexts, doc_resolver, step_limit)
        contexts.append(ctx)
        evaluated.update(computed)

    ast = DocumentAST(doc_name, (), tuple(ContextBlock(c.name, ()) for c in contexts))
    return Document(doc_name, ast, tuple(contexts), evaluated)


def _load_context(
    el: ET.Element,
    doc_name: str,
    earlier: list[Context],
    doc_resolver: DocResolver,
    step_limit: int,
):
    name = _require_attr(el, "name")
    builder = ContextBuilder(name, doc_name)
    grouped: dict[str, list[ET.Element]] = {}
    for child in el:
        grouped.setdefault(child.tag, []).append(child)
    known = {
        _tag(t)
        for t in ("use", "extend", "sort", "subsort", "op", "var", "rule", "asset", "computed")
    }
    for tag in grouped:
        if tag not in known:
            raise SchemaError(f"unexpected element {tag} in context {name}")

    for mode in ("use", "extend"):
        for inc in grouped.get(_tag(mode), []):
            src_doc = _require_attr(inc, "document")
            src_ctx = _require_attr(inc, "context")
            sorts: dict[str, str] = {}
            ops: dict[str, str] = {}
            for ren in inc:
                if ren.tag != _tag("rename"):
                    raise SchemaError(f"unexpected element {ren.tag} under {mode}")
                kind = _require_attr(ren, "kind")
                frm, to = _require_attr(ren, "from"), _require_attr(ren, "to")
                if kind == "sort":
                    sorts[frm] = to
                elif kind == "op":
                    ops[frm] = to
                else:
                    raise SchemaError(f"rename kind must be sort or op, found {kind!r}")
            source = _resolve_source(src_doc, src_ctx, doc_name, earlier, doc_resolver)
            builder.include(source, mode, Renaming.of(sorts, ops), src_doc, src_ctx)

    for s in grouped.get(_tag("sort"), []):
        builder.add_sort(_require_attr(s, "id"))
    for e in grouped.get(_tag("subsort"), []):
        builder.add_edge(_require_attr(e, "lesser"), _require_attr(e, "greater"))
    for op in grouped.get(_tag("op"), []):
        args = tuple(_require_attr(a, "sort") for a in op if a.tag == _tag("arg"))
        results = [_require_attr(r, "sort") for r in op if r.tag == _tag("result")]
        if len(results) != 1:
            raise SchemaError(f"op {_require_attr(op, 'id')} needs exactly one result element")
        try:
            fixity = Fixity(_require_attr(op, "fixity"))
        except ValueError:
            raise SchemaError(f"unknown fixity {op.get('fixity')!r}") from None
        builder.add_op(OperatorDecl(_require_attr(op, "id"), fixity, args, results[0]))
    builder.signature.check_preregular(builder.graph)
    for v in grouped.get(_tag("var"), []):
        builder.add_var(_require_attr(v, "id"), _require_attr(v, "sort"))

    for rule in sorted(grouped.get(_tag("rule"), []), key=lambda r: _int_attr(r, "index")):
        pattern = _decode_child_term(rule, "pattern", builder.view)
        replacement = _decode_child_term(rule, "replacement", builder.view)
        builder.add_rule(RewriteRule(pattern, replacement))
    for asset in grouped.get(_tag("asset"), []):
        label = _require_attr(asset, "label")
        children = list(asset)
        if len(children) != 1:
            raise SchemaError(f"asset {label!r} needs exactly one term or equation")
        child = children[0]
        if child.tag == _tag("term"):
            builder.add_asset(label, _decode_term(_only_child(child), builder.view))
        elif child.tag == _tag("equation"):
            left = _decode_child_term(child, "left", builder.view)
            right = _decode_child_term(child, "right", builder.view)
            builder.add_asset(label, Equation(left, right))
        else:
            raise SchemaError(f"asset {label!r} holds {child.tag}, not term or equation")

    ctx = builder.freeze()

    computed: dict[tuple[str, int], EvalResult] = {}
    for comp in grouped.get(_tag("computed"), []):
        ordinal = _int_attr(comp, "ordinal")
        term = _decode_child_term(comp, "input", ctx)
        stored = _decode_child_term(comp, "normal-form", ctx)
        recomputed, _trace = normalize(term, ctx, step_limit)
        if recomputed != stored:
            raise SchemaError(
                f"stored result of computation {ordinal} in context {name} does not "
                f"match its recomputation"
            )
        computed[(name, ordinal)] = EvalResult(term, stored)
    return ctx, computed


def _resolve_source(
    src_doc: str,
    src_ctx: str,
    doc_name: str,
    earlier: list[Context],
    doc_resolver: DocResolver,
) -> Context:
    if src_doc == BUILTINS_DOCUMENT:
        return builtin_context(src_ctx)
    if src_doc == doc_name:
        for ctx in earlier:
            if ctx.name == src_ctx:
                return ctx
        raise SchemaError(f"context {src_ctx!r} referenced before its definition")
    return doc_resolver(src_doc).context(src_ctx)


def _require_attr(el: ET.Element, attr: str) -> str:
    value = el.get(attr)
    if value is None:
        raise SchemaError(f"element {el.tag} lacks required attribute {attr!r}")
    return value


def _int_attr(el: ET.Element, attr: str) -> int:
    try:
        return int(_require_attr(el, attr))
    except ValueError:
        raise SchemaError(f"attribute {attr!r} of {el.tag} must be an integer") from None


def _only_child(el: ET.Element) -> ET.Element:
    children = list(el)
    if len(children) != 1:
        raise SchemaError(f"element {el.tag} needs exactly one child term")
    return children[0]


def _decode_child_term(parent: ET.Element, tag: str, view: ContextView) -> Term:
    for child in parent:
        if child.tag == _tag(tag):
            return _decode_term(_only_child(child), view)
    raise SchemaError(f"element {parent.tag} lacks a <{tag}> child")


def _decode_term(el: ET.Element, view: ContextView) -> Term:
    try:
        if el.tag == _tag("app"):
            fixity = Fixity(_require_attr(el, "fixity"))
            args = tuple(_decode_term(c, view) for c in el)
            return make_term(view, _require_attr(el, "op"), fixity, args)
        if el.tag == _tag("var-ref"):
            name = _require_attr(el, "id")
            sort = view.variables.get(name)
            if sort is None:
                raise SchemaError(f"variable reference {name!r} has no declaration in scope")
            return VarRef(name, sort)
        if el.tag == _tag("rational"):
            num, denom = int(_require_attr(el, "num")), int(_require_attr(el, "denom"))
            if denom <= 0:
                raise SchemaError("rational literal needs a positive denominator")
            value = Fraction(num, denom)
            if (value.numerator, value.denominator) != (num, denom):
                raise SchemaError(f"rational literal {num}/{denom} is not in lowest terms")
            sort = lattice_sort_checked(value, view)
            return RationalTerm(value, sort)
        if el.tag == _tag("fp64"):
            return fp64_term(int(_require_attr(el, "hex-bits"), 16), view.graph)
    except ValueError as e:
        raise SchemaError(str(e)) from None
    raise SchemaError(f"unexpected term element {el.tag}")


def lattice_sort_checked(value: Fraction, view: ContextView) -> str:
    from . import lattice

    sort = lattice.literal_sort(value)
    view.graph.require(sort)
    return sort

"""Literate scientific documents over order-sorted term rewriting.

Documents written in the `.lzd` markup mix narrative with formal
declarations.  They elaborate into contexts (sort graph + signature +
rules + assets), evaluate deterministically with exact rational
arithmetic, render to HTML for readers, serialize to a rigid XML view
for machines, and lower mechanically to IEEE 754-2008 binary64.
"""

from .builtins import builtin_context, builtin_contexts, builtin_resolver
from .context import Context, Equation, Renaming, elaborate_context, lookup_asset
from .document import Document, DocumentStore, build_document, parse_document
from .errors import LeibnizError
from .exprs import parse_term, render_term
from .fp_derive import derive_fp
from .htmlview import render_html
from .rewrite import RewriteRule, Trace, normalize
from .sorts import Kind, SortGraph, build_sort_graph
from .terms import App, ContextView, Fixity, OperatorDecl, Signature, Term, VarRef
from .xmlio import emit_xml, load_xml

__version__ = "0.1.0"

__all__ = [
    "App",
    "Context",
    "ContextView",
    "Document",
    "DocumentStore",
    "Equation",
    "Fixity",
    "Kind",
    "LeibnizError",
    "OperatorDecl",
    "Renaming",
    "RewriteRule",
    "Signature",
    "SortGraph",
    "Term",
    "Trace",
    "VarRef",
    "build_document",
    "build_sort_graph",
    "builtin_context",
    "builtin_contexts",
    "builtin_resolver",
    "derive_fp",
    "elaborate_context",
    "emit_xml",
    "load_xml",
    "lookup_asset",
    "normalize",
    "parse_document",
    "parse_term",
    "render_html",
    "render_term",
]

"""Concrete expression syntax: lexer, parser, and canonical renderer.

There are no precedence rules: distinct infix operators cannot be mixed
without parentheses, only a chain of one and the same infix operator is
allowed and associates to the left.  Brackets, subscripts and
superscripts are sugar for the binary operators `[]`, `_` and `^`.

Number literals are exact rationals (`3`, `3/2`, `-1/2`); a token with a
decimal point, exponent, `∞` or `NaN` is a binary64 literal.  ASCII
fallbacks `<=`, `>=`, `=>`, `<:` and `->` are accepted on input and
normalized to `≤`, `≥`, `⇒`, `⊆`, `→`.
"""

from __future__ import annotations

import math
import struct
from dataclasses import dataclass
from fractions import Fraction

from .errors import AmbiguityError, LeibnizError, ParseError, UnknownIdentifier
from .sorts import SortDecl, SubsortDecl
from .terms import (
    App,
    BRACKET_OP,
    ContextView,
    Fixity,
    FP64Term,
    OperatorDecl,
    RationalTerm,
    SUBSCRIPT_OP,
    SUPERSCRIPT_OP,
    Term,
    VarRef,
    fp64_term,
    make_term,
    rational_term,
)

RULE_ARROW = "⇒"
SUBSORT_SYMBOL = "⊆"
MINUS_OP = "−"

#: operator names with a fixed structural meaning; not declarable
RESERVED_OPS = frozenset({RULE_ARROW, SUBSORT_SYMBOL})

_STRUCTURAL = {
    "(": "LPAREN",
    ")": "RPAREN",
    "[": "LBRACKET",
    "]": "RBRACKET",
    ",": "COMMA",
    "_": "UNDERSCORE",
    "^": "CARET",
    ":": "COLON",
}

_ASCII_OPS = {"<=": "≤", ">=": "≥", "=>": RULE_ARROW, "<:": SUBSORT_SYMBOL}

_DIGITS = "0123456789"


def _ident_start(c: str) -> bool:
    return c.isalpha()


def _ident_cont(c: str) -> bool:
    return c.isalpha() or c in _DIGITS or c in "-→"


def _opsym_char(c: str) -> bool:
    return not (
        c.isspace()
        or _ident_start(c)
        or c in _DIGITS
        or c in _STRUCTURAL
        or c in "-−∞{}"
    )


@dataclass(frozen=True)
class Token:
    kind: str  # IDENT RAT FP MINUS OPSYM or a structural name
    value: object
    start: int
    end: int


def line_col(text: str, offset: int) -> tuple[int, int]:
    prefix = text[:offset]
    line = prefix.count("\n") + 1
    col = offset - (prefix.rfind("\n") + 1) + 1
    return line, col


def _err(text: str, offset: int, message: str) -> ParseError:
    line, col = line_col(text, offset)
    return ParseError(message).at(line, col)


def lex(text: str) -> list[Token]:
    tokens: list[Token] = []
    i, n = 0, len(text)
    while i < n:
        c = text[i]
        if c.isspace():
            i += 1
            continue
        start = i
        if text.startswith("<:", i):  # ':' is structural, so map this here
            tokens.append(Token("OPSYM", SUBSORT_SYMBOL, i, i + 2))
            i += 2
        elif c in _STRUCTURAL:
            tokens.append(Token(_STRUCTURAL[c], c, i, i + 1))
            i += 1
        elif c in "-−":
            tokens.append(Token("MINUS", MINUS_OP, i, i + 1))
            i += 1
        elif c == "∞":
            tokens.append(Token("FP", _float_bits(math.inf), i, i + 1))
            i += 1
        elif c in _DIGITS:
            i = _lex_number(text, i, tokens)
        elif _ident_start(c):
            i += 1
            while i < n:
                if text.startswith("->", i):
                    i += 2  # ASCII arrow inside a name
                elif _ident_cont(text[i]):
                    i += 1
                else:
                    break
            name = text[start:i].replace("->", "→")
            # '-' is a name character only between name characters
            while name.endswith("-"):
                name = name[:-1]
                i -= 1
            if name == "NaN":
                tokens.append(Token("FP", _NAN_BITS, start, i))
            else:
                tokens.append(Token("IDENT", name, start, i))
        elif _opsym_char(c):
            i += 1
            while i < n and _opsym_char(text[i]):
                i += 1
            sym = text[start:i]
            tokens.append(Token("OPSYM", _ASCII_OPS.get(sym, sym), start, i))
        else:
            raise _err(text, i, f"unexpected character {c!r}")
    tokens.append(Token("EOF", None, n, n))
    return tokens


def _lex_number(text: str, i: int, tokens: list[Token]) -> int:
    n = len(text)
    start = i
    while i < n and text[i] in _DIGITS:
        i += 1
    is_fp = False
    if i < n and text[i] == "." and i + 1 < n and text[i + 1] in _DIGITS:
        is_fp = True
        i += 1
        while i < n and text[i] in _DIGITS:
            i += 1
    if i < n and text[i] in "eE":
        j = i + 1
        if j < n and text[j] in "+-":
            j += 1
        if j < n and text[j] in _DIGITS:
            is_fp = True
            i = j
            while i < n and text[i] in _DIGITS:
                i += 1
    if is_fp:
        tokens.append(Token("FP", _float_bits(float(text[start:i])), start, i))
        return i
    if i < n and text[i] == "/" and i + 1 < n and text[i + 1] in _DIGITS:
        i += 1
        dstart = i
        while i < n and text[i] in _DIGITS:
            i += 1
        value = Fraction(int(text[start : dstart - 1]), int(text[dstart:i]))
    else:
        value = Fraction(int(text[start:i]))
    tokens.append(Token("RAT", value, start, i))
    return i


_NAN_BITS = 0x7FF8000000000000


def _float_bits(f: float) -> int:
    return struct.unpack("<Q", struct.pack("<d", f))[0]


def bits_to_float(bits: int) -> float:
    return struct.unpack("<d", struct.pack("<Q", bits))[0]


# ---------------------------------------------------------------------------
# term parser


class _Parser:
    def __init__(self, text: str, tokens: list[Token], view: ContextView):
        self.text = text
        self.tokens = tokens
        self.view = view
        self.pos = 0

    @property
    def tok(self) -> Token:
        return self.tokens[self.pos]

    def advance(self) -> Token:
        t = self.tok
        self.pos += 1
        return t

    def expect(self, kind: str) -> Token:
        if self.tok.kind != kind:
            raise self.fail(f"expected {kind}, found {self._describe(self.tok)}")
        return self.advance()

    def fail(self, message: str, tok: Token | None = None) -> ParseError:
        return _err(self.text, (tok or self.tok).start, message)

    @staticmethod
    def _describe(tok: Token) -> str:
        return "end of input" if tok.kind == "EOF" else repr(str(tok.value))

    def _spaced(self, idx: int) -> bool:
        """Whitespace on both sides of token idx."""
        before = self.tokens[idx - 1].end < self.tokens[idx].start if idx > 0 else True
        after = self.tokens[idx].end < self.tokens[idx + 1].start
        return before and after

    def _adjacent_number(self) -> bool:
        nxt = self.tokens[self.pos + 1]
        return nxt.kind in ("RAT", "FP") and self.tok.end == nxt.start

    def expr(self) -> Term:
        left = self.operand()
        chain_op: str | None = None
        while True:
            tok = self.tok
            if tok.kind == "OPSYM":
                op = tok.value
            elif tok.kind == "MINUS":
                if not self._spaced(self.pos):
                    raise self.fail("'-' used as an operator needs whitespace on both sides")
                op = MINUS_OP
            else:
                return left
            if chain_op is None:
                chain_op = op
            elif op != chain_op:
                line, col = line_col(self.text, tok.start)
                raise AmbiguityError(
                    f"mixing infix operators {chain_op!r} and {op!r} needs parentheses"
                ).at(line, col)
            self.advance()
            right = self.operand()
            left = self._apply(chain_op, Fixity.INFIX, (left, right), tok)
        # not reached

    def operand(self) -> Term:
        term = self.primary()
        while True:
            tok = self.tok
            if tok.kind == "LBRACKET":
                self.advance()
                arg = self.expr()
                self.expect("RBRACKET")
                term = self._apply(BRACKET_OP, Fixity.BRACKET, (term, arg), tok)
            elif tok.kind == "UNDERSCORE":
                self.advance()
                term = self._apply(SUBSCRIPT_OP, Fixity.SUBSCRIPT, (term, self.primary()), tok)
            elif tok.kind == "CARET":
                self.advance()
                term = self._apply(SUPERSCRIPT_OP, Fixity.SUPERSCRIPT, (term, self.primary()), tok)
            else:
                return term

    def primary(self) -> Term:
        tok = self.tok
        if tok.kind == "LPAREN":
            self.advance()
            inner = self.expr()
            self.expect("RPAREN")
            return inner
        if tok.kind == "MINUS":
            if not self._adjacent_number():
                raise self.fail("expected an expression; a negative literal is '-' glued to digits")
            self.advance()
            lit = self.advance()
            if lit.kind == "RAT":
                return self._literal(-lit.value, tok)
            return self._fp_literal(lit.value ^ (1 << 63), tok)
        if tok.kind == "RAT":
            self.advance()
            return self._literal(tok.value, tok)
        if tok.kind == "FP":
            self.advance()
            return self._fp_literal(tok.value, tok)
        if tok.kind == "IDENT":
            self.advance()
            name = tok.value
            if self.tok.kind == "LPAREN":
                return self._apply(name, Fixity.PREFIX, self._call_args(), tok)
            var_sort = self.view.variables.get(name)
            if var_sort is not None:
                return VarRef(name, var_sort)
            if self.view.signature.nullary(name) is not None:
                return self._apply(name, Fixity.PREFIX, (), tok)
            raise _pos_err(self.text, tok.start, UnknownIdentifier(f"unknown identifier {name!r}"))
        if tok.kind == "OPSYM" and self.tokens[self.pos + 1].kind == "LPAREN":
            self.advance()  # symbol-named prefix operator, e.g. ¬(...)
            return self._apply(tok.value, Fixity.PREFIX, self._call_args(), tok)
        raise self.fail(f"expected an expression, found {self._describe(tok)}")

    def _call_args(self) -> tuple[Term, ...]:
        self.expect("LPAREN")
        args: list[Term] = []
        if self.tok.kind != "RPAREN":
            args.append(self.expr())
            while self.tok.kind == "COMMA":
                self.advance()
                args.append(self.expr())
        self.expect("RPAREN")
        return tuple(args)

    def _apply(self, name: str, fixity: Fixity, args: tuple[Term, ...], tok: Token) -> Term:
        try:
            return make_term(self.view, name, fixity, args)
        except LeibnizError as e:
            raise _pos_err(self.text, tok.start, e) from None

    def _literal(self, value: Fraction, tok: Token) -> Term:
        try:
            return rational_term(value, self.view.graph)
        except LeibnizError as e:
            raise _pos_err(self.text, tok.start, e) from None

    def _fp_literal(self, bits: int, tok: Token) -> Term:
        try:
            return fp64_term(bits, self.view.graph)
        except LeibnizError as e:
            raise _pos_err(self.text, tok.start, e) from None


def _pos_err(text: str, offset: int, e: LeibnizError) -> LeibnizError:
    line, col = line_col(text, offset)
    return e.at(line, col)


def parse_term(text: str, view: ContextView) -> Term:
    tokens = lex(text)
    parser = _Parser(text, tokens, view)
    term = parser.expr()
    if parser.tok.kind != "EOF":
        raise parser.fail(f"unexpected {parser._describe(parser.tok)} after expression")
    return term


# ---------------------------------------------------------------------------
# renderer


def render_term(t: Term) -> str:
    return _render(t)


def _render(t: Term) -> str:
    if isinstance(t, RationalTerm):
        return str(t.value)
    if isinstance(t, FP64Term):
        return _render_fp(t.bits)
    if isinstance(t, VarRef):
        return t.name
    assert isinstance(t, App)
    if t.fixity is Fixity.PREFIX:
        if not t.args:
            return t.op
        return f"{t.op}({', '.join(_render(a) for a in t.args)})"
    if t.fixity is Fixity.INFIX:
        left, right = t.args
        ls = _paren_unless(_render(left), not (_is_infix(left) and left.op != t.op))
        rs = _paren_unless(_render(right), not _is_infix(right))
        return f"{ls} {t.op} {rs}"
    base, operand = t.args
    bs = _paren_unless(_render(base), not (_is_infix(base) or _negative_literal(base)))
    if t.fixity is Fixity.BRACKET:
        return f"{bs}[{_render(operand)}]"
    os = _paren_unless(_render(operand), _atomic(operand))
    mark = "_" if t.fixity is Fixity.SUBSCRIPT else "^"
    return f"{bs}{mark}{os}"


def _render_fp(bits: int) -> str:
    f = bits_to_float(bits)
    if math.isnan(f):
        return "NaN"
    if math.isinf(f):
        return "∞" if f > 0 else "-∞"
    return repr(f)


def _is_infix(t: Term) -> bool:
    return isinstance(t, App) and t.fixity is Fixity.INFIX


def _negative_literal(t: Term) -> bool:
    if isinstance(t, RationalTerm):
        return t.value < 0
    if isinstance(t, FP64Term):
        return bool(t.bits >> 63) and not math.isnan(bits_to_float(t.bits))
    return False


def _atomic(t: Term) -> bool:
    """May appear bare as a subscript/superscript operand."""
    if _negative_literal(t):
        return False
    if isinstance(t, (RationalTerm, FP64Term, VarRef)):
        return True
    return isinstance(t, App) and t.fixity is Fixity.PREFIX


def _paren_unless(s: str, bare: bool) -> str:
    return s if bare else f"({s})"


# ---------------------------------------------------------------------------
# declaration bodies


@dataclass(frozen=True)
class OpDeclSyntax:
    name: str
    fixity: Fixity
    arg_sorts: tuple[str, ...]
    result_sort: str


def parse_sort_decl(text: str) -> SortDecl | SubsortDecl:
    """`S` declares a sort, `A ⊆ B` (or `A <: B`) a subsort edge."""
    tokens = lex(text)
    kinds = [t.kind for t in tokens]
    if kinds == ["IDENT", "EOF"]:
        return SortDecl(tokens[0].value)
    if kinds == ["IDENT", "OPSYM", "IDENT", "EOF"] and tokens[1].value == SUBSORT_SYMBOL:
        return SubsortDecl(tokens[0].value, tokens[2].value)
    raise _err(text, 0, "sort declaration must be 'S' or 'A ⊆ B'")


def parse_op_decl(text: str) -> OpDeclSyntax:
    tokens = lex(text)

    def sort_at(i: int) -> str:
        if tokens[i].kind != "IDENT":
            raise _err(text, tokens[i].start, "expected a sort name")
        return tokens[i].value

    def shape(*kinds: str) -> bool:
        return [t.kind for t in tokens] == [*kinds, "EOF"]

    if shape("IDENT", "COLON", "IDENT"):
        return OpDeclSyntax(tokens[0].value, Fixity.PREFIX, (), sort_at(2))
    if len(tokens) >= 3 and tokens[0].kind == "IDENT" and tokens[1].kind == "LPAREN":
        args: list[str] = []
        i = 2
        if tokens[i].kind != "RPAREN":
            args.append(sort_at(i))
            i += 1
            while tokens[i].kind == "COMMA":
                args.append(sort_at(i + 1))
                i += 2
        if tokens[i].kind != "RPAREN" or tokens[i + 1].kind != "COLON":
            raise _err(text, tokens[i].start, "malformed prefix operator declaration")
        result = sort_at(i + 2)
        if tokens[i + 3].kind != "EOF":
            raise _err(text, tokens[i + 3].start, "trailing input after operator declaration")
        return OpDeclSyntax(tokens[0].value, Fixity.PREFIX, tuple(args), result)
    if shape("IDENT", "OPSYM", "IDENT", "COLON", "IDENT") or shape("IDENT", "IDENT", "IDENT", "COLON", "IDENT"):
        name = tokens[1].value
        if name in RESERVED_OPS:
            raise _err(text, tokens[1].start, f"operator name {name!r} is reserved")
        return OpDeclSyntax(name, Fixity.INFIX, (sort_at(0), sort_at(2)), sort_at(4))
    if shape("IDENT", "MINUS", "IDENT", "COLON", "IDENT"):
        return OpDeclSyntax(MINUS_OP, Fixity.INFIX, (sort_at(0), sort_at(2)), sort_at(4))
    if shape("IDENT", "LBRACKET", "IDENT", "RBRACKET", "COLON", "IDENT"):
        return OpDeclSyntax(BRACKET_OP, Fixity.BRACKET, (sort_at(0), sort_at(2)), sort_at(5))
    if shape("IDENT", "UNDERSCORE", "IDENT", "COLON", "IDENT"):
        return OpDeclSyntax(SUBSCRIPT_OP, Fixity.SUBSCRIPT, (sort_at(0), sort_at(2)), sort_at(4))
    if shape("IDENT", "CARET", "IDENT", "COLON", "IDENT"):
        return OpDeclSyntax(SUPERSCRIPT_OP, Fixity.SUPERSCRIPT, (sort_at(0), sort_at(2)), sort_at(4))
    raise _err(text, 0, "malformed operator declaration")


def parse_var_decl(text: str) -> tuple[str, str]:
    tokens = lex(text)
    if [t.kind for t in tokens] != ["IDENT", "COLON", "IDENT", "EOF"]:
        raise _err(text, 0, "variable declaration must be 'x : S'")
    return tokens[0].value, tokens[2].value


def _split_top_level(text: str, tokens: list[Token], symbol: str, what: str) -> tuple[list[Token], list[Token]]:
    depth = 0
    found = None
    for i, t in enumerate(tokens):
        if t.kind in ("LPAREN", "LBRACKET"):
            depth += 1
        elif t.kind in ("RPAREN", "RBRACKET"):
            depth -= 1
        elif depth == 0 and t.kind == "OPSYM" and t.value == symbol:
            if found is not None:
                raise _err(text, t.start, f"more than one top-level {symbol!r} in {what}")
            found = i
    if found is None:
        raise _err(text, 0, f"{what} needs a top-level {symbol!r}")
    left = tokens[:found] + [Token("EOF", None, tokens[found].start, tokens[found].start)]
    return left, tokens[found + 1 :]


def _parse_token_slice(text: str, tokens: list[Token], view: ContextView) -> Term:
    parser = _Parser(text, tokens, view)
    term = parser.expr()
    if parser.tok.kind != "EOF":
        raise parser.fail(f"unexpected {parser._describe(parser.tok)} after expression")
    return term


def parse_rule_text(text: str, view: ContextView) -> tuple[Term, Term]:
    """`pattern ⇒ replacement` (ASCII `=>` accepted)."""
    tokens = lex(text)
    left, right = _split_top_level(text, tokens, RULE_ARROW, "rewrite rule")
    return _parse_token_slice(text, left, view), _parse_token_slice(text, right, view)


def _take_label(text: str, tokens: list[Token]) -> tuple[str, list[Token]]:
    if len(tokens) < 3 or tokens[0].kind != "IDENT" or tokens[1].kind != "COLON":
        raise _err(text, 0, "expected 'label : ...'")
    return tokens[0].value, tokens[2:]


def parse_term_asset(text: str, view: ContextView) -> tuple[str, Term]:
    label, rest = _take_label(text, lex(text))
    return label, _parse_token_slice(text, rest, view)


def parse_equation_asset(text: str, view: ContextView) -> tuple[str, Term, Term]:
    label, rest = _take_label(text, lex(text))
    left, right = _split_top_level(text, rest, "=", "equation")
    return label, _parse_token_slice(text, left, view), _parse_token_slice(text, right, view)


# ---------------------------------------------------------------------------
# canonical declaration text (used by the reader view)


def render_op_decl(d: OperatorDecl) -> str:
    if d.fixity is Fixity.PREFIX:
        if not d.arg_sorts:
            return f"{d.name} : {d.result_sort}"
        return f"{d.name}({', '.join(d.arg_sorts)}) : {d.result_sort}"
    a, b = d.arg_sorts
    if d.fixity is Fixity.INFIX:
        return f"{a} {d.name} {b} : {d.result_sort}"
    if d.fixity is Fixity.BRACKET:
        return f"{a}[{b}] : {d.result_sort}"
    mark = "_" if d.fixity is Fixity.SUBSCRIPT else "^"
    return f"{a}{mark}{b} : {d.result_sort}"


def render_sort_decl(d: SortDecl | SubsortDecl) -> str:
    if isinstance(d, SortDecl):
        return d.name
    return f"{d.lesser} {SUBSORT_SYMBOL} {d.greater}"


def render_var_decl(name: str, sort: str) -> str:
    return f"{name} : {sort}"


def render_rule(pattern: Term, replacement: Term) -> str:
    return f"{render_term(pattern)} {RULE_ARROW} {render_term(replacement)}"

"""Exact rational evaluation and IEEE 754-2008 binary64 arithmetic.

Rational results are always in lowest terms and carry the most specific
lattice sort for their value.  Binary64 values are represented by their
bit pattern; all NaNs collapse to one quiet NaN so equality and
serialization stay deterministic.

The rewriter consults this module after user rules at every position:
builtin arithmetic behaves like an infinite rule family with the lowest
priority, so contexts may override the arithmetic symbols.
"""

from __future__ import annotations

import math
import struct
from fractions import Fraction

from . import lattice
from .terms import App, ContextView, Fixity, FP64Term, RationalTerm, Term, fp64_term, rational_term

ARITHMETIC_OPS = ("+", "−", "×", "÷")
COMPARISON_OPS = ("<", ">", "≤", "≥", "=")
BUILTIN_OPS = ARITHMETIC_OPS + COMPARISON_OPS


def eval_rational(op: str, args: list[Fraction]) -> Fraction | bool:
    """Exact big-integer arithmetic; ÷ requires a nonzero second argument."""
    a, b = args
    if op == "+":
        return a + b
    if op == "−":
        return a - b
    if op == "×":
        return a * b
    if op == "÷":
        if b == 0:
            raise ZeroDivisionError("rational division by zero")
        return a / b
    if op == "<":
        return a < b
    if op == ">":
        return a > b
    if op == "≤":
        return a <= b
    if op == "≥":
        return a >= b
    if op == "=":
        return a == b
    raise ValueError(f"not a builtin operator: {op}")


# ---------------------------------------------------------------------------
# binary64


def float_to_bits(f: float) -> int:
    return struct.unpack("<Q", struct.pack("<d", f))[0]


def bits_to_float(bits: int) -> float:
    return struct.unpack("<d", struct.pack("<Q", bits))[0]


_EXP_BIAS = 1023
_MANT_BITS = 52
_INF_BITS = 0x7FF0000000000000
_SIGN_BIT = 1 << 63


def round_to_fp64(q: Fraction) -> int:
    """Bit pattern of the binary64 value nearest to q, ties to even.

    Overflow gives ±∞, underflow rounds into the subnormal range or to
    (signed) zero.  Implemented on integers so it is exact for arbitrary
    rationals.
    """
    if q == 0:
        return 0
    sign = _SIGN_BIT if q < 0 else 0
    p, d = abs(q.numerator), q.denominator

    # exact binary exponent: 2**e <= p/d < 2**(e+1)
    e = p.bit_length() - d.bit_length()
    if not _at_least_pow2(p, d, e):
        e -= 1

    # mantissa target: 52 fractional bits for normals, absolute scale
    # 2**-1074 once the exponent drops into the subnormal range
    t = _MANT_BITS - e if e >= 1 - _EXP_BIAS else _EXP_BIAS + _MANT_BITS - 1
    num, den = (p << t, d) if t >= 0 else (p, d << -t)
    mant, rem = divmod(num, den)
    if 2 * rem > den or (2 * rem == den and mant & 1):
        mant += 1
    if mant == 1 << (_MANT_BITS + 1):  # rounded up into the next binade
        mant >>= 1
        e += 1

    if e > _EXP_BIAS:
        return sign | _INF_BITS
    if e < 1 - _EXP_BIAS:
        # subnormal encoding; mant == 2**52 falls through to the smallest
        # normal because the biased exponent field becomes 1
        return sign | mant
    return sign | ((e + _EXP_BIAS) << _MANT_BITS) | (mant - (1 << _MANT_BITS))


def _at_least_pow2(p: int, d: int, e: int) -> bool:
    """p/d >= 2**e, exactly."""
    return p >= d << e if e >= 0 else p << -e >= d


def fp64_is_exact(q: Fraction, bits: int) -> bool:
    f = bits_to_float(bits)
    return math.isfinite(f) and Fraction(f) == q


def eval_fp64(op: str, args: list[int]) -> int | bool:
    """IEEE 754-2008 arithmetic on bit patterns, round to nearest even.

    Comparisons follow IEEE semantics: every comparison with a NaN is
    false, including `=`.
    """
    a, b = (bits_to_float(x) for x in args)
    if op in COMPARISON_OPS:
        if op == "<":
            return a < b
        if op == ">":
            return a > b
        if op == "≤":
            return a <= b
        if op == "≥":
            return a >= b
        return a == b
    if op == "+":
        r = a + b
    elif op == "−":
        r = a - b
    elif op == "×":
        r = a * b
    elif op == "÷":
        r = _ieee_div(a, b)
    else:
        raise ValueError(f"not a builtin operator: {op}")
    bits = float_to_bits(r)
    if math.isnan(r):
        bits = 0x7FF8000000000000
    return bits


def _ieee_div(a: float, b: float) -> float:
    if b == 0.0:
        if a == 0.0 or math.isnan(a):
            return math.nan
        return math.copysign(math.inf, a) * math.copysign(1.0, b)
    return a / b


# ---------------------------------------------------------------------------
# rewriter hook


def builtin_step(t: Term, view: ContextView) -> Term | None:
    """One builtin evaluation step at the root of t, or None.

    Fires only for the builtin infix symbols applied to two literals of
    the same family; a rational division by zero does not fire, leaving
    the (already kind-flagged) term in place.
    """
    if not isinstance(t, App) or t.fixity is not Fixity.INFIX or t.op not in BUILTIN_OPS:
        return None
    x, y = t.args
    if isinstance(x, RationalTerm) and isinstance(y, RationalTerm):
        if t.op == "÷" and y.value == 0:
            return None
        result = eval_rational(t.op, [x.value, y.value])
        if isinstance(result, bool):
            return _boolean_term(result, view)
        return rational_term(result, view.graph)
    if isinstance(x, FP64Term) and isinstance(y, FP64Term):
        result = eval_fp64(t.op, [x.bits, y.bits])
        if isinstance(result, bool):
            return _boolean_term(result, view)
        return fp64_term(result, view.graph)
    return None


def _boolean_term(value: bool, view: ContextView) -> Term | None:
    name = "true" if value else "false"
    if view.signature.nullary(name) is None:
        return None  # comparisons only evaluate where booleans exist
    return App(name, Fixity.PREFIX, (), lattice.BOOLEAN)

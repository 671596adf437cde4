"""Names and shape of the builtin number-sort lattice.

Kept free of term imports so both the term layer and the evaluator can
use it without cycles.
"""

from __future__ import annotations

from fractions import Fraction

NAT = "ℕ"
NAT_NZ = "ℕnz"
INT = "ℤ"
INT_NZ = "ℤnz"
RAT = "ℚ"
RAT_NZ = "ℚnz"
RAT_P = "ℚp"
RAT_NN = "ℚnn"
REAL = "ℝ"
REAL_NZ = "ℝnz"
REAL_P = "ℝp"
REAL_NN = "ℝnn"

NUMERIC_SORTS: frozenset[str] = frozenset(
    {NAT, NAT_NZ, INT, INT_NZ, RAT, RAT_NZ, RAT_P, RAT_NN, REAL, REAL_NZ, REAL_P, REAL_NN}
)

NUMERIC_EDGES: frozenset[tuple[str, str]] = frozenset(
    {
        (NAT_NZ, NAT),
        (NAT, INT),
        (NAT_NZ, INT_NZ),
        (INT_NZ, INT),
        (INT, RAT),
        (INT_NZ, RAT_NZ),
        (NAT_NZ, RAT_P),
        (RAT_P, RAT_NZ),
        (RAT_NZ, RAT),
        (NAT, RAT_NN),
        (RAT_P, RAT_NN),
        (RAT_NN, RAT),
        (RAT, REAL),
        (RAT_NZ, REAL_NZ),
        (REAL_NZ, REAL),
        (RAT_P, REAL_P),
        (REAL_P, REAL_NZ),
        (RAT_NN, REAL_NN),
        (REAL_NN, REAL),
        (REAL_P, REAL_NN),
    }
)

BOOLEAN = "Boolean"
FP64 = "FP64"

# ASCII spellings accepted on input; output is always the canonical name.
ASCII_SORT_ALIASES: dict[str, str] = {
    "N": NAT,
    "Nnz": NAT_NZ,
    "Z": INT,
    "Znz": INT_NZ,
    "Q": RAT,
    "Qnz": RAT_NZ,
    "Qp": RAT_P,
    "Qnn": RAT_NN,
    "R": REAL,
    "Rnz": REAL_NZ,
    "Rp": REAL_P,
    "Rnn": REAL_NN,
}


def literal_sort(value: Fraction) -> str:
    """Most specific lattice sort containing an exact rational value."""
    if value.denominator == 1:
        if value == 0:
            return NAT
        if value > 0:
            return NAT_NZ
        return INT_NZ
    return RAT_P if value > 0 else RAT_NZ

"""String and JSON encodings shared by the file formats and the CLI.

Rationals serialize as "p/q" with "/q" omitted when q = 1; Gaussian
rationals as {"re": "p/q", "im": "p/q"}.  Matrices serialize as
row-major arrays of rational strings.
"""

from __future__ import annotations

from fractions import Fraction

from .errors import InputError
from .linalg import GaussianRational, SparseMatrix


def rational_to_str(x: Fraction) -> str:
    x = Fraction(x)
    if x.denominator == 1:
        return str(x.numerator)
    return f"{x.numerator}/{x.denominator}"


def rational_from_str(s) -> Fraction:
    if isinstance(s, int):
        return Fraction(s)
    if not isinstance(s, str):
        raise InputError(f"expected rational string, got {type(s).__name__}")
    try:
        return Fraction(s)
    except (ValueError, ZeroDivisionError) as exc:
        raise InputError(f"bad rational literal {s!r}") from exc


def gaussian_to_json(z: GaussianRational) -> dict:
    return {"re": rational_to_str(z.re), "im": rational_to_str(z.im)}


def gaussian_from_json(obj) -> GaussianRational:
    if isinstance(obj, dict):
        return GaussianRational(rational_from_str(obj.get("re", "0")),
                                rational_from_str(obj.get("im", "0")))
    return GaussianRational(rational_from_str(obj))


def scalar_to_json(x):
    if isinstance(x, GaussianRational):
        if x.im == 0:
            return rational_to_str(x.re)
        return gaussian_to_json(x)
    return rational_to_str(x)


def matrix_to_json(rows_of_scalars) -> list:
    return [[scalar_to_json(v) for v in row] for row in rows_of_scalars]


def matrix_from_json(obj) -> list:
    if not isinstance(obj, list) or not all(isinstance(r, list) for r in obj):
        raise InputError("matrix must be a row-major array of arrays")
    width = {len(r) for r in obj}
    if len(width) > 1:
        raise InputError("ragged matrix rows")
    return [[rational_from_str(v) for v in row] for row in obj]


def sparse_to_json(m: SparseMatrix) -> list:
    return [[r, c, rational_to_str(v)]
            for (r, c), v in sorted(m.entries.items())]


def sparse_from_json(rows: int, cols: int, items) -> SparseMatrix:
    return SparseMatrix.from_entries(
        rows, cols, ((r, c, rational_from_str(v)) for r, c, v in items))

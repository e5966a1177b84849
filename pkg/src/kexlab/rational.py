"""Exact rational parsing and formatting.

Every quantity on the noiseless path is a ``fractions.Fraction``. Floats are
rejected at the boundary so inexact binary values cannot leak into paths
whose contracts are exact equalities.
"""

from __future__ import annotations

from fractions import Fraction


def as_fraction(value) -> Fraction:
    """Coerce an int, Fraction, or decimal/ratio string to an exact Fraction.

    Floats are refused: a float argument almost always means an unintended
    loss of exactness upstream. Convert explicitly via ``str`` if the decimal
    literal is what you mean.
    """
    if isinstance(value, Fraction):
        return value
    if isinstance(value, bool):
        raise TypeError("bool is not a rational quantity")
    if isinstance(value, int):
        return Fraction(value)
    if isinstance(value, str):
        return Fraction(value.strip())
    if isinstance(value, float):
        raise TypeError(
            f"refusing float {value!r} on the exact path; pass an int, "
            f"Fraction, or string such as '23/7'"
        )
    raise TypeError(f"cannot interpret {type(value).__name__} as a rational")


def format_rational(x: Fraction) -> str:
    """Canonical wire/file form: 'numerator/denominator', always with both.

    Fraction normalizes to lowest terms with a positive denominator, so two
    equal values always format identically.
    """
    return f"{x.numerator}/{x.denominator}"


def parse_rational(text: str) -> Fraction:
    """Inverse of :func:`format_rational`; also accepts plain ints and decimals."""
    return Fraction(text.strip())

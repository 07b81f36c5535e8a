"""Exact rational plumbing shared by the whole package.

Weights, coupling entries and squared costs are kept as ``fractions.Fraction``
wherever possible: several of the phenomena this package hunts for (equidistant
branch targets, constant-cost polytopes) live on exact ties that float
arithmetic cannot certify.  Floats convert losslessly (every finite float is a
dyadic rational), so mixing float-built grids with rational masses never loses
information; only genuinely irrational inputs are approximated by their float
value before conversion.
"""

from __future__ import annotations

from fractions import Fraction
from typing import Iterable, Sequence

import numpy as np

__all__ = [
    "as_fraction",
    "fraction_vector",
    "float_vector",
    "format_ratio",
    "parse_ratio",
]


def as_fraction(x) -> Fraction:
    """Convert a number to an exact Fraction.

    Fractions and ints pass through; floats convert via their exact binary
    value; strings accept both "p/q" and decimal literals.
    """
    if isinstance(x, Fraction):
        return x
    if isinstance(x, (int, np.integer)):
        return Fraction(int(x))
    if isinstance(x, str):
        return parse_ratio(x)
    if isinstance(x, (float, np.floating)):
        xf = float(x)
        if not np.isfinite(xf):
            raise ValueError(f"cannot represent non-finite value {x!r} exactly")
        return Fraction(xf)
    raise TypeError(f"cannot convert {type(x).__name__} to Fraction")


def fraction_vector(values: Iterable) -> tuple[Fraction, ...]:
    return tuple(as_fraction(v) for v in values)


def float_vector(values: Sequence[Fraction]) -> np.ndarray:
    return np.array([float(v) for v in values], dtype=float)


def format_ratio(x: Fraction) -> str:
    """Serialize a Fraction as "p/q" (always with the slash, even for ints)."""
    f = as_fraction(x)
    return f"{f.numerator}/{f.denominator}"


def parse_ratio(text: str) -> Fraction:
    """Parse "p/q" or a decimal literal into an exact Fraction."""
    s = text.strip()
    if "/" in s:
        num, den = s.split("/", 1)
        return Fraction(int(num.strip()), int(den.strip()))
    # Fraction(str) parses decimal literals exactly ("0.25" -> 1/4).
    return Fraction(s)

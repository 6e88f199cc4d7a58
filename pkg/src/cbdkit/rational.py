"""Rational-string parsing and formatting.

All probabilities are held as :class:`fractions.Fraction`; these helpers
implement the canonical string grammar used in files and reports.
"""
import re
from fractions import Fraction

from .errors import ValidationError

_RATIONAL_RE = re.compile(r"([+-]?\d+)(?:/(\d+))?")


def parse_rational(text):
    """Parse ``"1/2"``, ``"-3"``, ``"+4/8"`` into a Fraction.

    Integers are accepted as-is; floats are rejected so that no rounding
    can sneak in.
    """
    if isinstance(text, bool):
        raise ValidationError(f"not a rational: {text!r}")
    if isinstance(text, (int, Fraction)):
        return Fraction(text)
    if not isinstance(text, str):
        raise ValidationError(f"not a rational string: {text!r}")
    m = _RATIONAL_RE.fullmatch(text.strip())
    if m is None:
        raise ValidationError(f"not a rational string: {text!r}")
    num, den = m.group(1), m.group(2)
    if den is not None and int(den) == 0:
        raise ValidationError(f"zero denominator in {text!r}")
    return Fraction(int(num), int(den) if den else 1)


def format_rational(value):
    """Canonical form: ``"0"``, ``"1"``, ``"-3/4"``."""
    value = Fraction(value)
    if value.denominator == 1:
        return str(value.numerator)
    return f"{value.numerator}/{value.denominator}"

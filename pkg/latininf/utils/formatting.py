"""Formatting helpers for rationals, elements, and report summaries."""

import re
from fractions import Fraction


def format_rational(x) -> str:
    """Canonical ``p/q`` text for an exact rational; integers print bare. e.g. -3/4, 5"""
    if isinstance(x, Fraction):
        if x.denominator == 1:
            return str(x.numerator)
        return f"{x.numerator}/{x.denominator}"
    return str(x)


def format_verdict(passed: bool) -> str:
    """Return rich markup for a pass/fail verdict."""
    return "[green]PASS[/green]" if passed else "[red]FAIL[/red]"


def format_count(n: int) -> str:
    return f"{n:,}"


_RATIONAL_RE = re.compile(r"^\s*(-?\d+)(?:\s*/\s*(\d+))?\s*$")


def parse_rational(text) -> Fraction | int:
    """Parse ``p/q`` or an integer literal into an exact value.

    Integral values come back as ``int`` so they hash and compare equal to
    plain integers used elsewhere; everything else is a reduced ``Fraction``.
    Decimal and exponent forms are rejected (no silent float rounding).
    """
    if isinstance(text, bool):
        raise ValueError(f"Invalid rational literal {text!r}")
    if isinstance(text, int):
        return text
    if isinstance(text, Fraction):
        return normalize_rational(text)
    m = _RATIONAL_RE.match(str(text))
    if not m:
        raise ValueError(f"Invalid rational literal {text!r}. Expected p/q or an integer.")
    num = int(m.group(1))
    if m.group(2) is None:
        return num
    den = int(m.group(2))
    if den == 0:
        raise ValueError(f"Invalid rational literal {text!r}: zero denominator")
    return normalize_rational(Fraction(num, den))


def normalize_rational(x):
    """int when integral, reduced Fraction otherwise."""
    if isinstance(x, Fraction) and x.denominator == 1:
        return x.numerator
    return x

"""Exact rational arithmetic.

Values are :class:`fractions.Fraction`, which already keeps a positive
denominator in lowest terms.  This module adds the textual syntax used by
the problem language and the JSON reports (``n`` or ``n/d``).
"""

from __future__ import annotations

import re
from fractions import Fraction

Rational = Fraction

_RAT_RE = re.compile(r"^(-?\d+)(?:/(\d+))?$")


class RationalSyntaxError(ValueError):
    pass


def is_rational_literal(text: str) -> bool:
    return _RAT_RE.match(text) is not None


def rat_parse(text: str) -> Fraction:
    """Parse ``[-]digits`` or ``[-]digits/digits`` into a canonical Fraction."""
    m = _RAT_RE.match(text.strip())
    if m is None:
        raise RationalSyntaxError(f"malformed rational: {text!r}")
    num = int(m.group(1))
    den = int(m.group(2)) if m.group(2) is not None else 1
    if den == 0:
        raise ZeroDivisionError(f"zero denominator in rational: {text!r}")
    return Fraction(num, den)


def rat_str(r: Fraction) -> str:
    if r.denominator == 1:
        return str(r.numerator)
    return f"{r.numerator}/{r.denominator}"


def rat_arith(op: str, a: Fraction, b: Fraction | None = None):
    """Dispatch a named arithmetic operation on exact rationals.

    ``cmp`` returns -1, 0 or 1.  ``neg`` ignores ``b``.
    """
    if op == "neg":
        return -a
    if b is None:
        raise TypeError(f"{op} needs two operands")
    if op == "add":
        return a + b
    if op == "sub":
        return a - b
    if op == "mul":
        return a * b
    if op == "div":
        if b == 0:
            raise ZeroDivisionError("rational division by zero")
        return a / b
    if op == "min":
        return min(a, b)
    if op == "max":
        return max(a, b)
    if op == "cmp":
        return (a > b) - (a < b)
    raise ValueError(f"unknown rational operation: {op}")


def floor_rat(r: Fraction) -> Fraction:
    return Fraction(r.numerator // r.denominator)


def ceil_rat(r: Fraction) -> Fraction:
    return Fraction(-((-r.numerator) // r.denominator))

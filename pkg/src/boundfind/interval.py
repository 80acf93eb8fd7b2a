"""Closed intervals with optional endpoints over exact rationals.

An absent endpoint means "unbounded on that side".  All bounds are weak
(closed); strict inequalities are never tracked.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from functools import reduce
from typing import Optional

from .rational import ceil_rat, floor_rat, rat_parse, rat_str

_INF = math.inf


@dataclass(frozen=True)
class Interval:
    lo: Optional[Fraction] = None
    hi: Optional[Fraction] = None

    def __post_init__(self):
        if self.lo is not None and self.hi is not None and self.lo > self.hi:
            raise ValueError(f"empty interval [{self.lo}, {self.hi}]")

    @classmethod
    def point(cls, v) -> "Interval":
        v = Fraction(v)
        return cls(v, v)

    @classmethod
    def of(cls, lo, hi) -> "Interval":
        """Convenience constructor accepting ints/strings/None."""
        return cls(_coerce(lo), _coerce(hi))

    @property
    def is_top(self) -> bool:
        return self.lo is None and self.hi is None

    @property
    def width(self) -> Optional[Fraction]:
        if self.lo is None or self.hi is None:
            return None
        return self.hi - self.lo

    def __str__(self) -> str:
        lo = "-inf" if self.lo is None else rat_str(self.lo)
        hi = "+inf" if self.hi is None else rat_str(self.hi)
        return f"[{lo}, {hi}]"

    def to_json(self) -> dict:
        return {
            "lo": None if self.lo is None else rat_str(self.lo),
            "hi": None if self.hi is None else rat_str(self.hi),
        }

    @classmethod
    def from_json(cls, obj: dict) -> "Interval":
        lo, hi = obj.get("lo"), obj.get("hi")
        return cls(None if lo is None else rat_parse(lo), None if hi is None else rat_parse(hi))


TOP = Interval()


def _coerce(v):
    if v is None:
        return None
    if isinstance(v, str):
        return rat_parse(v)
    return Fraction(v)


def _lo_ext(a: Interval):
    return -_INF if a.lo is None else a.lo


def _hi_ext(a: Interval):
    return _INF if a.hi is None else a.hi


def _from_ext(lo, hi) -> Interval:
    return Interval(None if lo == -_INF else lo, None if hi == _INF else hi)


def _emul(x, y):
    # 0 * inf = 0 is the right convention for hulls of closed intervals
    if x == 0 or y == 0:
        return Fraction(0)
    if isinstance(x, float) or isinstance(y, float):
        return _INF if (x > 0) == (y > 0) else -_INF
    return x * y


def iv_add(a: Interval, b: Interval) -> Interval:
    lo = None if a.lo is None or b.lo is None else a.lo + b.lo
    hi = None if a.hi is None or b.hi is None else a.hi + b.hi
    return Interval(lo, hi)


def iv_neg(a: Interval) -> Interval:
    return Interval(None if a.hi is None else -a.hi, None if a.lo is None else -a.lo)


def iv_mul(a: Interval, b: Interval) -> Interval:
    """Product hull.  Missing endpoints are handled as infinities with 0*inf = 0."""
    ends = [
        _emul(x, y)
        for x in (_lo_ext(a), _hi_ext(a))
        for y in (_lo_ext(b), _hi_ext(b))
    ]
    return _from_ext(min(ends), max(ends))


def iv_square(a: Interval) -> Interval:
    if a.lo is not None and a.lo >= 0:
        return Interval(a.lo * a.lo, None if a.hi is None else a.hi * a.hi)
    if a.hi is not None and a.hi <= 0:
        return Interval(a.hi * a.hi, None if a.lo is None else a.lo * a.lo)
    if a.lo is None or a.hi is None:
        return Interval(Fraction(0), None)
    return Interval(Fraction(0), max(a.lo * a.lo, a.hi * a.hi))


def iv_recip(a: Interval) -> Interval:
    """Reciprocal; any interval that may contain 0 yields no bounds.

    For a positive interval with no upper end the result is [0, 1/lo]
    (symmetrically for negative intervals).
    """
    if a.lo is not None and a.lo > 0:
        return Interval(Fraction(0) if a.hi is None else 1 / a.hi, 1 / a.lo)
    if a.hi is not None and a.hi < 0:
        return Interval(1 / a.hi, Fraction(0) if a.lo is None else 1 / a.lo)
    return TOP


def iv_union(a: Interval, b: Interval) -> Interval:
    lo = None if a.lo is None or b.lo is None else min(a.lo, b.lo)
    hi = None if a.hi is None or b.hi is None else max(a.hi, b.hi)
    return Interval(lo, hi)


def iv_union_all(items) -> Interval:
    return reduce(iv_union, items)


def iv_meet(a: Interval, b: Interval) -> Interval:
    """Intersection.  Raises ValueError if the result is empty."""
    lo = a.lo if b.lo is None else b.lo if a.lo is None else max(a.lo, b.lo)
    hi = a.hi if b.hi is None else b.hi if a.hi is None else min(a.hi, b.hi)
    return Interval(lo, hi)


def iv_contains(a: Interval, v) -> bool:
    return (a.lo is None or a.lo <= v) and (a.hi is None or v <= a.hi)


def iv_subset(a: Interval, b: Interval) -> bool:
    """True iff a is contained in b."""
    lo_ok = b.lo is None or (a.lo is not None and b.lo <= a.lo)
    hi_ok = b.hi is None or (a.hi is not None and a.hi <= b.hi)
    return lo_ok and hi_ok


def lo_at_least(candidate: Optional[Fraction], claim: Optional[Fraction]) -> bool:
    """Does a lower bound ``candidate`` justify the (weaker or equal) ``claim``?"""
    return claim is None or (candidate is not None and candidate >= claim)


def hi_at_most(candidate: Optional[Fraction], claim: Optional[Fraction]) -> bool:
    return claim is None or (candidate is not None and candidate <= claim)


def better_lo(a: Optional[Fraction], b: Optional[Fraction]) -> Optional[Fraction]:
    if a is None:
        return b
    if b is None:
        return a
    return max(a, b)


def better_hi(a: Optional[Fraction], b: Optional[Fraction]) -> Optional[Fraction]:
    if a is None:
        return b
    if b is None:
        return a
    return min(a, b)


def iv_integral(a: Interval) -> Interval:
    """Tighten endpoints of a range known to hold only integers."""
    return Interval(
        None if a.lo is None else ceil_rat(a.lo),
        None if a.hi is None else floor_rat(a.hi),
    )

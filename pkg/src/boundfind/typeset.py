"""Typeset reasoning over six numeric categories.

A typeset over-approximates which kinds of rational a term may denote:
negative integers, zero, one, integers above one, negative non-integers
and positive non-integers.  Propagation through ``+``, ``*``, squares and
reciprocals uses fixed tables; reciprocal of zero is taken to be zero, the
conservative convention.
"""

from __future__ import annotations

import enum
from fractions import Fraction
from functools import reduce
from typing import Callable, Mapping, Optional

from .interval import Interval, TOP, iv_union
from .rational import ceil_rat, floor_rat
from .term import Call, Const, Term, Var, substitute


class TS(enum.Flag):
    NEGATIVE_INTEGER = enum.auto()
    ZERO = enum.auto()
    ONE = enum.auto()
    INTEGER_ABOVE_ONE = enum.auto()
    NEGATIVE_RATIO = enum.auto()
    POSITIVE_RATIO = enum.auto()


NI, Z, O, P, NR, PR = (
    TS.NEGATIVE_INTEGER, TS.ZERO, TS.ONE, TS.INTEGER_ABOVE_ONE,
    TS.NEGATIVE_RATIO, TS.POSITIVE_RATIO,
)
EMPTY = TS(0)
ALL = NI | Z | O | P | NR | PR
INTEGERS = NI | Z | O | P
CATEGORIES = (NI, Z, O, P, NR, PR)

_NAMES = {
    NI: "negative-integer", Z: "zero", O: "one", P: "integer-above-one",
    NR: "negative-ratio", PR: "positive-ratio",
}
_BY_NAME = {v: k for k, v in _NAMES.items()}


def ts_subset(a: TS, b: TS) -> bool:
    return a & b == a


def ts_names(ts: TS) -> list[str]:
    return [_NAMES[c] for c in CATEGORIES if c in ts]


def ts_from_names(names) -> TS:
    return reduce(lambda acc, n: acc | _BY_NAME[n], names, EMPTY)


def _sym(table: dict) -> dict:
    out = dict(table)
    for (a, b), v in table.items():
        out[(b, a)] = v
    return out


# Possible categories of a + b for a in category x, b in category y.
_ADD = _sym({
    (NI, NI): NI, (NI, O): NI | Z, (NI, P): NI | Z | O | P,
    (NI, NR): NR, (NI, PR): NR | PR,
    (O, O): P, (O, P): P, (O, NR): NR | PR, (O, PR): PR,
    (P, P): P, (P, NR): NR | PR, (P, PR): PR,
    (NR, NR): NI | NR, (NR, PR): ALL, (PR, PR): O | P | PR,
})
_MUL = _sym({
    (NI, NI): O | P, (NI, P): NI, (NI, NR): O | P | PR, (NI, PR): NI | NR,
    (P, P): P, (P, NR): NI | NR, (P, PR): O | P | PR,
    (NR, NR): O | P | PR, (NR, PR): NI | NR, (PR, PR): O | P | PR,
})
_SQUARE = {NI: O | P, Z: Z, O: O, P: P, NR: PR, PR: PR}
_RECIP = {NI: NI | NR, Z: Z, O: O, P: PR, NR: NI | NR, PR: P | PR}


def _add_cat(x: TS, y: TS) -> TS:
    if x == Z:
        return y
    if y == Z:
        return x
    return _ADD[(x, y)]


def _mul_cat(x: TS, y: TS) -> TS:
    if x == Z or y == Z:
        return Z
    if x == O:
        return y
    if y == O:
        return x
    return _MUL[(x, y)]


def _lift2(fn, a: TS, b: TS) -> TS:
    out = EMPTY
    for x in CATEGORIES:
        if x in a:
            for y in CATEGORIES:
                if y in b:
                    out |= fn(x, y)
    return out


def _lift1(table, a: TS) -> TS:
    out = EMPTY
    for x in CATEGORIES:
        if x in a:
            out |= table[x]
    return out


def ts_add(a: TS, b: TS) -> TS:
    return _lift2(_add_cat, a, b)


def ts_mul(a: TS, b: TS) -> TS:
    return _lift2(_mul_cat, a, b)


def ts_square(a: TS) -> TS:
    return _lift1(_SQUARE, a)


def ts_recip(a: TS) -> TS:
    return _lift1(_RECIP, a)


def ts_of_const(v: Fraction) -> TS:
    if v.denominator != 1:
        return NR if v < 0 else PR
    if v < 0:
        return NI
    if v == 0:
        return Z
    if v == 1:
        return O
    return P


def _has_integer(lo: Optional[Fraction], hi: Optional[Fraction]) -> bool:
    if lo is None or hi is None:
        return True
    return ceil_rat(lo) <= floor_rat(hi)


def _has_nonint(lo: Optional[Fraction], hi: Optional[Fraction]) -> bool:
    # assumes the closed range [lo, hi] is nonempty
    if lo is None or hi is None or lo < hi:
        return True
    return lo.denominator != 1


def _min(a, b):
    return b if a is None else a if b is None else min(a, b)


def _max(a, b):
    return b if a is None else a if b is None else max(a, b)


def ts_of_range(rng: Interval, integer: bool) -> TS:
    """Categories inhabited by the rationals (or integers) in ``rng``."""
    lo, hi = rng.lo, rng.hi
    out = EMPTY
    if _has_integer(lo, _min(hi, Fraction(-1))):
        out |= NI
    if (lo is None or lo <= 0) and (hi is None or hi >= 0):
        out |= Z
    if (lo is None or lo <= 1) and (hi is None or hi >= 1):
        out |= O
    if _has_integer(_max(lo, Fraction(2)), hi):
        out |= P
    if not integer:
        neg_hi = _min(hi, Fraction(0))
        if (lo is None or lo <= neg_hi) and _has_nonint(lo, neg_hi):
            out |= NR
        pos_lo = _max(lo, Fraction(0))
        if (hi is None or pos_lo <= hi) and _has_nonint(pos_lo, hi):
            out |= PR
    return out


_CAT_BOUNDS = {
    NI: Interval(None, Fraction(-1)),
    Z: Interval(Fraction(0), Fraction(0)),
    O: Interval(Fraction(1), Fraction(1)),
    P: Interval(Fraction(2), None),
    NR: Interval(None, Fraction(0)),
    PR: Interval(Fraction(0), None),
}


def typeset_bounds(ts: TS) -> Interval:
    """Tightest weak interval covering every category in ``ts``."""
    parts = [_CAT_BOUNDS[c] for c in CATEGORIES if c in ts]
    if not parts:
        return TOP
    return reduce(iv_union, parts)


def typeset_of(t: Term, var_ts: Callable[[str], TS], defs: Mapping | None = None) -> TS:
    """Sound typeset of a canonical term.

    ``var_ts`` gives each variable's typeset.  Calls of defined functions
    are typed through their bodies; other calls are unconstrained.
    """
    if isinstance(t, Const):
        return ts_of_const(t.value)
    if isinstance(t, Var):
        return var_ts(t.name)
    if isinstance(t, Call):
        fdef = (defs or {}).get(t.fn)
        if fdef is None:
            return ALL
        return typeset_of(substitute(fdef.body, dict(zip(fdef.params, t.args))), var_ts, defs)
    if t.op == "+":
        return reduce(ts_add, (typeset_of(a, var_ts, defs) for a in t.args))
    if t.op == "*":
        squares, rest = split_squares(t.args)
        parts = [ts_square(typeset_of(s, var_ts, defs)) for s in squares]
        parts += [typeset_of(r, var_ts, defs) for r in rest]
        return reduce(ts_mul, parts)
    if t.op == "recip":
        return ts_recip(typeset_of(t.args[0], var_ts, defs))
    raise ValueError(f"typeset_of expects a canonical term, got operator {t.op!r}")


def split_squares(factors) -> tuple[list, list]:
    """Pair up repeated factors of a product.

    Returns ``(squared, rest)`` such that the product equals
    prod(s*s for s in squared) * prod(rest).  Order follows first occurrence.
    """
    counts: dict = {}
    order = []
    for f in factors:
        if f not in counts:
            order.append(f)
            counts[f] = 0
        counts[f] += 1
    squared, rest = [], []
    for f in order:
        squared.extend([f] * (counts[f] // 2))
        if counts[f] % 2:
            rest.append(f)
    return squared, rest


__all__ = [
    "TS", "ALL", "EMPTY", "INTEGERS", "CATEGORIES", "typeset_of", "typeset_bounds",
    "ts_of_range", "ts_of_const", "ts_add", "ts_mul", "ts_square", "ts_recip",
    "ts_names", "ts_from_names", "ts_subset", "split_squares",
]

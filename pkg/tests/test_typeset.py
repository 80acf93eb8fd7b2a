import itertools
from fractions import Fraction as F

import pytest

from boundfind.interval import TOP, Interval
from boundfind.term import Call, Var, normalize, parse_term
from boundfind.rewrite import FnDef
from boundfind.typeset import (
    ALL, CATEGORIES, EMPTY, NI, NR, O, P, PR, Z, split_squares, ts_add, ts_from_names, ts_mul, ts_names,
    ts_of_const, ts_of_range, ts_recip, ts_subset, ts_square, typeset_bounds, typeset_of,
)

# Representative members of each category, enough to hit every sign and
# magnitude combination the tables distinguish.
SAMPLES = {
    NI: [F(-1), F(-2), F(-3), F(-7)],
    Z: [F(0)],
    O: [F(1)],
    P: [F(2), F(3), F(4), F(9)],
    NR: [F(-1, 2), F(-3, 2), F(-2, 3), F(-5, 2), F(-1, 4), F(-7, 3)],
    PR: [F(1, 2), F(3, 2), F(2, 3), F(5, 2), F(1, 4), F(7, 3), F(4, 3)],
}


def test_const_categories():
    assert ts_of_const(F(0)) == Z
    assert ts_of_const(F(1)) == O
    assert ts_of_const(F(5)) == P
    assert ts_of_const(F(-5)) == NI
    assert ts_of_const(F(-1, 2)) == NR
    assert ts_of_const(F(7, 2)) == PR


@pytest.mark.parametrize("a, b", list(itertools.product(CATEGORIES, repeat=2)))
def test_add_mul_tables_cover_samples(a, b):
    for x, y in itertools.product(SAMPLES[a], SAMPLES[b]):
        assert ts_of_const(x + y) & ts_add(a, b), (a, b, x, y)
        assert ts_of_const(x * y) & ts_mul(a, b), (a, b, x, y)


@pytest.mark.parametrize("a", CATEGORIES)
def test_unary_tables_cover_samples(a):
    for x in SAMPLES[a]:
        assert ts_of_const(x * x) & ts_square(a)
        assert ts_of_const(1 / x if x else F(0)) & ts_recip(a)


def test_negative_integer_product():
    assert ts_mul(NI, NI) == O | P


def test_range_typesets():
    assert ts_of_range(Interval(2, 4), integer=False) == P | PR
    assert ts_of_range(Interval(2, 4), integer=True) == P
    assert ts_of_range(Interval(F(-1, 2), 0), integer=False) == Z | NR
    assert ts_of_range(TOP, integer=False) == ALL
    assert ts_of_range(Interval(F(1, 3), F(2, 3)), integer=False) == PR


def test_range_typeset_oracle():
    # category membership of [2,4] ∩ Q, enumerated
    pts = [F(2) + F(k, 7) for k in range(15)]
    cats = EMPTY
    for p in pts:
        cats |= ts_of_const(p)
    assert cats == ts_of_range(Interval(2, 4), integer=False)


def test_bounds():
    assert typeset_bounds(Z | NR) == Interval(None, 0)
    assert typeset_bounds(Z | O) == Interval(0, 1)
    assert typeset_bounds(NI) == Interval(None, -1)
    assert typeset_bounds(P) == Interval(2, None)
    assert typeset_bounds(ALL) == TOP


def test_names_round_trip():
    ts = Z | NR
    assert ts_names(ts) == ["zero", "negative-ratio"]
    assert ts_from_names(ts_names(ts)) == ts


def test_typeset_of_terms():
    def var_ts(n):
        return {"x": P | PR, "z": Z | NR}.get(n, ALL)

    assert typeset_of(normalize(parse_term("(* x x)")), var_ts) == P | PR
    assert ts_subset(typeset_of(normalize(parse_term("(/ z)")), var_ts), NI | Z | NR)
    assert typeset_bounds(typeset_of(normalize(parse_term("(/ z)")), var_ts)).hi == 0
    assert typeset_of(Call("g", (Var("x"),)), var_ts) == ALL
    defs = {"g": FnDef("g", ("u",), normalize(parse_term("(* u u u)")))}
    # categories, not magnitudes: a negative ratio times a positive ratio may be -1
    assert typeset_of(Call("g", (Var("z"),)), var_ts, defs) == NI | Z | NR
    defs = {"g": FnDef("g", ("u",), normalize(parse_term("(* -1 u u)")))}
    assert typeset_of(Call("g", (Var("x"),)), var_ts, defs) == NI | NR


def test_split_squares():
    x, y = Var("x"), Var("y")
    assert split_squares([x, x, y]) == ([x], [y])
    assert split_squares([x, x, x]) == ([x], [x])
    assert split_squares([x, y]) == ([], [x, y])

import math
from fractions import Fraction as F

import pytest
from hypothesis import given, strategies as st

from boundfind.cases import CaseError, CaseSpec, Config, Problem, case_segments, gen_cases, solve
from boundfind.env import parse_hyp
from boundfind.interval import TOP, Interval
from boundfind.rewrite import FnDef, Phase
from boundfind.term import Call, Var, normalize, parse_term

FOO = FnDef("foo", ("x",), normalize(parse_term("(- (* x x) (* 3 x))")))
FOO_HYP = tuple(parse_hyp("(and (rationalp x) (<= 2 x) (<= x 4))"))


def foo_problem(cases=(), **kw):
    return Problem(
        name="foo", goal=Call("foo", (Var("x"),)), hyp=FOO_HYP,
        phases=(Phase(frozenset({"foo"})),), cases=cases, defs={"foo": FOO}, **kw,
    )


def test_gen_cases_examples():
    assert gen_cases(CaseSpec("x", F(2), F(4), F(1))) == [(2, 3), (3, 4)]
    assert len(gen_cases(CaseSpec("x", F(2), F(4), F(1, 64)))) == 128
    assert gen_cases(CaseSpec("x", F(0), F(1), F(2, 3))) == [(0, F(2, 3)), (F(2, 3), 1)]


def test_case_spec_validation():
    with pytest.raises(CaseError):
        CaseSpec("x", F(4), F(2), F(1))
    with pytest.raises(CaseError):
        CaseSpec("x", F(0), F(1), F(0))
    assert str(CaseSpec("x", F(2), F(4), F(1, 64))) == "(:ranges-from-to-by x 2 4 1/64)"


spec_parts = st.tuples(
    st.fractions(-10, 10, max_denominator=12),
    st.fractions(F(1, 12), 10, max_denominator=12),
    st.fractions(F(1, 12), 5, max_denominator=12),
)


@given(spec_parts)
def test_segment_coverage(parts):
    start, width, step = parts
    spec = CaseSpec("x", start, start + width, step)
    segs = gen_cases(spec)
    assert len(segs) == math.ceil(width / step)
    assert segs[0][0] == spec.start and segs[-1][1] == spec.stop
    for (a, b), (c, d) in zip(segs, segs[1:]):
        assert b == c and a < b
    assert all(lo < hi for lo, hi in segs)


def test_case_segments_cover_hypothesis_range():
    spec = CaseSpec("x", F(2), F(4), F(1))
    assert case_segments(spec, Interval(2, 4)) == [Interval(2, 3), Interval(3, 4)]
    assert case_segments(spec, Interval(0, 5)) == [Interval(0, 2), Interval(2, 3), Interval(3, 4), Interval(4, 5)]
    assert case_segments(spec, TOP) == [Interval(None, 2), Interval(2, 3), Interval(3, 4), Interval(4, None)]
    assert case_segments(spec, Interval(F(5, 2), 3)) == [Interval(F(5, 2), 3), Interval(3, 3)]


def test_solve_foo_values():
    assert solve(foo_problem()).bounds == Interval(-8, 10)
    r = solve(foo_problem((CaseSpec("x", F(2), F(4), F(1)),)))
    assert [c.bounds for c in r.per_case] == [Interval(-5, 3), Interval(-3, 7)]
    assert r.bounds == Interval(-5, 7)
    r = solve(foo_problem((CaseSpec("x", F(2), F(4), F(1, 64)),)))
    assert r.bounds == Interval(F(-131, 64), F(259, 64))
    assert len(r.per_case) == 128
    assert all(c.trace.result == c.bounds for c in r.per_case)


def test_union_covers_every_case():
    r = solve(foo_problem((CaseSpec("x", F(2), F(4), F(1, 8)),)))
    for c in r.per_case:
        assert r.bounds.lo <= c.bounds.lo and c.bounds.hi <= r.bounds.hi


def test_product_of_case_specs():
    p = Problem(
        name="xy", goal=normalize(parse_term("(* x y)")),
        hyp=tuple(parse_hyp("(and (rationalp x) (<= -1 x) (<= x 1) (rationalp y) (<= 0 y) (<= y 2))")),
        cases=(CaseSpec("x", F(-1), F(1), F(1)), CaseSpec("y", F(0), F(2), F(1, 2))),
    )
    r = solve(p)
    assert len(r.per_case) == 2 * 4
    assert list(r.per_case[1].segments) == ["x", "y"]
    assert r.bounds == Interval(-2, 2)


def test_case_cap():
    p = foo_problem((CaseSpec("x", F(2), F(4), F(1, 64)),), config=Config(case_cap=100))
    with pytest.raises(CaseError, match="case cap"):
        solve(p)


def test_case_variable_checks():
    with pytest.raises(CaseError, match="not declared"):
        solve(foo_problem((CaseSpec("y", F(0), F(1), F(1)),)))
    with pytest.raises(CaseError, match="twice"):
        spec = CaseSpec("x", F(2), F(4), F(1))
        solve(foo_problem((spec, spec)))


def test_vacuous_integer_cases():
    p = Problem(
        name="n", goal=Var("n"),
        hyp=tuple(parse_hyp("(and (integerp n) (<= 0 n) (<= n 2))")),
        cases=(CaseSpec("n", F(0), F(2), F(1, 3)),),
    )
    r = solve(p)
    # [0,1/3] [1/3,2/3] [2/3,1] [1,4/3] [4/3,5/3] [5/3,2]
    assert [c.vacuous for c in r.per_case] == [False, True, False, False, True, False]
    assert r.bounds == Interval(0, 2)


def test_digest_ignores_config_and_layout():
    a = foo_problem()
    b = foo_problem(config=Config(backchain_depth=1))
    assert a.digest() == b.digest()
    c = foo_problem()
    c.goal = parse_term("(foo   x)")
    assert c.digest() == a.digest()
    d = foo_problem((CaseSpec("x", F(2), F(4), F(1)),))
    assert d.digest() != a.digest()

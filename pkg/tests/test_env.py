from fractions import Fraction as F

import pytest

from boundfind.env import (
    Atom, HypError, atom_implies, bound_obligations, env_from_hyp, ground_truth, make_atom,
    parse_hyp,
)
from boundfind.interval import TOP, Interval
from boundfind.term import Const, Var, normalize, parse_term


def test_foo_hypothesis():
    env = env_from_hyp("(and (rationalp x) (<= 2 x) (<= x 4))")
    assert env.declared("x") == "rational"
    assert env.range_of("x") == Interval(2, 4)


def test_integer_declaration():
    env = env_from_hyp("(integerp n)")
    assert env.declared("n") == "integer"
    assert env.range_of("n") == TOP


def test_strict_atoms_are_weak_ranges():
    env = env_from_hyp("(and (rationalp x) (< x 4))")
    assert env.range_of("x") == Interval(None, 4)


def test_integer_range_tightening():
    env = env_from_hyp("(and (integerp n) (<= 1/2 n) (< n 7/2))")
    assert env.range_of("n") == Interval(1, 3)


def test_nested_and_true_and_flipped_forms():
    env = env_from_hyp("(and t (and (rationalp y) (>= y -1)) (not (> y 5)) (equal z 2) (rationalp z))")
    assert env.range_of("y") == Interval(-1, 5)
    assert env.range_of("z") == Interval(2, 2)


@pytest.mark.parametrize("hyp, fragment", [
    ("(and (<= 2 x) (<= x 4))", "never declared"),
    ("(and (rationalp x) (<= 5 x) (<= x 4))", "contradictory"),
    ("(and (integerp n) (<= 1/3 n) (<= n 2/3))", "no integer"),
    ("(or (rationalp x) (rationalp y))", "unrecognized"),
    ("(foo x)", "unrecognized"),
])
def test_errors(hyp, fragment):
    with pytest.raises(HypError, match=fragment):
        env_from_hyp(hyp)


def test_compound_atoms_are_kept_for_lookup():
    env = env_from_hyp("(and (rationalp x) (<= (* x x) 9))")
    assert env.range_of("x") == TOP
    assert make_atom("<=", parse_term("(* x x)"), Const(F(9))) in env.conjuncts


def test_strengthen():
    env = env_from_hyp("(and (rationalp x) (<= 2 x) (<= x 4))")
    e2 = env.strengthen("x", Interval(3, 5))
    assert e2.range_of("x") == Interval(3, 4)
    assert env.range_of("x") == Interval(2, 4)
    with pytest.raises(HypError):
        env.strengthen("x", Interval(5, 6))


def test_atom_implies():
    x = Var("x")
    k = make_atom("<=", x, Const(F(4)))
    assert atom_implies(k, make_atom("<=", x, Const(F(5))))
    assert not atom_implies(k, make_atom("<=", x, Const(F(3))))
    assert not atom_implies(k, make_atom("<", x, Const(F(4))))
    assert atom_implies(make_atom("<", x, Const(F(4))), k)
    assert atom_implies(make_atom("=", x, Const(F(2))), make_atom("<=", Const(F(1)), x))


def test_ground_truth():
    assert ground_truth(make_atom("<=", Const(F(1)), Const(F(2))))
    assert ground_truth(make_atom("<", Const(F(2)), Const(F(2)))) is False
    assert ground_truth(make_atom("integerp", Const(F(1, 2)))) is False
    assert ground_truth(make_atom("<=", Var("x"), Const(F(2)))) is None
    assert ground_truth(parse_hyp("(<= (/ 0) 1)")[0]) is None


def test_bound_obligations():
    (t, check), = bound_obligations(make_atom("<=", parse_term("(* x x)"), Const(F(20))))
    assert check(Interval(4, 16)) and not check(Interval(4, 21))
    (t, check), = bound_obligations(make_atom("<", Var("x"), Var("y")))
    assert t == normalize(parse_term("(- x y)"))
    assert check(Interval(None, -1)) and not check(Interval(None, 0))
    assert bound_obligations(Atom("rationalp", (Var("x"),))) == []

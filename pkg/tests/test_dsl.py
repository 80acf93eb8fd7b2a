from fractions import Fraction as F

import pytest

from boundfind.cases import Config, solve
from boundfind.dsl import ProblemSyntaxError, load_problem_file, load_problem_text
from boundfind.interval import Interval
from boundfind.term import Var, normalize, parse_term

FOO = """
(defund foo (x)
  (- (* x x) (* 3 x)))
"""


def test_foo_files(data_dir):
    first, better = load_problem_file(data_dir / "foo.lisp")
    assert first.name == "foo-bounds"
    assert [sorted(ph.enables) for ph in first.phases] == [["foo"]]
    assert "distributivity" in first.theory and "foo" not in first.theory
    assert [sorted(ph.enables) for ph in better.phases] == [["foo"], ["my-factor"]]
    assert "distributivity" not in better.theory
    assert solve(first).bounds == Interval(-8, 10)
    assert solve(better).bounds == Interval(-4, 4)


def test_cases_keyword(data_dir):
    problems = load_problem_file(data_dir / "foo_cases.lisp")
    spec = problems[1].cases[0]
    assert (spec.variable, spec.start, spec.stop, spec.step) == ("x", 2, 4, F(1, 64))


def test_suggestion_forms():
    text = FOO + """
    (defstub bar (c) )
    (def-bounds s (+ a (foo b) (bar x))
      :hyp (and (rationalp a) (rationalp b) (rationalp x))
      :suggestions ((< a 3)
                    (>= (foo b) 5)
                    (:free (c) (<= (bar c) 10))))
    """
    (p,) = load_problem_text(text)
    a, foo_b, bar = p.suggestions
    assert (a.pattern, a.direction, a.rhs.value, a.free_vars) == (Var("a"), "upper", 3, frozenset())
    assert (foo_b.direction, foo_b.rhs.value) == ("lower", 5)
    assert bar.free_vars == {"c"} and bar.pattern == normalize(parse_term("(bar c)"))


def test_ground_left_side_is_flipped():
    (p,) = load_problem_text("(def-bounds s a :hyp (rationalp a) :suggestions ((<= 0 a)))")
    assert p.suggestions[0].direction == "lower" and p.suggestions[0].pattern == Var("a")


def test_suggestion_sets_and_linear_rules():
    text = """
    (defstub f (x))
    (deflinear f-le (implies (<= 0 x) (<= (f x) 7)))
    (defsuggest caps ((:free (u) (<= (f u) 100))))
    (def-bounds q (f y) :hyp (and (rationalp y) (<= 0 y) (<= y 1)) :suggestions (caps))
    """
    (p,) = load_problem_text(text)
    assert [r.relation for r in p.linear_rules] == ["<="]  # a constant side is never a pattern
    assert len(p.suggestions) == 1
    r = solve(p)
    assert r.bounds == Interval(None, 7)
    kinds = [s.kind for s in r.per_case[0].trace.sources]
    assert kinds == ["suggestion", "linear"]


def test_expand_and_e_d_hints():
    text = FOO + """
    (defthmd my-factor (equal (+ (- (* 3 x)) (* x x)) (* x (- x 3))))
    (def-bounds q (foo y)
      :hyp (and (rationalp y) (<= 2 y) (<= y 4))
      :simp-hints ((:expand ((foo y)))
                   (:in-theory (e/d (my-factor) (distributivity)))))
    """
    (p,) = load_problem_text(text)
    assert p.phases[0].expands == (parse_term("(foo y)"),)
    assert p.phases[1].disables == {"distributivity"}
    assert solve(p).bounds == Interval(-4, 4)


def test_config_keywords_override_defaults():
    text = "(def-bounds q x :hyp (rationalp x) :backchain-depth 1 :case-cap 7)"
    (p,) = load_problem_text(text, Config(backchain_depth=5, max_rewrite_steps=9, case_cap=99))
    assert (p.config.backchain_depth, p.config.max_rewrite_steps, p.config.case_cap) == (1, 9, 7)


@pytest.mark.parametrize("text, fragment, line", [
    ("(def-bounds q (foo x) :hyp (rationalp x))", "undefined function foo", 1),
    (FOO + "(def-bounds q (foo x) :simp-hints ((:in-theory (enable nosuch))))", "unknown rule or function nosuch", 4),
    (FOO + "(defund foo (y) y)", "already defined", 4),
    (FOO + "(def-bounds foo x)", "already defined", 4),
    ("(def-bounds q x :hyp (rationalp x) :simp-hints ((:use (foo))))", "unsupported keyword :use", 1),
    ("(def-bounds q x :bogus 1)", "unsupported keyword :bogus", 1),
    ("(defund f (x) (+ x y))", "non-parameters", 1),
    ("(defthmd r (equal x (* x 1)))", "variable or constant", 1),
    ("(defthmd r (equal (f x) y))", "undefined function f", 1),
    ("(defthmd r (<= (* x x) 0))", "equal", 1),
    ("\n  (def-bounds q (* x) :hyp (rationalp x))", "at least 2", 2),
    ("(def-bounds q x :cases ((:ranges-from-to-by x 4 2 1)))", "empty", 1),
    ("(def-bounds q x :cases ((:ranges-from-to-by x 0 1 0)))", "positive", 1),
    ("(def-bounds q x :suggestions (nosuch))", "unknown suggestion set", 1),
    ("(def-bounds q x :hyp (or (rationalp x)))", "unrecognized", 1),
    ("(frobnicate)", "unknown top-level form", 1),
    ("(def-bounds q (+ x 1)", "unbalanced", 1),
    (FOO + "(def-bounds q (foo x) :simp-hints ((:expand ((bar x)))))", "undefined function bar", 4),
    ("(def-bounds q x :backchain-depth -1)", "natural number", 1),
])
def test_load_errors(text, fragment, line):
    with pytest.raises(ProblemSyntaxError, match=fragment) as e:
        load_problem_text(text)
    assert e.value.line == line


def test_theory_is_snapshotted_per_problem():
    text = FOO + """
    (def-bounds a (foo x) :hyp (rationalp x))
    (in-theory (enable foo))
    (def-bounds b (foo x) :hyp (rationalp x))
    """
    a, b = load_problem_text(text)
    assert "foo" not in a.theory and "foo" in b.theory

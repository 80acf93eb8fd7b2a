import random
from fractions import Fraction as F

import pytest

from boundfind.bounder import Bounder
from boundfind.env import env_from_hyp, parse_hyp
from boundfind.rewrite import (
    BUILTIN_RULES, DISTRIBUTIVITY, FnDef, Phase, RewriteError, RewriteRule, base_theory,
    rewrite_fixpoint, run_phases,
)
from boundfind.term import (
    Call, Var, distribute, evaluate, normalize, parse_term, positions, term_str,
)


def n(text):
    return normalize(parse_term(text))


FOO = FnDef("foo", ("x",), n("(- (* x x) (* 3 x))"))
MY_FACTOR = RewriteRule("my-factor", n("(+ (- (* 3 x)) (* x x))"), n("(* x (- x 3))"))
RULES = BUILTIN_RULES + (MY_FACTOR,)
DEFS = {"foo": FOO}
GOAL = Call("foo", (Var("x"),))


def test_expand_enabled_definition():
    t, steps, exhausted = rewrite_fixpoint(GOAL, [], DEFS)
    assert t == n("(- (* x x) (* 3 x))")
    assert [(s.kind, s.name) for s in steps] == [("expand", "foo")]
    assert not exhausted


def test_factoring_needs_distributivity_off():
    body = n("(- (* x x) (* 3 x))")
    t, _, _ = rewrite_fixpoint(body, [MY_FACTOR], DEFS, enabled_defs=frozenset())
    assert t == n("(* x (- x 3))")


def test_empty_rule_set_is_identity():
    t, steps, _ = rewrite_fixpoint(n("(* x (+ y 1))"), [], {}, enabled_defs=frozenset())
    assert t == n("(* x (+ y 1))") and steps == []


def test_foo_phases():
    base = frozenset({DISTRIBUTIVITY})
    t, log = run_phases(GOAL, [Phase(frozenset({"foo"}))], RULES, DEFS, base)
    assert term_str(t) == "(+ (* -3 x) (* x x))"
    phases = [Phase(frozenset({"foo"})), Phase(frozenset({"my-factor"}))]
    t, log = run_phases(GOAL, phases, RULES, DEFS, frozenset())
    assert term_str(t) == "(* x (+ -3 x))"
    # phase locality: my-factor is only enabled in phase 1
    assert [(s.phase, s.name) for s in log.steps] == [(0, "foo"), (1, "my-factor")]


def test_no_phases_is_identity():
    t, log = run_phases(GOAL, [], RULES, DEFS, frozenset({DISTRIBUTIVITY}))
    assert t == GOAL and log.steps == []


def test_expand_hint_forces_disabled_definition():
    t, log = run_phases(GOAL, [Phase(expands=(GOAL,))], RULES, DEFS, frozenset())
    assert t == FOO.body
    other = Call("foo", (Var("y"),))
    t, log = run_phases(n("(+ (foo x) (foo y))"), [Phase(expands=(other,))], RULES, DEFS, frozenset())
    assert t == n("(+ (foo x) (* y y) (* -3 y))")


def test_rule_loop_exhausts_budget():
    body = n("(- (* x x) (* 3 x))")
    t, steps, exhausted = rewrite_fixpoint(body, list(RULES), DEFS, budget=50)
    assert exhausted and len(steps) == 50
    _, log = run_phases(body, [Phase(frozenset({"my-factor"}))], RULES, DEFS,
                        frozenset({DISTRIBUTIVITY}), budget=20)
    assert log.exhausted == [0]


def test_unknown_names_are_errors():
    with pytest.raises(RewriteError, match="nosuch"):
        run_phases(GOAL, [Phase(frozenset({"nosuch"}))], RULES, DEFS, frozenset())
    with pytest.raises(RewriteError):
        run_phases(GOAL, [Phase(expands=(n("(bar x)"),))], RULES, DEFS, frozenset())
    with pytest.raises(RewriteError):
        Phase(frozenset({"a"}), frozenset({"a"}))


def test_conditional_rule_relieved_against_hypotheses():
    rule = RewriteRule("abs-pos", n("(abs u)"), Var("u"), tuple(parse_hyp("(<= 0 u)")))
    defs = {"abs": FnDef("abs", ("u",), n("(* u u)"))}  # body irrelevant; never expanded
    env = env_from_hyp("(and (rationalp x) (<= 1 x) (<= x 2))")
    b = Bounder(env)
    relieve = lambda hyps, sigma: b.relieve_hyps(hyps, sigma, 3)
    t, steps, _ = rewrite_fixpoint(n("(abs (+ x 1))"), [rule], defs, enabled_defs=frozenset(), relieve=relieve)
    assert t == n("(+ x 1)")
    assert steps[0].proofs[0].method == "bound"
    t, steps, _ = rewrite_fixpoint(n("(abs (- x 5))"), [rule], defs, enabled_defs=frozenset(), relieve=relieve)
    assert steps == []


def test_base_theory():
    rules = BUILTIN_RULES + (MY_FACTOR, RewriteRule("on", n("(f x)"), Var("x"), (), True))
    defs = {"foo": FOO, "bar": FnDef("bar", ("x",), Var("x"), True)}
    assert base_theory(rules, defs, {"lin"}) == frozenset({DISTRIBUTIVITY, "on", "bar", "lin"})


def test_steps_preserve_value():
    rng = random.Random(7)
    body = n("(* (+ x 2) (- y 3) (+ x y))")
    t, log = run_phases(body, [Phase()], BUILTIN_RULES, {}, frozenset({DISTRIBUTIVITY}))
    assert log.steps
    for s in log.steps:
        for _ in range(20):
            pt = {"x": F(rng.randint(-50, 50), rng.randint(1, 9)), "y": F(rng.randint(-50, 50), rng.randint(1, 9))}
            assert evaluate(s.before, pt) == evaluate(s.after, pt)
    assert all(distribute(sub) is None for _, sub in positions(t))

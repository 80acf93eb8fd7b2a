"""Recursive bound finding over canonical terms.

Every node is bounded by four sources and the componentwise best result is
kept:

* typeset reasoning,
* user suggestions, each validated by backchaining,
* enabled linear rules whose other side instantiates to a rational,
* structural recursion through ``+``, ``*`` (with square detection) and
  ``recip``; variables take their hypothesis range.

Each call produces a :class:`BoundTrace` recording which source supplied
which endpoint, so that the derivation can later be replayed.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from functools import reduce
from typing import Mapping, Optional, Sequence

from .env import Atom, HypEnv, atom_implies, bound_obligations, ground_truth, make_atom
from .interval import (
    TOP, Interval, better_hi, better_lo, iv_add, iv_mul, iv_recip, iv_square,
)
from .term import (
    Call, Const, EvalDivisionByZero, Term, Var, eval_ground, match, normalize,
    substitute, term_str, term_vars,
)
from .typeset import INTEGERS, TS, split_squares, ts_names, ts_subset, typeset_bounds, typeset_of

log = logging.getLogger(__name__)

DEFAULT_DEPTH = 3


@dataclass(frozen=True)
class Suggestion:
    """Candidate bound: try to prove ``pattern <direction> rhs`` where it matches."""

    pattern: Term
    free_vars: frozenset
    direction: str  # "upper" | "lower"
    rhs: Term

    def __str__(self) -> str:
        rel = "<=" if self.direction == "upper" else ">="
        body = f"({rel} {term_str(self.pattern)} {term_str(self.rhs)})"
        if self.free_vars:
            return f"(:free ({' '.join(sorted(self.free_vars))}) {body})"
        return body


@dataclass(frozen=True)
class LinearRule:
    """One orientation of a named inequality lemma.

    ``relation`` is ``<=`` (pattern_side is bounded above by bound_side) or
    ``>=`` (bounded below).
    """

    name: str
    pattern_side: Term
    bound_side: Term
    relation: str
    hyps: tuple = ()
    enabled: bool = True

    @property
    def direction(self) -> str:
        return "upper" if self.relation == "<=" else "lower"

    @property
    def rule_vars(self) -> frozenset:
        out = term_vars(self.pattern_side) | term_vars(self.bound_side)
        for h in self.hyps:
            out |= h.vars
        return out


def linear_orientations(name: str, left: Term, rel: str, right: Term, hyps=(), enabled=True):
    """Split ``(rel left right)`` into the usable :class:`LinearRule` orientations.

    Sides that are bare variables or constants never serve as patterns.
    """
    left, right = normalize(left), normalize(right)
    if rel in (">=", ">"):
        left, right = right, left
    out = []
    if not isinstance(left, (Var, Const)):
        out.append(LinearRule(name, left, right, "<=", tuple(hyps), enabled))
    if not isinstance(right, (Var, Const)):
        out.append(LinearRule(name, right, left, ">=", tuple(hyps), enabled))
    return out


@dataclass
class Proof:
    """How one hypothesis atom was established."""

    atom: Atom
    method: str  # env | ground | typeset | bound
    conjunct: Optional[Atom] = None
    traces: tuple = ()


@dataclass
class Source:
    kind: str  # typeset | suggestion | linear | operator | constant | hypothesis
    bounds: Interval
    info: dict = field(default_factory=dict)
    children: tuple = ()
    proofs: tuple = ()


@dataclass
class BoundTrace:
    term: Term
    result: Interval
    sources: list = field(default_factory=list)

    def walk(self):
        yield self
        for s in self.sources:
            for c in s.children:
                yield from c.walk()
            for p in s.proofs:
                for t in p.traces:
                    yield from t.walk()

    def find(self, term: Term) -> Optional["BoundTrace"]:
        for node in self.walk():
            if node.term == term:
                return node
        return None


# ---------------------------------------------------------------------------
# The bounder


class Bounder:
    """Bounds terms under one hypothesis environment.

    The memo table is private to the instance, so separate solves (and
    separate case splits) never share state.
    """

    def __init__(
        self,
        env: HypEnv,
        suggestions: Sequence[Suggestion] = (),
        rules: Sequence[LinearRule] = (),
        defs: Mapping | None = None,
        depth: int = DEFAULT_DEPTH,
        memo: bool = True,
    ):
        self.env = env
        self.suggestions = list(suggestions)
        self.rules = [r for r in rules if r.enabled]
        self.defs = dict(defs or {})
        self.depth = depth
        self.use_memo = memo
        self._memo: dict = {}
        self.diagnostics: list[str] = []

    # -- typesets ----------------------------------------------------------

    def typeset(self, t: Term) -> TS:
        return typeset_of(t, self.env.var_ts, self.defs)

    # -- hypotheses --------------------------------------------------------

    def relieve(self, atom: Atom, depth: int) -> Optional[Proof]:
        for conj in self.env.conjuncts:
            if atom_implies(conj, atom):
                return Proof(atom, "env", conjunct=conj)
        if ground_truth(atom, self.defs):
            return Proof(atom, "ground")
        if atom.rel == "rationalp":
            if all(self.env.declared(v) for v in atom.vars):
                return Proof(atom, "typeset")
            return None
        if atom.rel == "integerp":
            if all(self.env.declared(v) for v in atom.vars) and ts_subset(self.typeset(atom.args[0]), INTEGERS):
                return Proof(atom, "typeset")
            return None
        if depth <= 0:
            return None
        traces = []
        for term, check in bound_obligations(atom):
            tr = self.bound(term, depth - 1)
            if not check(tr.result):
                return None
            traces.append(tr)
        return Proof(atom, "bound", traces=tuple(traces))

    def relieve_hyps(self, hyps: Sequence[Atom], sigma: Mapping, depth: int) -> Optional[list]:
        proofs = []
        for h in hyps:
            p = self.relieve(h.substitute(sigma), depth)
            if p is None:
                return None
            proofs.append(p)
        return proofs

    # -- sources -----------------------------------------------------------

    def suggestion_sources(self, t: Term, depth: int) -> list[Source]:
        out = []
        for idx, sug in enumerate(self.suggestions):
            sigma = match(sug.pattern, t, sug.free_vars)
            if sigma is None:
                continue
            rhs = substitute(sug.rhs, sigma)
            try:
                value = eval_ground(rhs, self.defs)
            except EvalDivisionByZero:
                value = None
            if value is None:
                self.diagnostics.append(
                    f"suggestion {idx} {sug} on {term_str(t)}: right side {term_str(rhs)} is not a ground rational"
                )
                continue
            if sug.direction == "upper":
                goal = make_atom("<=", t, Const(value))
                bounds = Interval(None, value)
            else:
                goal = make_atom("<=", Const(value), t)
                bounds = Interval(value, None)
            proof = self.relieve(goal, depth)
            if proof is None:
                self.diagnostics.append(f"suggestion {idx} {sug} on {term_str(t)}: could not prove {goal}")
                continue
            out.append(Source(
                "suggestion", bounds,
                {"index": idx, "direction": sug.direction, "value": value,
                 "binding": dict(sorted(sigma.items()))},
                proofs=(proof,),
            ))
        return out

    def linear_sources(self, t: Term, best: Interval, depth: int) -> list[Source]:
        out = []
        lo, hi = best.lo, best.hi
        for rule in self.rules:
            sigma = match(rule.pattern_side, t, rule.rule_vars)
            if sigma is None:
                continue
            try:
                value = eval_ground(substitute(rule.bound_side, sigma), self.defs)
            except EvalDivisionByZero:
                value = None
            if value is None:
                continue
            if rule.direction == "upper":
                if hi is not None and value >= hi:
                    continue
            elif lo is not None and value <= lo:
                continue
            unbound = set().union(*(h.vars for h in rule.hyps)) & (rule.rule_vars - set(sigma))
            if unbound:
                continue
            proofs = self.relieve_hyps(rule.hyps, sigma, depth)
            if proofs is None:
                continue
            if rule.direction == "upper":
                hi = value
                bounds = Interval(None, value)
            else:
                lo = value
                bounds = Interval(value, None)
            out.append(Source(
                "linear", bounds,
                {"name": rule.name, "relation": rule.relation, "pattern": rule.pattern_side,
                 "value": value, "binding": dict(sorted(sigma.items()))},
                proofs=tuple(proofs),
            ))
        return out

    def structural_source(self, t: Term, depth: int) -> Optional[Source]:
        if isinstance(t, Const):
            return Source("constant", Interval.point(t.value))
        if isinstance(t, Var):
            return Source("hypothesis", self.env.range_of(t.name), {"variable": t.name})
        if isinstance(t, Call):
            return None
        if t.op == "+":
            kids = tuple(self.bound(a, depth) for a in t.args)
            return Source("operator", reduce(iv_add, (k.result for k in kids)), {"op": "+"}, kids)
        if t.op == "*":
            squared, rest = split_squares(t.args)
            kids = tuple(self.bound(f, depth) for f in squared + rest)
            parts = [iv_square(k.result) for k in kids[:len(squared)]]
            parts += [k.result for k in kids[len(squared):]]
            return Source("operator", reduce(iv_mul, parts), {"op": "*", "squares": len(squared)}, kids)
        if t.op == "recip":
            kid = self.bound(t.args[0], depth)
            return Source("operator", iv_recip(kid.result), {"op": "recip"}, (kid,))
        raise ValueError(f"bound expects a canonical term, got operator {t.op!r}")

    # -- entry point -------------------------------------------------------

    def bound(self, t: Term, depth: int | None = None) -> BoundTrace:
        if depth is None:
            depth = self.depth
        key = (t, depth)
        if self.use_memo and key in self._memo:
            return self._memo[key]
        sources: list[Source] = []
        ts = self.typeset(t)
        ts_iv = typeset_bounds(ts)
        if not ts_iv.is_top:
            sources.append(Source("typeset", ts_iv, {"typeset": ts_names(ts)}))
        sources.extend(self.suggestion_sources(t, depth))
        best = _combine(sources)
        sources.extend(self.linear_sources(t, best, depth))
        structural = self.structural_source(t, depth)
        if structural is not None:
            sources.append(structural)
        trace = BoundTrace(t, _combine(sources), sources)
        if self.use_memo:
            self._memo[key] = trace
        return trace


def _combine(sources) -> Interval:
    lo = hi = None
    for s in sources:
        lo = better_lo(lo, s.bounds.lo)
        hi = better_hi(hi, s.bounds.hi)
    return Interval(lo, hi) if lo is None or hi is None or lo <= hi else _inconsistent(lo, hi)


def _inconsistent(lo, hi) -> Interval:
    # Sound sources can only disagree when the hypotheses are unsatisfiable.
    log.warning("bound sources disagree (%s > %s); hypotheses may be contradictory", lo, hi)
    return Interval(lo, lo)


def bound_term(
    t: Term,
    env: HypEnv,
    suggestions: Sequence[Suggestion] = (),
    rules: Sequence[LinearRule] = (),
    defs: Mapping | None = None,
    depth: int = DEFAULT_DEPTH,
    memo: bool = True,
) -> tuple[Interval, BoundTrace]:
    """Bound a term; returns the interval and its derivation trace."""
    b = Bounder(env, suggestions, rules, defs, depth, memo)
    trace = b.bound(normalize(t))
    return trace.result, trace


def relieve_hyps(hyps, sigma, env: HypEnv, depth: int = DEFAULT_DEPTH, **cfg):
    """Try to establish every ``sigma(hyp)``; a list of proofs or None."""
    return Bounder(env, depth=depth, **cfg).relieve_hyps(hyps, sigma, depth)


def suggestion_bounds(t, suggestions, env, depth=DEFAULT_DEPTH, defs=None):
    """Interval candidates contributed by suggestions alone."""
    b = Bounder(env, suggestions, defs=defs, depth=depth)
    return [s.bounds for s in b.suggestion_sources(normalize(t), depth)]


def linear_bounds(t, rules, env, best_so_far=TOP, depth=DEFAULT_DEPTH, defs=None):
    """Interval candidates contributed by linear rules alone."""
    b = Bounder(env, rules=rules, defs=defs, depth=depth)
    return [s.bounds for s in b.linear_sources(normalize(t), best_so_far, depth)]

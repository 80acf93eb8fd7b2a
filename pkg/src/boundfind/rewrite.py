"""Phased simplification: definitions, rewrite rules and theories.

Each phase computes its active rules and definitions from the base theory
plus the phase's enables/disables, then rewrites leftmost-innermost to a
fixpoint (or until the step budget runs out).  Every step is logged so a
certificate can replay it.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Mapping, Optional, Sequence

from .term import (
    Call, Term, distribute, match, normalize, positions, replace_at, substitute, term_vars,
)

log = logging.getLogger(__name__)

DEFAULT_MAX_STEPS = 10_000
DISTRIBUTIVITY = "distributivity"


class RewriteError(ValueError):
    pass


@dataclass(frozen=True)
class FnDef:
    name: str
    params: tuple
    body: Term
    default_enabled: bool = False


@dataclass(frozen=True)
class RewriteRule:
    """``hyps => lhs = rhs``.  A rule with ``builtin`` set has no lhs/rhs."""

    name: str
    lhs: Optional[Term]
    rhs: Optional[Term]
    hyps: tuple = ()
    default_enabled: bool = False
    builtin: bool = False

    @property
    def free_vars(self) -> frozenset:
        return term_vars(self.lhs) if self.lhs is not None else frozenset()


DISTRIBUTIVITY_RULE = RewriteRule(DISTRIBUTIVITY, None, None, (), True, builtin=True)
BUILTIN_RULES = (DISTRIBUTIVITY_RULE,)


@dataclass(frozen=True)
class Phase:
    enables: frozenset = frozenset()
    disables: frozenset = frozenset()
    expands: tuple = ()

    def __post_init__(self):
        both = self.enables & self.disables
        if both:
            raise RewriteError(f"phase both enables and disables {sorted(both)}")

    def active(self, base: frozenset) -> frozenset:
        return (base | self.enables) - self.disables


@dataclass
class Step:
    phase: int
    kind: str  # "expand" | "rule"
    name: str
    path: tuple
    before: Term
    after: Term
    binding: dict = field(default_factory=dict)
    proofs: tuple = ()


@dataclass
class RewriteLog:
    steps: list = field(default_factory=list)
    exhausted: list = field(default_factory=list)  # phase indices that hit the budget


def apply_rule(rule: RewriteRule, t: Term, relieve=None):
    """Rewrite ``t`` at its root with ``rule``.

    Returns ``(new_term, sigma, proofs)`` or None.  ``relieve`` is called as
    ``relieve(hyps, sigma)`` and returns proofs or None.
    """
    if rule.builtin:
        if rule.name == DISTRIBUTIVITY:
            new = distribute(t)
            return None if new is None else (new, {}, ())
        raise RewriteError(f"unknown builtin rule {rule.name}")
    sigma = match(rule.lhs, t, rule.free_vars)
    if sigma is None:
        return None
    proofs: Sequence = ()
    if rule.hyps:
        if relieve is None:
            return None
        proofs = relieve(rule.hyps, sigma)
        if proofs is None:
            return None
    return substitute(rule.rhs, sigma), sigma, tuple(proofs)


def expand_call(fdef: FnDef, call: Call) -> Term:
    return substitute(fdef.body, dict(zip(fdef.params, call.args)))


def _find_step(t, rules, defs, expands, relieve):
    for path, sub in positions(t):
        if isinstance(sub, Call):
            fdef = defs.get(sub.fn)
            if fdef is not None and (fdef.name in expands.enabled or sub in expands.terms):
                return "expand", fdef.name, path, expand_call(fdef, sub), {}, ()
        for rule in rules:
            res = apply_rule(rule, sub, relieve)
            if res is not None:
                new, sigma, proofs = res
                return "rule", rule.name, path, new, sigma, proofs
    return None


@dataclass
class _Expansions:
    enabled: frozenset
    terms: frozenset


def rewrite_fixpoint(
    t: Term,
    rules: Sequence[RewriteRule],
    defs: Mapping[str, FnDef],
    budget: int = DEFAULT_MAX_STEPS,
    *,
    enabled_defs: frozenset | None = None,
    expands: Sequence[Term] = (),
    relieve=None,
    phase: int = 0,
) -> tuple[Term, list, bool]:
    """Rewrite to a fixpoint; returns ``(term, steps, exhausted)``.

    ``rules`` are the active rules in database order.  Calls of a function
    in ``enabled_defs`` (default: every function in ``defs``) or equal to a
    term in ``expands`` are opened.
    """
    if budget <= 0:
        raise RewriteError("rewrite budget must be positive")
    t = normalize(t)
    exp = _Expansions(
        frozenset(defs) if enabled_defs is None else frozenset(enabled_defs),
        frozenset(normalize(e) for e in expands),
    )
    steps = []
    for _ in range(budget):
        found = _find_step(t, rules, defs, exp, relieve)
        if found is None:
            return t, steps, False
        kind, name, path, new_sub, sigma, proofs = found
        new_t = normalize(replace_at(t, path, new_sub))
        steps.append(Step(phase, kind, name, path, t, new_t, dict(sigma), proofs))
        t = new_t
    exhausted = _find_step(t, rules, defs, exp, relieve) is not None
    if exhausted:
        log.warning("rewrite budget of %d steps exhausted in phase %d", budget, phase)
    return t, steps, exhausted


def check_names(phases: Sequence[Phase], known) -> None:
    for i, ph in enumerate(phases):
        for name in sorted(ph.enables | ph.disables):
            if name not in known:
                raise RewriteError(f"phase {i}: unknown rule or definition {name!r}")


def run_phases(
    t: Term,
    phases: Sequence[Phase],
    rules: Sequence[RewriteRule],
    defs: Mapping[str, FnDef],
    base_theory: frozenset,
    budget: int = DEFAULT_MAX_STEPS,
    relieve=None,
    extra_names=(),
) -> tuple[Term, RewriteLog]:
    """Apply each phase's fixpoint in sequence.

    ``base_theory`` is the set of names enabled outside any phase.
    ``extra_names`` lists other known names (e.g. linear rules) that phases
    may mention without error.
    """
    check_names(phases, {r.name for r in rules} | set(defs) | set(extra_names))
    for ph in phases:
        for e in ph.expands:
            if not (isinstance(e, Call) and e.fn in defs):
                raise RewriteError(f"cannot expand {e}: not a call of a defined function")
    out = RewriteLog()
    t = normalize(t)
    for i, ph in enumerate(phases):
        active = ph.active(base_theory)
        active_rules = [r for r in rules if r.name in active]
        enabled_defs = frozenset(n for n in defs if n in active)
        t, steps, exhausted = rewrite_fixpoint(
            t, active_rules, defs, budget,
            enabled_defs=enabled_defs, expands=ph.expands, relieve=relieve, phase=i,
        )
        out.steps.extend(steps)
        if exhausted:
            out.exhausted.append(i)
    return t, out


def base_theory(rules: Sequence[RewriteRule], defs: Mapping[str, FnDef], others=()) -> frozenset:
    """Names enabled by default: builtin/defthm rules, defun definitions, ``others``."""
    names = {r.name for r in rules if r.default_enabled}
    names |= {d.name for d in defs.values() if d.default_enabled}
    return frozenset(names) | frozenset(others)


__all__ = [
    "FnDef", "RewriteRule", "Phase", "Step", "RewriteLog", "RewriteError",
    "rewrite_fixpoint", "run_phases", "apply_rule", "expand_call", "base_theory",
    "BUILTIN_RULES", "DISTRIBUTIVITY", "DISTRIBUTIVITY_RULE", "DEFAULT_MAX_STEPS",
]

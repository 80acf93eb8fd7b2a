"""Case splitting and the top-level solve pipeline.

``solve`` rewrites the goal through its phases once, splits the hypothesis
range of each case variable into segments, bounds the rewritten goal under
every combination of segments and returns the union.
"""

from __future__ import annotations

import hashlib
import itertools
import json
import math
import time
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional

from .bounder import DEFAULT_DEPTH, Bounder, BoundTrace, LinearRule, Suggestion
from .env import Atom, HypEnv, HypError, env_from_atoms
from .interval import TOP, Interval, iv_meet, iv_union_all
from .rational import rat_str
from .rewrite import (
    BUILTIN_RULES, DEFAULT_MAX_STEPS, FnDef, Phase, RewriteLog, RewriteRule, base_theory,
    run_phases,
)
from .term import Term, normalize, term_str

DEFAULT_CASE_CAP = 4096


class CaseError(ValueError):
    pass


@dataclass(frozen=True)
class CaseSpec:
    variable: str
    start: Fraction
    stop: Fraction
    step: Fraction

    def __post_init__(self):
        if not self.start < self.stop:
            raise CaseError(f"case range for {self.variable} is empty: {self.start} >= {self.stop}")
        if self.step <= 0:
            raise CaseError(f"case step for {self.variable} must be positive")

    def __str__(self) -> str:
        return (f"(:ranges-from-to-by {self.variable} {rat_str(self.start)} "
                f"{rat_str(self.stop)} {rat_str(self.step)})")


@dataclass
class Config:
    backchain_depth: int = DEFAULT_DEPTH
    max_rewrite_steps: int = DEFAULT_MAX_STEPS
    case_cap: int = DEFAULT_CASE_CAP


@dataclass
class Problem:
    name: str
    goal: Term
    hyp: tuple  # of Atom
    phases: tuple = ()
    cases: tuple = ()
    suggestions: tuple = ()
    linear_rules: tuple = ()
    rewrite_rules: tuple = BUILTIN_RULES
    defs: dict = field(default_factory=dict)
    theory: Optional[frozenset] = None
    config: Config = field(default_factory=Config)

    def base_theory(self) -> frozenset:
        if self.theory is not None:
            return self.theory
        return base_theory(self.rewrite_rules, self.defs, {r.name for r in self.linear_rules if r.enabled})

    def canonical(self) -> dict:
        """Whitespace-independent description used for digests.  Config is excluded."""
        return {
            "name": self.name,
            "goal": term_str(normalize(self.goal)),
            "hyp": [str(a) for a in self.hyp],
            "phases": [
                {"enables": sorted(p.enables), "disables": sorted(p.disables),
                 "expands": [term_str(normalize(e)) for e in p.expands]}
                for p in self.phases
            ],
            "cases": [str(c) for c in self.cases],
            "suggestions": [str(s) for s in self.suggestions],
            "linear_rules": [
                {"name": r.name, "pattern": term_str(r.pattern_side), "relation": r.relation,
                 "bound": term_str(r.bound_side), "hyps": [str(h) for h in r.hyps],
                 "enabled": r.enabled}
                for r in self.linear_rules
            ],
            "rewrite_rules": [
                {"name": r.name, "builtin": r.builtin,
                 "lhs": None if r.lhs is None else term_str(r.lhs),
                 "rhs": None if r.rhs is None else term_str(r.rhs),
                 "hyps": [str(h) for h in r.hyps], "default_enabled": r.default_enabled}
                for r in self.rewrite_rules
            ],
            "defs": [
                {"name": d.name, "params": list(d.params), "body": term_str(d.body),
                 "default_enabled": d.default_enabled}
                for d in self.defs.values()
            ],
            "theory": sorted(self.base_theory()),
        }

    def digest(self) -> str:
        blob = json.dumps(self.canonical(), sort_keys=True, separators=(",", ":"))
        return "sha256:" + hashlib.sha256(blob.encode()).hexdigest()


@dataclass
class CaseResult:
    segments: dict  # variable -> Interval, in case-spec order
    bounds: Optional[Interval]
    trace: Optional[BoundTrace] = None

    @property
    def vacuous(self) -> bool:
        return self.bounds is None


@dataclass
class BoundsResult:
    bounds: Interval
    per_case: list
    rewritten_goal: Term
    rewrite_log: RewriteLog
    segments: dict = field(default_factory=dict)
    diagnostics: list = field(default_factory=list)
    timings: dict = field(default_factory=dict)


def gen_cases(spec: CaseSpec) -> list[tuple[Fraction, Fraction]]:
    """Closed consecutive segments of width ``step``, the last clipped to ``stop``."""
    count = math.ceil((spec.stop - spec.start) / spec.step)
    out = []
    for k in range(count):
        lo = spec.start + k * spec.step
        out.append((lo, min(lo + spec.step, spec.stop)))
    return out


def case_segments(spec: CaseSpec, hyp_range: Interval) -> list[Interval]:
    """Segments for one case variable, covering its whole hypothesis range.

    Parts of the hypothesis range outside ``[start, stop]`` become extra
    (possibly unbounded) segments; every segment is clipped to the range and
    segments that miss it are dropped.
    """
    raw = []
    if hyp_range.lo is None or hyp_range.lo < spec.start:
        raw.append(Interval(hyp_range.lo, spec.start))
    raw.extend(Interval(lo, hi) for lo, hi in gen_cases(spec))
    if hyp_range.hi is None or hyp_range.hi > spec.stop:
        raw.append(Interval(spec.stop, hyp_range.hi))
    out = []
    for seg in raw:
        try:
            out.append(iv_meet(seg, hyp_range))
        except ValueError:
            continue
    return out


def solve(p: Problem) -> BoundsResult:
    cfg = p.config
    t0 = time.perf_counter()
    env0 = env_from_atoms(p.hyp)
    seen = set()
    for spec in p.cases:
        if spec.variable in seen:
            raise CaseError(f"variable {spec.variable} is split twice")
        seen.add(spec.variable)
        if env0.declared(spec.variable) is None:
            raise CaseError(f"case variable {spec.variable} is not declared in the hypothesis")

    theory = p.base_theory()
    linear = [r for r in p.linear_rules if r.name in theory]
    bounder0 = Bounder(env0, p.suggestions, linear, p.defs, cfg.backchain_depth)

    def relieve(hyps, sigma):
        return bounder0.relieve_hyps(hyps, sigma, cfg.backchain_depth)

    goal, rlog = run_phases(
        p.goal, p.phases, p.rewrite_rules, p.defs, theory, cfg.max_rewrite_steps,
        relieve, extra_names={r.name for r in p.linear_rules},
    )
    t1 = time.perf_counter()

    segments = {s.variable: case_segments(s, env0.ranges.get(s.variable, TOP)) for s in p.cases}
    count = math.prod(len(v) for v in segments.values())
    if count > cfg.case_cap:
        raise CaseError(f"{count} cases exceed the case cap of {cfg.case_cap}")

    diagnostics = list(bounder0.diagnostics)
    per_case = []
    names = list(segments)
    for combo in itertools.product(*(segments[n] for n in names)):
        case = dict(zip(names, combo))
        try:
            env = _case_env(env0, case)
        except HypError:
            per_case.append(CaseResult(case, None))
            continue
        b = Bounder(env, p.suggestions, linear, p.defs, cfg.backchain_depth)
        trace = b.bound(goal)
        diagnostics.extend(d for d in b.diagnostics if d not in diagnostics)
        per_case.append(CaseResult(case, trace.result, trace))

    live = [c.bounds for c in per_case if not c.vacuous]
    if not live:
        raise CaseError("every case is vacuous; the hypothesis admits no values")
    t2 = time.perf_counter()
    return BoundsResult(
        bounds=iv_union_all(live),
        per_case=per_case,
        rewritten_goal=goal,
        rewrite_log=rlog,
        segments=segments,
        diagnostics=diagnostics,
        timings={"rewrite": t1 - t0, "bound": t2 - t1},
    )


def _case_env(env: HypEnv, case: dict) -> HypEnv:
    for name, seg in case.items():
        env = env.strengthen(name, seg)
    return env


__all__ = [
    "CaseSpec", "Config", "Problem", "CaseResult", "BoundsResult", "CaseError",
    "gen_cases", "case_segments", "solve", "Atom", "FnDef", "Phase", "RewriteRule",
    "LinearRule", "Suggestion",
]

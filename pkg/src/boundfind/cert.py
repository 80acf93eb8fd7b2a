"""Derivation certificates and their independent checker.

A certificate records the rewrite steps, the case split and, per case, the
bound trace tree.  :func:`check_cert` replays all of it using only the term,
interval, hypothesis and typeset layers; it never runs the bound search.
Claims looser than their justification are accepted, tighter ones are not.
"""

from __future__ import annotations

import hashlib
import itertools
import json
from dataclasses import dataclass
from functools import reduce
from typing import Optional

from .cases import BoundsResult, Problem
from .env import (
    Atom, HypEnv, HypError, atom_implies, bound_obligations, env_from_atoms, ground_truth,
    parse_hyp,
)
from .interval import TOP, Interval, iv_add, iv_mul, iv_recip, iv_square, iv_subset, iv_union_all
from .rational import rat_parse, rat_str
from .rewrite import DISTRIBUTIVITY
from .term import (
    App, Call, Const, Var, distribute, eval_ground, match, normalize, parse_term,
    replace_at, subterm_at, substitute, term_key, term_str,
)
from .typeset import INTEGERS, ts_names, ts_subset, typeset_bounds, typeset_of

FORMAT = "boundfind-certificate/1"


def term_digest(t) -> str:
    return "sha256:" + hashlib.sha256(term_str(t).encode()).hexdigest()[:32]


# ---------------------------------------------------------------------------
# Building


def _iv(iv: Optional[Interval]):
    return None if iv is None else iv.to_json()


def _proof_json(p) -> dict:
    out = {"atom": str(p.atom), "method": p.method}
    if p.conjunct is not None:
        out["conjunct"] = str(p.conjunct)
    if p.traces:
        out["traces"] = [trace_json(t) for t in p.traces]
    return out


def _source_json(s) -> dict:
    out = {"kind": s.kind, "bounds": s.bounds.to_json()}
    info = s.info
    if s.kind == "typeset":
        out["typeset"] = list(info["typeset"])
    elif s.kind == "hypothesis":
        out["variable"] = info["variable"]
    elif s.kind == "operator":
        out["op"] = info["op"]
        if info["op"] == "*":
            out["squares"] = info["squares"]
    elif s.kind in ("suggestion", "linear"):
        if s.kind == "suggestion":
            out["index"] = info["index"]
            out["direction"] = info["direction"]
        else:
            out["name"] = info["name"]
            out["relation"] = info["relation"]
            out["pattern"] = term_str(info["pattern"])
        out["value"] = rat_str(info["value"])
        out["binding"] = {k: term_str(v) for k, v in info["binding"].items()}
    if s.children:
        out["children"] = [trace_json(c) for c in s.children]
    if s.proofs:
        out["proofs"] = [_proof_json(p) for p in s.proofs]
    return out


def trace_json(tr) -> dict:
    return {
        "term": term_str(tr.term),
        "claim": tr.result.to_json(),
        "sources": [_source_json(s) for s in tr.sources],
    }


def build_cert(p: Problem, r: BoundsResult) -> dict:
    """Serialize exactly the derivation that ``solve(p)`` performed."""
    steps = []
    for st in r.rewrite_log.steps:
        step = {
            "phase": st.phase, "kind": st.kind, "name": st.name, "path": list(st.path),
            "before": term_digest(st.before), "after": term_digest(st.after),
        }
        if st.proofs:
            step["proofs"] = [_proof_json(pf) for pf in st.proofs]
        steps.append(step)
    return {
        "format": FORMAT,
        "problem": p.name,
        "digest": p.digest(),
        "goal": term_str(normalize(p.goal)),
        "rewritten_goal": term_str(r.rewritten_goal),
        "rewrite_steps": steps,
        "case_split": [
            {"variable": v, "segments": [seg.to_json() for seg in segs]}
            for v, segs in r.segments.items()
        ],
        "cases": [
            {
                "segments": {v: seg.to_json() for v, seg in c.segments.items()},
                "vacuous": c.vacuous,
                "claim": _iv(c.bounds),
                "trace": None if c.trace is None else trace_json(c.trace),
            }
            for c in r.per_case
        ],
        "claim": r.bounds.to_json(),
    }


def dumps(obj) -> str:
    return json.dumps(obj, indent=1) + "\n"


# ---------------------------------------------------------------------------
# Checking


@dataclass(frozen=True)
class Verdict:
    ok: bool
    reason: Optional[str] = None
    location: Optional[str] = None

    def __bool__(self) -> bool:
        return self.ok

    def __str__(self) -> str:
        return "ok" if self.ok else f"fail at {self.location}: {self.reason}"


class CertFailure(Exception):
    def __init__(self, reason: str, location: str):
        super().__init__(f"{location}: {reason}")
        self.reason = reason
        self.location = location


def _fail(reason, loc):
    raise CertFailure(reason, loc)


def _interval(obj, loc) -> Interval:
    try:
        return Interval.from_json(obj)
    except (ValueError, TypeError, AttributeError, ZeroDivisionError) as e:
        _fail(f"malformed interval {obj!r}: {e}", loc)


def _term(text, loc):
    try:
        t = parse_term(text)
    except (ValueError, TypeError) as e:
        _fail(f"malformed term {text!r}: {e}", loc)
    if normalize(t) != t:
        _fail(f"term {text} is not in canonical form", loc)
    return t


def _atom(text, loc) -> Atom:
    try:
        atoms = parse_hyp(text)
    except (ValueError, TypeError) as e:
        _fail(f"malformed atom {text!r}: {e}", loc)
    if len(atoms) != 1:
        _fail(f"expected one atom, got {text!r}", loc)
    return atoms[0]


def _justifies(sources: list, claim: Interval) -> tuple[bool, bool]:
    lo_ok = claim.lo is None or any(s.lo is not None and s.lo >= claim.lo for s in sources)
    hi_ok = claim.hi is None or any(s.hi is not None and s.hi <= claim.hi for s in sources)
    return lo_ok, hi_ok


class _Checker:
    def __init__(self, p: Problem):
        self.p = p
        self.defs = p.defs
        self.theory = p.base_theory()
        self.env0 = env_from_atoms(p.hyp)

    # -- bound traces ------------------------------------------------------

    def node(self, obj: dict, env: HypEnv, loc: str) -> tuple:
        if not isinstance(obj, dict):
            _fail("trace node is not an object", loc)
        t = _term(obj.get("term"), loc + ".term")
        claim = _interval(obj.get("claim"), loc + ".claim")
        verified = []
        for i, src in enumerate(obj.get("sources", [])):
            verified.append(self.source(t, src, env, f"{loc}.sources[{i}]"))
        lo_ok, hi_ok = _justifies(verified, claim)
        if not lo_ok:
            _fail(f"lower bound {rat_str(claim.lo)} of {term_str(t)} is not justified", loc + ".claim")
        if not hi_ok:
            _fail(f"upper bound {rat_str(claim.hi)} of {term_str(t)} is not justified", loc + ".claim")
        return t, claim

    def source(self, t, src: dict, env: HypEnv, loc: str) -> Interval:
        recorded = _interval(src.get("bounds"), loc + ".bounds")
        kind = src.get("kind")
        if kind == "typeset":
            ts = typeset_of(t, env.var_ts, self.defs)
            recomputed = typeset_bounds(ts)
            detail = f"typeset {ts_names(ts)}"
        elif kind == "constant":
            if not isinstance(t, Const):
                _fail("constant source on a non-constant term", loc)
            recomputed = Interval.point(t.value)
            detail = "constant"
        elif kind == "hypothesis":
            if not isinstance(t, Var) or src.get("variable") != t.name:
                _fail("hypothesis source must name the variable it bounds", loc)
            try:
                recomputed = env.range_of(t.name)
            except ValueError as e:
                _fail(str(e), loc)
            detail = f"hypothesis range of {t.name}"
        elif kind == "operator":
            recomputed = self.operator(t, src, env, loc)
            detail = f"operator {src.get('op')}"
        elif kind == "suggestion":
            recomputed = self.suggestion(t, src, env, loc)
            detail = f"suggestion {src.get('index')}"
        elif kind == "linear":
            recomputed = self.linear(t, src, env, loc)
            detail = f"linear rule {src.get('name')}"
        else:
            _fail(f"unknown source kind {kind!r}", loc)
        if not iv_subset(recomputed, recorded):
            _fail(f"{detail} supports only {recomputed}, not {recorded}", loc + ".bounds")
        return recorded

    def operator(self, t, src, env, loc) -> Interval:
        op = src.get("op")
        if not isinstance(t, App) or t.op != op:
            _fail(f"operator source {op!r} does not match term head", loc)
        kids = src.get("children", [])
        claims = []
        terms = []
        for i, k in enumerate(kids):
            kt, kc = self.node(k, env, f"{loc}.children[{i}]")
            terms.append(kt)
            claims.append(kc)
        if op == "+":
            if tuple(terms) != t.args:
                _fail("children do not match the summands", loc)
            return reduce(iv_add, claims)
        if op == "*":
            k = src.get("squares", 0)
            if not isinstance(k, int) or not 0 <= k <= len(terms):
                _fail("bad square count", loc)
            factors = terms[:k] * 2 + terms[k:]
            if sorted(factors, key=term_key) != sorted(t.args, key=term_key):
                _fail("children do not match the factors", loc)
            parts = [iv_square(c) for c in claims[:k]] + claims[k:]
            return reduce(iv_mul, parts)
        if op == "recip":
            if tuple(terms) != t.args:
                _fail("child does not match the reciprocal argument", loc)
            return iv_recip(claims[0])
        _fail(f"unsupported operator {op!r}", loc)

    def _value(self, src, loc):
        try:
            return rat_parse(src.get("value"))
        except (ValueError, TypeError, ZeroDivisionError, AttributeError):
            _fail("malformed value", loc)

    def _eval(self, t):
        try:
            return eval_ground(t, self.defs)
        except ZeroDivisionError:
            return None

    def suggestion(self, t, src, env, loc) -> Interval:
        idx = src.get("index")
        if not isinstance(idx, int) or not 0 <= idx < len(self.p.suggestions):
            _fail(f"no suggestion #{idx}", loc)
        sug = self.p.suggestions[idx]
        if src.get("direction") != sug.direction:
            _fail("suggestion direction mismatch", loc)
        sigma = match(sug.pattern, t, sug.free_vars)
        if sigma is None:
            _fail(f"suggestion #{idx} does not match {term_str(t)}", loc)
        value = self._value(src, loc)
        if self._eval(substitute(sug.rhs, sigma)) != value:
            _fail("suggested value does not evaluate as recorded", loc)
        if sug.direction == "upper":
            goal = Atom("<=", (t, Const(value)))
            bounds = Interval(None, value)
        else:
            goal = Atom("<=", (Const(value), t))
            bounds = Interval(value, None)
        proofs = src.get("proofs", [])
        if len(proofs) != 1:
            _fail("suggestion needs exactly one proof", loc)
        self.proof(proofs[0], goal, env, loc + ".proofs[0]")
        return bounds

    def linear(self, t, src, env, loc) -> Interval:
        name = src.get("name")
        candidates = [
            r for r in self.p.linear_rules
            if r.name == name and r.relation == src.get("relation")
            and term_str(r.pattern_side) == src.get("pattern")
        ]
        if not candidates:
            _fail(f"no linear rule {name!r} with that orientation", loc)
        rule = candidates[0]
        if not rule.enabled or rule.name not in self.theory:
            _fail(f"linear rule {name!r} is disabled", loc)
        sigma = match(rule.pattern_side, t, rule.rule_vars)
        if sigma is None:
            _fail(f"linear rule {name!r} does not match {term_str(t)}", loc)
        value = self._value(src, loc)
        if self._eval(substitute(rule.bound_side, sigma)) != value:
            _fail("linear bound does not evaluate as recorded", loc)
        proofs = src.get("proofs", [])
        if len(proofs) != len(rule.hyps):
            _fail("wrong number of hypothesis proofs", loc)
        for i, (h, pf) in enumerate(zip(rule.hyps, proofs)):
            if (h.vars & rule.rule_vars) - set(sigma):
                _fail("hypothesis has unbound rule variables", loc)
            self.proof(pf, h.substitute(sigma), env, f"{loc}.proofs[{i}]")
        return Interval(None, value) if rule.relation == "<=" else Interval(value, None)

    def proof(self, obj: dict, expected: Atom, env: HypEnv, loc: str) -> None:
        if not isinstance(obj, dict):
            _fail("proof is not an object", loc)
        atom = _atom(obj.get("atom"), loc + ".atom")
        if atom != expected:
            _fail(f"proof is about {atom}, expected {expected}", loc + ".atom")
        method = obj.get("method")
        if method == "env":
            conj = _atom(obj.get("conjunct"), loc + ".conjunct")
            if conj not in env.conjuncts:
                _fail(f"{conj} is not a hypothesis", loc + ".conjunct")
            if not atom_implies(conj, atom):
                _fail(f"{conj} does not entail {atom}", loc)
        elif method == "ground":
            if not ground_truth(atom, self.defs):
                _fail(f"{atom} does not evaluate to true", loc)
        elif method == "typeset":
            declared = all(env.declared(v) for v in atom.vars)
            if atom.rel == "rationalp":
                ok = declared
            elif atom.rel == "integerp":
                ok = declared and ts_subset(typeset_of(atom.args[0], env.var_ts, self.defs), INTEGERS)
            else:
                ok = False
            if not ok:
                _fail(f"typeset reasoning does not establish {atom}", loc)
        elif method == "bound":
            obligations = bound_obligations(atom)
            traces = obj.get("traces", [])
            if not obligations or len(traces) != len(obligations):
                _fail(f"bound proof of {atom} has the wrong shape", loc)
            for i, ((term, check), tr) in enumerate(zip(obligations, traces)):
                tt, claim = self.node(tr, env, f"{loc}.traces[{i}]")
                if tt != term:
                    _fail(f"bound proof bounds {term_str(tt)}, expected {term_str(term)}", loc)
                if not check(claim):
                    _fail(f"bound {claim} does not establish {atom}", loc)
        else:
            _fail(f"unknown proof method {method!r}", loc)

    # -- rewriting ---------------------------------------------------------

    def replay(self, cert: dict):
        t = normalize(self.p.goal)
        last_phase = 0
        rules = {r.name: r for r in self.p.rewrite_rules}
        for i, st in enumerate(cert.get("rewrite_steps", [])):
            loc = f"rewrite_steps[{i}]"
            if st.get("before") != term_digest(t):
                _fail("term before the step does not match", loc + ".before")
            phase = st.get("phase")
            if not isinstance(phase, int) or not 0 <= phase < len(self.p.phases) or phase < last_phase:
                _fail(f"bad phase index {phase!r}", loc + ".phase")
            last_phase = phase
            ph = self.p.phases[phase]
            active = ph.active(self.theory)
            try:
                path = tuple(st.get("path"))
                sub = subterm_at(t, path)
            except (TypeError, AttributeError, IndexError):
                _fail("path does not address a subterm", loc + ".path")
            name = st.get("name")
            if st.get("kind") == "expand":
                fdef = self.defs.get(name)
                if fdef is None or not isinstance(sub, Call) or sub.fn != name:
                    _fail(f"no call of defined function {name!r} at path", loc)
                if name not in active and sub not in {normalize(e) for e in ph.expands}:
                    _fail(f"{name} is neither enabled nor expanded in phase {phase}", loc)
                new_sub = substitute(fdef.body, dict(zip(fdef.params, sub.args)))
            elif st.get("kind") == "rule":
                rule = rules.get(name)
                if rule is None:
                    _fail(f"unknown rewrite rule {name!r}", loc + ".name")
                if name not in active:
                    _fail(f"rule {name} is not enabled in phase {phase}", loc + ".name")
                if rule.builtin:
                    new_sub = distribute(sub) if name == DISTRIBUTIVITY else None
                    if new_sub is None:
                        _fail(f"builtin rule {name} does not apply at path", loc)
                else:
                    sigma = match(rule.lhs, sub, rule.free_vars)
                    if sigma is None:
                        _fail(f"rule {name} does not match at path", loc)
                    proofs = st.get("proofs", [])
                    if len(proofs) != len(rule.hyps):
                        _fail("wrong number of hypothesis proofs", loc)
                    for j, (h, pf) in enumerate(zip(rule.hyps, proofs)):
                        self.proof(pf, h.substitute(sigma), self.env0, f"{loc}.proofs[{j}]")
                    new_sub = substitute(rule.rhs, sigma)
            else:
                _fail(f"unknown step kind {st.get('kind')!r}", loc + ".kind")
            t = normalize(replace_at(t, path, new_sub))
            if st.get("after") != term_digest(t):
                _fail("result of the step does not match", loc + ".after")
        if term_str(t) != cert.get("rewritten_goal"):
            _fail("replayed goal differs from the recorded rewritten goal", "rewritten_goal")
        return t

    # -- cases -------------------------------------------------------------

    def cases(self, cert: dict, goal) -> Interval:
        split = cert.get("case_split", [])
        names = [s.variable for s in self.p.cases]
        if [s.get("variable") for s in split] != names:
            _fail(f"case variables {[s.get('variable') for s in split]} differ from {names}", "case_split")
        seg_lists = []
        for i, s in enumerate(split):
            loc = f"case_split[{i}]"
            segs = [_interval(o, f"{loc}.segments[{j}]") for j, o in enumerate(s.get("segments", []))]
            self.coverage(s["variable"], segs, loc)
            seg_lists.append(segs)
        expected = [dict(zip(names, combo)) for combo in itertools.product(*seg_lists)]
        leaves = cert.get("cases", [])
        found = []
        for j, leaf in enumerate(leaves):
            segs = leaf.get("segments", {}) if isinstance(leaf, dict) else {}
            found.append({v: _interval(o, f"cases[{j}].segments.{v}") for v, o in segs.items()})
        if found != expected:
            _fail(f"case leaves do not cover the split: expected {len(expected)} cases, "
                  f"found {len(found)} (or a segment differs)", "cases")
        claims = []
        for j, (leaf, case) in enumerate(zip(leaves, expected)):
            loc = f"cases[{j}]"
            try:
                env = self.env0
                for v, seg in case.items():
                    env = env.strengthen(v, seg)
            except HypError:
                env = None
            if leaf.get("vacuous"):
                if env is not None:
                    _fail("case is marked vacuous but its hypotheses are satisfiable", loc)
                continue
            if env is None:
                _fail("case hypotheses are unsatisfiable but it is not marked vacuous", loc)
            claim = _interval(leaf.get("claim"), loc + ".claim")
            tt, tclaim = self.node(leaf.get("trace"), env, loc + ".trace")
            if tt != goal:
                _fail("case trace does not bound the rewritten goal", loc + ".trace.term")
            if not iv_subset(tclaim, claim):
                _fail(f"case claim {claim} is tighter than its trace {tclaim}", loc + ".claim")
            claims.append(claim)
        if not claims:
            _fail("no satisfiable case", "cases")
        return iv_union_all(claims)

    def coverage(self, var: str, segs: list, loc: str) -> None:
        rng = self.env0.ranges.get(var, TOP)
        if not segs:
            _fail(f"no segments for {var}", loc)
        ordered = sorted(segs, key=lambda s: (s.lo is not None, s.lo))
        first = ordered[0]
        if not (first.lo is None or (rng.lo is not None and first.lo <= rng.lo)):
            _fail(f"segments for {var} do not reach the lower end of its range", loc)
        reach = first.hi
        for s in ordered[1:]:
            if reach is None:
                break
            if s.lo is not None and s.lo > reach:
                _fail(f"gap in the segments for {var} after {rat_str(reach)}", loc)
            reach = None if s.hi is None else max(reach, s.hi)
        if not (reach is None or (rng.hi is not None and reach >= rng.hi)):
            _fail(f"segments for {var} do not reach the upper end of its range", loc)

    def run(self, cert: dict) -> None:
        if not isinstance(cert, dict) or cert.get("format") != FORMAT:
            _fail("not a certificate of the supported format", "format")
        if cert.get("digest") != self.p.digest():
            _fail("problem digest mismatch", "digest")
        goal = self.replay(cert)
        union = self.cases(cert, goal)
        root = _interval(cert.get("claim"), "claim")
        if not iv_subset(union, root):
            _fail(f"root claim {root} is tighter than the union of cases {union}", "claim")


def check_cert(p: Problem, cert: dict) -> Verdict:
    try:
        _Checker(p).run(cert)
    except CertFailure as e:
        return Verdict(False, e.reason, e.location)
    except HypError as e:
        return Verdict(False, str(e), "problem")
    return Verdict(True)


__all__ = ["build_cert", "check_cert", "trace_json", "term_digest", "Verdict", "FORMAT", "dumps"]

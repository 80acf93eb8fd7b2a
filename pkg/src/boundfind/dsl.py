"""Loader for problem files.

A problem file is a sequence of top-level forms::

    (defun f (x) body)          ; definition, enabled by default
    (defund f (x) body)         ; definition, disabled by default
    (defstub g (x))             ; uninterpreted function
    (defthm r (equal lhs rhs))  ; rewrite rule, enabled
    (defthmd r (implies hyp (equal lhs rhs)))   ; rewrite rule, disabled
    (deflinear r (implies hyp (<= a b)))        ; linear rule, enabled
    (defsuggest s ((< a 3) (:free (c) (<= (bar c) 10))))
    (in-theory (enable ...)) / (in-theory (disable ...))
    (local form) / (include-book ...)
    (def-bounds name goal :hyp h :simp-hints (...) :cases (...) :suggestions (...))

Each ``def-bounds`` becomes a :class:`~boundfind.cases.Problem` that sees
everything defined above it, with the theory current at that point.
"""

from __future__ import annotations

from dataclasses import replace
from pathlib import Path

from .bounder import Suggestion, linear_orientations
from .cases import CaseError, CaseSpec, Config, Problem
from .env import HypError, atoms_from_sexpr
from .rational import RationalSyntaxError, is_rational_literal, rat_parse
from .rewrite import DISTRIBUTIVITY_RULE, FnDef, Phase, RewriteError, RewriteRule
from .term import (
    Call, Const, TermSyntaxError, Var, all_subterms, normalize, read_sexprs, term_calls,
    term_from_sexpr, term_str, term_vars,
)

CONFIG_KEYS = {
    ":backchain-depth": "backchain_depth",
    ":max-rewrite-steps": "max_rewrite_steps",
    ":case-cap": "case_cap",
}


class ProblemSyntaxError(ValueError):
    """A malformed or inconsistent problem file; carries the source position."""

    def __init__(self, message: str, where=None):
        line, col = getattr(where, "line", None), getattr(where, "col", None)
        self.line, self.col = line, col
        self.bare = message
        super().__init__(f"{line}:{col}: {message}" if line else message)


def _err(msg, where=None):
    raise ProblemSyntaxError(msg, where)


def _calls(t):
    return [s for s in all_subterms(t) if isinstance(s, Call)]


def _is_sym(x) -> bool:
    return isinstance(x, str)


def _is_list(x) -> bool:
    return isinstance(x, list)


def _keyword_args(items, where, allowed) -> dict:
    if len(items) % 2:
        _err("keyword arguments must come in pairs", where)
    out = {}
    for i in range(0, len(items), 2):
        key, val = items[i], items[i + 1]
        if not _is_sym(key) or not key.startswith(":"):
            _err(f"expected a keyword, found {key!r}", key if _is_sym(key) else where)
        if key not in allowed:
            _err(f"unsupported keyword {key}", key)
        if key in out:
            _err(f"keyword {key} given twice", key)
        out[key] = val
    return out


class _Loader:
    def __init__(self, defaults: Config):
        self.defaults = defaults
        self.defs: dict[str, FnDef] = {}
        self.stubs: dict[str, int] = {}
        self.rules: list[RewriteRule] = [DISTRIBUTIVITY_RULE]
        self.linear: list = []
        self.linear_names: set = set()
        self.suggestion_sets: dict[str, list] = {}
        self.theory: set = {DISTRIBUTIVITY_RULE.name}
        self.names: dict = {DISTRIBUTIVITY_RULE.name: "builtin rule"}
        self.problems: list[Problem] = []

    # -- helpers -----------------------------------------------------------

    def claim_name(self, sym, kind):
        if not _is_sym(sym) or sym.startswith(":") or is_rational_literal(sym):
            _err(f"{kind} name must be a symbol", sym if _is_sym(sym) else None)
        if sym in self.names:
            _err(f"{sym} is already defined as a {self.names[sym]}", sym)
        self.names[sym] = kind
        return str(sym)

    def term(self, sx):
        try:
            t = term_from_sexpr(sx)
        except TermSyntaxError as e:
            _err(e.msg, e if e.line else sx)
        except (RationalSyntaxError, ZeroDivisionError) as e:
            _err(str(e), sx)
        for call in _calls(t):
            arity = self.arity(call.fn)
            if arity is None:
                _err(f"call of undefined function {call.fn}", sx)
            if arity != len(call.args):
                _err(f"{call.fn} takes {arity} arguments, given {len(call.args)}", sx)
        return t

    def arity(self, fn):
        if fn in self.defs:
            return len(self.defs[fn].params)
        return self.stubs.get(fn)

    def atoms(self, sx) -> tuple:
        try:
            atoms = atoms_from_sexpr(sx)
        except HypError as e:
            _err(str(e), sx)
        for a in atoms:
            for arg in a.args:
                for call in _calls(arg):
                    if self.arity(call.fn) != len(call.args):
                        _err(f"bad call of {call.fn} in hypothesis", sx)
        return tuple(atoms)

    def theory_names(self, items, where):
        if not _is_list(items):
            _err("expected a list of rule or function names", where)
        known = set(self.defs) | {r.name for r in self.rules} | self.linear_names
        out = set()
        for n in items:
            if not _is_sym(n):
                _err("expected a rule or function name", where)
            if n not in known:
                _err(f"unknown rule or function {n}", n)
            out.add(str(n))
        return out

    def theory_change(self, sx, where):
        """``(enable ...)``, ``(disable ...)`` or ``(e/d (...) (...))``."""
        if not _is_list(sx) or not sx or not _is_sym(sx[0]):
            _err("expected (enable ...), (disable ...) or (e/d ...)", where)
        head = sx[0]
        if head == "enable":
            return self.theory_names(sx[1:], sx), set()
        if head == "disable":
            return set(), self.theory_names(sx[1:], sx)
        if head == "e/d":
            parts = list(sx[1:]) + [[], []]
            return self.theory_names(parts[0], sx), self.theory_names(parts[1], sx)
        _err(f"unsupported theory expression ({head} ...)", sx)

    # -- top-level forms ---------------------------------------------------

    def form(self, sx):
        if not _is_list(sx) or not sx or not _is_sym(sx[0]):
            _err("expected a top-level form", sx if _is_list(sx) else None)
        handler = {
            "defun": self.defun, "defund": self.defun, "defstub": self.defstub,
            "defthm": self.defthm, "defthmd": self.defthm, "deflinear": self.deflinear,
            "defsuggest": self.defsuggest, "in-theory": self.in_theory, "local": self.local,
            "include-book": lambda _sx: None, "def-bounds": self.def_bounds,
        }.get(sx[0])
        if handler is None:
            _err(f"unknown top-level form {sx[0]}", sx[0])
        handler(sx)

    def local(self, sx):
        if len(sx) != 2:
            _err("local takes one form", sx)
        self.form(sx[1])

    def in_theory(self, sx):
        if len(sx) != 2:
            _err("in-theory takes one theory expression", sx)
        enables, disables = self.theory_change(sx[1], sx)
        self.theory = (self.theory | enables) - disables

    def defun(self, sx):
        if len(sx) != 4 or not _is_list(sx[2]):
            _err(f"expected ({sx[0]} name (params...) body)", sx)
        params = tuple(str(p) for p in sx[2])
        if not all(_is_sym(p) and not is_rational_literal(p) for p in sx[2]) or len(set(params)) != len(params):
            _err("parameters must be distinct symbols", sx[2])
        body = normalize(self.term(sx[3]))  # recursion is impossible: the name is not yet known
        stray = term_vars(body) - set(params)
        if stray:
            _err(f"body of {sx[1]} mentions non-parameters {sorted(stray)}", sx[3])
        name = self.claim_name(sx[1], "function")
        enabled = sx[0] == "defun"
        self.defs[name] = FnDef(name, params, body, enabled)
        if enabled:
            self.theory.add(name)

    def defstub(self, sx):
        if len(sx) != 3 or not _is_list(sx[2]):
            _err("expected (defstub name (params...))", sx)
        name = self.claim_name(sx[1], "function")
        self.stubs[name] = len(sx[2])

    def _implication(self, sx):
        if _is_list(sx) and sx and sx[0] == "implies":
            if len(sx) != 3:
                _err("implies takes a hypothesis and a conclusion", sx)
            return self.atoms(sx[1]), sx[2]
        return (), sx

    def defthm(self, sx):
        if len(sx) != 3:
            _err(f"expected ({sx[0]} name formula)", sx)
        hyps, concl = self._implication(sx[2])
        if not (_is_list(concl) and len(concl) == 3 and concl[0] in ("equal", "=")):
            _err("rewrite rule conclusion must be (equal lhs rhs)", concl if _is_list(concl) else sx)
        lhs, rhs = normalize(self.term(concl[1])), normalize(self.term(concl[2]))
        if isinstance(lhs, (Var, Const)):
            _err("rewrite rule left side must not be a variable or constant", concl[1])
        extra = term_vars(rhs) - term_vars(lhs)
        for h in hyps:
            extra |= h.vars - term_vars(lhs)
        if extra:
            _err(f"variables {sorted(extra)} do not occur in the left side", concl)
        name = self.claim_name(sx[1], "rewrite rule")
        enabled = sx[0] == "defthm"
        self.rules.append(RewriteRule(name, lhs, rhs, hyps, enabled))
        if enabled:
            self.theory.add(name)

    def deflinear(self, sx):
        if len(sx) != 3:
            _err("expected (deflinear name formula)", sx)
        hyps, concl = self._implication(sx[2])
        rels = ("<=", "<", ">=", ">")
        if not (_is_list(concl) and len(concl) == 3 and concl[0] in rels):
            _err("linear rule conclusion must be an inequality", concl if _is_list(concl) else sx)
        # a strict lemma also gives the weak bound, which is all we use
        rel = "<=" if concl[0] in ("<=", "<") else ">="
        left, right = self.term(concl[1]), self.term(concl[2])
        name = self.claim_name(sx[1], "linear rule")
        orientations = linear_orientations(name, left, rel, right, hyps)
        if not orientations:
            _err("linear rule has no side usable as a pattern", concl)
        self.linear.extend(orientations)
        self.linear_names.add(name)
        self.theory.add(name)

    def suggestion(self, sx) -> Suggestion:
        free = frozenset()
        body = sx
        if _is_list(sx) and sx and sx[0] == ":free":
            if len(sx) != 3 or not _is_list(sx[1]) or not all(_is_sym(v) for v in sx[1]):
                _err("expected (:free (vars...) (rel pattern bound))", sx)
            free = frozenset(str(v) for v in sx[1])
            body = sx[2]
        if not (_is_list(body) and len(body) == 3 and body[0] in ("<", "<=", ">", ">=")):
            _err("suggestion must be (rel pattern bound)", body if _is_list(body) else sx)
        left, right = normalize(self.term(body[1])), normalize(self.term(body[2]))
        upper = body[0] in ("<", "<=")
        if not term_vars(left) and not term_calls(left) and (term_vars(right) or term_calls(right)):
            left, right, upper = right, left, not upper
        if isinstance(left, Const):
            _err("suggestion pattern must not be a constant", body)
        stray = free - term_vars(left)
        if stray:
            _err(f"free variables {sorted(stray)} do not occur in the pattern", sx)
        return Suggestion(left, free, "upper" if upper else "lower", right)

    def suggestion_list(self, items, where) -> list:
        if not _is_list(items):
            _err("expected a list of suggestions", where)
        out = []
        for it in items:
            if _is_sym(it):
                if it not in self.suggestion_sets:
                    _err(f"unknown suggestion set {it}", it)
                out.extend(self.suggestion_sets[it])
            else:
                out.append(self.suggestion(it))
        return out

    def defsuggest(self, sx):
        if len(sx) != 3:
            _err("expected (defsuggest name (suggestions...))", sx)
        sugs = self.suggestion_list(sx[2], sx)
        name = self.claim_name(sx[1], "suggestion set")
        self.suggestion_sets[name] = sugs

    def phase(self, hint) -> Phase:
        if not _is_list(hint) or not hint:
            _err("each simplification hint must be a keyword list", hint if _is_list(hint) else None)
        kw = _keyword_args(list(hint), hint, (":in-theory", ":expand"))
        enables, disables = set(), set()
        if ":in-theory" in kw:
            enables, disables = self.theory_change(kw[":in-theory"], hint)
        expands = ()
        if ":expand" in kw:
            val = kw[":expand"]
            if not _is_list(val) or not val:
                _err(":expand takes a call or a list of calls", hint)
            terms = [val] if _is_sym(val[0]) else list(val)
            out = []
            for e in terms:
                t = normalize(self.term(e))
                if not (isinstance(t, Call) and t.fn in self.defs):
                    _err(f"cannot expand {term_str(t)}: not a call of a defined function", e)
                out.append(t)
            expands = tuple(out)
        try:
            return Phase(frozenset(enables), frozenset(disables), expands)
        except RewriteError as e:
            _err(str(e), hint)

    def case_spec(self, sx) -> CaseSpec:
        if not (_is_list(sx) and len(sx) == 5 and sx[0] == ":ranges-from-to-by"):
            _err("expected (:ranges-from-to-by var from to by)", sx if _is_list(sx) else None)
        var = sx[1]
        if not _is_sym(var) or is_rational_literal(var):
            _err("case variable must be a symbol", sx)
        try:
            start, stop, step = (rat_parse(x) for x in sx[2:])
        except (RationalSyntaxError, ZeroDivisionError, TypeError) as e:
            _err(f"bad rational in case spec: {e}", sx)
        try:
            return CaseSpec(str(var), start, stop, step)
        except CaseError as e:
            _err(str(e), sx)

    def def_bounds(self, sx):
        if len(sx) < 3:
            _err("expected (def-bounds name goal :hyp ...)", sx)
        allowed = (":hyp", ":simp-hints", ":cases", ":suggestions", *CONFIG_KEYS)
        kw = _keyword_args(list(sx[3:]), sx, allowed)
        goal = self.term(sx[2])
        hyp = self.atoms(kw[":hyp"]) if ":hyp" in kw else ()
        phases = ()
        if ":simp-hints" in kw:
            hints = kw[":simp-hints"]
            if not _is_list(hints):
                _err(":simp-hints takes a list of hints", sx)
            phases = tuple(self.phase(h) for h in hints)
        cases = ()
        if ":cases" in kw:
            if not _is_list(kw[":cases"]):
                _err(":cases takes a list of case specs", sx)
            cases = tuple(self.case_spec(c) for c in kw[":cases"])
        sugs = self.suggestion_list(kw[":suggestions"], sx) if ":suggestions" in kw else []
        cfg = self.defaults
        for key, attr in CONFIG_KEYS.items():
            if key in kw:
                val = kw[key]
                if not (_is_sym(val) and val.isdigit()):
                    _err(f"{key} takes a natural number", val if _is_sym(val) else sx)
                cfg = replace(cfg, **{attr: int(val)})
        name = self.claim_name(sx[1], "bounds problem")
        self.problems.append(Problem(
            name=name, goal=goal, hyp=hyp, phases=phases, cases=cases,
            suggestions=tuple(sugs), linear_rules=tuple(self.linear),
            rewrite_rules=tuple(self.rules), defs=dict(self.defs),
            theory=frozenset(self.theory), config=cfg,
        ))


def load_problem_text(text: str, defaults: Config | None = None) -> list[Problem]:
    """Parse problem-file text into problems, in file order.

    ``defaults`` supplies configuration for problems that do not set it
    themselves with ``:backchain-depth`` and friends.
    """
    try:
        forms = read_sexprs(text)
    except TermSyntaxError as e:
        raise ProblemSyntaxError(e.msg, e) from None
    loader = _Loader(defaults or Config())
    for sx in forms:
        loader.form(sx)
    return loader.problems


def load_problem_file(path, defaults: Config | None = None) -> list[Problem]:
    return load_problem_text(Path(path).read_text(), defaults)


__all__ = ["load_problem_file", "load_problem_text", "ProblemSyntaxError"]

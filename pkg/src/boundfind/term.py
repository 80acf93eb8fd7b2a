"""Arithmetic terms: s-expression syntax, canonical form, matching, evaluation.

Surface syntax admits ``+ * - /`` (unary ``-`` is negation, unary ``/`` is
reciprocal), rational literals, variables and calls of named functions.
:func:`normalize` reduces every term to a canonical form that uses only
n-ary ``+``, n-ary ``*``, ``recip``, calls, variables and constants.
"""

from __future__ import annotations

import functools
import re
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterator, Mapping, Union

from .rational import is_rational_literal, rat_parse, rat_str

# ---------------------------------------------------------------------------
# AST


@dataclass(frozen=True)
class Var:
    name: str

    def __str__(self) -> str:
        return self.name


@dataclass(frozen=True)
class Const:
    value: Fraction

    def __str__(self) -> str:
        return rat_str(self.value)


@dataclass(frozen=True)
class App:
    """Operator application.  ``op`` is one of :data:`OPS`."""

    op: str
    args: tuple

    def __str__(self) -> str:
        return term_str(self)


@dataclass(frozen=True)
class Call:
    fn: str
    args: tuple

    def __str__(self) -> str:
        return term_str(self)


Term = Union[Var, Const, App, Call]

OPS = ("+", "*", "-", "neg", "/", "recip")
_OP_SYMBOL = {"+": "+", "*": "*", "-": "-", "neg": "-", "/": "/", "recip": "/"}
COMMUTATIVE = ("+", "*")

# Heads that belong to the hypothesis/rule language, never to terms.
RESERVED = frozenset(
    ["and", "or", "not", "implies", "equal", "=", "<", "<=", ">", ">=",
     "rationalp", "integerp", "if", "quote", "lambda", "let"]
)

ZERO = Const(Fraction(0))
ONE = Const(Fraction(1))


def const(v) -> Const:
    return Const(Fraction(v))


class TermSyntaxError(ValueError):
    def __init__(self, message: str, line: int | None = None, col: int | None = None):
        self.msg = message
        if line is not None:
            message = f"{line}:{col}: {message}"
        super().__init__(message)
        self.line = line
        self.col = col


# ---------------------------------------------------------------------------
# S-expression reader


class SList(list):
    """A parsed list that remembers where it started in the source text."""

    line = 0
    col = 0


class Sym(str):
    line = 0
    col = 0


_TOKEN_RE = re.compile(r"\s+|;[^\n]*|\(|\)|[^\s();]+")


def _tokens(text: str) -> Iterator[tuple[str, int, int]]:
    line, line_start = 1, 0
    for m in _TOKEN_RE.finditer(text):
        tok = m.group(0)
        start = m.start()
        if not tok.isspace() and not tok.startswith(";"):
            yield tok, line, start - line_start + 1
        nl = tok.count("\n")
        if nl:
            line += nl
            line_start = m.start() + tok.rindex("\n") + 1


def read_sexprs(text: str) -> list:
    """Read every top-level s-expression in ``text``."""
    stack: list[SList] = []
    out: list = []
    for tok, line, col in _tokens(text):
        if tok == "(":
            lst = SList()
            lst.line, lst.col = line, col
            stack.append(lst)
        elif tok == ")":
            if not stack:
                raise TermSyntaxError("unbalanced ')'", line, col)
            done = stack.pop()
            (stack[-1] if stack else out).append(done)
        else:
            sym = Sym(tok)
            sym.line, sym.col = line, col
            (stack[-1] if stack else out).append(sym)
    if stack:
        raise TermSyntaxError("unbalanced '(': missing ')'", stack[-1].line, stack[-1].col)
    return out


def read_sexpr(text: str):
    forms = read_sexprs(text)
    if len(forms) != 1:
        raise TermSyntaxError(f"expected exactly one s-expression, found {len(forms)}")
    return forms[0]


def _where(sx) -> tuple[int | None, int | None]:
    return getattr(sx, "line", None), getattr(sx, "col", None)


def term_from_sexpr(sx) -> Term:
    if isinstance(sx, str):
        if is_rational_literal(sx):
            return Const(rat_parse(sx))
        if sx.startswith(":") or sx in RESERVED or sx in ("+", "*", "-", "/"):
            raise TermSyntaxError(f"unexpected symbol {sx!r} in term", *_where(sx))
        return Var(str(sx))
    if not sx:
        raise TermSyntaxError("empty application", *_where(sx))
    head, rest = sx[0], sx[1:]
    if not isinstance(head, str):
        raise TermSyntaxError("application head must be a symbol", *_where(sx))
    args = tuple(term_from_sexpr(a) for a in rest)
    if head in ("+", "*"):
        if len(args) < 2:
            raise TermSyntaxError(f"operator {head} needs at least 2 arguments", *_where(sx))
        return App(str(head), args)
    if head == "-":
        if not args:
            raise TermSyntaxError("operator - needs an argument", *_where(sx))
        return App("neg", args) if len(args) == 1 else App("-", args)
    if head == "/":
        if not args:
            raise TermSyntaxError("operator / needs an argument", *_where(sx))
        return App("recip", args) if len(args) == 1 else App("/", args)
    if head in RESERVED or head.startswith(":") or is_rational_literal(head):
        raise TermSyntaxError(f"{head!r} is not an arithmetic operator or function", *_where(sx))
    return Call(str(head), args)


def parse_term(text: str) -> Term:
    return term_from_sexpr(read_sexpr(text))


def term_str(t: Term) -> str:
    if isinstance(t, (Var, Const)):
        return str(t)
    if isinstance(t, App):
        head = _OP_SYMBOL[t.op]
    else:
        head = t.fn
    return "(" + " ".join([head] + [term_str(a) for a in t.args]) + ")"


# ---------------------------------------------------------------------------
# Term order


def term_key(t: Term) -> tuple:
    """Sort key realising the canonical total order.

    Constants (by value) < variables (by name) < compound terms, the latter
    compared by kind, head, arity and then argument keys.
    """
    return _key(t)


@functools.lru_cache(maxsize=None)
def _key(t: Term) -> tuple:
    if isinstance(t, Const):
        return (0, t.value)
    if isinstance(t, Var):
        return (1, t.name)
    if isinstance(t, App):
        return (2, 0, t.op, len(t.args), tuple(_key(a) for a in t.args))
    return (2, 1, t.fn, len(t.args), tuple(_key(a) for a in t.args))


def term_lt(a: Term, b: Term) -> bool:
    return _key(a) < _key(b)


# ---------------------------------------------------------------------------
# Normalization


@functools.lru_cache(maxsize=None)
def normalize(t: Term) -> Term:
    if isinstance(t, (Var, Const)):
        return t
    if isinstance(t, Call):
        return Call(t.fn, tuple(normalize(a) for a in t.args))
    op, args = t.op, t.args
    if op == "neg":
        return normalize(App("*", (const(-1), args[0])))
    if op == "-":
        if len(args) == 1:
            return normalize(App("*", (const(-1), args[0])))
        rest = tuple(App("*", (const(-1), a)) for a in args[1:])
        return normalize(App("+", (args[0],) + rest))
    if op == "/":
        if len(args) == 1:
            return normalize(App("recip", args))
        rest = tuple(App("recip", (a,)) for a in args[1:])
        return normalize(App("*", (args[0],) + rest))
    if op == "recip":
        inner = normalize(args[0])
        if isinstance(inner, Const) and inner.value != 0:
            return Const(1 / inner.value)
        return App("recip", (inner,))
    if op == "+":
        return _make_sum([normalize(a) for a in args])
    if op == "*":
        return _make_product([normalize(a) for a in args])
    raise ValueError(f"unknown operator {op!r}")


def _make_sum(args: list) -> Term:
    total = Fraction(0)
    terms = []
    for a in args:
        if isinstance(a, App) and a.op == "+":
            parts = a.args
        else:
            parts = (a,)
        for p in parts:
            if isinstance(p, Const):
                total += p.value
            else:
                terms.append(p)
    terms.sort(key=_key)
    if total != 0 or not terms:
        terms.insert(0, Const(total))
    if len(terms) == 1:
        return terms[0]
    return App("+", tuple(terms))


def _make_product(args: list) -> Term:
    coef = Fraction(1)
    factors = []
    for a in args:
        if isinstance(a, App) and a.op == "*":
            parts = a.args
        else:
            parts = (a,)
        for p in parts:
            if isinstance(p, Const):
                coef *= p.value
            else:
                factors.append(p)
    if coef == 0:
        return ZERO
    factors.sort(key=_key)
    if coef != 1 or not factors:
        factors.insert(0, Const(coef))
    if len(factors) == 1:
        return factors[0]
    return App("*", tuple(factors))


def distribute(t: Term) -> Term | None:
    """One distributivity step on a canonical product: x*(y+z) -> x*y + x*z.

    Distributes over the first sum factor.  Returns None if ``t`` is not a
    product with a sum factor.
    """
    if not (isinstance(t, App) and t.op == "*"):
        return None
    for i, a in enumerate(t.args):
        if isinstance(a, App) and a.op == "+":
            others = t.args[:i] + t.args[i + 1:]
            return normalize(App("+", tuple(App("*", others + (s,)) for s in a.args)))
    return None


# ---------------------------------------------------------------------------
# Inspection


def term_vars(t: Term) -> frozenset:
    return _vars(t)


@functools.lru_cache(maxsize=None)
def _vars(t: Term) -> frozenset:
    if isinstance(t, Var):
        return frozenset([t.name])
    if isinstance(t, Const):
        return frozenset()
    out = frozenset()
    for a in t.args:
        out |= _vars(a)
    return out


def term_calls(t: Term) -> set:
    """Names of all functions called anywhere in ``t``."""
    if isinstance(t, (Var, Const)):
        return set()
    out = {t.fn} if isinstance(t, Call) else set()
    for a in t.args:
        out |= term_calls(a)
    return out


def subterm_at(t: Term, path) -> Term:
    for i in path:
        t = t.args[i]
    return t


def replace_at(t: Term, path, new: Term) -> Term:
    if not path:
        return new
    i, rest = path[0], path[1:]
    args = list(t.args)
    args[i] = replace_at(args[i], rest, new)
    if isinstance(t, App):
        return App(t.op, tuple(args))
    return Call(t.fn, tuple(args))


def positions(t: Term, path=()) -> Iterator[tuple]:
    """Leftmost-innermost (post-order) traversal of compound positions."""
    if isinstance(t, (App, Call)):
        for i, a in enumerate(t.args):
            yield from positions(a, path + (i,))
        yield path, t


# ---------------------------------------------------------------------------
# Substitution and matching

Substitution = Mapping[str, Term]


def substitute_raw(t: Term, sigma: Substitution) -> Term:
    if isinstance(t, Var):
        return sigma.get(t.name, t)
    if isinstance(t, Const):
        return t
    args = tuple(substitute_raw(a, sigma) for a in t.args)
    if isinstance(t, App):
        return App(t.op, args)
    return Call(t.fn, args)


def substitute(t: Term, sigma: Substitution) -> Term:
    """Simultaneous replacement followed by normalization."""
    return normalize(substitute_raw(t, sigma))


def _match_gen(p: Term, t: Term, free: frozenset, sigma: dict) -> Iterator[dict]:
    if isinstance(p, Var):
        if p.name in free:
            bound = sigma.get(p.name)
            if bound is None:
                new = dict(sigma)
                new[p.name] = t
                yield new
            elif bound == t:
                yield sigma
        elif p == t:
            yield sigma
        return
    if isinstance(p, Const):
        if p == t:
            yield sigma
        return
    if type(p) is not type(t) or len(p.args) != len(t.args):
        return
    if isinstance(p, App):
        if p.op != t.op:
            return
    elif p.fn != t.fn:
        return
    if isinstance(p, App) and p.op in COMMUTATIVE:
        yield from _match_unordered(list(p.args), list(t.args), free, sigma)
    else:
        yield from _match_seq(p.args, t.args, 0, free, sigma)


def _match_seq(ps, ts, i, free, sigma):
    if i == len(ps):
        yield sigma
        return
    for s in _match_gen(ps[i], ts[i], free, sigma):
        yield from _match_seq(ps, ts, i + 1, free, s)


def _match_unordered(ps: list, ts: list, free, sigma):
    if not ps:
        yield sigma
        return
    p, rest = ps[0], ps[1:]
    tried = set()
    for j, t in enumerate(ts):
        if t in tried:
            continue
        tried.add(t)
        for s in _match_gen(p, t, free, sigma):
            yield from _match_unordered(rest, ts[:j] + ts[j + 1:], free, s)


def match(pattern: Term, target: Term, free_vars) -> dict | None:
    """One-way matching modulo canonical form.

    Variables in ``free_vars`` may bind to any term; every other variable
    matches only itself.  The returned substitution always satisfies
    ``substitute(pattern, sigma) == target``.
    """
    free = frozenset(free_vars)
    for sigma in _match_gen(pattern, target, free, {}):
        if substitute(pattern, sigma) == target:
            return sigma
    return None


# ---------------------------------------------------------------------------
# Evaluation


class UnboundVariable(LookupError):
    pass


class UndefinedFunction(LookupError):
    pass


class EvalDivisionByZero(ZeroDivisionError):
    pass


def evaluate(t: Term, env: Mapping[str, Fraction] | None = None, defs: Mapping | None = None) -> Fraction:
    """Exact value of ``t`` under an assignment.

    ``defs`` maps function names to objects with ``params`` and ``body``.
    Raises :class:`UnboundVariable`, :class:`UndefinedFunction` or
    :class:`EvalDivisionByZero`.
    """
    env = env or {}
    if isinstance(t, Const):
        return t.value
    if isinstance(t, Var):
        try:
            return env[t.name]
        except KeyError:
            raise UnboundVariable(t.name) from None
    vals = [evaluate(a, env, defs) for a in t.args]
    if isinstance(t, Call):
        fdef = (defs or {}).get(t.fn)
        if fdef is None:
            raise UndefinedFunction(t.fn)
        return evaluate(fdef.body, dict(zip(fdef.params, vals)), defs)
    op = t.op
    if op == "+":
        return sum(vals, Fraction(0))
    if op == "*":
        out = Fraction(1)
        for v in vals:
            out *= v
        return out
    if op == "neg":
        return -vals[0]
    if op == "-":
        return vals[0] - sum(vals[1:], Fraction(0)) if len(vals) > 1 else -vals[0]
    if op in ("recip", "/"):
        if len(vals) == 1:
            vals = [Fraction(1)] + vals
        out = vals[0]
        for v in vals[1:]:
            if v == 0:
                raise EvalDivisionByZero(term_str(t))
            out /= v
        return out
    raise ValueError(f"unknown operator {op!r}")


def eval_ground(t: Term, defs: Mapping | None = None) -> Fraction | None:
    """Value of a ground term, or None when ``t`` has variables or unknown calls.

    Division by zero propagates as :class:`EvalDivisionByZero`.
    """
    try:
        return evaluate(t, {}, defs)
    except (UnboundVariable, UndefinedFunction):
        return None


def is_ground(t: Term) -> bool:
    return not term_vars(t)


def all_subterms(t: Term) -> Iterator[Term]:
    yield t
    if isinstance(t, (App, Call)):
        for a in t.args:
            yield from all_subterms(a)


__all__ = [
    "App", "Call", "Const", "Var", "Term", "SList", "Sym", "TermSyntaxError",
    "parse_term", "read_sexpr", "read_sexprs", "term_from_sexpr", "term_str",
    "normalize", "distribute", "match", "substitute", "substitute_raw",
    "evaluate", "eval_ground", "term_vars", "term_calls", "term_key", "term_lt",
    "positions", "subterm_at", "replace_at", "is_ground", "const",
    "EvalDivisionByZero", "UnboundVariable", "UndefinedFunction",
]

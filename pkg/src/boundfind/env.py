"""Hypotheses: atoms, conjunction parsing and per-variable environments."""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Optional

from .interval import TOP, Interval, iv_integral, iv_meet
from .term import (
    App, Const, EvalDivisionByZero, Term, TermSyntaxError, Var, eval_ground, normalize,
    read_sexpr, substitute, term_from_sexpr, term_str, term_vars,
)
from .typeset import ALL, TS, ts_of_range

RELATIONS = ("<=", "<", "=")
RECOGNIZERS = ("rationalp", "integerp")


class HypError(ValueError):
    pass


@dataclass(frozen=True)
class Atom:
    """A normalized hypothesis literal.

    ``rel`` is ``<=``, ``<`` or ``=`` with two term arguments, or a
    recognizer (``rationalp`` / ``integerp``) with one.
    """

    rel: str
    args: tuple

    def __str__(self) -> str:
        return "(" + " ".join([self.rel] + [term_str(a) for a in self.args]) + ")"

    def substitute(self, sigma) -> "Atom":
        return Atom(self.rel, tuple(substitute(a, sigma) for a in self.args))

    @property
    def vars(self) -> frozenset:
        out = frozenset()
        for a in self.args:
            out |= term_vars(a)
        return out


def make_atom(rel: str, *args: Term) -> Atom:
    args = tuple(normalize(a) for a in args)
    if rel in (">=", ">"):
        return Atom("<=" if rel == ">=" else "<", (args[1], args[0]))
    if rel == "equal":
        rel = "="
    return Atom(rel, args)


def _where(sx):
    return getattr(sx, "line", None), getattr(sx, "col", None)


def atoms_from_sexpr(sx) -> list[Atom]:
    """Flatten a conjunction into atoms.  ``t`` contributes nothing."""
    if isinstance(sx, str):
        if sx in ("t", "true"):
            return []
        raise HypError(f"unrecognized hypothesis atom {sx!r}")
    if not sx or not isinstance(sx[0], str):
        raise HypError(f"unrecognized hypothesis form {sx!r}")
    head = str(sx[0])
    if head == "and":
        out = []
        for part in sx[1:]:
            out.extend(atoms_from_sexpr(part))
        return out
    if head == "not" and len(sx) == 2 and not isinstance(sx[1], str) and sx[1]:
        inner = str(sx[1][0])
        flipped = {"<": ">=", "<=": ">", ">": "<=", ">=": "<"}.get(inner)
        if flipped is not None and len(sx[1]) == 3:
            return [make_atom(flipped, _term(sx[1][1]), _term(sx[1][2]))]
    if head in ("<=", "<", ">=", ">", "=", "equal"):
        if len(sx) != 3:
            raise HypError(f"relation {head} takes two arguments")
        return [make_atom(head, _term(sx[1]), _term(sx[2]))]
    if head in RECOGNIZERS:
        if len(sx) != 2:
            raise HypError(f"recognizer {head} takes one argument")
        return [make_atom(head, _term(sx[1]))]
    line, col = _where(sx)
    where = f" at {line}:{col}" if line else ""
    raise HypError(f"unrecognized hypothesis form ({head} ...){where}")


def _term(sx) -> Term:
    try:
        return term_from_sexpr(sx)
    except TermSyntaxError as e:
        raise HypError(str(e)) from e


def parse_hyp(text: str) -> list[Atom]:
    return atoms_from_sexpr(read_sexpr(text))


@dataclass
class HypEnv:
    decls: dict = field(default_factory=dict)
    ranges: dict = field(default_factory=dict)
    conjuncts: tuple = ()

    def declared(self, name: str) -> str | None:
        return self.decls.get(name)

    def range_of(self, name: str) -> Interval:
        rng = self.ranges.get(name, TOP)
        if self.decls.get(name) == "integer":
            return iv_integral(rng)
        return rng

    def var_ts(self, name: str) -> TS:
        decl = self.decls.get(name)
        if decl is None:
            return ALL
        return ts_of_range(self.range_of(name), decl == "integer")

    def strengthen(self, name: str, segment: Interval) -> "HypEnv":
        """Environment with ``name`` further restricted to ``segment``.

        Raises :class:`HypError` if the restriction is empty.
        """
        try:
            rng = iv_meet(self.ranges.get(name, TOP), segment)
            if self.decls.get(name) == "integer":
                iv_integral(rng)
        except ValueError as e:
            raise HypError(f"case for {name} is vacuous: {e}") from None
        ranges = dict(self.ranges)
        ranges[name] = rng
        extra = []
        if segment.lo is not None:
            extra.append(make_atom("<=", Const(segment.lo), Var(name)))
        if segment.hi is not None:
            extra.append(make_atom("<=", Var(name), Const(segment.hi)))
        return HypEnv(dict(self.decls), ranges, self.conjuncts + tuple(extra))


def env_from_atoms(atoms: Iterable[Atom]) -> HypEnv:
    atoms = tuple(atoms)
    decls: dict = {}
    ranges: dict = {}
    bounded: list = []

    def tighten(name, lo=None, hi=None):
        cur = ranges.get(name, TOP)
        new_lo = cur.lo if lo is None else lo if cur.lo is None else max(cur.lo, lo)
        new_hi = cur.hi if hi is None else hi if cur.hi is None else min(cur.hi, hi)
        if new_lo is not None and new_hi is not None and new_lo > new_hi:
            raise HypError(f"contradictory bounds on {name}: [{new_lo}, {new_hi}]")
        ranges[name] = Interval(new_lo, new_hi)
        bounded.append(name)

    for atom in atoms:
        if atom.rel in RECOGNIZERS:
            (arg,) = atom.args
            if isinstance(arg, Var):
                if atom.rel == "integerp" or decls.get(arg.name) != "integer":
                    decls[arg.name] = "integer" if atom.rel == "integerp" else "rational"
            continue
        left, right = atom.args
        lv, rv = _ground_value(left), _ground_value(right)
        if isinstance(left, Var) and rv is not None:
            if atom.rel == "=":
                tighten(left.name, rv, rv)
            else:
                tighten(left.name, hi=rv)
        elif isinstance(right, Var) and lv is not None:
            if atom.rel == "=":
                tighten(right.name, lv, lv)
            else:
                tighten(right.name, lo=lv)
        # other atoms are kept only for syntactic lookup
    for name in bounded:
        if name not in decls:
            raise HypError(f"variable {name} is bounded but never declared rationalp/integerp")
    for name, decl in decls.items():
        if decl == "integer" and name in ranges:
            try:
                iv_integral(ranges[name])
            except ValueError:
                raise HypError(f"no integer satisfies the bounds on {name}") from None
    return HypEnv(decls, ranges, atoms)


def env_from_hyp(hyp) -> HypEnv:
    """Build a :class:`HypEnv` from hypothesis text, an s-expression or atoms."""
    if isinstance(hyp, str):
        atoms = parse_hyp(hyp)
    elif isinstance(hyp, (list, tuple)) and all(isinstance(a, Atom) for a in hyp):
        atoms = list(hyp)
    else:
        atoms = atoms_from_sexpr(hyp)
    return env_from_atoms(atoms)


# ---------------------------------------------------------------------------
# Syntactic entailment and ground truth


def _ground_value(t: Term) -> Optional[Fraction]:
    if term_vars(t):
        return None
    try:
        return eval_ground(t)
    except EvalDivisionByZero:
        return None


def _one_sided_facts(atom: Atom):
    """Read a one-sided fact ``(term, side, value, strict)`` off an atom."""
    if atom.rel not in ("<=", "<", "="):
        return []
    a, b = atom.args
    strict = atom.rel == "<"
    out = []
    av, bv = _ground_value(a), _ground_value(b)
    if bv is not None and av is None:
        out.append((a, "upper", bv, strict))
        if atom.rel == "=":
            out.append((a, "lower", bv, False))
    if av is not None and bv is None:
        out.append((b, "lower", av, strict))
        if atom.rel == "=":
            out.append((b, "upper", av, False))
    return out


def atom_implies(known: Atom, goal: Atom) -> bool:
    """Does hypothesis ``known`` syntactically entail ``goal``?

    Besides identity, a one-sided fact about a term entails any weaker
    one-sided fact about the same term.
    """
    if known == goal:
        return True
    goal_facts = _one_sided_facts(goal)
    if not goal_facts:
        return False
    known_facts = _one_sided_facts(known)
    for gt, gside, gval, gstrict in goal_facts:
        ok = False
        for kt, kside, kval, kstrict in known_facts:
            if kt != gt or kside != gside:
                continue
            tighter = kval < gval if gside == "upper" else kval > gval
            if tighter or (kval == gval and (kstrict or not gstrict)):
                ok = True
                break
        if not ok:
            return False
    return True


def ground_truth(atom: Atom, defs=None) -> Optional[bool]:
    """Truth value of a ground atom, or None if it is not ground."""
    try:
        vals = [eval_ground(a, defs) for a in atom.args]
    except EvalDivisionByZero:
        return None
    if any(v is None for v in vals):
        return None
    if atom.rel == "rationalp":
        return True
    if atom.rel == "integerp":
        return vals[0].denominator == 1
    a, b = vals
    return {"<=": a <= b, "<": a < b, "=": a == b}[atom.rel]


def bound_obligations(atom: Atom) -> list:
    """Terms whose bounds decide an inequality atom, with the test to apply.

    Returns a list of ``(term, check)`` where ``check(interval)`` says
    whether that bound establishes the atom; all must hold.  Shared with
    the certificate checker so both sides bound the same terms.
    """
    if atom.rel not in ("<=", "<", "="):
        return []
    a, b = atom.args
    av, bv = _ground_value(a), _ground_value(b)
    strict = atom.rel == "<"

    def upper(c):
        return lambda iv: iv.hi is not None and (iv.hi < c if strict else iv.hi <= c)

    def lower(c):
        return lambda iv: iv.lo is not None and (iv.lo > c if strict else iv.lo >= c)

    if atom.rel == "=":
        if bv is not None and av is None:
            return [(a, lambda iv: iv.lo == bv and iv.hi == bv)]
        if av is not None and bv is None:
            return [(b, lambda iv: iv.lo == av and iv.hi == av)]
        diff = normalize(App("-", (a, b)))
        return [(diff, lambda iv: iv.lo == 0 and iv.hi == 0)]
    if bv is not None and av is None:
        return [(a, upper(bv))]
    if av is not None and bv is None:
        return [(b, lower(av))]
    diff = normalize(App("-", (a, b)))
    return [(diff, upper(Fraction(0)))]

"""Proven interval bounds for arithmetic terms under hypotheses.

Typical use::

    from boundfind import load_problem_file, solve, build_cert, check_cert

    for problem in load_problem_file("foo.lisp"):
        result = solve(problem)
        print(problem.name, result.bounds)
        assert check_cert(problem, build_cert(problem, result))
"""

from .bounder import Bounder, LinearRule, Suggestion, bound_term
from .cases import BoundsResult, CaseSpec, Config, Problem, gen_cases, solve
from .cert import Verdict, build_cert, check_cert
from .dsl import ProblemSyntaxError, load_problem_file, load_problem_text
from .env import HypEnv, env_from_hyp
from .interval import TOP, Interval
from .rational import rat_parse, rat_str
from .term import normalize, parse_term, term_str

__all__ = [
    "Bounder", "LinearRule", "Suggestion", "bound_term",
    "BoundsResult", "CaseSpec", "Config", "Problem", "gen_cases", "solve",
    "Verdict", "build_cert", "check_cert",
    "ProblemSyntaxError", "load_problem_file", "load_problem_text",
    "HypEnv", "env_from_hyp", "TOP", "Interval",
    "rat_parse", "rat_str", "normalize", "parse_term", "term_str",
]

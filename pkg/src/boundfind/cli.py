"""Command-line interface: ``boundfind solve`` and ``boundfind check``."""

from __future__ import annotations

import argparse
import json
import logging
import sys

from .bounder import DEFAULT_DEPTH
from .cases import DEFAULT_CASE_CAP, CaseError, Config, solve
from .cert import FORMAT, build_cert, check_cert
from .dsl import ProblemSyntaxError, load_problem_file
from .env import HypError
from .rewrite import DEFAULT_MAX_STEPS, RewriteError
from .term import term_str

BUNDLE_FORMAT = "boundfind-certificate-bundle/1"

EXIT_OK, EXIT_FAILED, EXIT_ERROR = 0, 1, 2


def _positive(text: str) -> int:
    try:
        n = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {text!r}") from None
    if n <= 0:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {text!r}")
    return n


def _natural(text: str) -> int:
    try:
        n = int(text)
    except ValueError:
        n = -1
    if n < 0:
        raise argparse.ArgumentTypeError(f"expected a natural number, got {text!r}")
    return n


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="boundfind", description="Find and certify bounds of arithmetic terms.")
    sub = ap.add_subparsers(dest="command", required=True)

    s = sub.add_parser("solve", help="bound every def-bounds problem in a file")
    s.add_argument("file")
    s.add_argument("--json", action="store_true", help="machine-readable report")
    s.add_argument("--explain", action="store_true", help="print rewrite steps and bound trace trees")
    s.add_argument("--cert", metavar="OUT", help="write a certificate bundle to OUT")
    s.add_argument("--backchain-depth", type=_natural, metavar="N",
                   help=f"hypothesis backchaining depth (default {DEFAULT_DEPTH})")
    s.add_argument("--max-rewrite-steps", type=_positive, metavar="N",
                   help=f"rewrite budget per phase (default {DEFAULT_MAX_STEPS})")
    s.add_argument("--case-cap", type=_positive, metavar="N",
                   help=f"maximum number of cases per problem (default {DEFAULT_CASE_CAP})")
    s.add_argument("--no-timings", action="store_true", help="omit timings from the JSON report")

    c = sub.add_parser("check", help="verify a certificate against a problem file")
    c.add_argument("file")
    c.add_argument("cert")
    return ap


def _iv_json(iv):
    return None if iv is None else iv.to_json()


def problem_report(p, r) -> dict:
    return {
        "name": p.name,
        "bounds": r.bounds.to_json(),
        "per_case": [
            {"case": {v: seg.to_json() for v, seg in c.segments.items()}, "bounds": _iv_json(c.bounds)}
            for c in r.per_case
        ],
        "rewritten_goal": term_str(r.rewritten_goal),
        "rewrite_steps": len(r.rewrite_log.steps),
        "exhausted_phases": list(r.rewrite_log.exhausted),
        "diagnostics": list(r.diagnostics),
    }


def _source_summary(s) -> str:
    label = s.kind
    if s.kind == "operator":
        label += " " + {"recip": "/"}.get(s.info["op"], s.info["op"])
    elif s.kind == "linear":
        label += " " + s.info["name"]
    elif s.kind == "suggestion":
        label += f" #{s.info['index']}"
    elif s.kind == "typeset":
        label += " {" + ", ".join(s.info["typeset"]) + "}"
    return f"{label} {s.bounds}"


def explain_trace(trace, indent: int = 0, out=None) -> list[str]:
    out = [] if out is None else out
    pad = "  " * indent
    out.append(f"{pad}{term_str(trace.term)}: {trace.result}")
    for s in trace.sources:
        out.append(f"{pad}  <- {_source_summary(s)}")
        for pf in s.proofs:
            out.append(f"{pad}     proved {pf.atom} by {pf.method}")
            for t in pf.traces:
                explain_trace(t, indent + 3, out)
        for c in s.children:
            explain_trace(c, indent + 2, out)
    return out


def explain(p, r) -> list[str]:
    lines = [f"{p.name}: goal {term_str(r.rewritten_goal)}"]
    for st in r.rewrite_log.steps:
        path = "/".join(map(str, st.path)) or "root"
        lines.append(f"  phase {st.phase}: {st.kind} {st.name} at {path} -> {term_str(st.after)}")
    for i in r.rewrite_log.exhausted:
        lines.append(f"  phase {i}: rewrite budget exhausted")
    for c in r.per_case:
        if c.segments:
            desc = ", ".join(f"{v} in {seg}" for v, seg in c.segments.items())
            lines.append(f"  case {desc}:" + (" vacuous" if c.vacuous else ""))
        if c.trace is not None:
            explain_trace(c.trace, 2, lines)
    return lines


def cmd_solve(args) -> int:
    defaults = Config(
        backchain_depth=DEFAULT_DEPTH if args.backchain_depth is None else args.backchain_depth,
        max_rewrite_steps=args.max_rewrite_steps or DEFAULT_MAX_STEPS,
        case_cap=args.case_cap or DEFAULT_CASE_CAP,
    )
    try:
        problems = load_problem_file(args.file, defaults)
    except (OSError, ProblemSyntaxError) as e:
        print(f"error: {args.file}: {e}", file=sys.stderr)
        return EXIT_ERROR
    reports, timings, certs = [], {}, []
    for p in problems:
        try:
            r = solve(p)
        except (HypError, CaseError, RewriteError) as e:
            print(f"error: {p.name}: {e}", file=sys.stderr)
            return EXIT_ERROR
        for d in r.diagnostics:
            print(f"note: {p.name}: {d}", file=sys.stderr)
        for i in r.rewrite_log.exhausted:
            print(f"warning: {p.name}: rewrite budget exhausted in phase {i}", file=sys.stderr)
        if args.json:
            reports.append(problem_report(p, r))
            timings[p.name] = {k: round(v, 6) for k, v in r.timings.items()}
        else:
            print(f"{p.name}: {r.bounds}")
            if args.explain:
                print("\n".join(explain(p, r)))
        if args.cert:
            certs.append(build_cert(p, r))
    if args.json:
        doc = {"problems": reports}
        if not args.no_timings:
            doc["timings"] = timings
        print(json.dumps(doc, indent=2))
    if args.cert:
        bundle = {"format": BUNDLE_FORMAT, "certificates": certs}
        try:
            with open(args.cert, "w") as fh:
                json.dump(bundle, fh, indent=1)
                fh.write("\n")
        except OSError as e:
            print(f"error: cannot write certificate: {e}", file=sys.stderr)
            return EXIT_ERROR
    return EXIT_OK


def _certificates(doc) -> list:
    if isinstance(doc, dict) and doc.get("format") == BUNDLE_FORMAT:
        return list(doc.get("certificates", []))
    if isinstance(doc, dict) and doc.get("format") == FORMAT:
        return [doc]
    raise ValueError("not a certificate or certificate bundle")


def cmd_check(args) -> int:
    try:
        problems = load_problem_file(args.file)
    except (OSError, ProblemSyntaxError) as e:
        print(f"error: {args.file}: {e}", file=sys.stderr)
        return EXIT_ERROR
    try:
        with open(args.cert) as fh:
            certs = _certificates(json.load(fh))
    except (OSError, ValueError) as e:
        print(f"error: {args.cert}: {e}", file=sys.stderr)
        return EXIT_ERROR
    if not certs:
        print("fail: certificate bundle is empty", file=sys.stderr)
        return EXIT_FAILED
    by_name = {p.name: p for p in problems}
    status = EXIT_OK
    for cert in certs:
        name = cert.get("problem") if isinstance(cert, dict) else None
        p = by_name.get(name)
        if p is None and len(problems) == 1:
            p = problems[0]  # let the digest comparison explain the mismatch
        if p is None:
            print(f"fail: {name}: no such problem in {args.file}")
            status = EXIT_FAILED
            continue
        verdict = check_cert(p, cert)
        if verdict.ok:
            print(f"ok: {p.name}")
        else:
            print(f"fail: {p.name}: at {verdict.location}: {verdict.reason}")
            status = EXIT_FAILED
    return status


def main(argv=None) -> int:
    logging.basicConfig(level=logging.WARNING, format="%(levelname)s: %(message)s")
    args = build_parser().parse_args(argv)
    if args.command == "solve":
        return cmd_solve(args)
    return cmd_check(args)


if __name__ == "__main__":
    sys.exit(main())

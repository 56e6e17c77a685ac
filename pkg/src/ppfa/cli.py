"""Command-line interface.

Exit status: 0 on success (or a refinement that holds), 1 when a check finds
a counterexample, 2 on usage, parse or validation errors.
"""

from __future__ import annotations

import argparse
import json
import re
import sys
from pathlib import Path

from .automata import AutomatonError, Fa, Pfa, normal_form, validate_pfa
from .dsl import DslError, compile_program, parse_program, render_program
from .fileio import FormatError, read_automaton, write_automaton
from .galois import embed, forget, galois_corpus
from .operators import pfa_internal, pfa_prob_choice
from .refinement import ContextError, enumerate_contexts, fa_refines, pfa_refines
from .semantics import complete_trace_dist, fa_complete_traces, fa_traces, render_distribution, render_trace
from .terms import ONE, TermError, const_prob

USER_ERRORS = (DslError, FormatError, AutomatonError, TermError, ContextError, OSError, ValueError)


class UsageError(ValueError):
    pass


def _read(path: str) -> str:
    if path == "-":
        return sys.stdin.read()
    return Path(path).read_text()


def _is_automaton_file(text: str) -> bool:
    return re.search(r"^kind\s*:", text, re.MULTILINE) is not None


def load_any(path: str) -> Fa | Pfa:
    """An automaton file as is, or a process file elaborated to a PPFA."""
    text = _read(path)
    if _is_automaton_file(text):
        return read_automaton(text)
    return compile_program(text)


def load_pfa(path: str) -> Pfa:
    x = load_any(path)
    return embed(x) if isinstance(x, Fa) else x


def _actions(text: str) -> list:
    out = [a.strip() for a in text.split(",") if a.strip()]
    for a in out:
        if not re.fullmatch(r"[A-Za-z_][A-Za-z0-9_]*", a):
            raise UsageError(f"bad action name {a!r}")
    return out


def _sync(arg: str | None, a, b):
    if arg is None:
        return None
    if arg == "auto":
        return a.alphabet & b.alphabet
    return frozenset(_actions(arg))


# ---------------------------------------------------------------------------
# subcommands


def cmd_parse(args, out) -> int:
    out.write(render_program(parse_program(_read(args.file))))
    return 0


def cmd_compile(args, out) -> int:
    out.write(write_automaton(load_any(args.file)))
    return 0


def cmd_dist(args, out) -> int:
    dc = complete_trace_dist(load_pfa(args.file))
    if args.grid is None:
        out.write(dc.render() + "\n")
        return 0
    for psi in dc.grid(args.grid):
        shown = ", ".join(f"{k}={v}" for k, v in psi.items()) or "(no parameters)"
        out.write(f"{shown}: {render_distribution(dc.instantiate(psi))}\n")
    return 0


def cmd_traces(args, out) -> int:
    x = load_any(args.file)
    fa = x if isinstance(x, Fa) else forget(x)
    out.write("traces:\n")
    out.writelines(f"  {render_trace(t)}\n" for t in sorted(fa_traces(fa)))
    out.write("complete traces:\n")
    out.writelines(f"  {render_trace(t)}\n" for t in sorted(fa_complete_traces(fa)))
    return 0


def _refine(spec, impl, args):
    sync = _sync(args.sync, spec, impl)
    if isinstance(spec, Fa) and isinstance(impl, Fa):
        return fa_refines(spec, impl, args.depth, sync, args.limit)
    spec = embed(spec) if isinstance(spec, Fa) else spec
    impl = embed(impl) if isinstance(impl, Fa) else impl
    return pfa_refines(spec, impl, args.depth, args.grid, sync, args.limit)


def cmd_refine(args, out) -> int:
    v = _refine(load_any(args.spec), load_any(args.impl), args)
    out.write((json.dumps(v.to_dict(), indent=2) if args.json else v.render()) + "\n")
    return 0 if v.refines else 1


def cmd_equal(args, out) -> int:
    a, b = load_any(args.a), load_any(args.b)
    forward = _refine(a, b, args)
    if not forward.refines:
        out.write(f"not equal: {args.b} does not refine {args.a}\n{forward.render()}\n")
        return 1
    backward = _refine(b, a, args)
    if not backward.refines:
        out.write(f"not equal: {args.a} does not refine {args.b}\n{backward.render()}\n")
        return 1
    out.write(f"equal (bounded evidence: depth {args.depth}, grid {args.grid}, {forward.contexts_checked} contexts)\n")
    return 0


def cmd_embed(args, out) -> int:
    x = load_any(args.file)
    if not isinstance(x, Fa):
        raise UsageError("embed expects an FA file")
    out.write(write_automaton(embed(x)))
    return 0


def cmd_forget(args, out) -> int:
    x = load_any(args.file)
    if not isinstance(x, Pfa):
        raise UsageError("forget expects a PPFA file or a process file")
    out.write(write_automaton(forget(x)))
    return 0


def cmd_normal(args, out) -> int:
    out.write(write_automaton(normal_form(load_pfa(args.file))))
    return 0


def law_checks(p: Pfa, depth: int, g: int) -> list:
    """``(name, ok, detail)`` for the algebraic laws applied to ``p``."""
    results = []

    def equal(name, q):
        fwd = pfa_refines(p, q, depth, g)
        bwd = pfa_refines(q, p, depth, g) if fwd.refines else None
        ok = fwd.refines and bwd.refines
        bad = fwd if not fwd.refines else bwd
        results.append((name, ok, "" if ok else bad.render()))

    equal("internal choice idempotent (P |~| P = P)", pfa_internal(p, p))
    equal("probabilistic choice idempotent (P +[1/2] P = P)", pfa_prob_choice(p, p, const_prob("1/2")))
    equal("normal form equivalent (choices migrated to the start)", normal_form(p))
    dc = complete_trace_dist(p)
    total = dc.total()
    results.append(("complete-trace mass is 1 symbolically", total == ONE, f"sum = {total}"))
    bad = None
    for psi in dc.grid(g):
        vals = dc.instantiate(psi)
        if any(v < 0 for v in vals.values()) or sum(vals.values()) != 1:
            bad = psi
            break
    results.append(("every grid instance is a distribution", bad is None, f"psi = {bad}"))
    return results


def cmd_laws(args, out) -> int:
    p = load_pfa(args.file)
    problems = validate_pfa(p, args.grid)
    if problems:
        raise AutomatonError("; ".join(problems))
    ok_all = True
    for name, ok, detail in law_checks(p, args.depth, args.grid):
        ok_all &= ok
        out.write(f"{'PASS' if ok else 'FAIL'}  {name}\n")
        if not ok:
            out.write("      " + detail.replace("\n", "\n      ") + "\n")
    return 0 if ok_all else 1


def cmd_galois(args, out) -> int:
    report = galois_corpus(args.seed, args.count, args.depth, args.grid)
    out.write(report.render() + "\n")
    return 0 if not report.failures else 1


def cmd_contexts(args, out) -> int:
    alphabet = _actions(args.alphabet)
    for x in enumerate_contexts(alphabet, args.depth, limit=args.limit):
        out.write(f"{x.index}: {x.render()}\n")
    return 0


# ---------------------------------------------------------------------------


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise UsageError(message)


def _nonneg(text: str) -> int:
    v = int(text)
    if v < 0:
        raise argparse.ArgumentTypeError("must be a non-negative integer")
    return v


def _positive(text: str) -> int:
    v = int(text)
    if v < 1:
        raise argparse.ArgumentTypeError("must be a positive integer")
    return v


def build_parser() -> argparse.ArgumentParser:
    ap = _Parser(prog="ppfa", description="Probabilistic automata: composition, testing refinement, FA/PPFA translation.")
    sub = ap.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def bounds(p, grid=4):
        p.add_argument("--depth", type=_nonneg, default=2, help="maximum test-context depth (default 2)")
        p.add_argument("--grid", type=_positive, default=grid, help=f"parameter grid granularity 1/G (default {grid})")

    p = sub.add_parser("parse", help="echo the canonical form of a process file")
    p.add_argument("file")
    p.set_defaults(run=cmd_parse)

    p = sub.add_parser("compile", help="emit the automaton file of a process")
    p.add_argument("file")
    p.set_defaults(run=cmd_compile)

    p = sub.add_parser("dist", help="complete-trace distribution")
    p.add_argument("file")
    p.add_argument("--grid", type=_positive, default=None, help="instantiate on the 1/G grid")
    p.set_defaults(run=cmd_dist)

    p = sub.add_parser("traces", help="traces and complete traces of the underlying FA")
    p.add_argument("file")
    p.set_defaults(run=cmd_traces)

    for name, fn, helptext, args in (
        ("refine", cmd_refine, "check that IMPL refines SPEC", ("spec", "impl")),
        ("equal", cmd_equal, "check testing equivalence", ("a", "b")),
    ):
        p = sub.add_parser(name, help=helptext)
        for a in args:
            p.add_argument(a)
        bounds(p)
        p.add_argument("--sync", default=None, help="synchronisation set: comma list, or 'auto' for the shared alphabet (default: all actions)")
        p.add_argument("--limit", type=_positive, default=None, help="cap on the number of contexts")
        if name == "refine":
            p.add_argument("--json", action="store_true", help="machine-readable verdict")
        p.set_defaults(run=fn)

    p = sub.add_parser("embed", help="FA file to PPFA file")
    p.add_argument("file")
    p.set_defaults(run=cmd_embed)

    p = sub.add_parser("forget", help="PPFA (or process) file to FA file")
    p.add_argument("file")
    p.set_defaults(run=cmd_forget)

    p = sub.add_parser("laws", help="idempotence, migration and normalisation checks")
    p.add_argument("file")
    bounds(p)
    p.set_defaults(run=cmd_laws)

    p = sub.add_parser("galois", help="adjunction report on a seeded corpus")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--count", type=_nonneg, default=100)
    bounds(p, grid=2)
    p.set_defaults(run=cmd_galois)

    p = sub.add_parser("contexts", help="list deterministic test contexts")
    p.add_argument("--alphabet", required=True, help="comma-separated actions")
    p.add_argument("--depth", type=_nonneg, default=2)
    p.add_argument("--limit", type=_positive, default=None)
    p.set_defaults(run=cmd_contexts)

    p = sub.add_parser("normal", help="normal form with every choice moved to the start")
    p.add_argument("file")
    p.set_defaults(run=cmd_normal)
    return ap


def main(argv=None, out=None, err=None) -> int:
    out = out or sys.stdout
    err = err or sys.stderr
    try:
        args = build_parser().parse_args(argv)
        return args.run(args, out)
    except SystemExit as e:  # --help
        return 0 if e.code in (0, None) else 2
    except UsageError as e:
        err.write(f"ppfa: error: {e}\n")
        return 2
    except USER_ERRORS as e:
        err.write(f"ppfa: {type(e).__name__}: {e}\n")
        return 2


if __name__ == "__main__":
    sys.exit(main())

"""A small process language and its elaboration into PPFA.

Syntax, from loosest to tightest binding (binary operators associate left)::

    P |~| Q         internal choice
    P +[p] Q        probabilistic choice, p a probability expression
    P [] Q          external choice
    P ||{a,b} Q     parallel composition synchronising on a, b
    a.P             prefix
    stop, (P), Name

A file is a list of definitions ``Name = expr``; ``main`` is the entry
point.  A file holding a single bare expression is read as ``main``.
Comments run from ``#`` to the end of the line.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field

from .automata import TAU, AutomatonError, Pfa
from .operators import pfa_external, pfa_internal, pfa_parallel, pfa_prefix, pfa_prob_choice, pfa_stop
from .terms import DEFAULT_REGISTRY, Registry, SymProb, TermError, parse_prob, render_prob

MAIN = "main"


class DslError(ValueError):
    def __init__(self, message: str, line: int | None = None, col: int | None = None):
        self.line, self.col = line, col
        where = f"{line}:{col}: " if line is not None else ""
        super().__init__(where + message)


# ---------------------------------------------------------------------------
# AST

Pos = tuple  # (line, column), 1-based


@dataclass(frozen=True)
class Stop:
    pos: Pos | None = field(default=None, compare=False, repr=False)


@dataclass(frozen=True)
class Prefix:
    action: str
    body: object
    pos: Pos | None = field(default=None, compare=False, repr=False)


@dataclass(frozen=True)
class Internal:
    left: object
    right: object
    pos: Pos | None = field(default=None, compare=False, repr=False)


@dataclass(frozen=True)
class Prob:
    left: object
    right: object
    prob: SymProb
    pos: Pos | None = field(default=None, compare=False, repr=False)


@dataclass(frozen=True)
class External:
    left: object
    right: object
    pos: Pos | None = field(default=None, compare=False, repr=False)


@dataclass(frozen=True)
class Parallel:
    left: object
    right: object
    sync: frozenset
    pos: Pos | None = field(default=None, compare=False, repr=False)


@dataclass(frozen=True)
class Ref:
    name: str
    pos: Pos | None = field(default=None, compare=False, repr=False)


ProcessExpr = Stop | Prefix | Internal | Prob | External | Parallel | Ref


@dataclass
class Program:
    defs: dict  # name -> expr, in file order

    @property
    def main(self):
        return self.defs[MAIN]


# ---------------------------------------------------------------------------
# lexing

_TOKENS = re.compile(
    r"""
    (?P<ws>[ \t\r]+)
  | (?P<comment>\#[^\n]*)
  | (?P<nl>\n)
  | (?P<internal>\|~\|)
  | (?P<par>\|\|\{)
  | (?P<ext>\[\])
  | (?P<prob>\+\[)
  | (?P<ident>[A-Za-z_][A-Za-z0-9_']*)
  | (?P<sym>[.()=,}])
    """,
    re.VERBOSE,
)


@dataclass
class Token:
    kind: str
    text: str
    line: int
    col: int


def tokenize(text: str) -> list:
    out = []
    pos, line, line_start = 0, 1, 0
    while pos < len(text):
        m = _TOKENS.match(text, pos)
        col = pos - line_start + 1
        if not m:
            raise DslError(f"unexpected character {text[pos]!r}", line, col)
        kind = m.lastgroup
        if kind == "nl":
            line += 1
            line_start = m.end()
        elif kind == "prob":
            close = text.find("]", m.end())
            nl = text.find("\n", m.end())
            if close < 0 or (0 <= nl < close):
                raise DslError("unterminated probability '+[...'", line, col)
            out.append(Token("prob", text[m.end() : close], line, col))
            pos = close + 1
            continue
        elif kind not in ("ws", "comment"):
            out.append(Token(m.group() if kind == "sym" else kind, m.group(), line, col))
        pos = m.end()
    out.append(Token("eof", "", line, pos - line_start + 1))
    return out


# ---------------------------------------------------------------------------
# parsing


class _Parser:
    def __init__(self, text: str):
        self.toks = tokenize(text)
        self.i = 0

    @property
    def tok(self) -> Token:
        return self.toks[self.i]

    def peek(self, k: int = 1) -> Token:
        return self.toks[min(self.i + k, len(self.toks) - 1)]

    def take(self) -> Token:
        t = self.toks[self.i]
        self.i += 1
        return t

    def fail(self, msg: str, tok: Token | None = None):
        tok = tok or self.tok
        found = "end of input" if tok.kind == "eof" else repr(tok.text)
        raise DslError(f"{msg}, found {found}", tok.line, tok.col)

    def expect(self, kind: str, what: str) -> Token:
        if self.tok.kind != kind:
            self.fail(f"expected {what}")
        return self.take()

    def at_definition(self) -> bool:
        return self.tok.kind == "ident" and self.peek().kind == "="

    # expr := internal
    def expr(self):
        left = self.prob()
        while self.tok.kind == "internal":
            t = self.take()
            left = Internal(left, self.prob(), pos=(t.line, t.col))
        return left

    def prob(self):
        left = self.ext()
        while self.tok.kind == "prob":
            t = self.take()
            try:
                p = parse_prob(t.text)
            except TermError as e:
                raise DslError(f"malformed probability: {e}", t.line, t.col) from None
            left = Prob(left, self.ext(), p, pos=(t.line, t.col))
        return left

    def ext(self):
        left = self.par()
        while self.tok.kind == "ext":
            t = self.take()
            left = External(left, self.par(), pos=(t.line, t.col))
        return left

    def par(self):
        left = self.prefix()
        while self.tok.kind == "par":
            t = self.take()
            sync = set()
            if self.tok.kind != "}":
                while True:
                    a = self.expect("ident", "an action name")
                    self._action_ok(a)
                    sync.add(a.text)
                    if self.tok.kind != ",":
                        break
                    self.take()
            self.expect("}", "'}' closing the synchronisation set")
            left = Parallel(left, self.prefix(), frozenset(sync), pos=(t.line, t.col))
        return left

    def _action_ok(self, t: Token):
        if t.text == TAU:
            raise DslError("the silent action cannot be written", t.line, t.col)
        if "'" in t.text:
            raise DslError(f"bad action name {t.text!r}", t.line, t.col)

    def prefix(self):
        t = self.tok
        if t.kind == "ident" and self.peek().kind == ".":
            self._action_ok(t)
            self.take()
            self.take()
            return Prefix(t.text, self.prefix(), pos=(t.line, t.col))
        return self.atom()

    def atom(self):
        t = self.tok
        if t.kind == "ident":
            self.take()
            if t.text == "stop":
                return Stop(pos=(t.line, t.col))
            if self.tok.kind == "=":
                self.fail("unexpected definition inside an expression", t)
            return Ref(t.text, pos=(t.line, t.col))
        if t.kind == "(":
            self.take()
            e = self.expr()
            self.expect(")", "')'")
            return e
        self.fail("expected a process")

    def program(self) -> Program:
        defs: dict = {}
        if not self.at_definition():
            e = self.expr()
            if self.tok.kind != "eof":
                self.fail("expected end of input")
            return Program({MAIN: e})
        while self.tok.kind != "eof":
            if not self.at_definition():
                self.fail("expected a definition 'Name = ...'")
            name = self.take()
            self.take()
            if name.text in defs:
                raise DslError(f"{name.text!r} is defined twice", name.line, name.col)
            if name.text == "stop":
                raise DslError("'stop' cannot be redefined", name.line, name.col)
            defs[name.text] = self.expr()
            if self.tok.kind not in ("eof", "ident") or (self.tok.kind == "ident" and not self.at_definition()):
                self.fail("expected an operator or a new definition")
        return Program(defs)


def parse_process(text: str):
    """Parse a single expression."""
    p = _Parser(text)
    e = p.expr()
    if p.tok.kind != "eof":
        p.fail("expected end of input")
    return e


def parse_program(text: str, check_refs: bool = True) -> Program:
    prog = _Parser(text).program()
    if check_refs:
        for e in prog.defs.values():
            for ref in refs(e):
                if ref.name not in prog.defs:
                    line, col = ref.pos or (None, None)
                    raise DslError(f"unknown reference {ref.name!r}", line, col)
    return prog


def refs(e) -> list:
    if isinstance(e, Ref):
        return [e]
    if isinstance(e, Stop):
        return []
    if isinstance(e, Prefix):
        return refs(e.body)
    return refs(e.left) + refs(e.right)


# ---------------------------------------------------------------------------
# rendering

_LEVEL = {Internal: 1, Prob: 2, External: 3, Parallel: 4, Prefix: 5}


def _level(e) -> int:
    return _LEVEL.get(type(e), 6)


def render(e) -> str:
    """Canonical text with the fewest parentheses that parse back to ``e``."""

    def wrap(sub, min_level):
        s = render(sub)
        return f"({s})" if _level(sub) < min_level else s

    if isinstance(e, Stop):
        return "stop"
    if isinstance(e, Ref):
        return e.name
    if isinstance(e, Prefix):
        return f"{e.action}.{wrap(e.body, 5)}"
    lvl = _level(e)
    if isinstance(e, Internal):
        op = "|~|"
    elif isinstance(e, Prob):
        op = f"+[{render_prob(e.prob)}]"
    elif isinstance(e, External):
        op = "[]"
    else:
        op = "||{" + ",".join(sorted(e.sync)) + "}"
    return f"{wrap(e.left, lvl)} {op} {wrap(e.right, lvl + 1)}"


def render_program(prog: Program) -> str:
    return "".join(f"{name} = {render(e)}\n" for name, e in prog.defs.items())


# ---------------------------------------------------------------------------
# elaboration


def prob_variables(e) -> set:
    if isinstance(e, (Stop, Ref)):
        return set()
    if isinstance(e, Prefix):
        return prob_variables(e.body)
    out = prob_variables(e.left) | prob_variables(e.right)
    if isinstance(e, Prob):
        out |= e.prob.variables
    return out


def elaborate(e, defs: dict | None = None, registry: Registry | None = None, g: int = 4) -> Pfa:
    """Build the PPFA of ``e``; each definition is built once and reused."""
    defs = defs or {}
    registry = registry or DEFAULT_REGISTRY
    user_vars = set(prob_variables(e))
    for d in defs.values():
        user_vars |= prob_variables(d)
    registry.reserve(user_vars)
    memo: dict = {}
    active: list = []

    def located(node, err):
        line, col = node.pos or (None, None)
        return DslError(str(err), line, col)

    def go(node) -> Pfa:
        if isinstance(node, Stop):
            return pfa_stop()
        if isinstance(node, Ref):
            name = node.name
            if name in memo:
                return memo[name]
            if name not in defs:
                raise located(node, f"unknown reference {name!r}")
            if name in active:
                raise located(node, "recursive definitions are not supported: " + " -> ".join(active + [name]))
            active.append(name)
            memo[name] = go(defs[name])
            active.pop()
            return memo[name]
        try:
            if isinstance(node, Prefix):
                return pfa_prefix(node.action, go(node.body))
            left, right = go(node.left), go(node.right)
            if isinstance(node, Internal):
                return pfa_internal(left, right, registry)
            if isinstance(node, Prob):
                return pfa_prob_choice(left, right, node.prob, g)
            if isinstance(node, External):
                return pfa_external(left, right)
            return pfa_parallel(left, right, node.sync, registry)
        except AutomatonError as err:
            raise located(node, err) from None

    return go(e)


def compile_program(text: str, registry: Registry | None = None, g: int = 4) -> Pfa:
    prog = parse_program(text)
    if MAIN not in prog.defs:
        raise DslError(f"no '{MAIN}' definition")
    return elaborate(prog.main, prog.defs, registry, g)


def compile_process(text: str, defs: dict | None = None, registry: Registry | None = None, g: int = 4) -> Pfa:
    return elaborate(parse_process(text), defs, registry, g)

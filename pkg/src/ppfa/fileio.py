"""Text interchange format for FA and PPFA.

::

    kind: pfa
    nodes:
      n0
      n1
    alphabet:
      a
    start:
      n0 = 1
    trans:
      n0 --a--> {n1: 1}
    vargroups:
      v0 v1

FA files use ``kind: fa``, a bare node per ``start`` line and a bare target
per ``trans`` line (one line per edge).  Lines whose first non-blank
character is ``#`` are comments.  Writing is canonical, so reading a written
file and writing it again reproduces it byte for byte.
"""

from __future__ import annotations

import re
from pathlib import Path

from .automata import TAU, AutomatonError, Fa, Pfa
from .terms import SymProb, TermError, parse_prob, render_prob

SECTIONS = ("nodes", "alphabet", "start", "trans", "vargroups")

_ACTION = re.compile(r"[A-Za-z_][A-Za-z0-9_]*")
_IDENT = re.compile(r"[A-Za-z0-9_]+")
_VAR = re.compile(r"[A-Za-z_][A-Za-z0-9_]*")


class FormatError(ValueError):
    def __init__(self, message: str, line: int | None = None):
        self.line = line
        super().__init__(f"line {line}: {message}" if line is not None else message)


# ---------------------------------------------------------------------------
# writing


def write_fa(a: Fa) -> str:
    lines = ["kind: fa", "nodes:"]
    lines += [f"  {n}" for n in sorted(a.nodes)]
    lines.append("alphabet:")
    lines += [f"  {x}" for x in sorted(a.alphabet)]
    lines.append("start:")
    lines += [f"  {s}" for s in sorted(a.starts)]
    lines.append("trans:")
    lines += [f"  {n} --{x}--> {m}" for n, x, m in sorted(a.transitions)]
    return "\n".join(lines) + "\n"


def _render_dist(d: dict) -> str:
    return "{" + ", ".join(f"{m}: {render_prob(w)}" for m, w in sorted(d.items())) + "}"


def write_pfa(p: Pfa) -> str:
    lines = ["kind: pfa", "nodes:"]
    lines += [f"  {n}" for n in sorted(p.nodes)]
    lines.append("alphabet:")
    lines += [f"  {x}" for x in sorted(p.alphabet)]
    lines.append("start:")
    lines += [f"  {s} = {render_prob(w)}" for s, w in sorted(p.start.items())]
    lines.append("trans:")
    lines += [f"  {n} --{x}--> {_render_dist(d)}" for n, x, d in p.transitions]
    lines.append("vargroups:")
    lines += [f"  {' '.join(grp)}" for grp in p.groups]
    return "\n".join(lines) + "\n"


def write_automaton(x: Fa | Pfa) -> str:
    return write_fa(x) if isinstance(x, Fa) else write_pfa(x)


# ---------------------------------------------------------------------------
# reading


class _Scanner:
    def __init__(self, text: str, line: int):
        self.text = text
        self.pos = 0
        self.line = line

    def fail(self, msg: str):
        raise FormatError(f"{msg} (column {self.pos + 3})", self.line)

    def ws(self):
        while self.pos < len(self.text) and self.text[self.pos] in " \t":
            self.pos += 1

    def at_end(self) -> bool:
        self.ws()
        return self.pos >= len(self.text)

    def expect(self, lit: str):
        self.ws()
        if not self.text.startswith(lit, self.pos):
            self.fail(f"expected {lit!r}")
        self.pos += len(lit)

    def node(self) -> str:
        """``ident | (node,node)`` followed by any ``'`` or ``#k`` suffixes."""
        self.ws()
        start = self.pos
        if self.text.startswith("(", self.pos):
            self.pos += 1
            self.node()
            self.expect(",")
            self.node()
            self.expect(")")
        else:
            m = _IDENT.match(self.text, self.pos)
            if not m:
                self.fail("expected a node name")
            self.pos = m.end()
        while self.pos < len(self.text):
            ch = self.text[self.pos]
            if ch == "'":
                self.pos += 1
            elif ch == "#" and self.pos + 1 < len(self.text) and self.text[self.pos + 1].isdigit():
                self.pos += 1
                while self.pos < len(self.text) and self.text[self.pos].isdigit():
                    self.pos += 1
            else:
                break
        return re.sub(r"\s+", "", self.text[start : self.pos])

    def action(self) -> str:
        m = _ACTION.match(self.text, self.pos)
        if not m:
            self.fail("expected an action name")
        self.pos = m.end()
        return m.group()

    def prob_until(self, stops: str) -> SymProb:
        self.ws()
        start = self.pos
        depth = 0
        while self.pos < len(self.text):
            ch = self.text[self.pos]
            if ch == "(":
                depth += 1
            elif ch == ")":
                depth -= 1
            elif depth == 0 and ch in stops:
                break
            self.pos += 1
        try:
            return parse_prob(self.text[start : self.pos])
        except TermError as e:
            raise FormatError(str(e), self.line) from None


def _split_sections(text: str) -> tuple:
    kind = None
    sections: dict = {}
    current = None
    for lineno, raw in enumerate(text.splitlines(), 1):
        stripped = raw.strip()
        if not stripped or stripped.startswith("#"):
            continue
        if not raw[0].isspace():
            head, sep, rest = stripped.partition(":")
            head = head.strip()
            if not sep:
                raise FormatError(f"expected 'section:' but found {stripped!r}", lineno)
            if head == "kind":
                kind = rest.strip()
                continue
            if head not in SECTIONS:
                raise FormatError(f"unknown section {head!r}", lineno)
            if head in sections:
                raise FormatError(f"section {head!r} appears twice", lineno)
            sections[head] = []
            current = head
            if rest.strip():
                sections[head].append((lineno, rest.strip()))
            continue
        if current is None:
            raise FormatError("entry outside any section", lineno)
        sections[current].append((lineno, stripped))
    return kind, sections


def _read_nodes(entries) -> list:
    out = []
    for lineno, text in entries:
        sc = _Scanner(text, lineno)
        out.append(sc.node())
        if not sc.at_end():
            sc.fail("trailing text after node")
    return out


def _read_alphabet(entries) -> set:
    out = set()
    for lineno, text in entries:
        for tok in text.replace(",", " ").split():
            if not _ACTION.fullmatch(tok) or tok == TAU:
                raise FormatError(f"bad alphabet entry {tok!r}", lineno)
            out.add(tok)
    return out


def _read_arrow(sc: _Scanner) -> tuple:
    src = sc.node()
    sc.expect("--")
    act = sc.action()
    sc.expect("-->")
    return src, act


def _check_alphabet(declared: set | None, used: frozenset, line: int | None):
    if declared is not None and not used <= declared:
        raise FormatError(f"actions {sorted(used - declared)} are not in the alphabet section", line)


def read_fa(text: str) -> Fa:
    kind, sections = _split_sections(text)
    if kind not in (None, "fa"):
        raise FormatError(f"expected an FA file, found kind {kind!r}")
    if "vargroups" in sections and sections["vargroups"]:
        raise FormatError("FA files have no parameters", sections["vargroups"][0][0])
    nodes = _read_nodes(sections.get("nodes", []))
    starts = _read_nodes(sections.get("start", []))
    trans = []
    for lineno, line in sections.get("trans", []):
        sc = _Scanner(line, lineno)
        src, act = _read_arrow(sc)
        dst = sc.node()
        if not sc.at_end():
            sc.fail("trailing text after target")
        trans.append((src, act, dst))
    a = Fa(nodes, starts, trans)
    _check_alphabet(_read_alphabet(sections["alphabet"]) if "alphabet" in sections else None, a.alphabet, None)
    problems = a.validate()
    if problems:
        raise AutomatonError("; ".join(problems))
    return a


def read_pfa(text: str, g: int = 4) -> Pfa:
    kind, sections = _split_sections(text)
    if kind not in (None, "pfa"):
        raise FormatError(f"expected a PPFA file, found kind {kind!r}")
    nodes = _read_nodes(sections.get("nodes", []))
    start = {}
    for lineno, line in sections.get("start", []):
        sc = _Scanner(line, lineno)
        n = sc.node()
        if n in start:
            raise FormatError(f"start node {n} listed twice", lineno)
        sc.expect("=")
        start[n] = sc.prob_until("")
    trans = []
    for lineno, line in sections.get("trans", []):
        sc = _Scanner(line, lineno)
        src, act = _read_arrow(sc)
        sc.expect("{")
        dist: dict = {}
        sc.ws()
        if not sc.text.startswith("}", sc.pos):
            while True:
                m = sc.node()
                if m in dist:
                    sc.fail(f"target {m} listed twice")
                sc.expect(":")
                dist[m] = sc.prob_until(",}")
                sc.ws()
                if sc.text.startswith(",", sc.pos):
                    sc.pos += 1
                    continue
                break
        sc.expect("}")
        if not sc.at_end():
            sc.fail("trailing text after distribution")
        trans.append((src, act, dist))
    groups = []
    for lineno, line in sections.get("vargroups", []):
        grp = tuple(line.replace(",", " ").split())
        for v in grp:
            if not _VAR.fullmatch(v):
                raise FormatError(f"bad variable name {v!r}", lineno)
        groups.append(grp)
    p = Pfa(nodes, start, trans, groups)
    _check_alphabet(_read_alphabet(sections["alphabet"]) if "alphabet" in sections else None, p.alphabet, None)
    p.check(g)
    return p


def file_kind(text: str) -> str:
    kind, _ = _split_sections(text)
    if kind is None:
        raise FormatError("missing 'kind: fa' or 'kind: pfa' line")
    if kind not in ("fa", "pfa"):
        raise FormatError(f"unknown kind {kind!r}")
    return kind


def read_automaton(text: str) -> Fa | Pfa:
    return read_fa(text) if file_kind(text) == "fa" else read_pfa(text)


def load(path: str | Path) -> Fa | Pfa:
    return read_automaton(Path(path).read_text())

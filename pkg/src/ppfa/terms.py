"""Parameterised probability terms.

A term is a multivariate polynomial with exact rational coefficients.  Terms
are immutable and kept in canonical form (no zero coefficients, monomials as
sorted ``(variable, exponent)`` tuples), so structural equality is polynomial
identity.
"""

from __future__ import annotations

import itertools
import re
import threading
from fractions import Fraction
from typing import Iterable, Iterator, Mapping, Sequence, Union

Monomial = tuple  # tuple[tuple[str, int], ...], sorted by variable name
Number = Union[int, Fraction]

_ONE_MONO: Monomial = ()


class TermError(ValueError):
    """Malformed probability expression or bad evaluation request."""


class MissingAssignment(TermError):
    pass


class FreshnessError(ValueError):
    """A supposedly fresh variable name was registered twice."""


def _mono_mul(m1: Monomial, m2: Monomial) -> Monomial:
    if not m1:
        return m2
    if not m2:
        return m1
    exps = dict(m1)
    for var, e in m2:
        exps[var] = exps.get(var, 0) + e
    return tuple(sorted(exps.items()))


class SymProb:
    """Canonical polynomial over parameter names with ``Fraction`` coefficients."""

    __slots__ = ("_terms", "_hash")

    def __init__(self, terms: Mapping[Monomial, Number] | None = None):
        clean = {}
        if terms:
            for mono, coeff in terms.items():
                coeff = Fraction(coeff)
                if coeff:
                    clean[mono] = coeff
        self._terms = clean
        self._hash = None

    @classmethod
    def _raw(cls, terms: dict) -> SymProb:
        obj = cls.__new__(cls)
        obj._terms = terms
        obj._hash = None
        return obj

    # construction -----------------------------------------------------

    @staticmethod
    def coerce(value: SymProb | Number | str) -> SymProb:
        if isinstance(value, SymProb):
            return value
        if isinstance(value, str):
            return parse_prob(value)
        return const_prob(value)

    # inspection -------------------------------------------------------

    @property
    def terms(self) -> dict:
        return dict(self._terms)

    def items(self) -> Iterator[tuple[Monomial, Fraction]]:
        return iter(sorted(self._terms.items()))

    def is_zero(self) -> bool:
        return not self._terms

    def is_constant(self) -> bool:
        return all(not mono for mono in self._terms)

    def constant(self) -> Fraction:
        """Value of a constant term; raises if the term has variables."""
        if not self.is_constant():
            raise TermError(f"term {self} is not constant")
        return self._terms.get(_ONE_MONO, Fraction(0))

    @property
    def variables(self) -> frozenset:
        return frozenset(var for mono in self._terms for var, _ in mono)

    def degree(self) -> int:
        return max((sum(e for _, e in mono) for mono in self._terms), default=0)

    # ring operations --------------------------------------------------

    def __add__(self, other):
        other = _maybe_coerce(other)
        if other is NotImplemented:
            return other
        out = dict(self._terms)
        for mono, coeff in other._terms.items():
            c = out.get(mono, 0) + coeff
            if c:
                out[mono] = c
            else:
                out.pop(mono, None)
        return SymProb._raw(out)

    __radd__ = __add__

    def __neg__(self):
        return SymProb._raw({m: -c for m, c in self._terms.items()})

    def __sub__(self, other):
        other = _maybe_coerce(other)
        if other is NotImplemented:
            return other
        return self + (-other)

    def __rsub__(self, other):
        other = _maybe_coerce(other)
        if other is NotImplemented:
            return other
        return other + (-self)

    def __mul__(self, other):
        other = _maybe_coerce(other)
        if other is NotImplemented:
            return other
        if other._terms == _UNIT:
            return self
        if self._terms == _UNIT:
            return other
        out: dict = {}
        for m1, c1 in self._terms.items():
            for m2, c2 in other._terms.items():
                mono = _mono_mul(m1, m2)
                c = out.get(mono, 0) + c1 * c2
                if c:
                    out[mono] = c
                else:
                    out.pop(mono, None)
        return SymProb._raw(out)

    __rmul__ = __mul__

    def __eq__(self, other):
        other = _maybe_coerce(other)
        if other is NotImplemented:
            return other
        return self._terms == other._terms

    def __hash__(self):
        if self._hash is None:
            self._hash = hash(frozenset(self._terms.items()))
        return self._hash

    # evaluation -------------------------------------------------------

    def instantiate(self, psi: Mapping[str, Number]) -> Fraction:
        return instantiate(self, psi)

    def substitute(self, psi: Mapping[str, SymProb | Number]) -> SymProb:
        """Replace variables by terms; unmapped variables are kept."""
        out = SymProb()
        for mono, coeff in self._terms.items():
            acc = const_prob(coeff)
            for var, e in mono:
                base = SymProb.coerce(psi[var]) if var in psi else var_prob(var)
                for _ in range(e):
                    acc = acc * base
            out = out + acc
        return out

    def rename(self, mapping: Mapping[str, str]) -> SymProb:
        out: dict = {}
        for mono, coeff in self._terms.items():
            exps: dict = {}
            for var, e in mono:
                new = mapping.get(var, var)
                exps[new] = exps.get(new, 0) + e
            key = tuple(sorted(exps.items()))
            c = out.get(key, 0) + coeff
            if c:
                out[key] = c
            else:
                out.pop(key, None)
        return SymProb._raw(out)

    # rendering --------------------------------------------------------

    def __str__(self):
        return render_prob(self)

    def __repr__(self):
        return f"SymProb({render_prob(self)!r})"


_UNIT = {(): Fraction(1)}


def _maybe_coerce(value):
    if isinstance(value, SymProb):
        return value
    if isinstance(value, (int, Fraction)):
        return const_prob(value)
    return NotImplemented


def const_prob(r: Number) -> SymProb:
    r = Fraction(r)
    return SymProb._raw({_ONE_MONO: r} if r else {})


def var_prob(name: str) -> SymProb:
    return SymProb._raw({((name, 1),): Fraction(1)})


ZERO = const_prob(0)
ONE = const_prob(1)


def add(a: SymProb, b: SymProb) -> SymProb:
    return a + b


def sub(a: SymProb, b: SymProb) -> SymProb:
    return a - b


def mul(a: SymProb, b: SymProb) -> SymProb:
    return a * b


def instantiate(t: SymProb, psi: Mapping[str, Number]) -> Fraction:
    total = Fraction(0)
    for mono, coeff in t._terms.items():
        val = coeff
        for var, e in mono:
            try:
                x = psi[var]
            except KeyError:
                raise MissingAssignment(f"variable {var!r} is not assigned") from None
            val *= x if e == 1 else x**e
        total += val
    return total


# ---------------------------------------------------------------------------
# rendering and parsing


def _render_number(c: Fraction) -> str:
    return str(c.numerator) if c.denominator == 1 else f"{c.numerator}/{c.denominator}"


def _render_mono(mono: Monomial) -> str:
    return "*".join(var for var, e in mono for _ in range(e))


def render_prob(t: SymProb) -> str:
    """Canonical text: monomials in lexicographic order, powers spelt out."""
    parts = []
    for i, (mono, coeff) in enumerate(t.items()):
        neg = coeff < 0
        mag = -coeff if neg else coeff
        if mono and mag == 1:
            body = _render_mono(mono)
        elif mono:
            body = f"{_render_number(mag)}*{_render_mono(mono)}"
        else:
            body = _render_number(mag)
        if i == 0:
            parts.append(f"-{body}" if neg else body)
        else:
            parts.append(f" - {body}" if neg else f" + {body}")
    return "".join(parts) or "0"


_TOKEN = re.compile(
    r"\s*(?:(?P<num>\d+(?:/\d+)?)|(?P<var>[A-Za-z_][A-Za-z0-9_]*)|(?P<op>[-+*()]))"
)


def _tokenize(text: str) -> list:
    pos, out = 0, []
    text = text.rstrip()
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if not m or m.end() == pos:
            raise TermError(f"unexpected character {text[pos:].strip()[:1]!r} at offset {pos} in {text!r}")
        kind = m.lastgroup
        out.append((kind, m.group(kind), m.start(kind)))
        pos = m.end()
    return out


class _Parser:
    def __init__(self, text: str):
        self.text = text
        self.toks = _tokenize(text)
        self.i = 0

    def peek(self):
        return self.toks[self.i] if self.i < len(self.toks) else (None, None, len(self.text))

    def take(self):
        tok = self.peek()
        self.i += 1
        return tok

    def expr(self) -> SymProb:
        acc = self.term()
        while self.peek()[1] in ("+", "-"):
            op = self.take()[1]
            rhs = self.term()
            acc = acc + rhs if op == "+" else acc - rhs
        return acc

    def term(self) -> SymProb:
        acc = self.factor()
        while self.peek()[1] == "*":
            self.take()
            acc = acc * self.factor()
        return acc

    def factor(self) -> SymProb:
        kind, val, pos = self.take()
        if kind == "num":
            num, _, den = val.partition("/")
            if den and int(den) == 0:
                raise TermError(f"zero denominator at offset {pos} in {self.text!r}")
            return const_prob(Fraction(int(num), int(den) if den else 1))
        if kind == "var":
            return var_prob(val)
        if val == "-":
            return -self.factor()
        if val == "(":
            inner = self.expr()
            if self.take()[1] != ")":
                raise TermError(f"missing ')' in {self.text!r}")
            return inner
        where = "end of input" if kind is None else f"{val!r} at offset {pos}"
        raise TermError(f"unexpected {where} in {self.text!r}")


def parse_prob(text: str) -> SymProb:
    """Parse ``rational | var | e+e | e-e | e*e | (e)``; unary minus is accepted."""
    p = _Parser(text)
    if not p.toks:
        raise TermError("empty probability expression")
    result = p.expr()
    if p.i != len(p.toks):
        _, val, pos = p.peek()
        raise TermError(f"trailing {val!r} at offset {pos} in {text!r}")
    return result


# ---------------------------------------------------------------------------
# fresh variables


class Registry:
    """Hands out fresh parameter names ``v0, v1, ...`` in construction order."""

    def __init__(self, prefix: str = "v"):
        self.prefix = prefix
        self._used: set = set()
        self._counter = 0
        self._lock = threading.Lock()

    def register(self, name: str) -> SymProb:
        with self._lock:
            if name in self._used:
                raise FreshnessError(f"variable {name!r} is not fresh")
            self._used.add(name)
        return var_prob(name)

    def reserve(self, names: Iterable[str]) -> None:
        """Mark externally chosen names as taken (idempotent)."""
        with self._lock:
            self._used.update(names)

    def fresh(self, avoid: Iterable[str] = ()) -> str:
        avoid = set(avoid)
        with self._lock:
            while True:
                name = f"{self.prefix}{self._counter}"
                self._counter += 1
                if name not in self._used and name not in avoid:
                    self._used.add(name)
                    return name

    def fresh_group(self, k: int, avoid: Iterable[str] = ()) -> tuple:
        """Names for a ``k``-way split: ``k - 1`` variables."""
        avoid = set(avoid)
        names = []
        for _ in range(k - 1):
            name = self.fresh(avoid)
            avoid.add(name)
            names.append(name)
        return tuple(names)

    def __contains__(self, name: str) -> bool:
        return name in self._used


DEFAULT_REGISTRY = Registry()


def split_weights(group: Sequence[str]) -> list:
    """Weights of a k-way split encoded by ``k - 1`` variables."""
    weights = [var_prob(v) for v in group]
    last = ONE
    for w in weights:
        last = last - w
    return weights + [last]


# ---------------------------------------------------------------------------
# parameter assignments


def group_tuples(size: int, g: int) -> list:
    """All ``size``-tuples on ``{0..g}`` with sum at most ``g``, lexicographic."""
    if size == 0:
        return [()]
    out = []
    for first in range(g + 1):
        for rest in group_tuples(size - 1, g - first):
            out.append((first,) + rest)
    return out


def grid_assignments(groups: Sequence[Sequence[str]], free_vars: Iterable[str], granularity: int = 4) -> list:
    """Every assignment on the ``1/g`` grid that respects the group constraints.

    Group variables come first (in the given order), then free variables
    sorted by name; the result is in lexicographic order over that sequence.
    """
    g = granularity
    if g < 1:
        raise ValueError("granularity must be a positive integer")
    grouped = set(v for grp in groups for v in grp)
    free = sorted(set(free_vars) - grouped)
    axes = [group_tuples(len(grp), g) for grp in groups]
    axes += [[(k,) for k in range(g + 1)] for _ in free]
    names = [v for grp in groups for v in grp] + free
    steps = [Fraction(k, g) for k in range(g + 1)]
    out = []
    for combo in itertools.product(*axes):
        flat = [k for tup in combo for k in tup]
        out.append(dict(zip(names, (steps[k] for k in flat))))
    return out


def check_assignment(psi: Mapping[str, Fraction], groups: Sequence[Sequence[str]] = ()) -> list:
    """Violations of the legal-region constraints; empty when ``psi`` is legal."""
    problems = []
    for var, val in psi.items():
        if not 0 <= val <= 1:
            problems.append(f"{var} = {val} outside [0,1]")
    for grp in groups:
        if all(v in psi for v in grp):
            total = sum((psi[v] for v in grp), Fraction(0))
            if total > 1:
                problems.append(f"group {' '.join(grp)} sums to {total} > 1")
    return problems


def relevant_groups(variables: Iterable[str], groups: Sequence[Sequence[str]]) -> tuple:
    """Groups touching ``variables`` plus the variables not in any group."""
    variables = set(variables)
    picked = tuple(tuple(grp) for grp in groups if variables & set(grp))
    covered = set(v for grp in picked for v in grp)
    return picked, frozenset(variables - covered)

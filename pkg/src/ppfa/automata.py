"""Finite automata (FA) and parameterised probabilistic finite automata (PPFA).

Both are acyclic.  Node ids are opaque strings; the silent action is
``TAU``.  Automata are treated as immutable values: operators build new ones.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property
from typing import Iterable, Mapping

from .terms import (
    ONE,
    SymProb,
    check_assignment,
    grid_assignments,
    instantiate,
    relevant_groups,
)

TAU = "tau"

DEFAULT_VALIDATION_GRID = 4


class AutomatonError(ValueError):
    pass


def _dist(items: Mapping[str, SymProb]) -> dict:
    """Canonical distribution: zero weights dropped, keys sorted."""
    return {n: SymProb.coerce(w) for n, w in sorted(items.items()) if not SymProb.coerce(w).is_zero()}


def _toposort(nodes: Iterable[str], succ: Mapping[str, Iterable[str]]) -> list | None:
    """Topological order, or ``None`` when the graph has a cycle."""
    indeg = {n: 0 for n in nodes}
    for n in indeg:
        for m in succ.get(n, ()):
            if m in indeg:
                indeg[m] += 1
    ready = sorted(n for n, d in indeg.items() if d == 0)
    order = []
    while ready:
        n = ready.pop(0)
        order.append(n)
        for m in sorted(set(succ.get(n, ()))):
            if m in indeg:
                indeg[m] -= 1
                if indeg[m] == 0:
                    ready.append(m)
        ready.sort()
    return order if len(order) == len(indeg) else None


# ---------------------------------------------------------------------------
# FA


@dataclass(frozen=True)
class Fa:
    nodes: frozenset
    starts: frozenset
    transitions: frozenset  # of (src, action, dst)

    def __init__(self, nodes: Iterable[str], starts: Iterable[str], transitions: Iterable[tuple]):
        object.__setattr__(self, "nodes", frozenset(nodes))
        object.__setattr__(self, "starts", frozenset(starts))
        object.__setattr__(self, "transitions", frozenset(tuple(t) for t in transitions))

    @cached_property
    def succ(self) -> dict:
        """``(node, action) -> set of targets``."""
        out: dict = {}
        for n, a, m in self.transitions:
            out.setdefault((n, a), set()).add(m)
        return out

    @cached_property
    def out(self) -> dict:
        """``node -> sorted list of (action, sorted targets)``."""
        tmp: dict = {}
        for (n, a), ms in self.succ.items():
            tmp.setdefault(n, []).append((a, sorted(ms)))
        return {n: sorted(v) for n, v in tmp.items()}

    @property
    def alphabet(self) -> frozenset:
        return frozenset(a for _, a, _ in self.transitions if a != TAU)

    def validate(self) -> list:
        problems = []
        if not self.starts:
            problems.append("no start nodes")
        for s in sorted(self.starts - self.nodes):
            problems.append(f"start node {s!r} is not a node")
        for n, a, m in sorted(self.transitions):
            if n not in self.nodes or m not in self.nodes:
                problems.append(f"transition {n} --{a}--> {m} leaves the node set")
            if m in self.starts:
                problems.append(f"start node {m!r} has an incoming transition")
        succ = {}
        for n, _, m in self.transitions:
            succ.setdefault(n, set()).add(m)
        if _toposort(self.nodes, succ) is None:
            problems.append("transition graph has a cycle")
        return problems

    def check(self) -> Fa:
        problems = self.validate()
        if problems:
            raise AutomatonError("; ".join(problems))
        return self

    def reachable(self) -> frozenset:
        seen, stack = set(), list(self.starts)
        while stack:
            n = stack.pop()
            if n in seen:
                continue
            seen.add(n)
            for _, ms in self.out.get(n, ()):
                stack.extend(ms)
        return frozenset(seen)

    def rename(self, mapping: Mapping[str, str]) -> Fa:
        f = lambda n: mapping.get(n, n)
        return Fa(map(f, self.nodes), map(f, self.starts), ((f(n), a, f(m)) for n, a, m in self.transitions))


# ---------------------------------------------------------------------------
# PPFA


@dataclass(frozen=True, eq=False)
class Pfa:
    """PPFA: start distribution and per-(node, action) target distributions.

    ``transitions`` is kept as a tuple of ``(node, action, dist)`` entries so
    that duplicate ``(node, action)`` keys can be represented and reported by
    :func:`validate_pfa`; the operators never produce them.
    """

    nodes: frozenset
    start: dict
    transitions: tuple
    groups: tuple = ()

    def __init__(self, nodes: Iterable[str], start: Mapping[str, SymProb], transitions: Iterable[tuple] | Mapping, groups: Iterable[Iterable[str]] = ()):
        if isinstance(transitions, Mapping):
            transitions = [(n, a, d) for (n, a), d in transitions.items()]
        trans = tuple(sorted(((n, a, _dist(d)) for n, a, d in transitions), key=lambda t: (t[0], t[1])))
        used = set()
        for w in start.values():
            used |= SymProb.coerce(w).variables
        for _, _, d in trans:
            for w in d.values():
                used |= w.variables
        grps = []
        for grp in groups:
            grp = tuple(grp)
            if grp and grp not in grps and used & set(grp):
                grps.append(grp)
        object.__setattr__(self, "nodes", frozenset(nodes))
        object.__setattr__(self, "start", _dist(start))
        object.__setattr__(self, "transitions", trans)
        object.__setattr__(self, "groups", tuple(grps))

    def __eq__(self, other):
        if not isinstance(other, Pfa):
            return NotImplemented
        return (self.nodes, self.start, self.transitions, set(self.groups)) == (
            other.nodes,
            other.start,
            other.transitions,
            set(other.groups),
        )

    __hash__ = None

    @cached_property
    def trans(self) -> dict:
        """``(node, action) -> dist`` (last entry wins on duplicates)."""
        return {(n, a): d for n, a, d in self.transitions}

    @cached_property
    def out(self) -> dict:
        """``node -> list of (action, dist)`` sorted by action."""
        tmp: dict = {}
        for n, a, d in self.transitions:
            tmp.setdefault(n, []).append((a, d))
        return tmp

    @property
    def alphabet(self) -> frozenset:
        return frozenset(a for _, a, _ in self.transitions if a != TAU)

    @cached_property
    def variables(self) -> frozenset:
        out = set()
        for w in self.start.values():
            out |= w.variables
        for _, _, d in self.transitions:
            for w in d.values():
                out |= w.variables
        return frozenset(out)

    def weights(self) -> Iterable[SymProb]:
        yield from self.start.values()
        for _, _, d in self.transitions:
            yield from d.values()

    def grid(self, g: int) -> list:
        groups, free = relevant_groups(self.variables, self.groups)
        return grid_assignments(groups, free, g)

    def reachable(self) -> frozenset:
        seen, stack = set(), list(self.start)
        while stack:
            n = stack.pop()
            if n in seen:
                continue
            seen.add(n)
            for _, d in self.out.get(n, ()):
                stack.extend(d)
        return frozenset(seen)

    def rename(self, mapping: Mapping[str, str]) -> Pfa:
        f = lambda n: mapping.get(n, n)
        return Pfa(
            map(f, self.nodes),
            {f(n): w for n, w in self.start.items()},
            [(f(n), a, {f(m): w for m, w in d.items()}) for n, a, d in self.transitions],
            self.groups,
        )

    def rename_vars(self, mapping: Mapping[str, str]) -> Pfa:
        r = lambda w: w.rename(mapping)
        return Pfa(
            self.nodes,
            {n: r(w) for n, w in self.start.items()},
            [(n, a, {m: r(w) for m, w in d.items()}) for n, a, d in self.transitions],
            [tuple(mapping.get(v, v) for v in grp) for grp in self.groups],
        )

    def check(self, g: int = DEFAULT_VALIDATION_GRID) -> Pfa:
        problems = validate_pfa(self, g)
        if problems:
            raise AutomatonError("; ".join(problems))
        return self


def validate_pfa(p: Pfa, g: int = DEFAULT_VALIDATION_GRID) -> list:
    """Every violated PPFA invariant, as human-readable strings."""
    problems = []
    if not p.start:
        problems.append("start distribution is empty")
    for n in sorted(set(p.start) - p.nodes):
        problems.append(f"start node {n!r} is not a node")
    total = sum(p.start.values(), SymProb())
    if total != ONE:
        problems.append(f"start weights sum to {total}, not 1")

    seen = set()
    succ: dict = {}
    for n, a, d in p.transitions:
        if (n, a) in seen:
            problems.append(f"more than one transition for ({n}, {a})")
        seen.add((n, a))
        if n not in p.nodes:
            problems.append(f"transition source {n!r} is not a node")
        if not d:
            problems.append(f"transition ({n}, {a}) has an empty distribution")
        for m in d:
            if m not in p.nodes:
                problems.append(f"transition ({n}, {a}) targets unknown node {m!r}")
            if m in p.start:
                problems.append(f"start node {m!r} has an incoming transition")
            succ.setdefault(n, set()).add(m)
        s = sum(d.values(), SymProb())
        if d and s != ONE:
            problems.append(f"distribution of ({n}, {a}) sums to {s}, not 1")
    if _toposort(p.nodes, succ) is None:
        problems.append("transition graph has a cycle")

    seen_vars: set = set()
    for grp in p.groups:
        dup = seen_vars & set(grp)
        if dup:
            problems.append(f"variables {sorted(dup)} appear in more than one group")
        seen_vars |= set(grp)

    problems.extend(_range_problems(p, g))
    return problems


def _range_problems(p: Pfa, g: int) -> list:
    weights = {w for w in p.weights() if not w.is_constant()}
    consts = {w for w in p.weights() if w.is_constant()}
    problems = [f"weight {w} outside [0,1]" for w in sorted(consts, key=str) if not 0 <= w.constant() <= 1]
    if not weights:
        return problems
    bad = set()
    for psi in p.grid(g):
        for w in weights:
            if w not in bad and not 0 <= instantiate(w, psi) <= 1:
                bad.add(w)
                problems.append(f"weight {w} leaves [0,1] at {_show_psi(psi)}")
    return problems


def _show_psi(psi: Mapping[str, Fraction]) -> str:
    return "{" + ", ".join(f"{k}={v}" for k, v in sorted(psi.items())) + "}"


def is_dpfa(p: Pfa) -> bool:
    return not p.variables and all(a != TAU for _, a, _ in p.transitions)


def is_det_test(x: Fa | Pfa) -> bool:
    """Single start and at most one successor per (node, action); PPFA: all point masses."""
    if isinstance(x, Fa):
        return len(x.starts) == 1 and all(len(ms) == 1 for ms in x.succ.values())
    point = lambda d: len(d) == 1 and next(iter(d.values())) == ONE
    return point(x.start) and all(point(d) for _, _, d in x.transitions)


# ---------------------------------------------------------------------------
# structural comparison


def _weight_key(w: SymProb, rename: Mapping[str, str] | None = None) -> str:
    if rename is not None:
        w = w.rename(rename)
    return str(w)


def _local_names(ws: Iterable[SymProb]) -> dict:
    """Rename variables by first appearance (vars within a monomial in name order)."""
    mapping: dict = {}
    for w in ws:
        for mono, _ in w.items():
            for var, _ in mono:
                if var not in mapping:
                    mapping[var] = f"#{len(mapping)}"
    return mapping


def _abstract(w: SymProb) -> str:
    return str(w.rename(_local_names([w])))


def pfa_signatures(p: Pfa, variables: str = "exact", var_map: Mapping[str, str] | None = None) -> dict:
    """Canonical signature of every node (a string), computed bottom-up.

    ``variables`` selects how parameters are compared: ``"exact"`` by name,
    ``"local"`` up to a renaming local to each distribution, ``"shape"`` like
    local but used for ordering before a global renaming.
    """
    succ = {n: [m for _, d in p.out.get(n, ()) for m in d] for n in p.nodes}
    order = _toposort(p.nodes, succ) or sorted(p.nodes)
    sig: dict = {}
    for n in reversed(order):
        parts = []
        for a, d in p.out.get(n, ()):
            if variables in ("local", "shape"):
                ranked = sorted(d.items(), key=lambda kv: (sig[kv[0]], _abstract(kv[1])))
                loc = _local_names(w for _, w in ranked)
                entries = sorted(f"{_weight_key(w, loc)}:{sig[m]}" for m, w in ranked)
            else:
                entries = sorted(f"{_weight_key(w, var_map)}:{sig[m]}" for m, w in d.items())
            parts.append(f"{a}{{{','.join(entries)}}}")
        sig[n] = "[" + ";".join(sorted(parts)) + "]"
    return sig


def _pfa_canon(p: Pfa, variables: str, var_map: Mapping[str, str] | None = None) -> tuple:
    sig = pfa_signatures(p, variables, var_map)
    reach = p.reachable()
    if variables == "local":
        loc = _local_names(w for _, w in sorted(p.start.items(), key=lambda kv: (sig[kv[0]], _abstract(kv[1]))))
        starts = sorted(f"{_weight_key(w, loc)}:{sig[n]}" for n, w in p.start.items())
    else:
        starts = sorted(f"{_weight_key(w, var_map)}:{sig[n]}" for n, w in p.start.items())
    return tuple(starts), tuple(sorted(sig[n] for n in reach))


def _global_var_order(p: Pfa) -> dict:
    """Canonical renaming of all parameters, by first appearance in a shape-ordered walk."""
    sig = pfa_signatures(p, "shape")
    mapping: dict = {}

    def visit_weights(ws):
        for w in ws:
            for mono, _ in w.items():
                for var, _ in mono:
                    if var not in mapping:
                        mapping[var] = f"#{len(mapping)}"

    seen = set()
    starts = sorted(p.start.items(), key=lambda kv: (sig[kv[0]], _abstract(kv[1])))
    visit_weights(w for _, w in starts)
    queue = [n for n, _ in starts]
    while queue:
        n = queue.pop(0)
        if n in seen:
            continue
        seen.add(n)
        for a, d in sorted(p.out.get(n, ()), key=lambda ad: ad[0]):
            ranked = sorted(d.items(), key=lambda kv: (sig[kv[0]], _abstract(kv[1])))
            visit_weights(w for _, w in ranked)
            queue.extend(m for m, _ in ranked)
    return mapping


def pfa_isomorphic(p: Pfa, q: Pfa, variables: str = "exact") -> bool:
    """Structural equality of the reachable parts.

    ``variables``: ``"exact"`` compares parameter names, ``"global"`` allows one
    consistent renaming, ``"local"`` allows a renaming per distribution.
    """
    if variables == "global":
        return _pfa_canon(p, "exact", _global_var_order(p)) == _pfa_canon(q, "exact", _global_var_order(q))
    return _pfa_canon(p, variables) == _pfa_canon(q, variables)


def fa_signatures(a: Fa) -> dict:
    succ = {n: [m for _, ms in a.out.get(n, ()) for m in ms] for n in a.nodes}
    order = _toposort(a.nodes, succ) or sorted(a.nodes)
    sig: dict = {}
    for n in reversed(order):
        parts = [f"{act}{{{','.join(sorted(sig[m] for m in ms))}}}" for act, ms in a.out.get(n, ())]
        sig[n] = "[" + ";".join(sorted(parts)) + "]"
    return sig


def fa_isomorphic(a: Fa, b: Fa) -> bool:
    def canon(x):
        sig = fa_signatures(x)
        return tuple(sorted(sig[s] for s in x.starts)), tuple(sorted(sig[n] for n in x.reachable()))

    return canon(a) == canon(b)


def isomorphic(x, y, variables: str = "exact") -> bool:
    if isinstance(x, Fa) and isinstance(y, Fa):
        return fa_isomorphic(x, y)
    if isinstance(x, Pfa) and isinstance(y, Pfa):
        return pfa_isomorphic(x, y, variables)
    return False


# ---------------------------------------------------------------------------
# normal form


def normal_form(p: Pfa) -> Pfa:
    """Migrate all probabilistic branching into the start distribution.

    Every resolution of the transition distributions below a start node becomes
    its own start copy (a tree in which every transition is a point mass),
    weighted by the start weight times the product of the chosen weights.
    """
    counter = itertools.count()
    nodes: set = set()
    trans: list = []

    def resolutions(n: str) -> list:
        # each: (weight, list of (action, resolved child builder))
        per_action = []
        for a, d in p.out.get(n, ()):
            options = []
            for m, w in d.items():
                for rw, child in resolutions(m):
                    options.append((w * rw, (a, child)))
            per_action.append(options)
        out = []
        for combo in itertools.product(*per_action):
            weight = ONE
            for w, _ in combo:
                weight = weight * w
            if not weight.is_zero():
                out.append((weight, (n, tuple(c for _, c in combo))))
        return out

    def build(tree) -> str:
        orig, children = tree
        name = f"{orig}#{next(counter)}"
        nodes.add(name)
        for a, child in children:
            trans.append((name, a, {build(child): ONE}))
        return name

    start: dict = {}
    for s, sw in p.start.items():
        for rw, tree in resolutions(s):
            start[build(tree)] = sw * rw
    return Pfa(nodes, start, trans, p.groups)


def distribution_is_point(d: Mapping[str, SymProb]) -> bool:
    return len(d) == 1 and next(iter(d.values())) == ONE


def grid_ok(psi: Mapping[str, Fraction], groups) -> bool:
    return not check_assignment(psi, groups)

"""Traces, paths and complete-trace distributions.

Observed traces are τ-erased.  A node offering several transitions at once
(an external choice nobody has resolved) is resolved by unknown probabilities:
a split over its sorted menu whose parameters are named after the observed
history and the menu, so that two copies of the same behaviour resolve the
same way.  Nodes with a single transition contribute no extra factor.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Iterator, Mapping

from .automata import TAU, Fa, Pfa
from .terms import ONE, SymProb, grid_assignments, instantiate, relevant_groups, split_weights

Trace = tuple  # tuple[str, ...]


class PathError(ValueError):
    pass


def erase(labels: Iterable[str]) -> Trace:
    return tuple(a for a in labels if a != TAU)


def render_trace(trace: Trace) -> str:
    return ".".join(trace) if trace else "<>"


def parse_trace(text: str) -> Trace:
    text = text.strip()
    if text in ("", "<>"):
        return ()
    return tuple(part.strip() for part in text.split("."))


# ---------------------------------------------------------------------------
# FA


def fa_traces(a: Fa) -> frozenset:
    out = set()
    stack = [(s, ()) for s in a.starts]
    while stack:
        n, tr = stack.pop()
        out.add(tr)
        for act, ms in a.out.get(n, ()):
            nxt = tr if act == TAU else tr + (act,)
            stack.extend((m, nxt) for m in ms)
    return frozenset(out)


def fa_complete_traces(a: Fa) -> frozenset:
    out = set()
    stack = [(s, ()) for s in a.starts]
    while stack:
        n, tr = stack.pop()
        moves = a.out.get(n, ())
        if not moves:
            out.add(tr)
        for act, ms in moves:
            nxt = tr if act == TAU else tr + (act,)
            stack.extend((m, nxt) for m in ms)
    return frozenset(out)


# ---------------------------------------------------------------------------
# choice resolution


def choice_group(history: Trace, menu: Iterable[str]) -> tuple:
    """Parameter names resolving a k-way menu after ``history`` (k - 1 names)."""
    menu = tuple(sorted(menu))
    tag = f"ch<{'.'.join(history)}|{','.join(menu)}>"
    return tuple(f"{tag}{j}" for j in range(len(menu) - 1))


def choice_weights(history: Trace, menu: Iterable[str]) -> dict:
    menu = sorted(menu)
    if len(menu) == 1:
        return {menu[0]: ONE}
    return dict(zip(menu, split_weights(choice_group(history, menu))))


# ---------------------------------------------------------------------------
# paths


@dataclass(frozen=True)
class Step:
    action: str
    target: str
    weight: SymProb
    choice: SymProb = ONE


@dataclass(frozen=True)
class Path:
    start: str
    steps: tuple = ()

    @property
    def labels(self) -> tuple:
        return tuple(s.action for s in self.steps)

    @property
    def trace(self) -> Trace:
        return erase(self.labels)

    @property
    def end(self) -> str:
        return self.steps[-1].target if self.steps else self.start


def enumerate_paths(p: Pfa) -> list:
    """All maximal paths from every start node, in deterministic order."""
    out = []

    def walk(start: str, node: str, steps: list, history: Trace):
        moves = p.out.get(node, ())
        if not moves:
            out.append(Path(start, tuple(steps)))
            return
        choice = choice_weights(history, [a for a, _ in moves])
        for a, d in moves:
            nxt = history if a == TAU else history + (a,)
            for m, w in d.items():
                steps.append(Step(a, m, w, choice[a]))
                walk(start, m, steps, nxt)
                steps.pop()

    for s in sorted(p.start):
        walk(s, s, [], ())
    return out


def path_prob(p: Pfa, path: Path) -> SymProb:
    """Start weight times every step weight (and the menu resolution, if any)."""
    if path.start not in p.start:
        raise PathError(f"{path.start!r} is not a start node")
    acc = p.start[path.start]
    node, history = path.start, ()
    for step in path.steps:
        moves = p.out.get(node, ())
        d = dict(moves).get(step.action)
        if d is None or step.target not in d or d[step.target] != step.weight:
            raise PathError(f"no step {node} --{step.action}--> {step.target} with weight {step.weight}")
        choice = choice_weights(history, [a for a, _ in moves])[step.action]
        if choice != step.choice:
            raise PathError(f"menu weight mismatch at {node}")
        acc = acc * step.weight * step.choice
        if step.action != TAU:
            history = history + (step.action,)
        node = step.target
    return acc


def trace_prob(p: Pfa, rho: Iterable[str]) -> SymProb:
    """Probability of observing ``rho`` as a complete trace."""
    rho = tuple(rho)
    total = SymProb()
    for path in enumerate_paths(p):
        if path.trace == rho:
            total = total + path_prob(p, path)
    return total


def prefix_prob(p: Pfa, rho: Iterable[str]) -> SymProb:
    """Probability that the observed trace starts with ``rho`` (diagnostics)."""
    rho = tuple(rho)
    total = SymProb()
    for path in enumerate_paths(p):
        if path.trace[: len(rho)] == rho:
            total = total + path_prob(p, path)
    return total


# ---------------------------------------------------------------------------
# complete-trace distributions


class TraceDist(Mapping):
    """Map from τ-erased complete traces to (parameterised) probabilities."""

    def __init__(self, entries: Mapping[Trace, SymProb], groups: Iterable[tuple] = ()):
        self._d = {tuple(k): v for k, v in sorted(entries.items()) if not v.is_zero()}
        used = set()
        for v in self._d.values():
            used |= v.variables
        self.groups = tuple(grp for grp in dict.fromkeys(tuple(g) for g in groups) if used & set(grp))

    def __getitem__(self, key):
        return self._d[tuple(key)]

    def __iter__(self) -> Iterator:
        return iter(self._d)

    def __len__(self):
        return len(self._d)

    def __eq__(self, other):
        if isinstance(other, TraceDist):
            return self._d == other._d
        if isinstance(other, Mapping):
            return self._d == {tuple(k): SymProb.coerce(v) for k, v in other.items() if not SymProb.coerce(v).is_zero()}
        return NotImplemented

    __hash__ = None

    @property
    def variables(self) -> frozenset:
        out = set()
        for v in self._d.values():
            out |= v.variables
        return frozenset(out)

    def total(self) -> SymProb:
        return sum(self._d.values(), SymProb())

    def grid(self, g: int) -> list:
        groups, free = relevant_groups(self.variables, self.groups)
        return grid_assignments(groups, free, g)

    def instantiate(self, psi: Mapping[str, Fraction]) -> dict:
        out = {}
        for k, v in self._d.items():
            val = instantiate(v, psi)
            if val:
                out[k] = val
        return out

    def render(self) -> str:
        return "\n".join(f"{render_trace(k)} -> {v}" for k, v in self._d.items())

    def __repr__(self):
        return f"TraceDist({{{', '.join(f'{render_trace(k)}: {v}' for k, v in self._d.items())}}})"


def complete_trace_dist(p: Pfa) -> TraceDist:
    acc: dict = {}
    groups = list(p.groups)

    def walk(node: str, weight: SymProb, history: Trace):
        moves = p.out.get(node, ())
        if not moves:
            acc[history] = acc.get(history, SymProb()) + weight
            return
        labels = [a for a, _ in moves]
        if len(labels) > 1:
            groups.append(choice_group(history, labels))
        choice = choice_weights(history, labels)
        for a, d in moves:
            nxt = history if a == TAU else history + (a,)
            wa = weight * choice[a]
            for m, w in d.items():
                walk(m, wa * w, nxt)

    for s in sorted(p.start):
        walk(s, p.start[s], ())
    return TraceDist(acc, groups)


def render_distribution(dist: Mapping[Trace, Fraction]) -> str:
    if not dist:
        return "{}"
    return "{" + ", ".join(f"{render_trace(k)}: {v}" for k, v in sorted(dist.items())) + "}"

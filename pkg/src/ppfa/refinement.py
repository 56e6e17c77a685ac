"""Testing semantics and bounded refinement checks.

A test places a process in a deterministic, tree-shaped context that
synchronises on a set ``N`` of actions; the test records the events it took
part in.  FA observations are complete-trace sets, PPFA observations are
complete-trace distributions instantiated on a parameter grid.

Positive verdicts are bounded evidence (contexts up to a depth, parameters on
a grid); counterexamples are exact and replayable.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from functools import cached_property
from typing import Iterable, Iterator, Sequence

from .automata import TAU, Fa, Pfa, is_det_test
from .operators import fa_parallel, pfa_parallel
from .semantics import complete_trace_dist, fa_complete_traces, render_distribution, render_trace

DEFAULT_CONTEXT_LIMIT = 200_000


class ContextError(ValueError):
    pass


# ---------------------------------------------------------------------------
# contexts

# A context tree is a menu: a tuple of (action, subtree) pairs sorted by action.


def _trees(alphabet: tuple, depth: int) -> Iterator:
    if depth == 0:
        yield ()
        return
    subsets = sorted(
        (s for r in range(len(alphabet) + 1) for s in itertools.combinations(alphabet, r)),
        key=lambda s: (len(s), s),
    )
    children = list(_trees(alphabet, depth - 1))
    for menu in subsets:
        for kids in itertools.product(children, repeat=len(menu)):
            yield tuple(zip(menu, kids))


def count_contexts(alphabet_size: int, depth: int) -> int:
    n = 1
    for _ in range(depth):
        n = (1 + n) ** alphabet_size
    return n


def tree_depth(tree: tuple) -> int:
    return 1 + max(tree_depth(t) for _, t in tree) if tree else 0


def render_tree(tree: tuple) -> str:
    if not tree:
        return "stop"
    parts = []
    for a, sub in tree:
        body = render_tree(sub)
        parts.append(f"{a}.({body})" if len(sub) > 1 else f"{a}.{body}")
    return parts[0] if len(parts) == 1 else " [] ".join(parts)


def tree_to_fa(tree: tuple) -> Fa:
    nodes, trans = [], []
    counter = itertools.count()

    def build(t) -> str:
        name = f"x{next(counter)}"
        nodes.append(name)
        for a, sub in t:
            trans.append((name, a, build(sub)))
        return name

    root = build(tree)
    return Fa(nodes, {root}, trans)


@dataclass(frozen=True)
class TestContext:
    """A deterministic test together with its synchronisation set."""

    tree: tuple
    sync: frozenset
    index: int = 0

    __test__ = False  # not a pytest class

    @cached_property
    def fa(self) -> Fa:
        return tree_to_fa(self.tree)

    @cached_property
    def pfa(self) -> Pfa:
        from .galois import embed

        return embed(self.fa)

    @cached_property
    def alphabet(self) -> frozenset:
        return self.fa.alphabet

    def render(self) -> str:
        return render_tree(self.tree)


def context_from_fa(x: Fa, sync: Iterable[str], index: int = 0) -> TestContext:
    if not is_det_test(x):
        raise ContextError("test contexts must be deterministic")
    (root,) = x.starts

    def unfold(n):
        return tuple((a, unfold(ms[0])) for a, ms in sorted(x.out.get(n, ())))

    return TestContext(unfold(root), frozenset(sync), index)


def enumerate_contexts(alphabet: Iterable[str], depth: int, sync: Iterable[str] | None = None, limit: int | None = None) -> list:
    """Deterministic tree contexts of depth at most ``depth`` over ``alphabet``.

    Order: by menu size, then lexicographically, recursively.  ``limit``
    truncates the list deterministically.
    """
    if depth < 0:
        raise ValueError("depth must be non-negative")
    alphabet = tuple(sorted(set(alphabet) - {TAU}))
    sync = frozenset(alphabet if sync is None else sync)
    trees = _trees(alphabet, depth)
    if limit is not None:
        trees = itertools.islice(trees, limit)
    return [TestContext(t, sync, i) for i, t in enumerate(trees)]


def apply_context(p: Fa | Pfa, x: TestContext):
    """``p`` run against ``x``; synchronised events keep their action names."""
    extra = x.alphabet - x.sync
    if extra:
        raise ContextError(f"context actions {sorted(extra)} are outside the synchronisation set")
    if isinstance(p, Fa):
        return fa_parallel(p, x.fa, x.sync, observe=True, reachable_only=True)
    return pfa_parallel(p, x.pfa, x.sync, observe=True, reachable_only=True)


def sync_depth(p: Fa | Pfa, sync: frozenset) -> int:
    """Largest number of ``sync`` actions on any path of ``p``."""
    if isinstance(p, Fa):
        succ = {n: [(a, m) for a, ms in p.out.get(n, ()) for m in ms] for n in p.nodes}
        roots = p.starts
    else:
        succ = {n: [(a, m) for a, d in p.out.get(n, ()) for m in d] for n in p.nodes}
        roots = p.start
    memo: dict = {}

    def depth(n):
        if n not in memo:
            memo[n] = max((depth(m) + (a in sync) for a, m in succ.get(n, ())), default=0)
        return memo[n]

    return max((depth(s) for s in roots), default=0)


# ---------------------------------------------------------------------------
# observations


Distribution = tuple  # tuple of (trace, Fraction) sorted by trace


def freeze(dist: dict) -> Distribution:
    return tuple(sorted(dist.items()))


def observe_fa(p: Fa, x: TestContext) -> frozenset:
    return fa_complete_traces(apply_context(p, x))


def observe_pfa(p: Pfa, x: TestContext, g: int) -> dict:
    """Instantiated complete-trace distributions of ``[p]_x``, keyed by distribution.

    Each value is the first grid assignment producing that distribution.
    """
    dc = complete_trace_dist(apply_context(p, x))
    out: dict = {}
    for psi in dc.grid(g):
        out.setdefault(freeze(dc.instantiate(psi)), psi)
    return out


def pfa_semantics(p: Pfa, contexts: Sequence[TestContext], g: int) -> set:
    """Pairs ``(context index, distribution)`` observable on the grid."""
    return {(x.index, dist) for x in contexts for dist in observe_pfa(p, x, g)}


# ---------------------------------------------------------------------------
# verdicts


@dataclass
class Counterexample:
    context: TestContext
    psi: dict | None = None
    distribution: Distribution | None = None
    spec_observations: list = field(default_factory=list)
    missing_traces: frozenset = frozenset()

    def render(self) -> str:
        lines = [f"context: {self.context.render()}  (sync {{{','.join(sorted(self.context.sync))}}})"]
        if self.distribution is not None:
            psi = ", ".join(f"{k}={v}" for k, v in sorted(self.psi.items())) or "(no parameters)"
            lines.append(f"psi: {psi}")
            lines.append(f"impl distribution: {render_distribution(dict(self.distribution))}")
            lines.append(f"spec distributions ({len(self.spec_observations)}):")
            for d in self.spec_observations[:20]:
                lines.append(f"  {render_distribution(dict(d))}")
            if len(self.spec_observations) > 20:
                lines.append(f"  ... {len(self.spec_observations) - 20} more")
        else:
            lines.append("impl traces not allowed by spec: " + ", ".join(render_trace(t) for t in sorted(self.missing_traces)))
            lines.append("spec traces: " + ", ".join(render_trace(t) for t in sorted(self.spec_observations)))
        return "\n".join(lines)


@dataclass
class Verdict:
    refines: bool
    kind: str
    depth: int
    effective_depth: int
    grid: int | None
    contexts_checked: int
    sync: frozenset
    counterexample: Counterexample | None = None
    truncated: bool = False

    @property
    def outcome(self) -> str:
        return "refines-bounded-evidence" if self.refines else "counterexample"

    def render(self) -> str:
        lines = [
            f"verdict: {self.outcome}",
            f"semantics: {self.kind}",
            f"depth: {self.depth} (effective {self.effective_depth})",
        ]
        if self.grid is not None:
            lines.append(f"grid: {self.grid}")
        lines.append(f"sync: {{{','.join(sorted(self.sync))}}}")
        lines.append(f"contexts checked: {self.contexts_checked}" + (" (truncated)" if self.truncated else ""))
        if self.counterexample is not None:
            lines.append(self.counterexample.render())
        return "\n".join(lines)

    def to_dict(self) -> dict:
        out = {
            "verdict": self.outcome,
            "semantics": self.kind,
            "depth": self.depth,
            "effective_depth": self.effective_depth,
            "grid": self.grid,
            "sync": sorted(self.sync),
            "contexts_checked": self.contexts_checked,
            "truncated": self.truncated,
        }
        cex = self.counterexample
        if cex is not None:
            out["counterexample"] = {
                "context": cex.context.render(),
                "psi": {k: str(v) for k, v in sorted((cex.psi or {}).items())},
                "distribution": None if cex.distribution is None else {render_trace(k): str(v) for k, v in cex.distribution},
                "missing_traces": [render_trace(t) for t in sorted(cex.missing_traces)],
            }
        return out


def _setup(spec, impl, depth: int, sync, limit):
    alphabet = spec.alphabet | impl.alphabet
    sync = frozenset(alphabet if sync is None else sync)
    if TAU in sync:
        raise ContextError("the silent action cannot be synchronised")
    # contexts deeper than any process can follow behave like their truncation
    eff = min(depth, max(sync_depth(spec, sync), sync_depth(impl, sync)))
    limit = DEFAULT_CONTEXT_LIMIT if limit is None else limit
    contexts = enumerate_contexts(sync, eff, sync, limit=limit + 1)
    truncated = len(contexts) > limit
    return sync, eff, contexts[:limit], truncated


def fa_refines(spec: Fa, impl: Fa, depth: int = 2, sync: Iterable[str] | None = None, limit: int | None = None) -> Verdict:
    """Is ``impl`` a refinement of ``spec`` on every enumerated context?"""
    sync, eff, contexts, truncated = _setup(spec, impl, depth, sync, limit)
    for i, x in enumerate(contexts):
        allowed = observe_fa(spec, x)
        got = observe_fa(impl, x)
        if not got <= allowed:
            cex = Counterexample(x, spec_observations=sorted(allowed), missing_traces=frozenset(got - allowed))
            return Verdict(False, "fa", depth, eff, None, i + 1, sync, cex, truncated)
    return Verdict(True, "fa", depth, eff, None, len(contexts), sync, None, truncated)


def pfa_refines(spec: Pfa, impl: Pfa, depth: int = 2, g: int = 4, sync: Iterable[str] | None = None, limit: int | None = None) -> Verdict:
    """Is every grid observation of ``impl`` also one of ``spec``?"""
    sync, eff, contexts, truncated = _setup(spec, impl, depth, sync, limit)
    for i, x in enumerate(contexts):
        allowed = observe_pfa(spec, x, g)
        for dist, psi in observe_pfa(impl, x, g).items():
            if dist not in allowed:
                cex = Counterexample(x, psi, dist, sorted(allowed))
                return Verdict(False, "pfa", depth, eff, g, i + 1, sync, cex, truncated)
    return Verdict(True, "pfa", depth, eff, g, len(contexts), sync, None, truncated)


def pfa_test_equal(a: Pfa, c: Pfa, depth: int = 2, g: int = 4, sync: Iterable[str] | None = None) -> bool:
    return pfa_refines(a, c, depth, g, sync).refines and pfa_refines(c, a, depth, g, sync).refines


def fa_test_equal(a: Fa, c: Fa, depth: int = 2, sync: Iterable[str] | None = None) -> bool:
    return fa_refines(a, c, depth, sync).refines and fa_refines(c, a, depth, sync).refines


def replay(verdict: Verdict, spec, impl) -> bool:
    """Recompute a counterexample from its stored context (and assignment)."""
    cex = verdict.counterexample
    if cex is None:
        return False
    if verdict.kind == "fa":
        got = observe_fa(impl, cex.context)
        allowed = observe_fa(spec, cex.context)
        return cex.missing_traces <= got and not cex.missing_traces & allowed
    dc = complete_trace_dist(apply_context(impl, cex.context))
    dist = freeze(dc.instantiate(cex.psi))
    if dist != cex.distribution:
        return False
    return dist not in observe_pfa(spec, cex.context, verdict.grid)

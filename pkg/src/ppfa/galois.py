"""Embedding of FA into PPFA, the forgetful map back, and checkers for the
properties relating them (unit, counit, adjunction, congruence, embedding
lemma)."""

from __future__ import annotations

from dataclasses import dataclass, field

from .automata import Fa, Pfa, fa_isomorphic, pfa_isomorphic
from .operators import fa_parallel, pfa_parallel
from .refinement import Verdict, fa_refines, freeze, pfa_refines
from .semantics import complete_trace_dist, fa_complete_traces
from .terms import DEFAULT_REGISTRY, ONE, Registry, split_weights


def _split(targets, registry: Registry, groups: list) -> dict:
    targets = sorted(targets)
    if len(targets) == 1:
        return {targets[0]: ONE}
    grp = registry.fresh_group(len(targets))
    groups.append(grp)
    return dict(zip(targets, split_weights(grp)))


def embed(a: Fa, registry: Registry | None = None) -> Pfa:
    """Turn every nondeterministic choice into a split with fresh unknown weights."""
    registry = registry or DEFAULT_REGISTRY
    groups: list = []
    start = _split(a.starts, registry, groups)
    trans = [(n, act, _split(ms, registry, groups)) for (n, act), ms in sorted(a.succ.items(), key=lambda kv: kv[0])]
    return Pfa(a.nodes, start, trans, groups)


def forget(p: Pfa) -> Fa:
    return Fa(p.nodes, p.start, ((n, a, m) for n, a, d in p.transitions for m in d))


def check_unit(x: Fa) -> bool:
    return fa_isomorphic(forget(embed(x)), x)


def check_counit(y: Pfa, depth: int = 2, g: int = 2) -> Verdict:
    return pfa_refines(embed(forget(y)), y, depth, g)


@dataclass
class AdjunctionCheck:
    lhs: Verdict  # embed(X) refined by Y
    rhs: Verdict  # X refined by forget(Y)

    @property
    def agree(self) -> bool:
        return self.lhs.refines == self.rhs.refines


def check_adjunction(x: Fa, y: Pfa, depth: int = 2, g: int = 2) -> AdjunctionCheck:
    return AdjunctionCheck(pfa_refines(embed(x), y, depth, g), fa_refines(x, forget(y), depth))


def check_congruence_embed(x: Fa, y: Fa, sync=()) -> bool:
    """Embedding commutes with parallel composition (parameters compared per distribution)."""
    return pfa_isomorphic(embed(fa_parallel(x, y, sync)), pfa_parallel(embed(x), embed(y), sync), variables="local")


def check_congruence_forget(x: Pfa, y: Pfa, sync=()) -> bool:
    return forget(pfa_parallel(x, y, sync)) == fa_parallel(forget(x), forget(y), sync)


@dataclass
class LemmaCheck:
    precondition: bool
    holds: bool | None
    witness: tuple | None = None


def check_lemma_embed(x: Fa, y: Fa, g: int = 2) -> LemmaCheck:
    """Complete-trace inclusion lifts to inclusion of grid distributions."""
    trc_y = fa_complete_traces(y)
    if not fa_complete_traces(x) <= trc_y:
        return LemmaCheck(False, None)
    dx = complete_trace_dist(embed(x))
    dy = complete_trace_dist(embed(y))
    achievable = {freeze(dy.instantiate(psi)) for psi in dy.grid(g)}
    for psi in dx.grid(g):
        dist = dx.instantiate(psi)
        if not set(dist) <= trc_y or freeze(dist) not in achievable:
            return LemmaCheck(True, False, (psi, freeze(dist)))
    return LemmaCheck(True, True)


# ---------------------------------------------------------------------------
# corpus report


@dataclass
class PairResult:
    index: int
    x: Fa
    y: Pfa
    unit: bool
    counit: Verdict
    adjunction: AdjunctionCheck
    monotone: list = field(default_factory=list)  # (name, bool)

    @property
    def ok(self) -> bool:
        return self.unit and self.counit.refines and self.adjunction.agree and all(ok for _, ok in self.monotone)


@dataclass
class GaloisReport:
    seed: int
    depth: int
    grid: int
    pairs: list

    @property
    def failures(self) -> list:
        return [p for p in self.pairs if not p.ok]

    def render(self) -> str:
        n = len(self.pairs)
        unit = sum(p.unit for p in self.pairs)
        counit = sum(p.counit.refines for p in self.pairs)
        agree = sum(p.adjunction.agree for p in self.pairs)
        both = sum(p.adjunction.lhs.refines and p.adjunction.rhs.refines for p in self.pairs)
        mono = [ok for p in self.pairs for _, ok in p.monotone]
        lines = [
            f"galois corpus: seed {self.seed}, {n} pairs, depth {self.depth}, grid {self.grid}",
            f"unit (forget . embed = id):        {unit}/{n}",
            f"counit (embed . forget refined):   {counit}/{n}",
            f"adjunction agreement:              {agree}/{n}  ({both} pairs with both sides true)",
            f"monotonicity samples:              {sum(mono)}/{len(mono)}",
        ]
        for p in self.failures:
            lines.append(f"FAIL pair {p.index}:")
            if not p.unit:
                lines.append("  unit check failed")
            if not p.counit.refines:
                lines.append("  counit counterexample:\n    " + p.counit.render().replace("\n", "\n    "))
            if not p.adjunction.agree:
                lines.append(f"  adjunction: lhs={p.adjunction.lhs.refines} rhs={p.adjunction.rhs.refines}")
                for v in (p.adjunction.lhs, p.adjunction.rhs):
                    if v.counterexample is not None:
                        lines.append("    " + v.render().replace("\n", "\n    "))
            for name, ok in p.monotone:
                if not ok:
                    lines.append(f"  monotonicity {name} failed")
        lines.append("result: " + ("PASS" if not self.failures else f"FAIL ({len(self.failures)} pairs)"))
        return "\n".join(lines)


def check_pair(index: int, x: Fa, y: Pfa, depth: int, g: int) -> PairResult:
    adj = check_adjunction(x, y, depth, g)
    res = PairResult(index, x, y, check_unit(x), check_counit(y, depth, g), adj)
    if adj.rhs.refines:
        # embed is monotone: X below forget(Y) lifts
        res.monotone.append(("embed", pfa_refines(embed(x), embed(forget(y)), depth, g).refines))
    if adj.lhs.refines:
        # forget is monotone: embed(X) below Y drops back down
        res.monotone.append(("forget", fa_refines(forget(embed(x)), forget(y), depth).refines))
    return res


def galois_corpus(seed: int = 0, count: int = 100, depth: int = 2, g: int = 2) -> GaloisReport:
    from .corpus import galois_pairs

    pairs = [check_pair(i, x, y, depth, g) for i, (x, y) in enumerate(galois_pairs(seed, count))]
    return GaloisReport(seed, depth, g, pairs)

"""Seeded random automata for the algebraic law and translation checks.

All generators draw acyclic graphs over nodes ``q0, q1, ...`` whose edges
only go forward, with paths short enough that depth-2 contexts see every
behaviour.  The same seed always yields the same corpus.
"""

from __future__ import annotations

import random
from fractions import Fraction

from .automata import Fa, Pfa
from .terms import DEFAULT_REGISTRY, ONE, Registry, const_prob, split_weights

ALPHABET = ("a", "b")


def _layers(rng: random.Random, n: int, max_depth: int) -> list:
    """Layer index per node: node 0 in layer 0, layers nondecreasing."""
    layers = [0]
    for _ in range(1, n):
        layers.append(min(max_depth, layers[-1] + rng.choice((0, 1, 1))))
    return layers


def random_fa(
    rng: random.Random,
    max_nodes: int = 5,
    alphabet=ALPHABET,
    max_starts: int = 2,
    max_depth: int = 2,
    edge_prob: float = 0.5,
) -> Fa:
    """A random acyclic FA; every edge goes from one layer to a later one."""
    n = rng.randint(1, max_nodes)
    layers = _layers(rng, n, max_depth)
    names = [f"q{i}" for i in range(n)]
    roots = [i for i in range(n) if layers[i] == 0]
    starts = roots[: rng.randint(1, min(max_starts, len(roots)))]
    trans = set()
    for i in range(n):
        if i in roots and i not in starts:
            continue
        for j in range(n):
            if layers[j] > layers[i] and j not in starts and rng.random() < edge_prob:
                trans.add((names[i], rng.choice(alphabet), names[j]))
    return Fa(names, [names[i] for i in starts], trans)


def det_fa(rng: random.Random, max_nodes: int = 5, alphabet=ALPHABET, max_depth: int = 2) -> Fa:
    """A random FA with one start and at most one successor per action."""
    a = random_fa(rng, max_nodes, alphabet, 1, max_depth)
    seen, trans = set(), set()
    for n, x, m in sorted(a.transitions):
        if (n, x) not in seen:
            seen.add((n, x))
            trans.add((n, x, m))
    return Fa(a.nodes, a.starts, trans)


_CONST_SPLITS = {
    2: [(Fraction(1, 2), Fraction(1, 2)), (Fraction(1, 4), Fraction(3, 4)), (Fraction(1, 3), Fraction(2, 3))],
    3: [(Fraction(1, 4), Fraction(1, 4), Fraction(1, 2))],
}


def _random_split(rng: random.Random, targets, registry: Registry, groups: list, constants) -> dict:
    targets = sorted(targets)
    k = len(targets)
    if k == 1:
        return {targets[0]: ONE}
    options = [c for c in constants.get(k, [])]
    if options and rng.random() < 0.5:
        weights = [const_prob(w) for w in rng.choice(options)]
    else:
        grp = registry.fresh_group(k)
        groups.append(grp)
        weights = split_weights(grp)
    return dict(zip(targets, weights))


def pfa_from_fa(rng: random.Random, a: Fa, registry: Registry | None = None, constants=None) -> Pfa:
    """Weight an FA's nondeterminism with constants or fresh parameter groups."""
    registry = registry or DEFAULT_REGISTRY
    constants = _CONST_SPLITS if constants is None else constants
    groups: list = []
    start = _random_split(rng, a.starts, registry, groups, constants)
    trans = [(n, x, _random_split(rng, ms, registry, groups, constants)) for (n, x), ms in sorted(a.succ.items())]
    return Pfa(a.nodes, start, trans, groups)


def random_pfa(rng: random.Random, max_nodes: int = 5, alphabet=ALPHABET, max_depth: int = 2, registry=None, constants=None) -> Pfa:
    return pfa_from_fa(rng, random_fa(rng, max_nodes, alphabet, 2, max_depth), registry, constants)


# grid-friendly two-way splits only: used where the grid must be able to
# reproduce the weights (counit checks)
FLAT_SPLITS = {2: [(Fraction(1, 2), Fraction(1, 2))]}


def flat_pfa(rng: random.Random, max_nodes: int = 5, alphabet=ALPHABET, max_depth: int = 2, registry=None) -> Pfa:
    return random_pfa(rng, max_nodes, alphabet, max_depth, registry, FLAT_SPLITS)


# ---------------------------------------------------------------------------
# refinement-preserving edits


def resolve(rng: random.Random, a: Fa) -> Fa:
    """Drop some start nodes and some nondeterministic targets (keeping one of each).

    Fewer resolutions of the same choices can only remove behaviour, so the
    result refines ``a``.
    """
    starts = sorted(a.starts)
    keep_starts = set(rng.sample(starts, rng.randint(1, len(starts))))
    trans = set()
    for (n, x), ms in sorted(a.succ.items()):
        ms = sorted(ms)
        for m in rng.sample(ms, rng.randint(1, len(ms))):
            trans.add((n, x, m))
    nodes = a.nodes - (a.starts - keep_starts)
    trans = {t for t in trans if t[0] in nodes}
    return Fa(nodes, keep_starts, trans)


# ---------------------------------------------------------------------------
# named corpora


def galois_pairs(seed: int = 0, count: int = 100, max_nodes: int = 5) -> list:
    """``(X, Y)`` pairs: a third where ``X`` is ``forget(Y)`` widened, the rest independent."""
    from .galois import forget
    from .operators import fa_internal

    rng = random.Random(seed)
    out = []
    for i in range(count):
        y = flat_pfa(rng, max_nodes)
        if i % 3 == 0:
            fy = forget(y)
            x = fa_internal(fy, random_fa(rng, max(1, max_nodes - len(fy.nodes)))) if len(fy.nodes) < max_nodes else fy
        else:
            x = random_fa(rng, max_nodes)
        out.append((x, y))
    return out


def pfa_corpus(seed: int = 0, count: int = 50, max_nodes: int = 6, alphabet=ALPHABET) -> list:
    rng = random.Random(seed)
    return [random_pfa(rng, max_nodes, alphabet) for _ in range(count)]


def refinement_quads(seed: int = 0, count: int = 25, max_nodes: int = 4) -> list:
    """``(X, Y, P, Q, sync)`` with ``Y`` a resolution of ``X`` and ``Q`` of ``P``."""
    rng = random.Random(seed)
    out = []
    for _ in range(count):
        x = random_fa(rng, max_nodes)
        p = random_fa(rng, max_nodes)
        sync = frozenset(s for s in ALPHABET if rng.random() < 0.5)
        out.append((x, resolve(rng, x), p, resolve(rng, p), sync))
    return out


def congruence_fa_pairs(seed: int = 0, count: int = 50, max_nodes: int = 4) -> list:
    """``(X, Y, sync)`` pairs on which embedding commutes with parallel composition.

    Half synchronise on the shared alphabet with a deterministic right
    operand, half use disjoint alphabets and no synchronisation.
    """
    rng = random.Random(seed)
    out = []
    for i in range(count):
        if i % 2 == 0:
            x = random_fa(rng, max_nodes)
            y = det_fa(rng, max_nodes)
            out.append((x, y, frozenset(x.alphabet & y.alphabet)))
        else:
            x = random_fa(rng, max_nodes, ("a", "b"))
            y = random_fa(rng, max_nodes, ("c", "d"))
            out.append((x, y, frozenset()))
    return out


def congruence_pfa_pairs(seed: int = 0, count: int = 50, max_nodes: int = 4) -> list:
    rng = random.Random(seed)
    out = []
    for i in range(count):
        x, y = random_pfa(rng, max_nodes), random_pfa(rng, max_nodes)
        sync = frozenset(x.alphabet & y.alphabet) if i % 2 == 0 else frozenset()
        out.append((x, y, sync))
    return out

"""Composition operators on FA and PPFA: prefix, internal, probabilistic and
external choice, and synchronised parallel composition."""

from __future__ import annotations

from typing import Iterable

from .automata import TAU, AutomatonError, Fa, Pfa
from .terms import DEFAULT_REGISTRY, ONE, Registry, SymProb, grid_assignments, instantiate, split_weights, var_prob


class CompositionError(AutomatonError):
    """An operator cannot produce a well-formed automaton."""


STOP_NODE = "n0"


def fa_stop() -> Fa:
    return Fa({STOP_NODE}, {STOP_NODE}, ())


def pfa_stop() -> Pfa:
    return Pfa({STOP_NODE}, {STOP_NODE: ONE}, ())


def fresh_node(taken: Iterable[str], base: str = "n") -> str:
    taken = set(taken)
    k = 0
    while f"{base}{k}" in taken:
        k += 1
    return f"{base}{k}"


def pair(l: str, r: str) -> str:
    return f"({l},{r})"


def _disjoint_names(keep: frozenset, other: frozenset) -> dict:
    """Renaming for ``other`` so that it no longer clashes with ``keep``."""
    taken = set(keep) | set(other)
    mapping = {}
    for n in sorted(other & keep):
        new = n + "'"
        while new in taken:
            new += "'"
        taken.add(new)
        mapping[n] = new
    return mapping


def _check_action(a: str) -> None:
    if a == TAU:
        raise CompositionError("cannot prefix with the silent action")


def _check_sync(sync: Iterable[str]) -> frozenset:
    sync = frozenset(sync)
    if TAU in sync:
        raise CompositionError("the silent action cannot be synchronised")
    return sync


# ---------------------------------------------------------------------------
# FA


def fa_prefix(a: str, b: Fa) -> Fa:
    _check_action(a)
    s = fresh_node(b.nodes)
    return Fa(b.nodes | {s}, {s}, b.transitions | {(s, a, x) for x in b.starts})


def fa_internal(a: Fa, b: Fa) -> Fa:
    b = b.rename(_disjoint_names(a.nodes, b.nodes))
    return Fa(a.nodes | b.nodes, a.starts | b.starts, a.transitions | b.transitions)


def glue_substitution(starts_a: Iterable[str], starts_b: Iterable[str]) -> dict:
    """Each start node of either side mapped to the product start nodes replacing it."""
    starts_a, starts_b = sorted(starts_a), sorted(starts_b)
    sub = {sa: [pair(sa, sb) for sb in starts_b] for sa in starts_a}
    for sb in starts_b:
        sub[sb] = [pair(sa, sb) for sa in starts_a]
    return sub


def fa_external(a: Fa, b: Fa) -> Fa:
    b = b.rename(_disjoint_names(a.nodes, b.nodes))
    sub = glue_substitution(a.starts, b.starts)
    starts = {p for ps in sub.values() for p in ps}
    nodes = ((a.nodes | b.nodes) - a.starts - b.starts) | starts
    trans = set()
    for n, act, m in a.transitions | b.transitions:
        for src in sub.get(n, [n]):
            trans.add((src, act, m))
    return Fa(nodes, starts, trans)


def _pairs(starts, step, reachable_only: bool, all_pairs):
    """Node pairs to expand: every pair, or those reachable from ``starts``."""
    if not reachable_only:
        return sorted(all_pairs)
    seen, stack = set(starts), list(starts)
    while stack:
        for m in step(stack.pop()):
            if m not in seen:
                seen.add(m)
                stack.append(m)
    return sorted(seen)


def fa_parallel(a: Fa, b: Fa, sync: Iterable[str] = (), observe: bool = False, reachable_only: bool = False) -> Fa:
    sync = _check_sync(sync)

    def moves(nm):
        n, m = nm
        out = []
        for x, ls in a.out.get(n, ()):
            if x in sync:
                for y, ks in b.out.get(m, ()):
                    if y == x:
                        out += [(x if observe else TAU, (l, k)) for l in ls for k in ks]
            else:
                out += [(x, (l, m)) for l in ls]
        for y, ks in b.out.get(m, ()):
            if y not in sync:
                out += [(y, (n, k)) for k in ks]
        return out

    starts = [(l, r) for l in a.starts for r in b.starts]
    pairs = _pairs(starts, lambda nm: [t for _, t in moves(nm)], reachable_only, ((l, r) for l in a.nodes for r in b.nodes))
    trans = {(pair(*nm), x, pair(*t)) for nm in pairs for x, t in moves(nm)}
    return Fa((pair(*nm) for nm in pairs), (pair(*nm) for nm in starts), trans)


# ---------------------------------------------------------------------------
# PPFA


def pfa_prefix(a: str, b: Pfa) -> Pfa:
    _check_action(a)
    s = fresh_node(b.nodes)
    return Pfa(b.nodes | {s}, {s: ONE}, list(b.transitions) + [(s, a, dict(b.start))], b.groups)


def _weighted_union(a: Pfa, b: Pfa, wa: SymProb, groups: Iterable) -> Pfa:
    b = b.rename(_disjoint_names(a.nodes, b.nodes))
    start = {n: wa * w for n, w in a.start.items()}
    wb = ONE - wa
    start.update({n: wb * w for n, w in b.start.items()})
    return Pfa(a.nodes | b.nodes, start, list(a.transitions) + list(b.transitions), [*a.groups, *b.groups, *groups])


def pfa_internal(a: Pfa, b: Pfa, registry: Registry | None = None) -> Pfa:
    """``a`` with unknown probability ``X``, ``b`` with ``1 - X``; ``X`` fresh."""
    registry = registry or DEFAULT_REGISTRY
    x = registry.fresh(avoid=a.variables | b.variables)
    return _weighted_union(a, b, var_prob(x), [(x,)])


def pfa_prob_choice(a: Pfa, b: Pfa, p: SymProb, g: int = 4) -> Pfa:
    p = SymProb.coerce(p)
    known = [grp for grp in (*a.groups, *b.groups) if set(grp) <= p.variables]
    free = p.variables - {v for grp in known for v in grp}
    for psi in grid_assignments(known, free, g):
        val = instantiate(p, psi)
        if not 0 <= val <= 1:
            raise CompositionError(f"probability {p} evaluates to {val} outside [0,1]")
    return _weighted_union(a, b, p, [])


def pfa_external(a: Pfa, b: Pfa) -> Pfa:
    b = b.rename(_disjoint_names(a.nodes, b.nodes))
    sub = glue_substitution(a.start, b.start)
    start = {pair(sa, sb): wa * wb for sa, wa in a.start.items() for sb, wb in b.start.items()}
    nodes = ((a.nodes | b.nodes) - set(a.start) - set(b.start)) | set(start)
    trans: dict = {}
    for n, act, d in list(a.transitions) + list(b.transitions):
        for src in sub.get(n, [n]):
            if (src, act) in trans:
                raise CompositionError(
                    f"external choice offers {act!r} from both operands at {src}; "
                    "a PPFA node has at most one transition per action"
                )
            trans[(src, act)] = d
    return Pfa(nodes, start, trans, [*a.groups, *b.groups])


def _product(da: dict, db: dict) -> dict:
    return {pair(x, y): wx * wy for x, wx in da.items() for y, wy in db.items()}


def pfa_parallel(
    a: Pfa,
    b: Pfa,
    sync: Iterable[str] = (),
    registry: Registry | None = None,
    observe: bool = False,
    reachable_only: bool = False,
) -> Pfa:
    """``a ||_sync b``.

    Synchronised steps become ``TAU`` with the product distribution, other
    actions interleave with the partner frozen.  With ``observe=True`` a
    synchronised step keeps its action name instead, which is how a test
    context records the events it took part in.

    When several rules yield the same ``(node, label)`` (two synchronisations
    both hidden as ``TAU``, or both sides interleaving the same action), the
    alternatives are merged into one distribution split by fresh parameters.
    ``reachable_only`` keeps just the pairs reachable from the start pairs.
    """
    sync = _check_sync(sync)
    registry = registry or DEFAULT_REGISTRY

    def rules(nm):
        """``(label, kind, action, dist)`` per applicable rule; kind 0 sync, 1 left, 2 right."""
        n, m = nm
        out = []
        for x, da in a.out.get(n, ()):
            if x in sync:
                for y, db in b.out.get(m, ()):
                    if y == x:
                        out.append((x if observe else TAU, 0, x, _product(da, db)))
            else:
                out.append((x, 1, x, _product(da, {m: ONE})))
        for y, db in b.out.get(m, ()):
            if y not in sync:
                out.append((y, 2, y, _product({n: ONE}, db)))
        return out

    def step(nm):
        n, m = nm
        out = []
        for x, da in a.out.get(n, ()):
            if x in sync:
                out += [(l, k) for y, db in b.out.get(m, ()) if y == x for l in da for k in db]
            else:
                out += [(l, m) for l in da]
        for y, db in b.out.get(m, ()):
            if y not in sync:
                out += [(n, k) for k in db]
        return out

    starts = [(l, r) for l in a.start for r in b.start]
    pairs = _pairs(starts, step, reachable_only, ((l, r) for l in a.nodes for r in b.nodes))
    nodes = {pair(*nm) for nm in pairs}
    start = {pair(l, r): wl * wr for l, wl in a.start.items() for r, wr in b.start.items()}
    alts: dict = {}
    for nm in pairs:
        for label, kind, x, d in rules(nm):
            alts.setdefault((pair(*nm), label), []).append((kind, x, d))

    trans = []
    groups = [*a.groups, *b.groups]
    taken = set(a.variables | b.variables)
    for key in sorted(alts):
        options = sorted(alts[key], key=lambda t: (t[0], t[1]))
        if len(options) == 1:
            trans.append((*key, options[0][2]))
            continue
        grp = registry.fresh_group(len(options), avoid=taken)
        taken |= set(grp)
        groups.append(grp)
        merged: dict = {}
        for w, (_, _, d) in zip(split_weights(grp), options):
            for m, wm in d.items():
                merged[m] = merged.get(m, SymProb()) + w * wm
        trans.append((*key, merged))
    return Pfa(nodes, start, trans, groups)

"""Automata shared by the oracle and acceptance tests."""

from ppfa import compile_process
from ppfa.corpus import galois_pairs, pfa_corpus, random_fa
from ppfa.galois import embed
from ppfa.operators import pfa_internal, pfa_parallel
from ppfa.refinement import apply_context, enumerate_contexts

DSL_EXAMPLES = [
    "stop",
    "a.b.stop",
    "a.(b.stop +[3/4] c.stop)",
    "a.stop |~| b.stop",
    "a.stop [] b.stop",
    "(a.stop [] b.c.stop) +[p] (a.b.stop |~| c.stop)",
    "a.b.stop ||{a} a.c.stop",
    "a.stop ||{} a.stop",
    "(a.stop |~| b.stop) ||{a,b} (a.stop [] b.stop)",
    "a.(b.stop +[q] stop) [] c.(stop |~| d.stop)",
]


def oracle_corpus():
    import random

    out = [(f"dsl:{text}", compile_process(text)) for text in DSL_EXAMPLES]
    out += [(f"random:{i}", p) for i, p in enumerate(pfa_corpus(0, 50))]
    out += [(f"flat:{i}", y) for i, (_, y) in enumerate(galois_pairs(0, 30))]
    rng = random.Random(5)
    out += [(f"embed:{i}", embed(random_fa(rng, 5))) for i in range(20)]
    ps = pfa_corpus(1, 6, max_nodes=4)
    for i, p in enumerate(ps):
        for x in enumerate_contexts("ab", 2)[::5]:
            out.append((f"context:{i}:{x.index}", apply_context(p, x)))
        out.append((f"par:{i}", pfa_parallel(p, ps[i - 1], {"a"})))
        out.append((f"int:{i}", pfa_internal(p, p)))
    return out

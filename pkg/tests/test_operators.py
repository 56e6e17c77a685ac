import random
from fractions import Fraction

import pytest
from conftest import fa_a, fa_b
from hypothesis import given, settings
from hypothesis import strategies as st

from ppfa import Fa, Pfa, complete_trace_dist, fa_complete_traces
from ppfa.automata import TAU, fa_isomorphic, pfa_isomorphic, validate_pfa
from ppfa.corpus import random_pfa
from ppfa.galois import embed
from ppfa.operators import (
    CompositionError,
    fa_external,
    fa_internal,
    fa_parallel,
    fa_prefix,
    fa_stop,
    glue_substitution,
    pfa_external,
    pfa_internal,
    pfa_parallel,
    pfa_prefix,
    pfa_prob_choice,
    pfa_stop,
)
from ppfa.refinement import freeze, pfa_test_equal
from ppfa.terms import ONE, Registry, const_prob, var_prob

F = Fraction
P = var_prob("p")


def point(name, action=None, target=None):
    trans = [(name, action, {target: ONE})] if action else []
    nodes = {name, target} if action else {name}
    return Pfa(nodes, {name: ONE}, trans)


# --- two-start example ---------------------------------------------------


def test_two_start_example_internal():
    got = fa_internal(fa_a(), fa_b())
    assert got.starts == {"s1", "s2", "s"}
    assert got.transitions == {("s1", "a", "t1"), ("s2", "b", "t2"), ("s", "c", "t")}


def test_two_start_example_external():
    got = fa_external(fa_a(), fa_b())
    assert got.starts == {"(s1,s)", "(s2,s)"}
    assert got.transitions == {
        ("(s1,s)", "a", "t1"),
        ("(s2,s)", "b", "t2"),
        ("(s1,s)", "c", "t"),
        ("(s2,s)", "c", "t"),
    }


def test_two_start_example_parallel():
    got = fa_parallel(fa_a(), fa_b("a"), {"a"})
    assert got.starts == {"(s1,s)", "(s2,s)"}
    assert got.transitions == {
        ("(s1,s)", TAU, "(t1,t)"),
        ("(s2,s)", "b", "(t2,s)"),
        ("(s2,t)", "b", "(t2,t)"),
    }
    assert fa_complete_traces(got) == {(), ("b",)}


def test_glue_substitution_is_the_start_product():
    sub = glue_substitution({"s1", "s2"}, {"s"})
    assert sub == {"s1": ["(s1,s)"], "s2": ["(s2,s)"], "s": ["(s1,s)", "(s2,s)"]}


# --- prefix -----------------------------------------------------------------


def test_pfa_prefix_of_stop():
    got = pfa_prefix("a", pfa_stop())
    assert got.start == {"n1": ONE}
    assert got.trans == {("n1", "a"): {"n0": ONE}}


def test_pfa_prefix_migrates_start_distribution():
    q = pfa_prob_choice(point("s1"), point("s2"), P)
    got = pfa_prefix("a", q)
    (dist,) = [d for (n, a), d in got.trans.items() if a == "a"]
    assert dist == {"s1": P, "s2": ONE - P}


def test_fa_prefix_reaches_every_start():
    b = Fa({"x", "y"}, {"x", "y"}, [])
    got = fa_prefix("a", b)
    assert got.transitions == {("n0", "a", "x"), ("n0", "a", "y")}


def test_prefix_rejects_tau():
    with pytest.raises(CompositionError):
        fa_prefix(TAU, fa_stop())
    with pytest.raises(CompositionError):
        pfa_prefix(TAU, pfa_stop())


# --- choices ---------------------------------------------------------------


def test_pfa_internal_uses_a_fresh_parameter():
    reg = Registry()
    got = pfa_internal(point("sP"), point("sQ"), reg)
    assert got.start == {"sP": var_prob("v0"), "sQ": ONE - var_prob("v0")}
    assert sum(got.start.values(), const_prob(0)) == ONE
    assert got.groups == (("v0",),)


def test_pfa_internal_avoids_operand_variables():
    reg = Registry()
    a = Pfa({"s", "t", "u"}, {"s": ONE}, [("s", "a", {"t": var_prob("v0"), "u": ONE - var_prob("v0")})], [("v0",)])
    got = pfa_internal(a, point("w"), reg)
    assert "v0" not in got.start.get("w", ONE).variables
    assert len(got.variables) == 2


def test_internal_renames_clashing_nodes():
    got = pfa_internal(pfa_stop(), pfa_stop())
    assert got.nodes == {"n0", "n0'"}


def test_prob_choice_constants():
    got = pfa_prob_choice(point("sA"), point("sB"), const_prob(F(3, 4)))
    assert got.start == {"sA": F(3, 4), "sB": F(1, 4)}


def test_prob_choice_with_a_variable_is_internal_choice():
    a, b = pfa_prefix("a", pfa_stop()), pfa_prefix("b", pfa_stop())
    assert pfa_isomorphic(pfa_prob_choice(a, b, var_prob("q")), pfa_internal(a, b), variables="global")


def test_prob_choice_one_is_the_left_operand():
    a, b = pfa_prefix("a", pfa_stop()), pfa_prefix("b", pfa_stop())
    got = pfa_prob_choice(a, b, ONE)
    assert set(got.start) == set(a.start)
    assert pfa_test_equal(got, a, 2, 4)


def test_prob_choice_out_of_range():
    with pytest.raises(CompositionError):
        pfa_prob_choice(pfa_stop(), pfa_stop(), const_prob(F(3, 2)))
    with pytest.raises(CompositionError):
        pfa_prob_choice(pfa_stop(), pfa_stop(), 2 * P)


def test_external_with_stop_is_a_unit():
    a = fa_a()
    assert fa_isomorphic(fa_external(a, fa_stop()), a)


def test_pfa_external_disjoint_alphabets():
    got = pfa_external(point("sA", "a", "tA"), point("sB", "b", "tB"))
    assert got.start == {"(sA,sB)": ONE}
    assert set(got.trans) == {("(sA,sB)", "a"), ("(sA,sB)", "b")}
    assert set(complete_trace_dist(got)) == {("a",), ("b",)}


def test_pfa_external_collision_is_an_error():
    with pytest.raises(CompositionError, match="both operands"):
        pfa_external(point("sA", "a", "tA"), point("sB", "a", "tB"))


# --- parallel --------------------------------------------------------------


def test_pfa_parallel_synchronised_product():
    left = point("s", "a", "t")
    right = Pfa({"r", "x", "y"}, {"r": ONE}, [("r", "a", {"x": P, "y": ONE - P})])
    got = pfa_parallel(left, right, {"a"})
    assert got.trans == {("(s,r)", TAU): {"(t,x)": P, "(t,y)": ONE - P}}


def test_pfa_parallel_without_sync_interleaves():
    got = pfa_parallel(point("s", "a", "t"), point("r", "b", "u"))
    assert set(complete_trace_dist(got)) == {("a", "b"), ("b", "a")}


def test_pfa_parallel_merges_colliding_interleavings():
    reg = Registry()
    got = pfa_parallel(point("s", "a", "t"), point("r", "a", "u"), (), reg)
    dist = got.trans[("(s,r)", "a")]
    assert dist == {"(t,r)": var_prob("v0"), "(s,u)": ONE - var_prob("v0")}
    assert validate_pfa(got) == []


def test_parallel_rejects_tau_sync():
    with pytest.raises(CompositionError):
        fa_parallel(fa_stop(), fa_stop(), {TAU})


# --- properties -----------------------------------------------------------

seeds = st.integers(0, 100_000)


@given(seeds)
@settings(max_examples=30, deadline=None)
def test_operator_outputs_are_valid(seed):
    rng = random.Random(seed)
    a, b = random_pfa(rng, 4), random_pfa(rng, 4)
    sync = {x for x in "ab" if rng.random() < 0.5}
    outs = [
        pfa_prefix("a", a),
        pfa_internal(a, b),
        pfa_prob_choice(a, b, const_prob(F(1, 3))),
        pfa_parallel(a, b, sync),
    ]
    try:
        outs.append(pfa_external(a, b))
    except CompositionError:
        pass
    for p in outs:
        assert validate_pfa(p) == []


@given(seeds)
@settings(max_examples=30, deadline=None)
def test_parallel_commutes_and_associates_on_disjoint_alphabets(seed):
    rng = random.Random(seed)
    a = random_pfa(rng, 3, ("a",))
    b = random_pfa(rng, 3, ("b",))
    c = random_pfa(rng, 3, ("c",))
    assert pfa_isomorphic(pfa_parallel(a, b), pfa_parallel(b, a))
    assert pfa_isomorphic(pfa_parallel(pfa_parallel(a, b), c), pfa_parallel(a, pfa_parallel(b, c)))


@given(seeds)
@settings(max_examples=15, deadline=None)
def test_parallel_commutes_up_to_testing(seed):
    rng = random.Random(seed)
    a, b = random_pfa(rng, 3), random_pfa(rng, 3)
    sync = {x for x in "ab" if rng.random() < 0.5}
    assert pfa_test_equal(pfa_parallel(a, b, sync), pfa_parallel(b, a, sync), 2, 2)


def test_embed_of_internal_choice_has_the_same_support():
    flat = complete_trace_dist(embed(fa_internal(fa_a(), fa_b())))
    nested = complete_trace_dist(pfa_internal(embed(fa_a()), embed(fa_b())))
    assert set(flat) == set(nested) == {("a",), ("b",), ("c",)}


@given(seeds, st.sampled_from([(), ("a",), ("a", "b")]), st.booleans())
@settings(max_examples=30, deadline=None)
def test_reachable_product_keeps_the_reachable_part(seed, sync, observe):
    rng = random.Random(seed)
    p, q = random_pfa(rng, 4), random_pfa(rng, 4)
    full = pfa_parallel(p, q, sync, Registry(), observe)
    part = pfa_parallel(p, q, sync, Registry(), observe, reachable_only=True)
    assert part.nodes <= full.nodes
    # merged alternatives may get different fresh names, so compare the grid images
    assert _grid_image(part) == _grid_image(full)
    a, b = fa_a(), fa_b()
    assert fa_parallel(a, b, sync, reachable_only=True).nodes <= fa_parallel(a, b, sync).nodes


def _grid_image(p):
    dc = complete_trace_dist(p)
    return {freeze(dc.instantiate(psi)) for psi in dc.grid(2)}

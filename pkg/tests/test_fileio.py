import random

import pytest
from conftest import fa_a
from hypothesis import given, settings
from hypothesis import strategies as st

from ppfa import compile_process
from ppfa.automata import AutomatonError, normal_form, pfa_isomorphic
from ppfa.corpus import random_fa, random_pfa
from ppfa.fileio import FormatError, read_automaton, read_fa, read_pfa, write_fa, write_pfa
from ppfa.galois import embed
from ppfa.operators import fa_external, fa_parallel, pfa_internal

PFA_TEXT = """\
kind: pfa
nodes:
  s
  t
  u
alphabet:
  a
start:
  s = 1
trans:
  s --a--> {t: v0, u: 1 - v0}
vargroups:
  v0
"""


def test_pfa_text_round_trip():
    p = read_pfa(PFA_TEXT)
    assert write_pfa(p) == PFA_TEXT
    assert p.groups == (("v0",),)


def test_fa_text_uses_bare_nodes():
    text = write_fa(fa_a())
    assert "  s1\n  s2\n" in text and "  s1 --a--> t1\n" in text
    assert read_fa(text) == fa_a()


def test_product_and_primed_node_names():
    a = fa_parallel(fa_a(), fa_external(fa_a(), fa_a()))
    assert read_fa(write_fa(a)) == a
    p = normal_form(pfa_internal(compile_process("a.stop"), compile_process("a.stop")))
    assert read_pfa(write_pfa(p)) == p


def test_comments_and_inline_section_values():
    text = "# header\nkind: fa\nnodes:\n  s\n  # note\n  t\nstart: s\ntrans:\n  s --a--> t\n"
    assert read_fa(text).transitions == {("s", "a", "t")}


@pytest.mark.parametrize(
    "text, err",
    [
        ("kind: pfa\nnodes:\n  s\nstart:\n  s = 1/\n", FormatError),
        ("kind: pfa\nnodes:\n  s\n  t\nstart:\n  s = 1\ntrans:\n  s --a-> {t: 1}\n", FormatError),
        ("kind: pfa\nnodes:\n  s\nstart:\n  s = 1/2\n", AutomatonError),
        ("kind: fa\nnodes:\n  s\nstart:\n  s\nbogus:\n", FormatError),
        ("kind: fa\nnodes:\n  s\n  t\nalphabet:\n  b\nstart:\n  s\ntrans:\n  s --a--> t\n", FormatError),
        ("kind: fa\nnodes:\n  s\nstart:\n  s\ntrans:\n  s --a--> s\n", AutomatonError),
        ("kind: dfa\n", FormatError),
    ],
)
def test_bad_files(text, err):
    with pytest.raises(err):
        read_automaton(text)


def test_errors_name_the_line():
    with pytest.raises(FormatError, match="line 5"):
        read_pfa("kind: pfa\nnodes:\n  s\nstart:\n  s = 1/\n")


seeds = st.integers(0, 100_000)


@given(seeds)
@settings(max_examples=40, deadline=None)
def test_round_trips_are_bit_exact(seed):
    rng = random.Random(seed)
    p = random_pfa(rng, 6)
    text = write_pfa(p)
    assert read_pfa(text) == p and write_pfa(read_pfa(text)) == text
    x = random_fa(rng, 6)
    assert read_fa(write_fa(x)) == x and write_fa(read_fa(write_fa(x))) == write_fa(x)


@given(seeds)
@settings(max_examples=20, deadline=None)
def test_compiled_output_reloads_isomorphic(seed):
    rng = random.Random(seed)
    p = pfa_internal(random_pfa(rng, 4), embed(random_fa(rng, 3)))
    q = read_pfa(write_pfa(p))
    assert pfa_isomorphic(p, q)

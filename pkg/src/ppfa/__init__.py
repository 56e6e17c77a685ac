"""Parameterised probabilistic finite automata: composition, testing
refinement, and the connection to plain finite automata."""

from .automata import TAU, AutomatonError, Fa, Pfa, fa_isomorphic, is_det_test, is_dpfa, isomorphic, normal_form, pfa_isomorphic, validate_pfa
from .dsl import DslError, compile_process, compile_program, elaborate, parse_process, parse_program, render
from .fileio import FormatError, load, read_automaton, read_fa, read_pfa, write_automaton, write_fa, write_pfa
from .galois import (
    check_adjunction,
    check_congruence_embed,
    check_congruence_forget,
    check_counit,
    check_lemma_embed,
    check_unit,
    embed,
    forget,
    galois_corpus,
)
from .operators import (
    CompositionError,
    fa_external,
    fa_internal,
    fa_parallel,
    fa_prefix,
    fa_stop,
    pfa_external,
    pfa_internal,
    pfa_parallel,
    pfa_prefix,
    pfa_prob_choice,
    pfa_stop,
)
from .refinement import (
    TestContext,
    Verdict,
    enumerate_contexts,
    fa_refines,
    fa_test_equal,
    pfa_refines,
    pfa_test_equal,
    replay,
)
from .semantics import TraceDist, complete_trace_dist, enumerate_paths, fa_complete_traces, fa_traces, path_prob, trace_prob
from .terms import ONE, ZERO, Registry, SymProb, const_prob, parse_prob, render_prob, var_prob

__all__ = [name for name in dir() if not name.startswith("_")]

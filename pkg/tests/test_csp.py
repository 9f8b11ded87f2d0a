import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from src.csp import (
    CandidateRef, IllegalTransitionError, MalformedReferenceError, VariableRef,
    assert_value, build_instance, count_solutions, delete_candidate, first_solution,
    is_bivalue, iter_bits, linked,
)
from tests.conftest import cell, latin_square


def test_latin_square_shape(latin3):
    assert latin3.n_variables == 9
    assert latin3.n_atoms == 27
    assert latin3.initial_state.n_candidates == 27


def test_link_relation_is_symmetric_and_irreflexive(latin4):
    matrix = latin4.link_matrix()
    assert np.array_equal(matrix, matrix.T)
    assert not matrix.diagonal().any()


def test_linked_within_variable_and_constraint(latin3):
    assert linked(latin3, cell(1, 1, 1), cell(1, 1, 2))
    assert linked(latin3, cell(1, 1, 1), cell(1, 3, 1))
    assert linked(latin3, cell(1, 1, 1), cell(3, 1, 1))
    assert not linked(latin3, cell(1, 1, 1), cell(2, 2, 1))
    assert not linked(latin3, cell(1, 1, 1), cell(1, 2, 2))
    assert not linked(latin3, cell(1, 1, 1), cell(1, 1, 1))


def test_unknown_reference_rejected(latin3):
    with pytest.raises(MalformedReferenceError):
        latin3.atom_of(cell(4, 1, 1))
    with pytest.raises(MalformedReferenceError):
        latin3.index_of(VariableRef(0, (0, 0)))


def test_duplicate_domain_value_rejected():
    with pytest.raises(MalformedReferenceError):
        build_instance({VariableRef(0, (1,)): (1, 1)})


def test_self_link_rejected():
    v = VariableRef(0, (1,))
    with pytest.raises(MalformedReferenceError):
        build_instance({v: (1, 2)}, links=[(CandidateRef(v, 1), CandidateRef(v, 1))])


def test_shared_views_denote_one_atom():
    a, b = VariableRef(0, (1,)), VariableRef(1, (1,))
    inst = build_instance({a: (1, 2), b: ("x", "y")}, views=[(CandidateRef(a, 1), CandidateRef(b, "x"))])
    assert inst.n_atoms == 3
    assert inst.atom_of(CandidateRef(a, 1)) == inst.atom_of(CandidateRef(b, "x"))
    # sharing an atom links it to both variables' other values
    assert inst.linked(CandidateRef(a, 1), CandidateRef(b, "y"))


def test_assert_value_keeps_siblings_until_ecp(latin3):
    ks = assert_value(latin3.initial_state, cell(1, 1, 2))
    v = VariableRef(0, (1, 1))
    assert ks.value_of(v) == 2
    assert ks.is_decided(v)
    assert ks.candidates(v) == ()
    assert ks.has(cell(1, 1, 1))
    assert not ks.has(cell(1, 1, 2))


def test_assert_value_twice_is_illegal(latin3):
    ks = assert_value(latin3.initial_state, cell(1, 1, 2))
    with pytest.raises(IllegalTransitionError):
        assert_value(ks, cell(1, 1, 3))


def test_assert_absent_candidate_is_illegal(latin3):
    ks = delete_candidate(latin3.initial_state, cell(1, 1, 2))
    with pytest.raises(IllegalTransitionError):
        assert_value(ks, cell(1, 1, 2))


def test_delete_candidate(latin3):
    ks = delete_candidate(latin3.initial_state, cell(2, 2, 3))
    assert not ks.has(cell(2, 2, 3))
    assert ks.n_candidates == 26
    assert delete_candidate(ks, cell(2, 2, 3)) is ks
    assert latin3.initial_state.has(cell(2, 2, 3))


def test_is_bivalue(latin3):
    ks = delete_candidate(latin3.initial_state, cell(1, 1, 3))
    assert is_bivalue(ks, VariableRef(0, (1, 1)))
    assert not is_bivalue(ks, VariableRef(0, (1, 2)))


def test_counts_latin_squares():
    assert count_solutions(latin_square(3), 100) == 12
    assert count_solutions(latin_square(4), 1000) == 576
    assert count_solutions(latin_square(3), 5) == 5


def test_count_solutions_respects_givens():
    inst = latin_square(3, givens=[(1, 1, 1), (1, 2, 2), (2, 1, 2)])
    assert count_solutions(inst, 10) == 1
    solution = first_solution(inst)
    assert solution.bit_count() == 9


def test_inconsistent_givens_have_no_solution():
    inst = latin_square(3, givens=[(1, 1, 1), (1, 2, 1)])
    assert first_solution(inst) is None


def test_count_solutions_cap_must_be_positive(latin3):
    with pytest.raises(ValueError):
        count_solutions(latin3, 0)


def test_names(latin3):
    assert latin3.candidate_name(cell(2, 3, 1)) == "1r2c3"
    assert latin3.variable_name(VariableRef(0, (2, 3))) == "r2c3"


@settings(max_examples=50, deadline=None)
@given(st.integers(min_value=0, max_value=2**64 - 1))
def test_iter_bits_recovers_mask(mask):
    assert sum(1 << b for b in iter_bits(mask)) == mask
    assert list(iter_bits(mask)) == sorted(iter_bits(mask))

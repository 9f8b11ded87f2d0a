import pytest

from src.basic_rules import brt_fixpoint
from src.csp import CspError, delete_candidate, iter_bits
from src.patterns import PatternKind, validate_pattern
from src.sudoku import candidate, solution_candidates
from src.theories import whip_theory
from src.trial_error import (
    NoWitnessError, Outcome, braid_from_trace, te_eliminations, te_trial, te_solve,
)
from tests.conftest import cell, latin_square


def stuck_state(csp):
    ks, _ = brt_fixpoint(csp.instance, csp.initial_state)
    assert ks.contradiction is None and not ks.is_solved
    return ks


def test_trial_of_true_candidate_never_contradicts(hard_csp, hard_solution):
    inst = hard_csp.instance
    ks = stuck_state(hard_csp)
    truth = solution_candidates(hard_csp, hard_solution)
    for atom in list(iter_bits(ks.present & truth))[:10]:
        trace = te_trial(inst, ks, None, inst.atom_ref(atom))
        assert trace.outcome is Outcome.QUIESCENCE
        assert not trace.contradicts
        with pytest.raises(NoWitnessError):
            braid_from_trace(inst, ks, trace)


def test_trial_leaves_state_untouched(hard_csp):
    inst = hard_csp.instance
    ks = stuck_state(hard_csp)
    before = (ks.values, ks.present)
    te_trial(inst, ks, None, inst.atom_ref(next(iter_bits(ks.present))))
    assert (ks.values, ks.present) == before


def test_trial_of_absent_candidate_fails(singles_csp):
    ks, _ = brt_fixpoint(singles_csp.instance, singles_csp.initial_state)
    with pytest.raises(CspError):
        te_trial(singles_csp.instance, ks, None, candidate(4, 1, 1))


def test_eliminations_are_false_and_extract_valid_braids(hard_csp, hard_solution):
    inst = hard_csp.instance
    ks = stuck_state(hard_csp)
    truth = solution_candidates(hard_csp, hard_solution)
    traces = te_eliminations(inst, ks)
    assert traces
    for trace in traces:
        assert trace.contradicts
        assert not truth >> inst.atom_of(trace.assumed) & 1
        braid = braid_from_trace(inst, ks, trace)
        assert braid.kind is PatternKind.ZT_BRAID
        assert validate_pattern(inst, ks, braid, trace.assumed)


def test_trace_lines_are_prefixed(hard_csp):
    inst = hard_csp.instance
    ks = stuck_state(hard_csp)
    trace = te_eliminations(inst, ks)[0]
    lines = trace.lines(inst)
    prefix = f"TE[{inst.candidate_name(trace.assumed)}]"
    assert all(line.startswith(prefix) for line in lines)
    assert lines[-1].endswith("contradiction")


def test_te_solve_is_sound(hard_csp, hard_solution):
    inst = hard_csp.instance
    truth = solution_candidates(hard_csp, hard_solution)
    result = te_solve(inst)
    assert result.final.contradiction is None
    assert not result.final.values & ~truth
    for trace in result.trials:
        assert not truth >> inst.atom_of(trace.assumed) & 1
    if result.solved:
        assert hard_csp.grid_of(result.final) == hard_solution


def test_te_solve_on_solved_puzzle_needs_no_trial(singles_csp):
    result = te_solve(singles_csp.instance)
    assert result.solved
    assert result.trials == []


def test_te_over_a_pattern_theory():
    # r1c2, r1c3 in {1, 2}: T&E over L2 refutes 1r1c1 as well
    inst = latin_square(3)
    ks = inst.initial_state
    for ref in (cell(1, 2, 3), cell(1, 3, 3)):
        ks = delete_candidate(ks, ref)
    trace = te_trial(inst, ks, whip_theory(2), cell(1, 1, 1))
    assert trace.contradicts
    assert trace.theory == "L2"
    with pytest.raises(NoWitnessError):
        braid_from_trace(inst, ks, trace)

import pytest

from src.basic_rules import brt_fixpoint
from src.campaigns import (
    CampaignReport, _assertion_check, compare_te_and_braids, run_confluence, run_ladder, run_soundness,
    run_te_equivalence,
)
from src.csp import is_bivalue
from src.sudoku import RC, oracle_solution, parse_grid, solution_candidates
from src.theories import BRT, Perturbation, Strategy, braid_theory, next_elimination
from tests.conftest import HARD_PUZZLE, SINGLES_PUZZLE


def test_report_lines():
    report = CampaignReport("demo", puzzles=2, checked=5)
    assert report.passed
    report.violation("p1", "something broke")
    assert not report.passed
    lines = report.lines()
    assert lines[0] == "campaign: demo"
    assert "violations: 1" in lines
    assert lines[-1] == "VIOLATION p1 something broke"


def test_soundness_on_singles():
    report = run_soundness([parse_grid(SINGLES_PUZZLE)], BRT)
    assert report.passed
    assert report.puzzles == 1
    assert report.checked > 0


def test_soundness_skips_non_unique_grids():
    report = run_soundness([parse_grid("." * 81)], BRT)
    assert report.puzzles == 0
    assert report.notes["skipped (not uniquely solvable)"] == 1


@pytest.mark.slow
def test_soundness_with_braids():
    report = run_soundness([parse_grid(HARD_PUZZLE)], braid_theory(3))
    assert report.passed, report.violations


def test_te_and_braids_agree_at_stuck_state(hard_csp):
    inst = hard_csp.instance
    ks, _ = brt_fixpoint(inst, hard_csp.initial_state)
    te_targets, braid_targets, problems = compare_te_and_braids(inst, ks)
    assert problems == []
    assert te_targets == braid_targets
    assert te_targets


@pytest.mark.slow
def test_te_equivalence_campaign():
    report = run_te_equivalence([parse_grid(HARD_PUZZLE)])
    assert report.passed, report.violations


def test_confluence_campaign_on_singles():
    report = run_confluence([parse_grid(SINGLES_PUZZLE)], [1, 2], 2, seed=1, perturbations=2)
    assert report.passed
    assert report.checked == 2
    assert report.notes["stability checks"] == 0


@pytest.mark.slow
def test_confluence_with_stability_checks():
    report = run_confluence([parse_grid(HARD_PUZZLE)], [2], 2, seed=3, perturbations=3)
    assert report.passed, report.violations


def test_ladder_campaign_on_singles():
    report = run_ladder([parse_grid(SINGLES_PUZZLE)], 2)
    assert report.passed
    assert report.checked == 2


def test_assertion_perturbation_after_emptying_a_bivalue_cell(hard_csp):
    inst = hard_csp.instance
    ks, _ = brt_fixpoint(inst, hard_csp.initial_state)
    chosen = next_elimination(inst, ks, braid_theory(2), Strategy())
    assert chosen is not None
    truth = solution_candidates(hard_csp, oracle_solution(parse_grid(HARD_PUZZLE)))
    z = inst.atom_of(chosen.target)
    bivalue = [
        v for v in inst.variables
        if v.family == RC and is_bivalue(ks, v)
        and not any(inst.atom_of(c) == z for c in ks.candidates(v))
    ]
    assert bivalue
    false_ref = next(c for c in ks.candidates(bivalue[0]) if not truth >> inst.atom_of(c) & 1)
    checked = _assertion_check(inst, ks, Perturbation("delete", false_ref), chosen.witness, chosen.target)
    assert checked is not None
    assertion, stable = checked
    assert assertion.action == "assert"
    assert truth >> inst.atom_of(assertion.candidate) & 1
    assert stable


@pytest.mark.slow
def test_confluence_counts_assertion_perturbations():
    report = run_confluence([parse_grid(HARD_PUZZLE)], [2], 2, seed=3, perturbations=6)
    assert report.passed, report.violations
    assert report.notes["assertion perturbations"] <= report.notes["stability checks"]

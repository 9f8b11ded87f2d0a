"""
Verification campaigns over puzzle corpora
soundness, T&E / braid equivalence, confluence with stability spot-checks,
and the whip/braid ladder checks.  Each campaign returns a CampaignReport
whose violations carry enough text to replay the counterexample.
"""
import logging
from dataclasses import dataclass, field

import numpy as np
from tqdm import tqdm

from src.basic_rules import BasicRuleEvent, EventKind, brt_fixpoint
from src.csp import CspError, delete_candidate, iter_bits
from src.patterns import converted, format_witness, search_braid, validate_pattern
from src.sudoku import build_csp, oracle_solution, solution_candidates, solution_count
from src.theories import (
    Ladder, Perturbation, check_confluence, check_stability, braid_theory, next_elimination,
    random_strategies, rate, replay, solve, state_digest, whip_theory,
)
from src.trial_error import NoWitnessError, braid_from_trace, te_eliminations, te_solve

logger = logging.getLogger(__name__)

CAMPAIGNS = ("soundness", "te-equivalence", "confluence", "ladder")


@dataclass
class CampaignReport:
    name: str
    puzzles: int = 0
    checked: int = 0
    violations: list = field(default_factory=list)
    notes: dict = field(default_factory=dict)

    @property
    def passed(self):
        return not self.violations

    def violation(self, puzzle, message):
        logger.warning("%s violation on %s: %s", self.name, puzzle, message)
        self.violations.append(f"{puzzle} {message}")

    def lines(self):
        out = [
            f"campaign: {self.name}",
            f"puzzles: {self.puzzles}",
            f"checks: {self.checked}",
            f"violations: {len(self.violations)}",
        ]
        out += [f"note {key}: {value}" for key, value in sorted(self.notes.items())]
        out += [f"VIOLATION {v}" for v in self.violations]
        return out


def _unique(grid):
    return grid.consistent and solution_count(grid, 2) == 1


# ─────────────────────────────────────────────────────────────────────────────
# Soundness and subsumption
# ─────────────────────────────────────────────────────────────────────────────

def run_soundness(grids, theory, strategy=None, progress=False):
    """
    No rule application removes a candidate of the oracle solution; every
    pattern witness validates in its state, and its whip / braid conversions
    validate too.  T&E eliminations are checked the same way.
    """
    report = CampaignReport("soundness")
    skipped = 0
    for grid in tqdm(grids, disable=not progress, desc="soundness"):
        if not _unique(grid):
            skipped += 1
            continue
        report.puzzles += 1
        puzzle = grid.to_line()
        csp = build_csp(grid)
        inst = csp.instance
        truth = solution_candidates(csp, oracle_solution(grid))

        path = solve(inst, theory, strategy)
        for before, app in path.walk(inst):
            report.checked += 1
            event = app.event
            if isinstance(event, BasicRuleEvent):
                atom = inst.atom_of(event.subject) if event.kind is not EventKind.CD else None
                if event.kind is EventKind.ECP and truth >> atom & 1:
                    report.violation(puzzle, f"ECP removed solution candidate {inst.candidate_name(atom)}")
                elif event.kind is EventKind.S and not truth >> atom & 1:
                    report.violation(puzzle, f"S asserted false candidate {inst.candidate_name(atom)}")
                elif event.kind is EventKind.CD:
                    report.violation(puzzle, f"contradiction on {inst.variable_name(event.subject)}")
                continue

            witness = event.witness
            line = format_witness(inst, witness)
            if truth >> inst.atom_of(event.target) & 1:
                report.violation(puzzle, f"eliminated a solution candidate: {line}")
            if not validate_pattern(inst, before, witness, event.target):
                report.violation(puzzle, f"witness does not validate: {line}")
            for general in converted(inst, before, witness):
                report.checked += 1
                if not validate_pattern(inst, before, general, event.target):
                    report.violation(puzzle, f"{line} converts to invalid {format_witness(inst, general)}")

        if path.final.values & ~truth:
            report.violation(puzzle, "final state holds a false value")
        if not replay(inst, path):
            report.violation(puzzle, "path does not replay")

        for trace in te_solve(inst).trials:
            report.checked += 1
            if truth >> inst.atom_of(trace.assumed) & 1:
                report.violation(puzzle, f"T&E eliminated solution candidate {inst.candidate_name(trace.assumed)}")
    report.notes["skipped (not uniquely solvable)"] = skipped
    return report


# ─────────────────────────────────────────────────────────────────────────────
# T&E and braids
# ─────────────────────────────────────────────────────────────────────────────

def compare_te_and_braids(inst, ks):
    """
    At one BRT-stuck state: (T&E targets, braid targets, extraction problems).
    Braid targets come from an unfiltered unbounded braid search.
    """
    problems = []
    te_targets = set()
    for trace in te_eliminations(inst, ks):
        atom = inst.atom_of(trace.assumed)
        te_targets.add(atom)
        try:
            witness = braid_from_trace(inst, ks, trace)
        except NoWitnessError as exc:
            problems.append(f"no braid extracted for {inst.candidate_name(atom)}: {exc}")
            continue
        if not validate_pattern(inst, ks, witness, trace.assumed):
            problems.append(f"extracted braid does not validate: {format_witness(inst, witness)}")
    braid_targets = {
        atom for atom in iter_bits(ks.present)
        if search_braid(inst, ks, inst.atom_ref(atom), None, prefilter=False) is not None
    }
    return te_targets, braid_targets, problems


def run_te_equivalence(grids, progress=False):
    """T&E(BRT) and unbounded zt-braids eliminate the same candidates at every stuck state."""
    report = CampaignReport("te-equivalence")
    unsolved = 0
    for grid in tqdm(grids, disable=not progress, desc="te-equivalence"):
        report.puzzles += 1
        puzzle = grid.to_line()
        inst = build_csp(grid).instance
        ks, _ = brt_fixpoint(inst, inst.initial_state)
        while ks.contradiction is None and not ks.is_solved:
            te_targets, braid_targets, problems = compare_te_and_braids(inst, ks)
            report.checked += 1
            for problem in problems:
                report.violation(puzzle, problem)
            if te_targets != braid_targets:
                names = sorted(inst.candidate_name(a) for a in te_targets ^ braid_targets)
                report.violation(puzzle, f"T&E and braids disagree on {', '.join(names)}")
            if not te_targets:
                unsolved += 1
                break
            ks, _ = brt_fixpoint(inst, delete_candidate(ks, inst.atom_ref(min(te_targets))))
    report.notes["stuck for T&E"] = unsolved
    return report


# ─────────────────────────────────────────────────────────────────────────────
# Confluence and stability
# ─────────────────────────────────────────────────────────────────────────────

def _assertion_check(inst, before, perturbation, witness, z):
    """
    Apply ``perturbation`` and the ECP deletions BRT makes next; the first
    single BRT then asserts is checked as an assertion perturbation.
    Returns None when BRT asserts nothing before quiescence or contradiction.
    """
    mid = perturbation.apply(before)
    _, events = brt_fixpoint(inst, mid)
    for event in events:
        if event.kind is EventKind.S:
            assertion = Perturbation.from_event(event)
            return assertion, check_stability(inst, mid, witness, z, assertion)
        if event.kind is EventKind.CD:
            return None
        mid = delete_candidate(mid, event.subject)
    return None


def _stability_checks(inst, theory, rng, budget):
    """
    Perturb states along the default path with eliminations other strategies
    pick, and with the first value BRT asserts after such an elimination.
    """
    done, asserted, failures = 0, 0, []
    path = solve(inst, theory)
    for before, app in path.walk(inst):
        if done >= budget:
            break
        if isinstance(app.event, BasicRuleEvent):
            continue
        other = random_strategies(theory, 1, int(rng.integers(2**31)))[0]
        elimination = next_elimination(inst, before, theory, other)
        if elimination is None or inst.atom_of(elimination.target) == inst.atom_of(app.event.target):
            continue
        witness, z = app.event.witness, app.event.target
        done += 1
        perturbation = Perturbation.from_elimination(elimination)
        if not check_stability(inst, before, witness, z, perturbation):
            failures.append(
                f"{format_witness(inst, witness)} lost after deleting "
                f"{inst.candidate_name(perturbation.candidate)}")
        checked = _assertion_check(inst, before, perturbation, witness, z)
        if checked is None:
            continue
        done += 1
        asserted += 1
        assertion, stable = checked
        if not stable:
            failures.append(
                f"{format_witness(inst, witness)} lost after asserting "
                f"{inst.candidate_name(assertion.candidate)}")
    return done, asserted, failures


def run_confluence(grids, levels, n_strategies, seed, perturbations=0, progress=False):
    """
    Every braid theory M_n reaches one final state under random strategies;
    ``perturbations`` stability spot-checks are spread over the runs.
    """
    report = CampaignReport("confluence")
    rng = np.random.default_rng(seed)
    runs = max(1, len(grids) * len(levels))
    per_run = -(-perturbations // runs) if perturbations else 0
    stability_done = assertion_done = 0
    for grid in tqdm(grids, disable=not progress, desc="confluence"):
        report.puzzles += 1
        puzzle = grid.to_line()
        inst = build_csp(grid).instance
        for n in levels:
            theory = braid_theory(n)
            strategies = random_strategies(theory, n_strategies, int(rng.integers(2**31)))
            confluent, digests = check_confluence(inst, theory, strategies)
            report.checked += 1
            if not confluent:
                described = "; ".join(f"{s.describe()} -> {d[:12]}" for s, d in zip(strategies, digests))
                report.violation(puzzle, f"{theory.name} not confluent: {described}")
            if per_run and stability_done < perturbations:
                done, asserted, failures = _stability_checks(inst, theory, rng, min(per_run, perturbations - stability_done))
                stability_done += done
                assertion_done += asserted
                report.checked += done
                for failure in failures:
                    report.violation(puzzle, f"{theory.name} stability: {failure}")
    report.notes["stability checks"] = stability_done
    report.notes["assertion perturbations"] = assertion_done
    return report


# ─────────────────────────────────────────────────────────────────────────────
# Ladders
# ─────────────────────────────────────────────────────────────────────────────

def run_ladder(grids, cap, progress=False):
    """M_1 and L_1 reach the same final state; braid rating never exceeds whip rating."""
    report = CampaignReport("ladder")
    for grid in tqdm(grids, disable=not progress, desc="ladder"):
        if not _unique(grid):
            continue
        report.puzzles += 1
        puzzle = grid.to_line()
        inst = build_csp(grid).instance
        l1 = state_digest(solve(inst, whip_theory(1)).final)
        m1 = state_digest(solve(inst, braid_theory(1)).final)
        report.checked += 1
        if l1 != m1:
            report.violation(puzzle, "M1 and L1 final states differ")
        try:
            whip = rate(inst, Ladder.WHIP, cap)
            braid = rate(inst, Ladder.BRAID, cap)
        except CspError as exc:
            report.violation(puzzle, f"rating failed: {exc}")
            continue
        report.checked += 1
        if braid is None and whip is not None or (braid is not None and whip is not None and braid > whip):
            report.violation(puzzle, f"braid rating {braid} above whip rating {whip}")
    return report

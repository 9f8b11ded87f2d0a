"""
Trial-and-Error
The T&E(T, Z) procedure, the T&E(T) solver, and extraction of a zt-braid
from a contradiction trace.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass, field, replace
from enum import Enum
from typing import Any

from src.basic_rules import (
    BasicRuleEvent, EventKind, brt_fixpoint, format_event, propagates_to_contradiction,
)
from src.csp import CandidateRef, CspError, CspInstance, KnowledgeState, iter_bits
from src.patterns import PatternKind, PatternWitness, build_witness, format_witness

logger = logging.getLogger(__name__)


class NoWitnessError(CspError):
    """A trace cannot be turned into a braid (no contradiction, or not a BRT trace)."""


class Outcome(str, Enum):
    CONTRADICTION = "contradiction"
    QUIESCENCE = "quiescence"


@dataclass(frozen=True)
class TeTrace:
    assumed: CandidateRef
    events: tuple[Any, ...]
    outcome: Outcome
    theory: str = "BRT"

    @property
    def contradicts(self) -> bool:
        return self.outcome is Outcome.CONTRADICTION

    def lines(self, inst: CspInstance) -> list[str]:
        prefix = f"TE[{inst.candidate_name(self.assumed)}]"
        out = [f"{prefix} assert {inst.candidate_name(self.assumed)}"]
        for event in self.events:
            if isinstance(event, BasicRuleEvent):
                out.append(f"{prefix} {format_event(inst, event)}")
            else:
                out.append(f"{prefix} {format_witness(inst, event.witness)}")
        out.append(f"{prefix} {self.outcome.value}")
        return out


@dataclass
class TeResult:
    solved: bool
    final: KnowledgeState
    trials: list[TeTrace] = field(default_factory=list)


def _is_basic(theory) -> bool:
    return theory is None or getattr(theory, "is_basic", False)


def _hypothesis(ks: KnowledgeState, atom: int) -> KnowledgeState:
    """Copy of ``ks`` with ``atom`` asserted as a value."""
    bit = 1 << atom
    return replace(ks, values=ks.values | bit, present=ks.present & ~bit)


def te_trial(inst: CspInstance, ks: KnowledgeState, theory, z: CandidateRef) -> TeTrace:
    """
    Assert ``z`` in a copy of ``ks`` and run ``theory`` (None or BRT for the
    basic procedure) to quiescence or contradiction.  ``ks`` is never modified.
    """
    atom = inst.atom_of(z)
    if not ks.present >> atom & 1:
        raise CspError(f"{inst.candidate_name(z)} is not a candidate")
    trial = _hypothesis(ks, atom)
    if _is_basic(theory):
        final, events = brt_fixpoint(inst, trial)
        events = tuple(events)
        name = "BRT"
    else:
        from src.theories import default_strategy, solve

        path = solve(inst, theory, default_strategy(theory), initial=trial)
        final = path.final
        events = tuple(app.event for app in path.applications)
        name = theory.name
    outcome = Outcome.CONTRADICTION if final.contradiction is not None else Outcome.QUIESCENCE
    logger.debug("T&E %s on %s: %s after %d events", name, inst.candidate_name(z), outcome.value, len(events))
    return TeTrace(z, events, outcome, name)


def _close(inst: CspInstance, ks: KnowledgeState, theory) -> KnowledgeState:
    if _is_basic(theory):
        return brt_fixpoint(inst, ks)[0]
    from src.theories import default_strategy, solve

    return solve(inst, theory, default_strategy(theory), initial=ks).final


def te_solve(inst: CspInstance, ks: KnowledgeState | None = None, theory=None) -> TeResult:
    """
    T&E(T): apply ``theory`` whenever it applies and trial the remaining
    candidates in dense order whenever it does not.  Only contradiction
    trials are kept in the result.
    """
    ks = _close(inst, ks or inst.initial_state, theory)
    trials: list[TeTrace] = []
    basic = _is_basic(theory)
    while ks.contradiction is None and not ks.is_solved:
        for atom in iter_bits(ks.present):
            if basic and not propagates_to_contradiction(inst, ks.values | 1 << atom, ks.present & ~(1 << atom)):
                continue
            trace = te_trial(inst, ks, theory, inst.atom_ref(atom))
            if trace.contradicts:
                trials.append(trace)
                ks = _close(inst, replace(ks, present=ks.present & ~(1 << atom)), theory)
                break
        else:
            break
    logger.info("T&E solve: solved=%s after %d eliminations", ks.is_solved, len(trials))
    return TeResult(ks.is_solved, ks, trials)


def te_eliminations(inst: CspInstance, ks: KnowledgeState) -> list[TeTrace]:
    """Contradiction traces of every T&E(BRT)-eliminable candidate of ``ks``."""
    traces = []
    for atom in iter_bits(ks.present):
        if propagates_to_contradiction(inst, ks.values | 1 << atom, ks.present & ~(1 << atom)):
            traces.append(te_trial(inst, ks, None, inst.atom_ref(atom)))
    return traces


def braid_from_trace(inst: CspInstance, ks: KnowledgeState, trace: TeTrace) -> PatternWitness:
    """
    Rebuild a zt-braid with target ``trace.assumed`` from a BRT contradiction
    trace taken on ``ks``.

    Each assertion R_k of the trace becomes a step when the other candidates
    of its variable in ``ks`` are all linked to Z or an earlier right
    candidate; its left candidate is the earliest eliminated of those.  Other
    assertions are excised.  The variable flagged by CD closes the braid with
    its last eliminated candidate.
    """
    if not trace.contradicts:
        raise NoWitnessError(f"T&E on {inst.candidate_name(trace.assumed)} ended without contradiction")
    if trace.theory != "BRT":
        raise NoWitnessError("braids are extracted from BRT traces only")

    links = inst.links
    z = inst.atom_of(trace.assumed)
    justifiers = [z]
    blocked = links[z]
    eliminated: dict[int, tuple[int, int]] = {}
    raw: list[tuple[int, int, int | None, int]] = []

    def justification(left: int) -> int:
        cause = eliminated.get(left, (0, -1))[1]
        if cause in justifiers and links[left] >> cause & 1:
            return cause
        return next(j for j in justifiers if links[left] >> j & 1)

    def order_key(atom: int) -> tuple[int, int]:
        return eliminated.get(atom, (len(trace.events), 0))[0], atom

    for position, event in enumerate(trace.events):
        if event.kind is EventKind.ECP:
            eliminated[inst.atom_of(event.subject)] = (position, inst.atom_of(event.cause))
            continue
        index = inst.index_of(event.subject if event.kind is EventKind.CD else event.subject.variable)
        mask = inst.var_masks[index]
        cands = 0 if ks.values & mask else ks.present & mask
        eligible = cands & blocked
        compatible = cands & ~blocked

        if event.kind is EventKind.S:
            right = inst.atom_of(event.subject)
            if compatible != 1 << right or not eligible:
                logger.debug("excising %s from the braid on %s",
                             inst.candidate_name(right), inst.candidate_name(z))
                continue
            left = min(iter_bits(eligible), key=order_key)
            raw.append((index, left, right, justification(left)))
            justifiers.append(right)
            blocked |= links[right]
            continue

        # CD
        if compatible or not eligible:
            raise NoWitnessError(
                f"contradiction on {inst.variable_name(index)} is not reachable from {inst.candidate_name(z)}")
        left = max(iter_bits(eligible), key=order_key)
        raw.append((index, left, None, justification(left)))
        return build_witness(inst, ks, trace.assumed, PatternKind.ZT_BRAID, raw)

    raise NoWitnessError("trace has no contradiction event")

"""
Basic Resolution Theory (BRT)
ECP eliminations, singles (S) and contradiction detection (CD), and their fixpoint.
In Sudoku, S on the rc family is the Naked Single and S on rn/cn/bn the Hidden Single.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass, replace
from enum import Enum
from typing import Sequence

from src.csp import (
    CandidateRef, CspInstance, KnowledgeState, VariableRef, assert_value, iter_bits,
)

logger = logging.getLogger(__name__)


class EventKind(str, Enum):
    ECP = "ECP"
    S = "S"
    CD = "CD"


@dataclass(frozen=True)
class BasicRuleEvent:
    kind: EventKind
    subject: CandidateRef | VariableRef
    cause: CandidateRef | None = None


def format_event(inst: CspInstance, event: BasicRuleEvent) -> str:
    if event.kind is EventKind.ECP:
        return (f"ECP {inst.candidate_name(event.subject)} "
                f"caused-by {inst.candidate_name(event.cause)}")
    if event.kind is EventKind.S:
        return f"S {inst.candidate_name(event.subject)}"
    return f"CD {inst.variable_name(event.subject)}"


def _variable_order(inst: CspInstance, variable_order: Sequence[int] | None) -> list[int]:
    if variable_order is None:
        return list(range(inst.n_variables))
    order = list(variable_order)
    if sorted(order) != list(range(inst.n_variables)):
        raise ValueError("variable_order must be a permutation of the variable indices")
    return order


# ─────────────────────────────────────────────────────────────────────────────
# Single rules
# ─────────────────────────────────────────────────────────────────────────────

def apply_ecp(inst: CspInstance, ks: KnowledgeState) -> tuple[KnowledgeState, list[BasicRuleEvent]]:
    """Delete every candidate linked to a decided value."""
    present = ks.present
    events = []
    for value in iter_bits(ks.values):
        dead = present & inst.links[value]
        if not dead:
            continue
        present &= ~dead
        cause = inst.atom_ref(value)
        events.extend(BasicRuleEvent(EventKind.ECP, inst.atom_ref(a), cause) for a in iter_bits(dead))
    if not events:
        return ks, events
    return replace(ks, present=present), events


def apply_single(
    inst: CspInstance, ks: KnowledgeState, variable_order: Sequence[int] | None = None,
) -> tuple[KnowledgeState, BasicRuleEvent | None]:
    """Assert the candidate of the first open variable that has exactly one."""
    for index in _variable_order(inst, variable_order):
        mask = inst.var_masks[index]
        if ks.values & mask:
            continue
        cands = ks.present & mask
        if cands.bit_count() == 1:
            ref = inst.view(cands.bit_length() - 1, index)
            return assert_value(ks, ref), BasicRuleEvent(EventKind.S, ref)
    return ks, None


def _is_broken(inst: CspInstance, values: int, present: int, index: int) -> bool:
    mask = inst.var_masks[index]
    decided = values & mask
    if decided:
        return bool(decided & (decided - 1))
    return not present & mask


def detect_contradiction(
    inst: CspInstance, ks: KnowledgeState, variable_order: Sequence[int] | None = None,
) -> KnowledgeState:
    """
    Flag the first open variable left without candidates.  A variable holding
    two different values (duplicate givens) is flagged as well.
    """
    if ks.contradiction is not None:
        return ks
    for index in _variable_order(inst, variable_order):
        if _is_broken(inst, ks.values, ks.present, index):
            return replace(ks, contradiction=inst.variables[index])
    return ks


# ─────────────────────────────────────────────────────────────────────────────
# Fixpoint
# ─────────────────────────────────────────────────────────────────────────────

def _propagate(
    inst: CspInstance, values: int, present: int, order: Sequence[int], log: bool,
) -> tuple[int, int, int | None, list[BasicRuleEvent]]:
    """
    Incremental ECP / CD / S loop.  Only variables touched since the last
    round are re-examined; the chosen single and the flagged variable are the
    first in ``order``, as with the one-rule-at-a-time operations above.
    Returns (values, present, broken variable index or None, events).
    """
    links, var_masks, atom_vars = inst.links, inst.var_masks, inst.atom_vars
    rank = {index: position for position, index in enumerate(order)}
    events: list[BasicRuleEvent] = []
    pending = list(iter_bits(values))
    dirty = set(range(inst.n_variables))
    singles: set[int] = set()

    while True:
        for value in pending:
            dead = present & links[value]
            if not dead:
                continue
            present &= ~dead
            cause = inst.atom_ref(value) if log else None
            for atom in iter_bits(dead):
                if log:
                    events.append(BasicRuleEvent(EventKind.ECP, inst.atom_ref(atom), cause))
                dirty.update(atom_vars[atom])

        broken = []
        for index in dirty:
            mask = var_masks[index]
            decided = values & mask
            if decided:
                singles.discard(rank[index])
                if decided & (decided - 1):
                    broken.append(rank[index])
                continue
            count = (present & mask).bit_count()
            if count == 0:
                singles.discard(rank[index])
                broken.append(rank[index])
            elif count == 1:
                singles.add(rank[index])
            else:
                singles.discard(rank[index])
        dirty = set()

        if broken:
            index = order[min(broken)]
            if log:
                events.append(BasicRuleEvent(EventKind.CD, inst.variables[index]))
            return values, present, index, events
        if not singles:
            return values, present, None, events

        index = order[min(singles)]
        atom = (present & var_masks[index]).bit_length() - 1
        bit = 1 << atom
        values |= bit
        present &= ~bit
        if log:
            events.append(BasicRuleEvent(EventKind.S, inst.view(atom, index)))
        pending = [atom]
        dirty.update(atom_vars[atom])


def brt_fixpoint(
    inst: CspInstance, ks: KnowledgeState, variable_order: Sequence[int] | None = None,
) -> tuple[KnowledgeState, list[BasicRuleEvent]]:
    """Apply ECP, CD and S until quiescence or the first contradiction."""
    if ks.contradiction is not None:
        return ks, []
    order = _variable_order(inst, variable_order)
    values, present, broken, events = _propagate(inst, ks.values, ks.present, order, log=True)
    if not events:
        return ks, events
    contradiction = inst.variables[broken] if broken is not None else None
    final = replace(ks, values=values, present=present, contradiction=contradiction)
    logger.debug("BRT fixpoint: %d events, contradiction=%s", len(events), contradiction)
    return final, events


def propagates_to_contradiction(inst: CspInstance, values: int, present: int) -> bool:
    """Non-logging BRT run on raw bitsets; True iff CD fires."""
    _, _, broken, _ = _propagate(inst, values, present, range(inst.n_variables), log=False)
    return broken is not None

"""
Pattern rules: bivalue-chains, t-chains, z-whips, zt-whips and zt-braids
Witness types, validation against a knowledge state, and complete searches.

Notation used throughout: Z is the target, L_k / R_k the left- and
right-linking candidates of step k, J the target together with the right
candidates found so far.  A candidate is compatible with a set S when it is
linked to no element of S.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass
from enum import Enum
from typing import Collection, Sequence

from src.basic_rules import propagates_to_contradiction
from src.csp import (
    CandidateRef, CspError, CspInstance, KnowledgeState, iter_bits, lowest_bit,
)

logger = logging.getLogger(__name__)


class StaleWitnessError(CspError):
    """A witness names a candidate that is no longer present in the state."""


class PatternKind(str, Enum):
    BIVALUE_CHAIN = "bivalue-chain"
    T_CHAIN = "t-chain"
    Z_WHIP = "z-whip"
    ZT_WHIP = "zt-whip"
    ZT_BRAID = "zt-braid"


CHAIN_KINDS = frozenset({PatternKind.BIVALUE_CHAIN, PatternKind.T_CHAIN})
DEFAULT_PRIORITY = (
    PatternKind.BIVALUE_CHAIN,
    PatternKind.T_CHAIN,
    PatternKind.Z_WHIP,
    PatternKind.ZT_WHIP,
    PatternKind.ZT_BRAID,
)


@dataclass(frozen=True)
class PatternStep:
    left: CandidateRef
    right: CandidateRef | None
    justification: CandidateRef
    z_candidates: frozenset[CandidateRef] = frozenset()
    t_candidates: frozenset[CandidateRef] = frozenset()

    @property
    def variable(self):
        return self.left.variable


@dataclass(frozen=True)
class PatternWitness:
    kind: PatternKind
    target: CandidateRef | None
    steps: tuple[PatternStep, ...]

    @property
    def length(self) -> int:
        return len(self.steps)

    @property
    def rights(self) -> list[CandidateRef]:
        return [s.right for s in self.steps if s.right is not None]

    @property
    def lefts(self) -> list[CandidateRef]:
        return [s.left for s in self.steps]


@dataclass(frozen=True)
class Elimination:
    target: CandidateRef
    witness: PatternWitness


def format_witness(inst: CspInstance, w: PatternWitness) -> str:
    """``zt-whip[2]: {L1 R1} - L2 => not Z``; braids suffix each left with ``(<J)``."""
    name = inst.candidate_name
    target = name(w.target) if w.target is not None else "?"
    parts = []
    for step in w.steps:
        left = name(step.left)
        if w.kind is PatternKind.ZT_BRAID:
            just = step.justification
            origin = "Z" if w.target is not None and inst.atom_of(just) == inst.atom_of(w.target) else name(just)
            left = f"{left}(<{origin})"
        parts.append(f"{{{left} {name(step.right)}}}" if step.right is not None else left)
    return f"{w.kind.value}[{w.length}]: {' - '.join(parts)} => not {target}"


# ─────────────────────────────────────────────────────────────────────────────
# Validation
# ─────────────────────────────────────────────────────────────────────────────

def validate_pattern(inst: CspInstance, ks: KnowledgeState, w: PatternWitness, z: CandidateRef) -> bool:
    """
    Check every defining clause of ``w``'s kind against ``ks`` with target ``z``.
    Raises StaleWitnessError when a named candidate is absent from ``ks``.
    """
    atom = inst.atom_of
    z_atom = atom(z)
    named = [z] + [s.left for s in w.steps] + [s.right for s in w.steps if s.right is not None]
    for ref in named:
        if not ks.present >> atom(ref) & 1:
            raise StaleWitnessError(f"{inst.candidate_name(ref)} is not a candidate of this state")

    steps = w.steps
    if not steps:
        return False
    if w.target is not None and atom(w.target) != z_atom:
        return False
    chain = w.kind in CHAIN_KINDS
    last_index = len(steps) - 1
    for k, step in enumerate(steps):
        if step.right is None:
            if chain or k != last_index:
                return False
        elif (not chain and k == last_index) or step.right.variable != step.left.variable:
            return False

    refs = [s.left for s in steps] + [s.right for s in steps if s.right is not None]
    if len(set(refs)) != len(refs):
        return False
    if z_atom in {atom(r) for r in refs}:
        return False
    right_atoms = [atom(s.right) for s in steps if s.right is not None]
    if len(set(right_atoms)) != len(right_atoms):
        return False

    links = inst.links
    blocked_z = links[z_atom]
    blocked_rights = 0
    prior: list[int] = []
    for k, step in enumerate(steps):
        index = inst.index_of(step.variable)
        mask = inst.var_masks[index]
        if ks.values & mask:
            return False
        cands = ks.present & mask
        left = atom(step.left)
        right = atom(step.right) if step.right is not None else None
        just = atom(step.justification)

        if w.kind is PatternKind.ZT_BRAID:
            if just != z_atom and just not in prior:
                return False
        elif just != (prior[-1] if prior else z_atom):
            return False
        if not links[left] >> just & 1:
            return False

        if w.kind is PatternKind.BIVALUE_CHAIN:
            if cands != (1 << left) | (1 << right):
                return False
        elif w.kind is PatternKind.T_CHAIN:
            if cands & ~blocked_rights & ~(1 << left) != 1 << right:
                return False
        else:
            blocked = blocked_z if w.kind is PatternKind.Z_WHIP else blocked_z | blocked_rights
            compatible = cands & ~blocked
            if w.kind is PatternKind.Z_WHIP:
                compatible &= ~(1 << left)
            if compatible != (0 if right is None else 1 << right):
                return False

        if right is not None:
            prior.append(right)
            blocked_rights |= links[right]

    if chain and not blocked_z >> prior[-1] & 1:
        return False
    return True


# ─────────────────────────────────────────────────────────────────────────────
# Search
# ─────────────────────────────────────────────────────────────────────────────

class _Context:
    """Read-only view of (instance, state, target) shared by one search."""

    def __init__(self, inst: CspInstance, ks: KnowledgeState, z: CandidateRef,
                 families: Collection[int] | None):
        self.inst = inst
        self.ks = ks
        self.z_ref = z
        self.z = inst.atom_of(z)
        self.links = inst.links
        self.present = ks.present
        self.usable = [
            not ks.values & mask and (families is None or inst.variables[i].family in families)
            for i, mask in enumerate(inst.var_masks)
        ]

    def variables_touching(self, sources: int) -> dict[int, int]:
        """Usable variables holding candidates linked to ``sources`` → those candidates."""
        found: dict[int, int] = {}
        for a in iter_bits(sources & self.present):
            for index in self.inst.atom_vars[a]:
                if self.usable[index]:
                    found[index] = found.get(index, 0) | 1 << a
        return found

    def witness(self, kind: PatternKind, raw: Sequence[tuple[int, int, int | None, int]]) -> PatternWitness:
        return build_witness(self.inst, self.ks, self.z_ref, kind, raw)


def build_witness(
    inst: CspInstance, ks: KnowledgeState, z: CandidateRef, kind: PatternKind,
    raw: Sequence[tuple[int, int, int | None, int]],
) -> PatternWitness:
    """Build a witness from (variable, left atom, right atom or None, justification atom) rows."""
    links, z_atom = inst.links, inst.atom_of(z)
    steps = []
    blocked_rights = 0
    for index, left, right, just in raw:
        cands = ks.present & inst.var_masks[index]
        others = cands & ~(1 << left)
        if right is not None:
            others &= ~(1 << right)
        z_set = frozenset(inst.view(a, index) for a in iter_bits(others & links[z_atom]))
        t_set = frozenset(inst.view(a, index) for a in iter_bits(others & blocked_rights))
        steps.append(PatternStep(
            left=inst.view(left, index),
            right=inst.view(right, index) if right is not None else None,
            justification=z if just == z_atom else inst.atom_ref(just),
            z_candidates=z_set,
            t_candidates=t_set,
        ))
        if right is not None:
            blocked_rights |= links[right]
    return PatternWitness(kind, z, tuple(steps))


def _first_linked(links: Sequence[int], atom: int, sources: Sequence[int]) -> int:
    for s in sources:
        if links[atom] >> s & 1:
            return s
    raise AssertionError("left candidate is linked to no justification source")


def _whip_bfs(ctx: _Context, kind: PatternKind, max_len: int) -> PatternWitness | None:
    """Breadth-first whip / braid search; returns a shortest witness."""
    links, var_masks, present, z = ctx.links, ctx.inst.var_masks, ctx.present, ctx.z
    braid = kind is PatternKind.ZT_BRAID
    z_only = kind is PatternKind.Z_WHIP
    # state: (steps, rights, blocked-by-J, used variables)
    frontier = [((), (), links[z], frozenset())]
    seen: set = set()
    for depth in range(1, max_len + 1):
        next_frontier = []
        for steps, rights, blocked, used in frontier:
            if braid:
                sources = blocked
            else:
                sources = links[rights[-1] if rights else z]
            right_set = set(rights)
            for index, lefts in ctx.variables_touching(sources).items():
                if index in used:
                    continue
                cands = present & var_masks[index]
                options = []
                if z_only:
                    base = cands & ~links[z]
                    for left in iter_bits(lefts):
                        options.append((left, base & ~(1 << left)))
                else:
                    options.append((lowest_bit(lefts), cands & ~blocked))
                for left, compatible in options:
                    just = _first_linked(links, left, (z, *rights)) if braid else (rights[-1] if rights else z)
                    if compatible == 0:
                        return ctx.witness(kind, steps + ((index, left, None, just),))
                    if compatible & (compatible - 1) or depth == max_len:
                        continue
                    right = compatible.bit_length() - 1
                    if right == z or right in right_set:
                        continue
                    new_rights = rights + (right,)
                    key = (frozenset(new_rights),) if braid else (frozenset(new_rights), right, used | {index})
                    if key in seen:
                        continue
                    seen.add(key)
                    new_blocked = blocked | links[right]
                    next_frontier.append((steps + ((index, left, right, just),), new_rights,
                                          new_blocked, used | {index}))
        if not next_frontier:
            return None
        frontier = next_frontier
    return None


def _chain_bfs(ctx: _Context, kind: PatternKind, max_len: int) -> PatternWitness | None:
    """Breadth-first bivalue-chain / t-chain search; returns a shortest witness."""
    inst, links, present, z = ctx.inst, ctx.links, ctx.present, ctx.z
    bivalue = kind is PatternKind.BIVALUE_CHAIN
    # state: (steps, used refs, right atoms, blocked-by-rights, last right)
    frontier = [((), frozenset(), frozenset(), 0, z)]
    seen: set = set()
    for depth in range(1, max_len + 1):
        next_frontier = []
        for steps, used, right_atoms, blocked_rights, last in frontier:
            for a in iter_bits(links[last] & present):
                if a == z:
                    continue
                for index in inst.atom_vars[a]:
                    if not ctx.usable[index] or (index, a) in used:
                        continue
                    cands = present & inst.var_masks[index]
                    if bivalue:
                        if cands.bit_count() != 2:
                            continue
                        right_mask = cands & ~(1 << a)
                    else:
                        right_mask = cands & ~blocked_rights & ~(1 << a)
                        if not right_mask or right_mask & (right_mask - 1):
                            continue
                    right = right_mask.bit_length() - 1
                    if right == z or right in right_atoms or (index, right) in used:
                        continue
                    new_steps = steps + ((index, a, right, last),)
                    if links[z] >> right & 1:
                        return ctx.witness(kind, new_steps)
                    if depth == max_len:
                        continue
                    new_used = used | {(index, a), (index, right)}
                    key = (right, new_used)
                    if key in seen:
                        continue
                    seen.add(key)
                    next_frontier.append((new_steps, new_used, right_atoms | {right},
                                          blocked_rights | links[right], right))
        if not next_frontier:
            return None
        frontier = next_frontier
    return None


def _braid_closure(ctx: _Context) -> PatternWitness | None:
    """
    Unbounded braid existence: keep adding any admissible step.  Admissible
    steps stay admissible or become final as J grows, so the closure finds a
    braid whenever one exists at any length (not necessarily a shortest one).
    """
    links, var_masks, present, z = ctx.links, ctx.inst.var_masks, ctx.present, ctx.z
    rights: list[int] = []
    blocked = links[z]
    steps: list[tuple[int, int, int | None, int]] = []
    used: set[int] = set()
    while True:
        touched = ctx.variables_touching(blocked)
        additions = []
        for index, lefts in touched.items():
            if index in used:
                continue
            compatible = present & var_masks[index] & ~blocked
            left = lowest_bit(lefts)
            just = _first_linked(links, left, (z, *rights))
            if compatible == 0:
                return ctx.witness(PatternKind.ZT_BRAID, steps + [(index, left, None, just)])
            if compatible & (compatible - 1):
                continue
            additions.append((index, left, compatible.bit_length() - 1, just))
        grew = False
        for index, left, right, just in additions:
            if right == z or right in rights or present & var_masks[index] & ~blocked != 1 << right:
                continue
            steps.append((index, left, right, just))
            rights.append(right)
            used.add(index)
            blocked |= links[right]
            grew = True
        if not grew:
            return None


def _max_useful_len(ks: KnowledgeState) -> int:
    return max(1, len(ks.open_variables()))


def _refutable(inst: CspInstance, ks: KnowledgeState, atom: int) -> bool:
    """Every pattern target is also eliminated by Trial-and-Error on BRT."""
    bit = 1 << atom
    return propagates_to_contradiction(inst, ks.values | bit, ks.present & ~bit)


def _search(kind: PatternKind, ctx: _Context, max_len: int | None) -> PatternWitness | None:
    if kind is PatternKind.ZT_BRAID and max_len is None:
        return _braid_closure(ctx)
    limit = max_len if max_len is not None else _max_useful_len(ctx.ks)
    if kind in CHAIN_KINDS:
        return _chain_bfs(ctx, kind, limit)
    return _whip_bfs(ctx, kind, limit)


def search_pattern(
    kind: PatternKind, inst: CspInstance, ks: KnowledgeState, z: CandidateRef,
    max_len: int | None, families: Collection[int] | None = None, prefilter: bool = True,
) -> PatternWitness | None:
    """
    Shortest witness of ``kind`` with target ``z`` and length ≤ ``max_len``
    (None = unbounded).  ``prefilter`` skips targets BRT cannot refute.
    """
    if not ks.has(z) or (max_len is not None and max_len < 1):
        return None
    if prefilter and not _refutable(inst, ks, inst.atom_of(z)):
        return None
    return _search(kind, _Context(inst, ks, z, families), max_len)


def search_whip(inst, ks, z, max_len, families=None) -> PatternWitness | None:
    return search_pattern(PatternKind.ZT_WHIP, inst, ks, z, max_len, families)


def search_z_whip(inst, ks, z, max_len, families=None) -> PatternWitness | None:
    return search_pattern(PatternKind.Z_WHIP, inst, ks, z, max_len, families)


def search_braid(inst, ks, z, max_len=None, families=None, prefilter=True) -> PatternWitness | None:
    return search_pattern(PatternKind.ZT_BRAID, inst, ks, z, max_len, families, prefilter)


def search_chain(inst, ks, z, max_len, kind=PatternKind.BIVALUE_CHAIN, families=None) -> PatternWitness | None:
    if kind not in CHAIN_KINDS:
        raise ValueError(f"{kind} is not a chain kind")
    return search_pattern(kind, inst, ks, z, max_len, families)


def find_elimination(
    inst: CspInstance,
    ks: KnowledgeState,
    kinds: Collection[PatternKind],
    max_len: int | None,
    priority: Sequence[PatternKind] = DEFAULT_PRIORITY,
    scan_order: Sequence[int] | None = None,
    shortest_first: bool = True,
    families: Collection[int] | None = None,
) -> Elimination | None:
    """
    First elimination licensed by ``kinds`` at length ≤ ``max_len``.
    With ``shortest_first`` the shortest witness over all targets wins, ties
    broken by kind priority then scan position; otherwise the first target in
    scan order with any witness wins.
    """
    if not kinds:
        return None
    ordered_kinds = [k for k in priority if k in kinds] + [k for k in DEFAULT_PRIORITY if k in kinds and k not in priority]
    order = scan_order if scan_order is not None else range(inst.n_atoms)
    targets = [a for a in order if ks.present >> a & 1 and _refutable(inst, ks, a)]
    if not targets:
        return None
    limit = max_len if max_len is not None else _max_useful_len(ks)

    contexts = {a: _Context(inst, ks, inst.atom_ref(a), families) for a in targets}
    if not shortest_first:
        for a in targets:
            for kind in ordered_kinds:
                w = _search(kind, contexts[a], max_len)
                if w is not None:
                    return Elimination(contexts[a].z_ref, w)
        return None

    # zt-braids subsume every other kind: the shortest braid bounds all lengths
    floor = {}
    for a in targets:
        if max_len is None:
            if _braid_closure(contexts[a]) is not None:
                floor[a] = 1
            continue
        braid = _whip_bfs(contexts[a], PatternKind.ZT_BRAID, limit)
        if braid is not None:
            floor[a] = braid.length
    if not floor:
        return None
    for length in range(min(floor.values()), limit + 1):
        candidates = [a for a in targets if floor.get(a, limit + 1) <= length]
        for kind in ordered_kinds:
            for a in candidates:
                w = _search(kind, contexts[a], length)
                if w is not None:
                    return Elimination(contexts[a].z_ref, w)
    return None


# ─────────────────────────────────────────────────────────────────────────────
# Subsumption
# ─────────────────────────────────────────────────────────────────────────────

def whip_from_chain(inst: CspInstance, ks: KnowledgeState, w: PatternWitness) -> PatternWitness:
    """
    Rewrite a bivalue-chain, t-chain or z-whip as a zt-whip on the same target.
    The whip ends at the first step whose right candidate is incompatible with
    the target or an earlier right candidate.
    """
    if w.kind is PatternKind.ZT_WHIP:
        return w
    links = inst.links
    z = inst.atom_of(w.target)
    blocked = links[z]
    steps = []
    for step in w.steps:
        index = inst.index_of(step.variable)
        compatible = ks.present & inst.var_masks[index] & ~blocked
        if compatible == 0 or step.right is None:
            steps.append(PatternStep(step.left, None, step.justification, step.z_candidates, step.t_candidates))
            break
        steps.append(step)
        blocked |= links[inst.atom_of(step.right)]
    return PatternWitness(PatternKind.ZT_WHIP, w.target, tuple(steps))


def braid_from_whip(w: PatternWitness) -> PatternWitness:
    """Every zt-whip is a zt-braid: each left is justified by the preceding right."""
    return PatternWitness(PatternKind.ZT_BRAID, w.target, w.steps)


def converted(inst: CspInstance, ks: KnowledgeState, w: PatternWitness) -> list[PatternWitness]:
    """The chain of more general witnesses ``w`` converts to (whip, then braid)."""
    out = []
    if w.kind is PatternKind.ZT_BRAID:
        return out
    whip = whip_from_chain(inst, ks, w)
    if whip is not w:
        out.append(whip)
    out.append(braid_from_whip(whip))
    return out

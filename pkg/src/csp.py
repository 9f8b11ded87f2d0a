"""
Generic CSP core for the resolution-rule engine
Variables, finite domains, candidates, the link relation and knowledge states.

Every (variable, value) pair maps to a dense candidate index (an "atom").
Several variables may view the same atom: in Sudoku the candidate n r c is
seen by X_rc, X_rn, X_cn and X_bn at once.  Candidate sets, values and links
are stored as Python integers used as bitsets over the atom index.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass, field, replace
from itertools import islice
from typing import Callable, Hashable, Iterable, Iterator, Mapping, NamedTuple, Sequence

import numpy as np

logger = logging.getLogger(__name__)


# ─────────────────────────────────────────────────────────────────────────────
# Errors
# ─────────────────────────────────────────────────────────────────────────────

class CspError(Exception):
    """Base class for every error raised by the engine."""


class MalformedReferenceError(CspError):
    """A variable or candidate reference does not belong to the instance."""


class IllegalTransitionError(CspError):
    """A knowledge-state transition was requested outside its precondition."""


# ─────────────────────────────────────────────────────────────────────────────
# References
# ─────────────────────────────────────────────────────────────────────────────

class VariableRef(NamedTuple):
    family: int
    coords: tuple[int, ...]


class CandidateRef(NamedTuple):
    variable: VariableRef
    value: Hashable


def iter_bits(mask: int) -> Iterator[int]:
    """Yield the set bit positions of ``mask`` in ascending order."""
    while mask:
        low = mask & -mask
        yield low.bit_length() - 1
        mask ^= low


def lowest_bit(mask: int) -> int:
    return (mask & -mask).bit_length() - 1


# ─────────────────────────────────────────────────────────────────────────────
# Instance
# ─────────────────────────────────────────────────────────────────────────────

@dataclass(frozen=True, eq=False)
class CspInstance:
    families: tuple[str, ...]
    variables: tuple[VariableRef, ...]
    domains: tuple[tuple[Hashable, ...], ...]
    var_index: Mapping[VariableRef, int] = field(repr=False)
    var_masks: tuple[int, ...] = field(repr=False)
    atom_vars: tuple[tuple[int, ...], ...] = field(repr=False)
    atom_views: tuple[tuple[CandidateRef, ...], ...] = field(repr=False)
    ref_atom: Mapping[CandidateRef, int] = field(repr=False)
    links: tuple[int, ...] = field(repr=False)
    atom_names: tuple[str, ...] = field(repr=False)
    variable_names: tuple[str, ...] = field(repr=False)
    initial_values: int = 0
    initial_present: int = 0

    @property
    def n_atoms(self) -> int:
        return len(self.atom_views)

    @property
    def n_variables(self) -> int:
        return len(self.variables)

    @property
    def initial_state(self) -> KnowledgeState:
        return KnowledgeState(self, self.initial_values, self.initial_present)

    def index_of(self, v: VariableRef) -> int:
        try:
            return self.var_index[v]
        except (KeyError, TypeError):
            raise MalformedReferenceError(f"unknown variable {v!r}") from None

    def atom_of(self, c: CandidateRef) -> int:
        try:
            return self.ref_atom[c]
        except (KeyError, TypeError):
            raise MalformedReferenceError(f"unknown candidate {c!r}") from None

    def atom_ref(self, atom: int) -> CandidateRef:
        """Canonical reference of an atom (its first view)."""
        return self.atom_views[atom][0]

    def view(self, atom: int, var: int) -> CandidateRef:
        """Reference of ``atom`` as seen through variable index ``var``."""
        target = self.variables[var]
        for ref in self.atom_views[atom]:
            if ref.variable == target:
                return ref
        raise MalformedReferenceError(
            f"{self.atom_names[atom]} is not a candidate of {self.variable_names[var]}")

    def candidate_name(self, c: CandidateRef | int) -> str:
        atom = c if isinstance(c, int) else self.atom_of(c)
        return self.atom_names[atom]

    def variable_name(self, v: VariableRef | int) -> str:
        index = v if isinstance(v, int) else self.index_of(v)
        return self.variable_names[index]

    def linked(self, a: CandidateRef, b: CandidateRef) -> bool:
        return linked(self, a, b)

    def link_matrix(self) -> np.ndarray:
        """Dense boolean adjacency matrix of the link relation."""
        n = self.n_atoms
        matrix = np.zeros((n, n), dtype=bool)
        for atom, mask in enumerate(self.links):
            matrix[atom, list(iter_bits(mask))] = True
        return matrix

    def with_givens(self, givens: Iterable[CandidateRef]) -> CspInstance:
        """Same instance, initial state with ``givens`` asserted (no propagation)."""
        values, present = 0, (1 << self.n_atoms) - 1
        for c in givens:
            bit = 1 << self.atom_of(c)
            values |= bit
            present &= ~bit
        return replace(self, initial_values=values, initial_present=present)


def build_instance(
    domains: Mapping[VariableRef, Sequence[Hashable]],
    links: Iterable[tuple[CandidateRef, CandidateRef]] = (),
    views: Iterable[Sequence[CandidateRef]] = (),
    families: Sequence[str] | None = None,
    atom_name: Callable[[CandidateRef], str] | None = None,
    variable_name: Callable[[VariableRef], str] | None = None,
    givens: Iterable[CandidateRef] = (),
) -> CspInstance:
    """
    Materialize a CSP instance.
      - ``domains``   : every variable with its ordered domain
      - ``links``     : declared binary contradictions between candidates
      - ``views``     : groups of references that denote one shared atom
      - ``givens``    : candidates asserted as values in the initial state
    Same-variable links are added for every variable; atoms are numbered in
    order of first appearance while walking ``domains``.
    """
    variables = tuple(domains)
    n_families = 1 + max((v.family for v in variables), default=-1)
    families = tuple(families) if families else tuple(f"F{i}" for i in range(n_families))
    if len(families) < n_families:
        raise MalformedReferenceError("fewer family names than variable families")
    variable_name = variable_name or (lambda v: f"{families[v.family]}{','.join(map(str, v.coords))}")

    group_of: dict[CandidateRef, int] = {}
    groups: list[tuple[CandidateRef, ...]] = []
    for group in views:
        group = tuple(group)
        for ref in group:
            if ref in group_of:
                raise MalformedReferenceError(f"{ref!r} appears in two atom groups")
            group_of[ref] = len(groups)
        groups.append(group)

    var_index = {v: i for i, v in enumerate(variables)}
    ref_atom: dict[CandidateRef, int] = {}
    atom_views: list[tuple[CandidateRef, ...]] = []
    group_atom: dict[int, int] = {}
    for v in variables:
        values = tuple(domains[v])
        if len(set(values)) != len(values):
            raise MalformedReferenceError(f"duplicate value in the domain of {v!r}")
        for value in values:
            ref = CandidateRef(v, value)
            g = group_of.get(ref)
            if g is None:
                ref_atom[ref] = len(atom_views)
                atom_views.append((ref,))
            elif g in group_atom:
                ref_atom[ref] = group_atom[g]
            else:
                group_atom[g] = len(atom_views)
                ref_atom[ref] = group_atom[g]
                atom_views.append(groups[g])
    for ref in group_of:
        if ref not in ref_atom:
            raise MalformedReferenceError(f"view {ref!r} names no declared domain value")

    n_atoms = len(atom_views)
    var_masks = [0] * len(variables)
    atom_vars: list[list[int]] = [[] for _ in range(n_atoms)]
    for ref, atom in ref_atom.items():
        vi = var_index[ref.variable]
        var_masks[vi] |= 1 << atom
        atom_vars[atom].append(vi)

    link_masks = [0] * n_atoms
    for mask in var_masks:
        for atom in iter_bits(mask):
            link_masks[atom] |= mask & ~(1 << atom)
    for a, b in links:
        ia, ib = _lookup(ref_atom, a), _lookup(ref_atom, b)
        if ia == ib:
            raise MalformedReferenceError(f"a candidate cannot be linked to itself: {a!r}")
        link_masks[ia] |= 1 << ib
        link_masks[ib] |= 1 << ia

    atom_name = atom_name or (lambda c: f"{variable_name(c.variable)}={c.value}")
    instance = CspInstance(
        families=families,
        variables=variables,
        domains=tuple(tuple(domains[v]) for v in variables),
        var_index=var_index,
        var_masks=tuple(var_masks),
        atom_vars=tuple(tuple(sorted(vs)) for vs in atom_vars),
        atom_views=tuple(atom_views),
        ref_atom=ref_atom,
        links=tuple(link_masks),
        atom_names=tuple(atom_name(views_[0]) for views_ in atom_views),
        variable_names=tuple(variable_name(v) for v in variables),
        initial_values=0,
        initial_present=(1 << n_atoms) - 1,
    )
    logger.debug("built instance: %d variables, %d candidates", len(variables), n_atoms)
    return instance.with_givens(givens)


def _lookup(ref_atom: Mapping[CandidateRef, int], c: CandidateRef) -> int:
    try:
        return ref_atom[c]
    except (KeyError, TypeError):
        raise MalformedReferenceError(f"unknown candidate {c!r}") from None


# ─────────────────────────────────────────────────────────────────────────────
# Knowledge states
# ─────────────────────────────────────────────────────────────────────────────

@dataclass(frozen=True)
class KnowledgeState:
    """
    Decided values and remaining candidates of one instance.
    ``values`` and ``present`` are atom bitsets.  A decided variable reports no
    candidates even while stale sibling atoms wait for ECP to delete them.
    """
    instance: CspInstance = field(compare=False, repr=False)
    values: int
    present: int
    contradiction: VariableRef | None = None

    def copy(self) -> KnowledgeState:
        return replace(self)

    def has(self, c: CandidateRef | int) -> bool:
        atom = c if isinstance(c, int) else self.instance.atom_of(c)
        return bool(self.present >> atom & 1)

    def is_decided(self, v: VariableRef | int) -> bool:
        index = v if isinstance(v, int) else self.instance.index_of(v)
        return bool(self.values & self.instance.var_masks[index])

    def candidate_mask(self, v: VariableRef | int) -> int:
        index = v if isinstance(v, int) else self.instance.index_of(v)
        mask = self.instance.var_masks[index]
        if self.values & mask:
            return 0
        return self.present & mask

    def candidates(self, v: VariableRef) -> tuple[CandidateRef, ...]:
        index = self.instance.index_of(v)
        return tuple(self.instance.view(a, index) for a in iter_bits(self.candidate_mask(index)))

    def value_of(self, v: VariableRef) -> Hashable | None:
        index = self.instance.index_of(v)
        decided = self.values & self.instance.var_masks[index]
        if not decided:
            return None
        return self.instance.view(lowest_bit(decided), index).value

    def open_variables(self) -> list[int]:
        return [i for i, mask in enumerate(self.instance.var_masks) if not self.values & mask]

    @property
    def is_solved(self) -> bool:
        return self.contradiction is None and not self.open_variables()

    @property
    def n_candidates(self) -> int:
        return self.present.bit_count()


# ─────────────────────────────────────────────────────────────────────────────
# Operations
# ─────────────────────────────────────────────────────────────────────────────

def linked(inst: CspInstance, a: CandidateRef, b: CandidateRef) -> bool:
    """True iff ``a`` and ``b`` are directly contradictory (state independent)."""
    ia, ib = inst.atom_of(a), inst.atom_of(b)
    return ia != ib and bool(inst.links[ia] >> ib & 1)


def assert_value(ks: KnowledgeState, c: CandidateRef) -> KnowledgeState:
    """Decide ``c``'s variable to ``c``'s value; nothing else is propagated."""
    inst = ks.instance
    atom = inst.atom_of(c)
    index = inst.index_of(c.variable)
    if ks.values & inst.var_masks[index]:
        raise IllegalTransitionError(f"{inst.variable_names[index]} is already decided")
    bit = 1 << atom
    if not ks.present & bit:
        raise IllegalTransitionError(f"{inst.atom_names[atom]} is not a candidate")
    return replace(ks, values=ks.values | bit, present=ks.present & ~bit)


def delete_candidate(ks: KnowledgeState, c: CandidateRef) -> KnowledgeState:
    """Remove ``c``; deleting an absent candidate returns ``ks`` itself."""
    atom = ks.instance.atom_of(c)
    bit = 1 << atom
    if not ks.present & bit:
        logger.debug("%s already absent, nothing deleted", ks.instance.atom_names[atom])
        return ks
    return replace(ks, present=ks.present & ~bit)


def is_bivalue(ks: KnowledgeState, v: VariableRef) -> bool:
    return ks.candidate_mask(v).bit_count() == 2


# ─────────────────────────────────────────────────────────────────────────────
# Backtracking oracle
# ─────────────────────────────────────────────────────────────────────────────

def iter_solutions(inst: CspInstance, ks: KnowledgeState | None = None) -> Iterator[int]:
    """
    Enumerate complete assignments extending ``ks`` as value bitsets.
    Plain backtracking on the fewest-candidates variable; the only inference
    is deleting candidates linked to the value just chosen.
    """
    ks = ks or inst.initial_state
    values, present = ks.values, ks.present
    for atom in iter_bits(values):
        if inst.links[atom] & values:
            return
        present &= ~inst.links[atom]
    yield from _extend(inst, values, present)


def _extend(inst: CspInstance, values: int, present: int) -> Iterator[int]:
    best, best_count = -1, 0
    for index, mask in enumerate(inst.var_masks):
        if values & mask:
            continue
        count = (present & mask).bit_count()
        if count == 0:
            return
        if best < 0 or count < best_count:
            best, best_count = index, count
            if count == 1:
                break
    if best < 0:
        yield values
        return
    for atom in iter_bits(present & inst.var_masks[best]):
        bit = 1 << atom
        yield from _extend(inst, values | bit, present & ~inst.links[atom] & ~bit)


def count_solutions(inst: CspInstance, cap: int, ks: KnowledgeState | None = None) -> int:
    if cap < 1:
        raise ValueError("cap must be at least 1")
    return sum(1 for _ in islice(iter_solutions(inst, ks), cap))


def first_solution(inst: CspInstance, ks: KnowledgeState | None = None) -> int | None:
    return next(iter_solutions(inst, ks), None)

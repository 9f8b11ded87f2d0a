"""
Resolution theories and the solver loop
BRT, the whip ladder L_n and the braid ladder M_n; resolution strategies;
resolution paths with state digests; rating; confluence and stability checks.
"""
from __future__ import annotations

import hashlib
import logging
import re
from dataclasses import dataclass, field, replace
from enum import Enum
from typing import Iterable, Sequence

import numpy as np

from src.basic_rules import (
    BasicRuleEvent, EventKind, brt_fixpoint, format_event, propagates_to_contradiction,
)
from src.csp import (
    CandidateRef, CspError, CspInstance, IllegalTransitionError, KnowledgeState,
    assert_value, count_solutions, delete_candidate,
)
from src.patterns import (
    DEFAULT_PRIORITY, Elimination, PatternKind, StaleWitnessError, find_elimination,
    format_witness, search_braid, validate_pattern,
)
from src.trial_error import braid_from_trace, te_trial

logger = logging.getLogger(__name__)


class RatingUndefinedError(CspError):
    """Ratings are only defined for instances with exactly one solution."""


class UnknownTheoryError(CspError):
    pass


class UnknownStrategyError(CspError):
    pass


WHIP_KINDS = frozenset({
    PatternKind.BIVALUE_CHAIN, PatternKind.T_CHAIN, PatternKind.Z_WHIP, PatternKind.ZT_WHIP,
})
BRAID_KINDS = WHIP_KINDS | {PatternKind.ZT_BRAID}


# ─────────────────────────────────────────────────────────────────────────────
# Theories
# ─────────────────────────────────────────────────────────────────────────────

@dataclass(frozen=True)
class ResolutionTheory:
    """BRT plus pattern rules of ``kinds`` up to length ``max_len`` (None = unbounded)."""
    name: str
    kinds: frozenset[PatternKind] = frozenset()
    max_len: int | None = 0
    families: frozenset[int] | None = None

    @property
    def is_basic(self) -> bool:
        return not self.kinds or self.max_len == 0

    @property
    def is_braid(self) -> bool:
        return PatternKind.ZT_BRAID in self.kinds

    def _rules(self) -> tuple:
        if self.is_basic:
            return ()
        kinds = self.kinds
        # a braid of length 1 is a whip of length 1
        if self.max_len == 1 and PatternKind.ZT_BRAID in kinds:
            kinds = (kinds - {PatternKind.ZT_BRAID}) | {PatternKind.ZT_WHIP}
        return kinds, self.max_len, self.families

    def same_rules(self, other: ResolutionTheory) -> bool:
        """True when both theories license exactly the same eliminations."""
        return self._rules() == other._rules()

    def includes(self, other: ResolutionTheory) -> bool:
        """Every rule of ``other`` is a rule of this theory."""
        if other.is_basic:
            return True
        if self.is_basic:
            return False
        if self.families is not None and (other.families is None or not other.families <= self.families):
            return False
        longer = self.max_len is None or (other.max_len is not None and other.max_len <= self.max_len)
        return longer and (other.kinds <= self.kinds or self.is_braid)


BRT = ResolutionTheory("BRT")


def whip_theory(n: int | None, families: Iterable[int] | None = None) -> ResolutionTheory:
    if n == 0:
        return BRT
    name = "Linf" if n is None else f"L{n}"
    return ResolutionTheory(name, WHIP_KINDS, n, frozenset(families) if families is not None else None)


def braid_theory(n: int | None, families: Iterable[int] | None = None) -> ResolutionTheory:
    if n == 0:
        return BRT
    name = "Minf" if n is None else f"M{n}"
    return ResolutionTheory(name, BRAID_KINDS, n, frozenset(families) if families is not None else None)


_THEORY_NAME = re.compile(r"^([LM])(\d+|inf)$", re.IGNORECASE)


def parse_theory(text: str) -> ResolutionTheory:
    """``brt``/``bsrt``, ``L<n>``, ``M<n>``, ``Linf``, ``Minf``."""
    token = text.strip()
    if token.lower() in ("brt", "bsrt"):
        return BRT
    match = _THEORY_NAME.match(token)
    if not match:
        raise UnknownTheoryError(f"unknown theory {text!r}; expected brt, L<n>, M<n>, Linf or Minf")
    ladder, size = match.groups()
    n = None if size.lower() == "inf" else int(size)
    return whip_theory(n) if ladder.upper() == "L" else braid_theory(n)


def parse_families(text: str, names: Sequence[str]) -> frozenset[int]:
    """``rc,rn`` → family indices of ``names``; the restriction a theory's patterns live in."""
    picked = set()
    for token in filter(None, (t.strip() for t in text.split(","))):
        if token not in names:
            raise UnknownTheoryError(f"unknown family {token!r}; expected one of {', '.join(names)}")
        picked.add(names.index(token))
    if not picked:
        raise UnknownTheoryError("empty family restriction")
    return frozenset(picked)


def restrict_families(theory: ResolutionTheory, families: Iterable[int]) -> ResolutionTheory:
    """Same ladder and length, patterns built only from variables of ``families``."""
    if theory.is_basic:
        return theory
    return replace(theory, families=frozenset(families))


class Ladder(str, Enum):
    WHIP = "whip"
    BRAID = "braid"

    def theory(self, n: int) -> ResolutionTheory:
        return whip_theory(n) if self is Ladder.WHIP else braid_theory(n)


# ─────────────────────────────────────────────────────────────────────────────
# Strategies
# ─────────────────────────────────────────────────────────────────────────────

@dataclass(frozen=True)
class Strategy:
    kind_priority: tuple[PatternKind, ...] = DEFAULT_PRIORITY
    seed: int | None = None
    shortest_first: bool = True

    @classmethod
    def random(cls, seed: int, kinds: Iterable[PatternKind] = DEFAULT_PRIORITY) -> Strategy:
        rng = np.random.default_rng(seed)
        kinds = list(kinds)
        priority = tuple(kinds[i] for i in rng.permutation(len(kinds)))
        return cls(priority, int(rng.integers(2**31)), bool(rng.integers(2)))

    def scan_order(self, inst: CspInstance) -> list[int] | None:
        if self.seed is None:
            return None
        return np.random.default_rng(self.seed).permutation(inst.n_atoms).tolist()

    def variable_order(self, inst: CspInstance) -> list[int] | None:
        if self.seed is None:
            return None
        rng = np.random.default_rng([self.seed, 1])
        return rng.permutation(inst.n_variables).tolist()

    def describe(self) -> str:
        kinds = ",".join(k.value for k in self.kind_priority)
        seed = "none" if self.seed is None else self.seed
        return f"kinds={kinds};shortest={'on' if self.shortest_first else 'off'};seed={seed}"


DEFAULT_STRATEGY = Strategy()


def default_strategy(theory: ResolutionTheory | None = None) -> Strategy:
    return DEFAULT_STRATEGY


def parse_strategy(text: str) -> Strategy:
    """``default``, ``random:<seed>``, or ``kinds=a,b;shortest=on|off;seed=S``."""
    token = text.strip()
    if token in ("", "default"):
        return DEFAULT_STRATEGY
    if token.startswith("random:"):
        try:
            return Strategy.random(int(token.split(":", 1)[1]))
        except ValueError:
            raise UnknownStrategyError(f"bad random seed in {text!r}") from None

    strategy = DEFAULT_STRATEGY
    for part in filter(None, (p.strip() for p in token.split(";"))):
        key, sep, value = part.partition("=")
        key, value = key.strip(), value.strip()
        if not sep:
            raise UnknownStrategyError(f"expected key=value in {part!r}")
        try:
            if key == "kinds":
                strategy = replace(strategy, kind_priority=tuple(PatternKind(k.strip()) for k in value.split(",")))
            elif key == "shortest":
                if value not in ("on", "off"):
                    raise ValueError(value)
                strategy = replace(strategy, shortest_first=value == "on")
            elif key == "seed":
                strategy = replace(strategy, seed=None if value == "none" else int(value))
            else:
                raise UnknownStrategyError(f"unknown strategy key {key!r}")
        except ValueError:
            raise UnknownStrategyError(f"bad value {value!r} for {key}") from None
    return strategy


def random_strategies(theory: ResolutionTheory, count: int, seed: int) -> list[Strategy]:
    """``count`` reproducible random strategies over ``theory``'s pattern kinds."""
    kinds = [k for k in DEFAULT_PRIORITY if k in theory.kinds] or list(DEFAULT_PRIORITY)
    rng = np.random.default_rng(seed)
    return [Strategy.random(int(s), kinds) for s in rng.integers(2**31, size=count)]


# ─────────────────────────────────────────────────────────────────────────────
# Paths and digests
# ─────────────────────────────────────────────────────────────────────────────

INCONSISTENT_DIGEST = "inconsistent"


def state_digest(ks: KnowledgeState) -> str:
    """Content hash of a state; every inconsistent state shares one digest."""
    if ks.contradiction is not None:
        return INCONSISTENT_DIGEST
    return hashlib.sha256(f"{ks.values:x}:{ks.present:x}".encode()).hexdigest()


class PathStatus(str, Enum):
    SOLVED = "solved"
    CONTRADICTION = "contradiction"
    STUCK = "stuck"


@dataclass(frozen=True)
class Application:
    rule: str
    event: BasicRuleEvent | Elimination
    digest: str

    def line(self, inst: CspInstance) -> str:
        if isinstance(self.event, BasicRuleEvent):
            return format_event(inst, self.event)
        return format_witness(inst, self.event.witness)


@dataclass
class ResolutionPath:
    theory: ResolutionTheory
    strategy: Strategy
    initial: KnowledgeState
    applications: list[Application] = field(default_factory=list)
    final: KnowledgeState | None = None

    @property
    def status(self) -> PathStatus:
        if self.final.contradiction is not None:
            return PathStatus.CONTRADICTION
        return PathStatus.SOLVED if self.final.is_solved else PathStatus.STUCK

    @property
    def eliminations(self) -> list[Elimination]:
        return [a.event for a in self.applications if isinstance(a.event, Elimination)]

    @property
    def longest(self) -> int:
        """Length of the longest pattern used (0 when BRT sufficed)."""
        return max((e.witness.length for e in self.eliminations), default=0)

    def lines(self, inst: CspInstance) -> list[str]:
        return [a.line(inst) for a in self.applications]

    def walk(self, inst: CspInstance):
        """Yield (state before, application) along the path."""
        ks = self.initial
        for app in self.applications:
            yield ks, app
            ks = apply_step(inst, ks, app)


def _apply_event(inst: CspInstance, ks: KnowledgeState, event: BasicRuleEvent) -> KnowledgeState:
    if event.kind is EventKind.ECP:
        return delete_candidate(ks, event.subject)
    if event.kind is EventKind.S:
        return assert_value(ks, event.subject)
    return replace(ks, contradiction=event.subject)


def apply_step(inst: CspInstance, ks: KnowledgeState, app: Application) -> KnowledgeState:
    if isinstance(app.event, BasicRuleEvent):
        return _apply_event(inst, ks, app.event)
    return delete_candidate(ks, app.event.target)


def _event_valid(inst: CspInstance, ks: KnowledgeState, event: BasicRuleEvent) -> bool:
    if event.kind is EventKind.ECP:
        cause = inst.atom_of(event.cause)
        return ks.has(event.subject) and bool(ks.values >> cause & 1) and inst.linked(event.subject, event.cause)
    index = inst.index_of(event.subject.variable)
    mask = inst.var_masks[index]
    if event.kind is EventKind.S:
        return ks.candidate_mask(index) == 1 << inst.atom_of(event.subject)
    decided = ks.values & mask
    return bool(decided & (decided - 1)) if decided else not ks.present & mask


def _record(inst: CspInstance, ks: KnowledgeState, events: Sequence[BasicRuleEvent],
            applications: list[Application]) -> None:
    for event in events:
        ks = _apply_event(inst, ks, event)
        applications.append(Application(event.kind.value, event, state_digest(ks)))


def next_elimination(inst: CspInstance, ks: KnowledgeState, theory: ResolutionTheory,
                     strategy: Strategy, scan_order: list[int] | None = None) -> Elimination | None:
    """The one pattern elimination ``strategy`` picks in ``ks``, if any."""
    if scan_order is None:
        scan_order = strategy.scan_order(inst)
    if theory.is_braid and theory.max_len is None and theory.families is None:
        # unbounded braids eliminate exactly what T&E on BRT eliminates
        order = scan_order if scan_order is not None else range(inst.n_atoms)
        for atom in order:
            if not ks.present >> atom & 1:
                continue
            if not propagates_to_contradiction(inst, ks.values | 1 << atom, ks.present & ~(1 << atom)):
                continue
            z = inst.atom_ref(atom)
            return Elimination(z, braid_from_trace(inst, ks, te_trial(inst, ks, None, z)))
        return None
    return find_elimination(
        inst, ks, theory.kinds, theory.max_len,
        priority=strategy.kind_priority,
        scan_order=scan_order,
        shortest_first=strategy.shortest_first,
        families=theory.families,
    )


def solve(
    inst: CspInstance,
    theory: ResolutionTheory,
    strategy: Strategy | None = None,
    initial: KnowledgeState | None = None,
) -> ResolutionPath:
    """
    BRT to fixpoint, then one pattern elimination, repeated until the state is
    solved, contradictory, or no rule of ``theory`` applies.
    """
    strategy = strategy or default_strategy(theory)
    ks = initial if initial is not None else inst.initial_state
    path = ResolutionPath(theory, strategy, ks)
    scan_order = strategy.scan_order(inst)
    variable_order = strategy.variable_order(inst)

    while True:
        fixed, events = brt_fixpoint(inst, ks, variable_order)
        _record(inst, ks, events, path.applications)
        ks = fixed
        if ks.contradiction is not None or ks.is_solved or theory.is_basic:
            break
        elimination = next_elimination(inst, ks, theory, strategy, scan_order)
        if elimination is None:
            break
        logger.debug("%s: %s", theory.name, format_witness(inst, elimination.witness))
        ks = delete_candidate(ks, elimination.target)
        rule = f"{elimination.witness.kind.value}[{elimination.witness.length}]"
        path.applications.append(Application(rule, elimination, state_digest(ks)))

    path.final = ks
    logger.info("%s solve: %s after %d applications", theory.name, path.status.value, len(path.applications))
    return path


def replay(inst: CspInstance, path: ResolutionPath) -> bool:
    """Re-apply every step from the initial state, checking validity and digests."""
    ks = path.initial
    for position, app in enumerate(path.applications):
        try:
            if isinstance(app.event, BasicRuleEvent):
                if not _event_valid(inst, ks, app.event):
                    logger.warning("step %d (%s) is not applicable", position, app.rule)
                    return False
                ks = _apply_event(inst, ks, app.event)
            else:
                if not validate_pattern(inst, ks, app.event.witness, app.event.target):
                    logger.warning("step %d (%s) does not validate", position, app.rule)
                    return False
                ks = delete_candidate(ks, app.event.target)
        except (StaleWitnessError, IllegalTransitionError) as exc:
            logger.warning("step %d (%s): %s", position, app.rule, exc)
            return False
        if state_digest(ks) != app.digest:
            logger.warning("step %d (%s): digest mismatch", position, app.rule)
            return False
    return path.final is None or state_digest(ks) == state_digest(path.final)


# ─────────────────────────────────────────────────────────────────────────────
# Rating
# ─────────────────────────────────────────────────────────────────────────────

def rate(inst: CspInstance, ladder: Ladder | str, cap: int, strategy: Strategy | None = None) -> int | None:
    """
    Smallest n ≤ ``cap`` such that L_n (whip ladder) or M_n (braid ladder)
    solves ``inst``; 0 when BRT alone suffices, None above the cap.
    """
    ladder = Ladder(ladder)
    if count_solutions(inst, 2) != 1:
        raise RatingUndefinedError("instance does not have exactly one solution")
    path = solve(inst, BRT, strategy)
    if path.status is PathStatus.SOLVED:
        return 0
    ks = path.final
    for n in range(1, cap + 1):
        path = solve(inst, ladder.theory(n), strategy, initial=ks)
        if path.status is PathStatus.SOLVED:
            return n
        if path.status is PathStatus.CONTRADICTION:
            raise CspError(f"{path.theory.name} reached a contradiction on a uniquely solvable instance")
        ks = path.final
    return None


# ─────────────────────────────────────────────────────────────────────────────
# Confluence and stability
# ─────────────────────────────────────────────────────────────────────────────

def check_confluence(
    inst: CspInstance, theory: ResolutionTheory, strategies: Sequence[Strategy],
) -> tuple[bool, list[str]]:
    """Solve under every strategy; confluent when all final digests coincide."""
    digests = [state_digest(solve(inst, theory, s).final) for s in strategies]
    confluent = len(set(digests)) <= 1
    if not confluent:
        logger.warning("%s is not confluent here: %d distinct final states", theory.name, len(set(digests)))
    return confluent, digests


@dataclass(frozen=True)
class Perturbation:
    """One rule application: delete a candidate or assert a value."""
    action: str
    candidate: CandidateRef

    @classmethod
    def from_elimination(cls, elimination: Elimination) -> Perturbation:
        return cls("delete", elimination.target)

    @classmethod
    def from_event(cls, event: BasicRuleEvent) -> Perturbation:
        if event.kind is EventKind.ECP:
            return cls("delete", event.subject)
        if event.kind is EventKind.S:
            return cls("assert", event.subject)
        raise ValueError("a contradiction is not a perturbation")

    def apply(self, ks: KnowledgeState) -> KnowledgeState:
        if self.action == "delete":
            return delete_candidate(ks, self.candidate)
        if self.action == "assert":
            return assert_value(ks, self.candidate)
        raise ValueError(f"unknown perturbation {self.action!r}")


def check_stability(
    inst: CspInstance,
    ks: KnowledgeState,
    witness,
    z: CandidateRef,
    perturbation: Perturbation,
) -> bool:
    """
    After ``perturbation`` (and BRT), ``z`` is either gone or still the target
    of a braid no longer than ``witness``.
    """
    after, _ = brt_fixpoint(inst, perturbation.apply(ks))
    if after.contradiction is not None:
        return True
    atom = inst.atom_of(z)
    if after.values >> atom & 1:
        return False
    if not after.present >> atom & 1:
        return True
    return search_braid(inst, after, z, witness.length) is not None

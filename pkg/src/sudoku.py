"""
Sudoku instantiation
Four variable families over one shared candidate atom per (n, r, c), grid
parsing, an independent backtracking oracle and a minimal-puzzle generator.

Conventions: blocks b1..b9 and squares s1..s9 inside a block are numbered
row-major.  Candidate n r c is written ``5r1c1``.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Iterable, Iterator

import numpy as np

from src.csp import (
    CandidateRef, CspError, CspInstance, KnowledgeState, MalformedReferenceError,
    VariableRef, build_instance, iter_bits,
)

logger = logging.getLogger(__name__)

FAMILIES = ("rc", "rn", "cn", "bn")
RC, RN, CN, BN = range(4)
DIGITS = tuple(range(1, 10))
EMPTY_CHARS = ".0"


class GridParseError(CspError):
    """Puzzle text is not 81 characters of digits, '.' or '0'."""


# ─────────────────────────────────────────────────────────────────────────────
# Geometry
# ─────────────────────────────────────────────────────────────────────────────

def block_of(r: int, c: int) -> int:
    return 3 * ((r - 1) // 3) + (c - 1) // 3 + 1


def square_of(r: int, c: int) -> int:
    return 3 * ((r - 1) % 3) + (c - 1) % 3 + 1


def cell_of(b: int, s: int) -> tuple[int, int]:
    return 3 * ((b - 1) // 3) + (s - 1) // 3 + 1, 3 * ((b - 1) % 3) + (s - 1) % 3 + 1


def _check_nrc(n: int, r: int, c: int) -> None:
    if not (1 <= n <= 9 and 1 <= r <= 9 and 1 <= c <= 9):
        raise MalformedReferenceError(f"no Sudoku candidate n{n}r{r}c{c}")


def sudoku_linked(a: tuple[int, int, int], b: tuple[int, int, int]) -> bool:
    """Two (n, r, c) candidates contradict: same cell, or same digit in a shared unit."""
    _check_nrc(*a)
    _check_nrc(*b)
    (n1, r1, c1), (n2, r2, c2) = a, b
    if (r1, c1) == (r2, c2):
        return n1 != n2
    if n1 != n2:
        return False
    return r1 == r2 or c1 == c2 or block_of(r1, c1) == block_of(r2, c2)


def atom_index(n: int, r: int, c: int) -> int:
    """Dense index of candidate n r c (cell-major, digit-minor)."""
    _check_nrc(n, r, c)
    return ((r - 1) * 9 + (c - 1)) * 9 + (n - 1)


def nrc_of(ref: CandidateRef) -> tuple[int, int, int]:
    """(n, r, c) of a candidate seen through any of the four families."""
    family, (x, y) = ref.variable
    if family == RC:
        return ref.value, x, y
    if family == RN:
        return y, x, ref.value
    if family == CN:
        return y, ref.value, x
    r, c = cell_of(x, ref.value)
    return y, r, c


def candidate(n: int, r: int, c: int) -> CandidateRef:
    _check_nrc(n, r, c)
    return CandidateRef(VariableRef(RC, (r, c)), n)


def _views(n: int, r: int, c: int) -> tuple[CandidateRef, ...]:
    b = block_of(r, c)
    return (
        CandidateRef(VariableRef(RC, (r, c)), n),
        CandidateRef(VariableRef(RN, (r, n)), c),
        CandidateRef(VariableRef(CN, (c, n)), r),
        CandidateRef(VariableRef(BN, (b, n)), square_of(r, c)),
    )


def _variable_name(v: VariableRef) -> str:
    x, y = v.coords
    return {RC: f"r{x}c{y}", RN: f"r{x}n{y}", CN: f"c{x}n{y}", BN: f"b{x}n{y}"}[v.family]


def _candidate_name(ref: CandidateRef) -> str:
    n, r, c = nrc_of(ref)
    return f"{n}r{r}c{c}"


# ─────────────────────────────────────────────────────────────────────────────
# Grid
# ─────────────────────────────────────────────────────────────────────────────

@dataclass(frozen=True)
class Grid:
    """81 cells row-major, 0 for empty."""
    cells: tuple[int, ...]
    consistent: bool = field(init=False)

    def __post_init__(self):
        if len(self.cells) != 81 or any(not 0 <= v <= 9 for v in self.cells):
            raise GridParseError("a grid has 81 cells holding 0-9")
        object.__setattr__(self, "consistent", _givens_consistent(self.cells))

    def value(self, r: int, c: int) -> int:
        return self.cells[(r - 1) * 9 + (c - 1)]

    @property
    def givens(self) -> list[tuple[int, int, int]]:
        """(n, r, c) of every given, row-major."""
        return [(v, i // 9 + 1, i % 9 + 1) for i, v in enumerate(self.cells) if v]

    @property
    def n_givens(self) -> int:
        return sum(1 for v in self.cells if v)

    def without(self, r: int, c: int) -> Grid:
        cells = list(self.cells)
        cells[(r - 1) * 9 + (c - 1)] = 0
        return Grid(tuple(cells))

    def to_line(self, empty: str = ".") -> str:
        return "".join(str(v) if v else empty for v in self.cells)

    def __str__(self) -> str:
        return self.to_line()


def _givens_consistent(cells: Iterable[int]) -> bool:
    seen = set()
    for i, v in enumerate(cells):
        if not v:
            continue
        r, c = divmod(i, 9)
        for unit in (("r", r), ("c", c), ("b", block_of(r + 1, c + 1))):
            if (unit, v) in seen:
                return False
            seen.add((unit, v))
    return True


def parse_grid(text: str) -> Grid:
    line = text.strip()
    if len(line) != 81:
        raise GridParseError(f"expected 81 characters, got {len(line)}")
    bad = sorted({ch for ch in line if ch not in EMPTY_CHARS and not ("1" <= ch <= "9")})
    if bad:
        raise GridParseError(f"unexpected characters {''.join(bad)!r}")
    return Grid(tuple(0 if ch in EMPTY_CHARS else int(ch) for ch in line))


def format_grid(g: Grid, pretty: bool = False) -> str:
    if not pretty:
        return g.to_line()
    rows = []
    for r in range(9):
        if r and r % 3 == 0:
            rows.append("------+-------+------")
        chunk = [str(v) if v else "." for v in g.cells[r * 9:(r + 1) * 9]]
        rows.append(" | ".join(" ".join(chunk[i:i + 3]) for i in (0, 3, 6)))
    return "\n".join(rows)


# ─────────────────────────────────────────────────────────────────────────────
# CSP
# ─────────────────────────────────────────────────────────────────────────────

@lru_cache(maxsize=1)
def base_instance() -> CspInstance:
    """Empty-grid instance: 324 variables over 729 shared atoms."""
    domains: dict[VariableRef, tuple[int, ...]] = {}
    for family in (RC, RN, CN, BN):
        for x in range(1, 10):
            for y in range(1, 10):
                domains[VariableRef(family, (x, y))] = DIGITS
    views = [_views(n, r, c) for r in DIGITS for c in DIGITS for n in DIGITS]
    return build_instance(
        domains,
        views=views,
        families=FAMILIES,
        atom_name=_candidate_name,
        variable_name=_variable_name,
    )


@dataclass(frozen=True)
class SudokuCsp:
    grid: Grid
    instance: CspInstance

    @property
    def initial_state(self) -> KnowledgeState:
        return self.instance.initial_state

    def variable(self, family: str, x: int, y: int) -> VariableRef:
        return VariableRef(FAMILIES.index(family), (x, y))

    def candidate(self, n: int, r: int, c: int) -> CandidateRef:
        return candidate(n, r, c)

    def grid_of(self, ks: KnowledgeState) -> Grid:
        """Decided values of ``ks`` written back into a grid."""
        cells = [0] * 81
        for atom in iter_bits(ks.values):
            n, r, c = nrc_of(self.instance.atom_ref(atom))
            cells[(r - 1) * 9 + (c - 1)] = n
        return Grid(tuple(cells))


def build_csp(g: Grid) -> SudokuCsp:
    inst = base_instance().with_givens(candidate(n, r, c) for n, r, c in g.givens)
    return SudokuCsp(g, inst)


# ─────────────────────────────────────────────────────────────────────────────
# Oracle (unit constraints only, no rule knowledge)
# ─────────────────────────────────────────────────────────────────────────────

_ALL = 0b1111111110


def _completions(cells: list[int], rng: np.random.Generator | None = None) -> Iterator[tuple[int, ...]]:
    rows, cols, boxes = [0] * 9, [0] * 9, [0] * 9
    for i, v in enumerate(cells):
        if not v:
            continue
        r, c = divmod(i, 9)
        b = (r // 3) * 3 + c // 3
        bit = 1 << v
        if (rows[r] | cols[c] | boxes[b]) & bit:
            return
        rows[r] |= bit
        cols[c] |= bit
        boxes[b] |= bit
    cells = list(cells)
    empties = [(i, i // 9, i % 9, (i // 27) * 3 + (i % 9) // 3) for i, v in enumerate(cells) if not v]

    def extend():
        best, best_free, best_count = None, 0, 10
        for slot in empties:
            i, r, c, b = slot
            if cells[i]:
                continue
            free = _ALL & ~(rows[r] | cols[c] | boxes[b])
            count = free.bit_count()
            if count == 0:
                return
            if count < best_count:
                best, best_free, best_count = slot, free, count
                if count == 1:
                    break
        if best is None:
            yield tuple(cells)
            return
        i, r, c, b = best
        digits = list(iter_bits(best_free))
        if rng is not None:
            digits = [digits[k] for k in rng.permutation(len(digits))]
        for v in digits:
            bit = 1 << v
            cells[i] = v
            rows[r] |= bit
            cols[c] |= bit
            boxes[b] |= bit
            yield from extend()
            rows[r] &= ~bit
            cols[c] &= ~bit
            boxes[b] &= ~bit
        cells[i] = 0

    yield from extend()


def solution_count(g: Grid, cap: int) -> int:
    if cap < 1:
        raise ValueError("cap must be at least 1")
    count = 0
    for _ in _completions(list(g.cells)):
        count += 1
        if count >= cap:
            break
    return count


def oracle_solution(g: Grid) -> Grid | None:
    solution = next(_completions(list(g.cells)), None)
    return Grid(solution) if solution is not None else None


def solution_candidates(csp: SudokuCsp, solution: Grid) -> int:
    """Atom bitset of the candidates a complete solution makes true."""
    mask = 0
    for n, r, c in solution.givens:
        mask |= 1 << csp.instance.atom_of(candidate(n, r, c))
    return mask


def is_minimal(g: Grid) -> bool:
    if solution_count(g, 2) != 1:
        return False
    return all(solution_count(g.without(r, c), 2) >= 2 for _, r, c in g.givens)


def generate_minimal(seed: int) -> Grid:
    """
    Complete a random grid, then drop givens in random order, keeping a
    removal only while the puzzle stays uniquely solvable.
    """
    rng = np.random.default_rng(seed)
    cells = list(next(_completions([0] * 81, rng)))
    for i in rng.permutation(81):
        kept = cells[i]
        cells[i] = 0
        if solution_count(Grid(tuple(cells)), 2) != 1:
            cells[i] = kept
    puzzle = Grid(tuple(cells))
    logger.debug("seed %d: minimal puzzle with %d givens", seed, puzzle.n_givens)
    return puzzle

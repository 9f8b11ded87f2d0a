"""Shared fixtures: small Latin-square instances and Sudoku puzzles."""
from itertools import product
from pathlib import Path

import pytest

from src.csp import CandidateRef, VariableRef, build_instance
from src.sudoku import build_csp, generate_minimal, oracle_solution, parse_grid
from src.utils import load_puzzles

# Solved by singles alone
SINGLES_PUZZLE = "003020600900305001001806400008102900700000008006708200002609500800203009005010300"
SINGLES_SOLUTION = "483921657967345821251876493548132976729564138136798245372689514814253769695417382"

# Needs whips or braids after BRT
HARD_PUZZLE = "4.....8.5.3..........7......2.....6.....8.4......1.......6.3.7.5..2.....1.4......"

DUPLICATE_GIVENS = "11" + "." * 79

CORPUS_PATH = Path(__file__).resolve().parents[1] / "data" / "corpus.txt"


def latin_square(n=3, givens=()):
    """
    n x n Latin square over the cell family only: X_rc in 1..n, linked to the
    same value in the same row or column.  ``givens`` are (r, c, value).
    """
    def ref(r, c, v):
        return CandidateRef(VariableRef(0, (r, c)), v)

    cells = list(product(range(1, n + 1), repeat=2))
    domains = {VariableRef(0, rc): tuple(range(1, n + 1)) for rc in cells}
    links = [
        (ref(r1, c1, v), ref(r2, c2, v))
        for (r1, c1), (r2, c2) in product(cells, repeat=2)
        if (r1, c1) < (r2, c2) and (r1 == r2 or c1 == c2)
        for v in range(1, n + 1)
    ]
    return build_instance(
        domains,
        links=links,
        families=("rc",),
        atom_name=lambda c: f"{c.value}r{c.variable.coords[0]}c{c.variable.coords[1]}",
        variable_name=lambda v: f"r{v.coords[0]}c{v.coords[1]}",
        givens=[ref(r, c, v) for r, c, v in givens],
    )


def cell(r, c, v):
    return CandidateRef(VariableRef(0, (r, c)), v)


@pytest.fixture
def latin3():
    return latin_square(3)


@pytest.fixture
def latin4():
    return latin_square(4)


@pytest.fixture
def singles_csp():
    return build_csp(parse_grid(SINGLES_PUZZLE))


@pytest.fixture(scope="session")
def hard_csp():
    return build_csp(parse_grid(HARD_PUZZLE))


@pytest.fixture(scope="session")
def hard_solution():
    return oracle_solution(parse_grid(HARD_PUZZLE))


@pytest.fixture(scope="session")
def minimal_puzzles():
    return [generate_minimal(seed) for seed in (1, 2, 3)]


@pytest.fixture(scope="session")
def corpus():
    puzzles, errors = load_puzzles(CORPUS_PATH)
    assert errors == []
    return [g for _, g in puzzles]

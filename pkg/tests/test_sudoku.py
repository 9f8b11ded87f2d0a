import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from src.csp import VariableRef
from src.sudoku import (
    BN, CN, DIGITS, RC, RN, Grid, GridParseError, atom_index, base_instance, block_of,
    candidate, cell_of, format_grid, generate_minimal, is_minimal, nrc_of, oracle_solution,
    parse_grid, solution_candidates, solution_count, square_of, sudoku_linked,
)
from tests.conftest import HARD_PUZZLE, SINGLES_PUZZLE, SINGLES_SOLUTION

digits = st.integers(min_value=1, max_value=9)
nrc = st.tuples(digits, digits, digits)


def test_parse_grid_accepts_dots_and_zeros():
    assert parse_grid(SINGLES_PUZZLE) == parse_grid(SINGLES_PUZZLE.replace("0", "."))
    assert parse_grid(SINGLES_PUZZLE).n_givens == 32
    assert parse_grid("  " + SINGLES_PUZZLE + "\n").to_line("0") == SINGLES_PUZZLE


@pytest.mark.parametrize("text", ["123", "x" * 81, SINGLES_PUZZLE + "1", "a" + SINGLES_PUZZLE[1:]])
def test_parse_grid_rejects_malformed(text):
    with pytest.raises(GridParseError):
        parse_grid(text)


def test_grid_consistency_flag():
    assert parse_grid(SINGLES_PUZZLE).consistent
    assert not parse_grid("11" + "." * 79).consistent
    assert not parse_grid("1" + "." * 8 + "1" + "." * 71).consistent
    assert not parse_grid("1" + "." * 9 + "1" + "." * 70).consistent


def test_format_grid():
    grid = parse_grid(SINGLES_PUZZLE)
    assert format_grid(grid) == grid.to_line()
    pretty = format_grid(grid, pretty=True).splitlines()
    assert len(pretty) == 11
    assert pretty[0] == ". . 3 | . 2 . | 6 . ."
    assert pretty[3] == "------+-------+------"


@settings(max_examples=81)
@given(digits, digits)
def test_block_square_round_trip(r, c):
    assert cell_of(block_of(r, c), square_of(r, c)) == (r, c)


def test_block_numbering():
    assert block_of(1, 1) == 1
    assert block_of(1, 9) == 3
    assert block_of(5, 5) == 5
    assert block_of(9, 1) == 7
    assert square_of(2, 3) == 6


def test_base_instance_shape():
    inst = base_instance()
    assert inst.n_variables == 324
    assert inst.n_atoms == 729
    assert inst.families == ("rc", "rn", "cn", "bn")
    assert all(len(views) == 4 for views in inst.atom_views)
    assert all(mask.bit_count() == 28 for mask in inst.links)


@settings(max_examples=100)
@given(nrc)
def test_atom_index_and_views(t):
    n, r, c = t
    inst = base_instance()
    atom = inst.atom_of(candidate(n, r, c))
    assert atom == atom_index(n, r, c)
    for ref in inst.atom_views[atom]:
        assert inst.atom_of(ref) == atom
        assert nrc_of(ref) == (n, r, c)
    assert inst.candidate_name(atom) == f"{n}r{r}c{c}"


@settings(max_examples=200)
@given(nrc, nrc)
def test_links_match_sudoku_rules(a, b):
    inst = base_instance()
    ia, ib = atom_index(*a), atom_index(*b)
    assert bool(inst.links[ia] >> ib & 1) == sudoku_linked(a, b)
    assert sudoku_linked(a, b) == sudoku_linked(b, a)


def test_variable_names():
    inst = base_instance()
    assert inst.variable_name(VariableRef(RC, (1, 2))) == "r1c2"
    assert inst.variable_name(VariableRef(RN, (1, 5))) == "r1n5"
    assert inst.variable_name(VariableRef(CN, (3, 5))) == "c3n5"
    assert inst.variable_name(VariableRef(BN, (9, 1))) == "b9n1"


def test_build_csp_asserts_givens(singles_csp):
    ks = singles_csp.initial_state
    assert ks.values.bit_count() == 32
    assert ks.value_of(singles_csp.variable("rc", 1, 3)) == 3
    # the same given is decided in all four views
    assert ks.value_of(singles_csp.variable("rn", 1, 3)) == 3
    assert ks.value_of(singles_csp.variable("bn", 1, 3)) == 3
    assert singles_csp.grid_of(ks) == singles_csp.grid


def test_solution_oracle():
    grid = parse_grid(SINGLES_PUZZLE)
    assert solution_count(grid, 5) == 1
    assert oracle_solution(grid).to_line() == SINGLES_SOLUTION
    assert solution_count(parse_grid("." * 81), 2) == 2
    assert solution_count(parse_grid("11" + "." * 79), 2) == 0
    assert oracle_solution(parse_grid("11" + "." * 79)) is None


def test_solution_candidates(singles_csp):
    solution = oracle_solution(singles_csp.grid)
    mask = solution_candidates(singles_csp, solution)
    assert mask.bit_count() == 81
    assert mask >> atom_index(4, 1, 1) & 1


def test_hard_puzzle_is_unique():
    assert solution_count(parse_grid(HARD_PUZZLE), 2) == 1


def test_without():
    grid = parse_grid(SINGLES_PUZZLE)
    assert grid.without(1, 3).n_givens == 31
    assert grid.without(1, 3).value(1, 3) == 0


def test_grid_rejects_bad_cells():
    with pytest.raises(GridParseError):
        Grid((0,) * 80)
    with pytest.raises(GridParseError):
        Grid((10,) + (0,) * 80)


def test_generator_is_reproducible_and_minimal():
    grid = generate_minimal(7)
    assert grid == generate_minimal(7)
    assert grid.consistent
    assert is_minimal(grid)


def test_minimal_fixture_puzzles(minimal_puzzles):
    assert len({g.to_line() for g in minimal_puzzles}) == 3
    assert all(solution_count(g, 2) == 1 for g in minimal_puzzles)


def test_singles_puzzle_is_not_minimal():
    assert not is_minimal(parse_grid(SINGLES_PUZZLE))


def test_link_matrix_matches_sudoku_rules_exhaustively():
    triples = [(n, r, c) for r in DIGITS for c in DIGITS for n in DIGITS]
    assert [atom_index(*t) for t in triples] == list(range(729))
    expected = np.array([[sudoku_linked(a, b) for b in triples] for a in triples])
    matrix = base_instance().link_matrix()
    np.testing.assert_array_equal(matrix, expected)
    assert (matrix == matrix.T).all()
    assert not matrix.diagonal().any()

import pandas as pd
import pytest

from src.sudoku import GridParseError, parse_grid
from src.utils import (
    ABOVE_CAP_COLOR, export_to_csv, get_level_color, get_level_name, load_config, load_puzzles,
    puzzles_from_argument, read_corpus, setting, write_corpus,
)
from tests.conftest import HARD_PUZZLE, SINGLES_PUZZLE


def test_config_sections():
    config = load_config()
    for section in ("SOLVER", "RATING", "CAMPAIGNS", "TABLE1", "GENERATOR", "DISPLAY", "EXPORT"):
        assert section in config
    assert setting("RATING", "CAP") == 7
    assert setting("RATING", "MISSING", "fallback") == "fallback"


def test_alternative_config(tmp_path):
    path = tmp_path / "alt.yaml"
    path.write_text("RATING:\n  CAP: 3\n", encoding="utf-8")
    assert load_config(str(path))["RATING"]["CAP"] == 3


def test_level_labels():
    assert get_level_name(0) == "BRT"
    assert get_level_name(3) == "L3"
    assert get_level_name(3, "braid") == "M3"
    assert get_level_name(None) == "unsolved"
    assert get_level_name(pd.NA) == "unsolved"
    assert get_level_color(None) == ABOVE_CAP_COLOR
    assert get_level_color(0) != ABOVE_CAP_COLOR


def test_corpus_round_trip(tmp_path):
    path = tmp_path / "corpus.txt"
    grids = [parse_grid(SINGLES_PUZZLE), parse_grid(HARD_PUZZLE)]
    write_corpus(grids, path, header=["two puzzles"])
    text = path.read_text(encoding="utf-8").splitlines()
    assert text[0] == "# two puzzles"
    assert [line for _, line in read_corpus(path)] == [g.to_line() for g in grids]


def test_load_puzzles_reports_bad_lines(tmp_path):
    path = tmp_path / "mixed.txt"
    path.write_text(f"# header\n{SINGLES_PUZZLE}\n\nnot a puzzle\n{HARD_PUZZLE}\n", encoding="utf-8")
    puzzles, errors = load_puzzles(path)
    assert [number for number, _ in puzzles] == [2, 5]
    assert [number for number, _ in errors] == [4]


def test_puzzles_from_argument(tmp_path):
    assert puzzles_from_argument(SINGLES_PUZZLE) == [parse_grid(SINGLES_PUZZLE)]
    path = tmp_path / "one.txt"
    path.write_text(HARD_PUZZLE + "\n", encoding="utf-8")
    assert puzzles_from_argument(str(path)) == [parse_grid(HARD_PUZZLE)]
    with pytest.raises(GridParseError):
        puzzles_from_argument("12345")


def test_export_to_csv(tmp_path):
    df = pd.DataFrame({"puzzle": ["a", "b"], "whip_rating": [1, 2]})
    target = tmp_path / "out.csv"
    text = export_to_csv(df, target)
    assert text == "puzzle,whip_rating\na,1\nb,2\n"
    assert target.read_text(encoding="utf-8") == text

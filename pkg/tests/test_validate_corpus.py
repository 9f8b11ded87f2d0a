import pytest

from validate_corpus import main, validate_line
from tests.conftest import HARD_PUZZLE, SINGLES_PUZZLE


def test_valid_minimal_line(minimal_puzzles):
    errors, warnings = validate_line(minimal_puzzles[0].to_line())
    assert errors == [] and warnings == []


def test_non_minimal_line_warns():
    errors, warnings = validate_line(SINGLES_PUZZLE)
    assert errors == []
    assert any("not minimal" in w for w in warnings)


@pytest.mark.parametrize("line,message", [
    ("123", "expected 81 characters"),
    ("11" + "." * 79, "repeats"),
    ("." * 81, "more than one solution"),
])
def test_invalid_lines(line, message):
    errors, _ = validate_line(line)
    assert any(message in e for e in errors)


def test_main_exits_on_errors(tmp_path, capsys):
    path = tmp_path / "bad.txt"
    path.write_text(f"{HARD_PUZZLE}\n{'.' * 81}\n", encoding="utf-8")
    with pytest.raises(SystemExit) as exc:
        main(str(path))
    assert exc.value.code == 1
    assert "ERROR" in capsys.readouterr().out

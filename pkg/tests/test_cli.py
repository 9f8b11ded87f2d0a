import pytest

from src.cli import EXIT_CONTRADICTION, EXIT_DATA, EXIT_OK, EXIT_STUCK, EXIT_USAGE, main
from tests.conftest import DUPLICATE_GIVENS, HARD_PUZZLE, SINGLES_PUZZLE, SINGLES_SOLUTION


@pytest.fixture
def corpus(tmp_path):
    path = tmp_path / "corpus.txt"
    path.write_text(f"# two copies\n{SINGLES_PUZZLE}\n{SINGLES_PUZZLE}\n", encoding="utf-8")
    return str(path)


def test_solve_prints_path_and_grid(capsys):
    assert main(["solve", SINGLES_PUZZLE, "--theory", "brt"]) == EXIT_OK
    out = capsys.readouterr().out.splitlines()
    assert out[0].startswith(f"# {SINGLES_PUZZLE.replace('0', '.')}")
    assert "status: solved" in out
    assert out[-1] == SINGLES_SOLUTION


def test_solve_is_deterministic(capsys):
    main(["solve", SINGLES_PUZZLE])
    first = capsys.readouterr().out
    main(["solve", SINGLES_PUZZLE])
    assert capsys.readouterr().out == first


def test_solve_stuck_exit_code(capsys):
    assert main(["solve", HARD_PUZZLE, "--theory", "brt"]) == EXIT_STUCK
    assert "status: stuck" in capsys.readouterr().out


def test_solve_contradiction_exit_code(capsys):
    assert main(["solve", DUPLICATE_GIVENS]) == EXIT_CONTRADICTION
    assert "status: contradiction" in capsys.readouterr().out


def test_usage_errors(capsys):
    assert main(["solve", SINGLES_PUZZLE, "--theory", "X9"]) == EXIT_USAGE
    assert main(["solve", SINGLES_PUZZLE, "--strategy", "kinds=nope"]) == EXIT_USAGE
    with pytest.raises(SystemExit) as exc:
        main(["bogus"])
    assert exc.value.code == EXIT_USAGE
    with pytest.raises(SystemExit) as exc:
        main(["rate"])
    assert exc.value.code == EXIT_USAGE


def test_data_errors(capsys, tmp_path):
    assert main(["solve", "123"]) == EXIT_DATA
    assert main(["rate", str(tmp_path / "missing.txt")]) == EXIT_DATA


def test_rate_csv(capsys, corpus):
    assert main(["rate", corpus, "--cap", "2"]) == EXIT_OK
    lines = capsys.readouterr().out.splitlines()
    assert lines[0] == "puzzle,whip_rating,braid_rating,solved_by"
    assert lines[1].endswith(",0,0,BRT")
    assert len(lines) == 3


def test_rate_chart(capsys, corpus, tmp_path):
    chart = tmp_path / "ratings.html"
    assert main(["rate", corpus, "--cap", "2", "--format", "text", "--chart", str(chart)]) == EXIT_OK
    assert chart.exists()


def test_table1_outputs(capsys, corpus, tmp_path):
    chart, pdf = tmp_path / "t1.html", tmp_path / "t1.pdf"
    assert main(["table1", corpus, "--max-n", "2", "--chart", str(chart), "--pdf", str(pdf)]) == EXIT_OK
    out = capsys.readouterr().out
    assert "newly solved" in out and "cumulative" in out
    assert chart.exists()
    assert pdf.read_bytes().startswith(b"%PDF")


def test_table1_csv(capsys, corpus):
    assert main(["table1", corpus, "--max-n", "1", "--format", "csv"]) == EXIT_OK
    lines = capsys.readouterr().out.splitlines()
    assert lines[0] == "row,BRT,L1,unsolved,total"
    assert lines[1] == "newly solved,2,0,0,2"
    assert lines[2] == "cumulative,2,2,0,2"


def test_verify_ladder(capsys, corpus):
    assert main(["verify", corpus, "--campaign", "ladder", "--cap", "1"]) == EXIT_OK
    out = capsys.readouterr().out
    assert "campaign: ladder" in out
    assert "violations: 0" in out


def test_verify_soundness(capsys, corpus):
    assert main(["verify", corpus, "--campaign", "soundness", "--theory", "L2", "--limit", "1"]) == EXIT_OK
    assert "puzzles: 1" in capsys.readouterr().out


def test_gen_writes_corpus(capsys, tmp_path):
    target = tmp_path / "gen.txt"
    assert main(["gen", "--count", "2", "--seed", "5", "--output", str(target)]) == EXIT_OK
    lines = [line for line in target.read_text(encoding="utf-8").splitlines() if not line.startswith("#")]
    assert len(lines) == 2
    assert all(len(line) == 81 for line in lines)


def test_te_verb(capsys):
    assert main(["te", SINGLES_PUZZLE]) == EXIT_OK
    assert "status: solved" in capsys.readouterr().out


@pytest.mark.slow
def test_te_verb_prints_braids(capsys):
    code = main(["te", HARD_PUZZLE, "--trace"])
    out = capsys.readouterr().out
    assert code in (EXIT_OK, EXIT_STUCK)
    assert "zt-braid[" in out
    assert "TE[" in out


def test_rate_empty_corpus_prints_header(capsys, tmp_path):
    path = tmp_path / "empty.txt"
    path.write_text("# nothing\n", encoding="utf-8")
    assert main(["rate", str(path)]) == EXIT_OK
    assert capsys.readouterr().out == "puzzle,whip_rating,braid_rating,solved_by\n"


def test_rate_cap_zero_marks_above_cap(capsys, tmp_path):
    path = tmp_path / "hard.txt"
    path.write_text(HARD_PUZZLE + "\n", encoding="utf-8")
    assert main(["rate", str(path), "--cap", "0"]) == EXIT_OK
    assert capsys.readouterr().out.splitlines()[1].endswith(",above-cap,above-cap,unsolved")


def test_solve_with_seed(capsys):
    assert main(["solve", SINGLES_PUZZLE, "--seed", "9"]) == EXIT_OK
    assert "seed=9" in capsys.readouterr().out.splitlines()[0]


def test_malformed_corpus_lines_are_skipped(capsys, tmp_path):
    path = tmp_path / "mixed.txt"
    path.write_text(f"bad line\n{SINGLES_PUZZLE}\n", encoding="utf-8")
    assert main(["rate", str(path)]) == EXIT_OK
    captured = capsys.readouterr()
    assert len(captured.out.splitlines()) == 2
    assert ":1:" in captured.err


def test_solve_csv_format(capsys):
    assert main(["solve", SINGLES_PUZZLE, "--theory", "brt", "--format", "csv"]) == EXIT_OK
    lines = capsys.readouterr().out.splitlines()
    assert lines[0] == "puzzle,step,rule,application,digest,status"
    assert len(lines) > 1
    rows = [line.split(",") for line in lines[1:]]
    assert {row[2] for row in rows} <= {"ECP", "S"}
    assert all(row[-1] == "solved" for row in rows)
    assert [int(row[1]) for row in rows] == list(range(1, len(rows) + 1))


def test_solve_with_family_restriction(capsys):
    assert main(["solve", HARD_PUZZLE, "--theory", "L1", "--families", "rc"]) in (EXIT_OK, EXIT_STUCK)
    assert "families=rc" in capsys.readouterr().out.splitlines()[0]
    assert main(["solve", SINGLES_PUZZLE, "--families", "rx"]) == EXIT_USAGE

"""
Corpus Validation Script
Checks a puzzle file line by line: format, consistent givens, uniqueness, minimality
"""
import sys

from src.sudoku import GridParseError, is_minimal, parse_grid, solution_count
from src.utils import read_corpus


def validate_line(line):
    errors, warnings = [], []
    try:
        grid = parse_grid(line)
    except GridParseError as e:
        errors.append(str(e))
        return errors, warnings

    if not grid.consistent:
        errors.append("a digit repeats inside a row, column or block")
        return errors, warnings

    count = solution_count(grid, 2)
    if count == 0:
        errors.append("no solution")
    elif count > 1:
        errors.append("more than one solution")
    elif not is_minimal(grid):
        warnings.append(f"not minimal ({grid.n_givens} givens)")

    if grid.n_givens < 17:
        warnings.append(f"only {grid.n_givens} givens")
    return errors, warnings


def main(path=None):
    path = path or (sys.argv[1] if len(sys.argv) > 1 else "data/corpus.txt")
    print("=" * 65)
    print("  Puzzle Corpus Validation")
    print("=" * 65)

    try:
        print(f"\nReading {path}…")
        all_errors, all_warnings = [], []
        total = 0
        seen = {}
        for number, line in read_corpus(path):
            total += 1
            e, w = validate_line(line)
            all_errors += [f"[line {number:>5}] {x}" for x in e]
            all_warnings += [f"[line {number:>5}] {x}" for x in w]
            if line in seen:
                all_warnings.append(f"[line {number:>5}] duplicate of line {seen[line]}")
            seen.setdefault(line, number)
        print(f"  {total} puzzles | {len(all_errors)} errors | {len(all_warnings)} warnings")

        print("\n" + "=" * 65)
        print("VALIDATION SUMMARY")
        print("=" * 65)

        if all_errors:
            print(f"\n❌ {len(all_errors)} ERROR(S):")
            for err in all_errors:
                print(f"  - {err}")
            sys.exit(1)
        else:
            print("\n✅ No critical errors found!")

        if all_warnings:
            print(f"\n⚠️  {len(all_warnings)} WARNING(S):")
            for w in all_warnings:
                print(f"  - {w}")
        else:
            print("✅ No warnings!")

        print("\n" + "=" * 65)
        print("Corpus validation complete.")
        print("=" * 65)

    except FileNotFoundError as e:
        print(f"\n❌ {e}")
        print("Run: python app.py gen --output data/corpus.txt  to create a corpus")
        sys.exit(1)


if __name__ == "__main__":
    main()

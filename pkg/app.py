"""
Resolution-Rule Engine – command-line entry point
Resolution theories (BRT, whips, braids), T&E and ratings for Sudoku puzzles

Usage: python app.py solve <puzzle> [--theory L7]
       python app.py rate data/corpus.txt --cap 7 --jobs 4
       python app.py table1 data/corpus.txt --chart table1.html --pdf table1.pdf
       python app.py verify data/corpus.txt --campaign soundness
"""
import os
import sys

sys.path.insert(0, os.path.abspath(os.path.dirname(__file__)))

from src.cli import main  # noqa: E402

if __name__ == "__main__":
    sys.exit(main())

"""
Utility functions for the resolution-rule engine
Config loading, puzzle-file I/O, rating labels and colours, CSV export
"""
import logging
import sys
from functools import lru_cache
from pathlib import Path

import pandas as pd
import yaml

from src.sudoku import Grid, GridParseError, parse_grid

logger = logging.getLogger(__name__)

DEFAULT_CONFIG_PATH = Path(__file__).resolve().parent.parent / "config.yaml"

# ── Rating level labels (0 = BRT, n = L_n / M_n, None = above the cap) ──────
LADDER_PREFIX = {
    "whip":  "L",
    "braid": "M",
}

LEVEL_COLORS = {
    0: "#2ecc71",
    1: "#27ae60",
    2: "#3498db",
    3: "#2980b9",
    4: "#f1c40f",
    5: "#f39c12",
    6: "#e67e22",
    7: "#e74c3c",
}
ABOVE_CAP_COLOR = "#95a5a6"


@lru_cache(maxsize=None)
def load_config(path=None):
    """Load config.yaml (or ``path``) once per process."""
    config_path = Path(path) if path else DEFAULT_CONFIG_PATH
    with open(config_path, encoding="utf-8") as fh:
        return yaml.safe_load(fh) or {}


def setting(section, key, default=None, config=None):
    config = config if config is not None else load_config()
    return config.get(section, {}).get(key, default)


def get_level_name(level, ladder="whip") -> str:
    if level is None or pd.isna(level):
        return "unsolved"
    if int(level) == 0:
        return "BRT"
    return f"{LADDER_PREFIX.get(ladder, 'L')}{int(level)}"


def get_level_color(level) -> str:
    if level is None or pd.isna(level):
        return ABOVE_CAP_COLOR
    return LEVEL_COLORS.get(int(level), ABOVE_CAP_COLOR)


# ── Puzzle files ─────────────────────────────────────────────────────────────

def read_corpus(path):
    """Yield (line_number, text) for every puzzle line; blank and '#' lines skipped."""
    with open(path, encoding="utf-8") as fh:
        for number, raw in enumerate(fh, start=1):
            line = raw.strip()
            if line and not line.startswith("#"):
                yield number, line


def load_puzzles(path):
    """
    Parse every puzzle of a corpus file.
    Returns (puzzles, errors): puzzles is a list of (line_number, Grid) and
    errors a list of (line_number, message) for malformed lines.
    """
    puzzles, errors = [], []
    for number, line in read_corpus(path):
        try:
            puzzles.append((number, parse_grid(line)))
        except GridParseError as exc:
            logger.warning("%s:%d skipped: %s", path, number, exc)
            errors.append((number, str(exc)))
    return puzzles, errors


def puzzles_from_argument(arg) -> list[Grid]:
    """An 81-character puzzle line, or the path of a puzzle file."""
    path = Path(arg)
    if len(arg.strip()) != 81 and path.exists():
        puzzles, _ = load_puzzles(path)
        return [g for _, g in puzzles]
    return [parse_grid(arg)]


def write_corpus(grids, path, header=None):
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8") as fh:
        for line in (header or []):
            fh.write(f"# {line}\n")
        for g in grids:
            fh.write(g.to_line() + "\n")


def export_to_csv(data, filename=None):
    """DataFrame → CSV text; also written to ``filename`` when given."""
    text = data.to_csv(index=False, lineterminator="\n")
    if filename:
        Path(filename).write_text(text, encoding="utf-8")
    return text


def configure_logging(verbosity=0):
    """Engine logs go to standard error so standard output stays reproducible."""
    level = logging.WARNING if verbosity <= 0 else logging.INFO if verbosity == 1 else logging.DEBUG
    logging.basicConfig(
        level=level,
        stream=sys.stderr,
        format="%(asctime)s %(levelname)s %(name)s: %(message)s",
        force=True,
    )

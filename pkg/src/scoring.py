"""
Rating pipeline for puzzle corpora
Per-puzzle whip/braid ratings and the per-level distribution report
"""
import logging
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

import numpy as np
import pandas as pd
from tqdm import tqdm

from src.csp import CspError
from src.sudoku import build_csp, parse_grid
from src.theories import Ladder, RatingUndefinedError, rate

logger = logging.getLogger(__name__)

RATING_COLUMNS = ["puzzle", "whip_rating", "braid_rating", "solved_by"]


# ─────────────────────────────────────────────────────────────────────────────
# Per-puzzle rating
# ─────────────────────────────────────────────────────────────────────────────

def solved_by(whip_rating, braid_rating):
    """Name of the weakest theory of either ladder that solves the puzzle."""
    if pd.isna(whip_rating) and pd.isna(braid_rating):
        return "unsolved"
    if pd.isna(whip_rating) or (not pd.isna(braid_rating) and braid_rating < whip_rating):
        return "BRT" if braid_rating == 0 else f"M{int(braid_rating)}"
    return "BRT" if whip_rating == 0 else f"L{int(whip_rating)}"


def rate_puzzle(line, cap):
    """
    Rate one 81-character puzzle on both ladders.
    Ratings are None above the cap; a non-unique puzzle gets status
    'rating-undefined' and no ratings.
    """
    grid = parse_grid(line)
    inst = build_csp(grid).instance
    row = {"puzzle": grid.to_line(), "givens": grid.n_givens, "status": "ok"}
    try:
        row["whip_rating"] = rate(inst, Ladder.WHIP, cap)
        row["braid_rating"] = rate(inst, Ladder.BRAID, cap)
    except RatingUndefinedError:
        row.update(whip_rating=None, braid_rating=None, status="rating-undefined")
    except CspError as exc:
        logger.error("rating failed on %s: %s", grid.to_line(), exc)
        row.update(whip_rating=None, braid_rating=None, status="error")
    row["solved_by"] = solved_by(row["whip_rating"], row["braid_rating"]) if row["status"] == "ok" else row["status"]
    return row


def _rate_args(args):
    return rate_puzzle(*args)


def rate_corpus(lines, cap, jobs=1, progress=False):
    """
    Rate every puzzle line; rows come back in input order whatever ``jobs`` is.
    """
    lines = list(lines)
    tasks = [(line, cap) for line in lines]
    if jobs > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            rows = list(tqdm(pool.map(_rate_args, tasks, chunksize=4),
                             total=len(tasks), disable=not progress, desc="rating"))
    else:
        rows = [_rate_args(t) for t in tqdm(tasks, disable=not progress, desc="rating")]

    ratings_df = pd.DataFrame(rows, columns=["puzzle", "givens", "status", "whip_rating", "braid_rating", "solved_by"])
    for col in ("whip_rating", "braid_rating"):
        ratings_df[col] = ratings_df[col].astype("Int64")
    logger.info("rated %d puzzles (cap %d)", len(ratings_df), cap)
    return ratings_df


def validate_ratings(ratings_df):
    """Rows whose braid rating exceeds the whip rating (braids subsume whips)."""
    both = ratings_df.dropna(subset=["whip_rating", "braid_rating"])
    worse = both[both["braid_rating"] > both["whip_rating"]]
    whip_only = ratings_df[ratings_df["braid_rating"].isna() & ratings_df["whip_rating"].notna()]
    return pd.concat([worse, whip_only])


# ─────────────────────────────────────────────────────────────────────────────
# Distribution report
# ─────────────────────────────────────────────────────────────────────────────

@dataclass
class BatchReport:
    """Newly solved and cumulative counts at BRT and each ladder level 1..max_n."""
    ladder: str
    newly: list
    unsolved: int
    total: int

    @property
    def max_n(self):
        return len(self.newly) - 1

    @property
    def cumulative(self):
        return np.cumsum(self.newly).tolist()

    @property
    def labels(self):
        prefix = "M" if self.ladder == "braid" else "L"
        return ["BRT"] + [f"{prefix}{n}" for n in range(1, self.max_n + 1)]

    def fractions(self):
        if not self.total:
            return [0.0] * len(self.newly)
        return [c / self.total for c in self.cumulative]

    def check_invariants(self):
        """Arithmetic consistency of the two rows; returns violation messages."""
        problems = []
        cumulative = self.cumulative
        if any(n < 0 for n in self.newly):
            problems.append("negative newly-solved count")
        if any(b < a for a, b in zip(cumulative, cumulative[1:])):
            problems.append("cumulative row decreases")
        if cumulative and cumulative[-1] + self.unsolved != self.total:
            problems.append(f"cumulative {cumulative[-1]} + unsolved {self.unsolved} != total {self.total}")
        return problems

    def to_frame(self):
        """The two-row table: newly solved and cumulative per level."""
        frame = pd.DataFrame([self.newly, self.cumulative], columns=self.labels,
                             index=["newly solved", "cumulative"])
        frame["unsolved"] = [self.unsolved, self.unsolved]
        frame["total"] = [self.total, self.total]
        return frame

    def to_text(self):
        frame = self.to_frame()
        return frame.to_string()


def compute_batch_report(ratings_df, max_n, ladder="whip"):
    column = f"{ladder}_rating"
    rated = ratings_df[ratings_df["status"] == "ok"] if "status" in ratings_df else ratings_df
    values = rated[column]
    newly = [int((values == n).sum()) for n in range(0, max_n + 1)]
    total = len(rated)
    return BatchReport(ladder, newly, total - sum(newly), total)


def reference_report(config):
    table = config.get("TABLE1", {})
    newly = list(table.get("REFERENCE_NEWLY", []))
    total = int(table.get("REFERENCE_TOTAL", sum(newly)))
    return BatchReport("whip", newly, total - sum(newly), total)


def table1_shape_checks(report, config):
    """
    Shape checks of a whip-ladder report at desk scale:
    cumulative fraction non-decreasing, BRT fraction within bounds, and the
    top level solving nearly everything.
    """
    table = config.get("TABLE1", {})
    fractions = report.fractions()
    brt = fractions[0] if fractions else 0.0
    top = fractions[-1] if fractions else 0.0
    return {
        "non_decreasing": all(b >= a for a, b in zip(fractions, fractions[1:])),
        "brt_fraction": brt,
        "brt_in_range": table.get("BRT_FRACTION_MIN", 0.0) <= brt <= table.get("BRT_FRACTION_MAX", 1.0),
        "top_fraction": top,
        "top_level_ok": top >= table.get("TOP_LEVEL_FRACTION_MIN", 0.0),
    }


def ratings_csv_frame(ratings_df, above_cap_label="above-cap"):
    """Ratings in the puzzle,whip_rating,braid_rating,solved_by output layout."""
    out = ratings_df[RATING_COLUMNS].copy()
    for col in ("whip_rating", "braid_rating"):
        undefined = ratings_df["status"] != "ok"
        out[col] = out[col].astype(object)
        out.loc[out[col].isna() & ~undefined, col] = above_cap_label
        out.loc[undefined, col] = ""
    return out

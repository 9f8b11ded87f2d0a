"""
Generate a reproducible corpus of random minimal puzzles
One 81-character line per puzzle; every puzzle is seeded from the corpus seed.
The `gen` verb of app.py writes the corpus file.
"""
import logging
from concurrent.futures import ProcessPoolExecutor

import numpy as np
from tqdm import tqdm

from src.sudoku import generate_minimal

logger = logging.getLogger(__name__)


def puzzle_seeds(count, seed):
    return [int(s) for s in np.random.default_rng(seed).integers(2**31, size=count)]


def generate_corpus(count, seed, jobs=1, progress=False):
    """``count`` minimal puzzles; identical output for identical (count, seed)."""
    seeds = puzzle_seeds(count, seed)
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            grids = list(tqdm(pool.map(generate_minimal, seeds), total=count,
                              disable=not progress, desc="generating"))
    else:
        grids = [generate_minimal(s) for s in tqdm(seeds, disable=not progress, desc="generating")]

    seen = set()
    for g in grids:
        if g.to_line() in seen:
            logger.warning("duplicate puzzle generated: %s", g.to_line())
        seen.add(g.to_line())
    return grids


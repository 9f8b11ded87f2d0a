"""
Command-line surface
Verbs: solve, rate, table1, verify, gen, te.

Exit codes: 0 solved / pass, 1 stuck, 2 contradiction / violation,
64 usage error, 65 data error.
"""
import argparse
import logging
import sys
from dataclasses import replace
from pathlib import Path

import numpy as np
import pandas as pd

from src import campaigns
from src.basic_rules import brt_fixpoint
from src.csp import CspError, delete_candidate
from src.generate_corpus import generate_corpus
from src.patterns import format_witness
from src.pdf_gen import generate_pdf_report
from src.scoring import (
    compute_batch_report, rate_corpus, ratings_csv_frame, reference_report, table1_shape_checks,
)
from src.sudoku import FAMILIES, GridParseError, build_csp, format_grid
from src.theories import (
    PathStatus, UnknownStrategyError, UnknownTheoryError, braid_theory, parse_families, parse_strategy,
    parse_theory, restrict_families, solve, whip_theory,
)
from src.trial_error import braid_from_trace, te_solve
from src.utils import (
    configure_logging, export_to_csv, load_config, load_puzzles, puzzles_from_argument, write_corpus,
)
from src.visuals import create_rating_scatter, create_table1_chart, write_html

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_STUCK = 1
EXIT_CONTRADICTION = 2
EXIT_USAGE = 64
EXIT_DATA = 65

STATUS_EXIT = {
    PathStatus.SOLVED: EXIT_OK,
    PathStatus.STUCK: EXIT_STUCK,
    PathStatus.CONTRADICTION: EXIT_CONTRADICTION,
}


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _theory_arg(args, config):
    theory = parse_theory(args.theory or config["SOLVER"]["DEFAULT_THEORY"])
    if getattr(args, "max_len", None) is not None:
        theory = braid_theory(args.max_len) if theory.is_braid else whip_theory(args.max_len)
    if getattr(args, "families", None):
        theory = restrict_families(theory, parse_families(args.families, FAMILIES))
    return theory


def _strategy_arg(args, config):
    strategy = parse_strategy(args.strategy or config["SOLVER"].get("DEFAULT_STRATEGY", "default"))
    if getattr(args, "seed", None) is not None and args.command == "solve":
        strategy = replace(strategy, seed=args.seed)
    return strategy


def _batch(args, config):
    """(jobs, progress) from the flags, falling back to the BATCH section."""
    batch = config.get("BATCH", {})
    jobs = args.jobs if getattr(args, "jobs", None) is not None else batch.get("JOBS", 1)
    return jobs, args.progress or batch.get("PROGRESS", False)


def _corpus(path):
    puzzles, errors = load_puzzles(path)
    for number, message in errors:
        print(f"{path}:{number}: {message}", file=sys.stderr)
    return [g for _, g in puzzles]


# ─────────────────────────────────────────────────────────────────────────────
# Verbs
# ─────────────────────────────────────────────────────────────────────────────

def cmd_solve(args, config):
    theory = _theory_arg(args, config)
    strategy = _strategy_arg(args, config)
    families = "all" if theory.families is None else ",".join(FAMILIES[f] for f in sorted(theory.families))
    worst = EXIT_OK
    rows = []
    for grid in puzzles_from_argument(args.puzzle):
        csp = build_csp(grid)
        path = solve(csp.instance, theory, strategy)
        worst = max(worst, STATUS_EXIT[path.status])
        if args.format == "csv":
            rows.extend(
                {"puzzle": grid.to_line(), "step": step, "rule": app.rule,
                 "application": app.line(csp.instance), "digest": app.digest, "status": path.status.value}
                for step, app in enumerate(path.applications, start=1)
            )
            continue
        print(f"# {grid.to_line()} theory={theory.name} families={families} strategy={strategy.describe()}")
        for line in path.lines(csp.instance):
            print(line)
        print(f"status: {path.status.value}")
        print(format_grid(csp.grid_of(path.final), pretty=args.pretty))
    if args.format == "csv":
        columns = ["puzzle", "step", "rule", "application", "digest", "status"]
        sys.stdout.write(export_to_csv(pd.DataFrame(rows, columns=columns)))
    return worst


def cmd_te(args, config):
    worst = EXIT_OK
    for grid in puzzles_from_argument(args.puzzle):
        csp = build_csp(grid)
        inst = csp.instance
        result = te_solve(inst)
        print(f"# {grid.to_line()} T&E(BRT)")
        # each trial ran on the state left by the previous eliminations
        ks, _ = brt_fixpoint(inst, inst.initial_state)
        for trace in result.trials:
            if args.trace:
                for line in trace.lines(inst):
                    print(line)
            print(format_witness(inst, braid_from_trace(inst, ks, trace)))
            ks, _ = brt_fixpoint(inst, delete_candidate(ks, trace.assumed))
        status = PathStatus.SOLVED if result.solved else (
            PathStatus.CONTRADICTION if result.final.contradiction is not None else PathStatus.STUCK)
        print(f"status: {status.value}")
        print(format_grid(csp.grid_of(result.final), pretty=args.pretty))
        worst = max(worst, STATUS_EXIT[status])
    return worst


def cmd_rate(args, config):
    cap = args.cap if args.cap is not None else config["RATING"]["CAP"]
    grids = _corpus(args.corpus)
    jobs, progress = _batch(args, config)
    ratings_df = rate_corpus([g.to_line() for g in grids], cap, jobs=jobs, progress=progress)
    out = ratings_csv_frame(ratings_df, config["RATING"].get("ABOVE_CAP_LABEL", "above-cap"))
    if args.format == "csv":
        sys.stdout.write(export_to_csv(out))
    else:
        sys.stdout.write(out.to_string(index=False) + "\n" if len(out) else "no puzzles\n")
    if args.chart:
        write_html(create_rating_scatter(ratings_df, cap, config["DISPLAY"].get("CHART_HEIGHT", 450)), args.chart)
    return EXIT_OK


def cmd_table1(args, config):
    table = config.get("TABLE1", {})
    max_n = args.max_n if args.max_n is not None else table.get("MAX_N", 7)
    ladder = args.ladder or table.get("LADDER", "whip")
    grids = _corpus(args.corpus)
    jobs, progress = _batch(args, config)
    ratings_df = rate_corpus([g.to_line() for g in grids], max_n, jobs=jobs, progress=progress)
    report = compute_batch_report(ratings_df, max_n, ladder)
    problems = report.check_invariants()

    if args.format == "csv":
        frame = report.to_frame().reset_index(names="row")
        sys.stdout.write(export_to_csv(frame))
    else:
        print(report.to_text())
        for key, value in table1_shape_checks(report, config).items():
            print(f"{key}: {value:.4f}" if isinstance(value, float) else f"{key}: {value}")

    reference = reference_report(config) if table.get("REFERENCE_NEWLY") else None
    if args.chart:
        write_html(create_table1_chart(report, reference, config["DISPLAY"].get("CHART_HEIGHT", 450)), args.chart)
    if args.pdf:
        unsolved = ratings_df[ratings_df[f"{ladder}_rating"].isna()]["puzzle"].tolist()
        buffer = generate_pdf_report(report, Path(args.corpus).name, reference,
                                     table1_shape_checks(report, config), unsolved,
                                     config.get("EXPORT", {}).get("PDF_PAGE_SIZE", "Letter"))
        Path(args.pdf).write_bytes(buffer.getvalue())
    for problem in problems:
        print(f"report invariant violated: {problem}", file=sys.stderr)
    return EXIT_CONTRADICTION if problems else EXIT_OK


def cmd_verify(args, config):
    settings = config.get("CAMPAIGNS", {})
    seed = args.seed if args.seed is not None else settings.get("SEED", 1)
    grids = _corpus(args.corpus)
    _, progress = _batch(args, config)
    limit = args.limit
    if limit is None:
        limit = {
            "te-equivalence": settings.get("TE_PUZZLES"),
            "confluence": settings.get("CONFLUENCE_PUZZLES"),
        }.get(args.campaign)
    if limit:
        grids = grids[:limit]

    if args.campaign == "soundness":
        theory = parse_theory(args.theory or settings.get("SOUNDNESS_THEORY", "M7"))
        report = campaigns.run_soundness(grids, theory, _strategy_arg(args, config), progress)
    elif args.campaign == "te-equivalence":
        report = campaigns.run_te_equivalence(grids, progress)
    elif args.campaign == "confluence":
        levels = [args.max_len] if args.max_len else settings.get("CONFLUENCE_LEVELS", [1, 2, 3, 4])
        report = campaigns.run_confluence(
            grids, levels,
            args.strategies or settings.get("STRATEGIES_PER_PUZZLE", 5),
            seed,
            args.perturbations if args.perturbations is not None else settings.get("STABILITY_PERTURBATIONS", 0),
            progress,
        )
    else:
        cap = args.cap if args.cap is not None else settings.get("LADDER_CAP", 4)
        report = campaigns.run_ladder(grids, cap, progress)

    for line in report.lines():
        print(line)
    return EXIT_OK if report.passed else EXIT_CONTRADICTION


def cmd_gen(args, config):
    generator = config.get("GENERATOR", {})
    count = args.count if args.count is not None else generator.get("COUNT", 500)
    seed = args.seed if args.seed is not None else generator.get("SEED", 1)
    jobs, progress = _batch(args, config)
    grids = generate_corpus(count, seed, jobs, progress)
    if args.output:
        write_corpus(grids, args.output, header=[
            f"{count} random minimal puzzles, seed {seed}",
            f"regenerate with: python app.py gen --count {count} --seed {seed}",
        ])
        mean_givens = np.mean([g.n_givens for g in grids]) if grids else 0.0
        logger.info("wrote %d puzzles to %s (mean %.1f givens)", len(grids), args.output, mean_givens)
    else:
        for g in grids:
            print(g.to_line())
    return EXIT_OK


# ─────────────────────────────────────────────────────────────────────────────
# Parser
# ─────────────────────────────────────────────────────────────────────────────

def build_parser():
    parser = _Parser(prog="rre", description="Resolution-rule engine for finite CSPs and Sudoku")
    parser.add_argument("-v", "--verbose", action="count", default=0, help="log to standard error (-vv for debug)")
    parser.add_argument("--config", help="alternative config.yaml")
    sub = parser.add_subparsers(dest="command", required=True)

    def batch_flags(p):
        p.add_argument("--jobs", type=int, help="worker processes")
        p.add_argument("--progress", action="store_true", help="progress bar on standard error")

    p = sub.add_parser("solve", help="solve one puzzle (or every puzzle of a file) and print the path")
    p.add_argument("puzzle", help="81-character puzzle line or puzzle file")
    p.add_argument("--theory", help="brt | L<n> | M<n> | Linf | Minf")
    p.add_argument("--max-len", type=int, help="override the n of the chosen ladder")
    p.add_argument("--strategy", help="default | random:<seed> | kinds=...;shortest=on|off;seed=S")
    p.add_argument("--families", help="restrict patterns to these variable families, e.g. rc for xy-chains")
    p.add_argument("--seed", type=int, help="seed of the strategy scan order")
    p.add_argument("--pretty", action="store_true", help="9x9 grid output")
    p.add_argument("--format", choices=("text", "csv"), default="text", help="path log or one CSV row per application")
    p.set_defaults(func=cmd_solve)

    p = sub.add_parser("te", help="solve with T&E(BRT) and print the extracted braids")
    p.add_argument("puzzle")
    p.add_argument("--trace", action="store_true", help="print every trial's event log")
    p.add_argument("--pretty", action="store_true")
    p.set_defaults(func=cmd_te)

    p = sub.add_parser("rate", help="whip and braid ratings for every puzzle of a corpus")
    p.add_argument("corpus")
    p.add_argument("--cap", type=int)
    p.add_argument("--format", choices=("csv", "text"), default="csv")
    p.add_argument("--chart", help="write a whip vs braid plotly HTML chart")
    batch_flags(p)
    p.set_defaults(func=cmd_rate)

    p = sub.add_parser("table1", help="newly solved and cumulative counts per ladder level")
    p.add_argument("corpus")
    p.add_argument("--max-n", type=int)
    p.add_argument("--ladder", choices=("whip", "braid"))
    p.add_argument("--format", choices=("csv", "text"), default="text")
    p.add_argument("--chart", help="write a plotly HTML chart")
    p.add_argument("--pdf", help="write a PDF report")
    batch_flags(p)
    p.set_defaults(func=cmd_table1)

    p = sub.add_parser("verify", help="run a property campaign over a corpus")
    p.add_argument("corpus")
    p.add_argument("--campaign", choices=campaigns.CAMPAIGNS, required=True)
    p.add_argument("--theory")
    p.add_argument("--strategy")
    p.add_argument("--max-len", type=int, help="single braid level for the confluence campaign")
    p.add_argument("--strategies", type=int, help="random strategies per puzzle")
    p.add_argument("--perturbations", type=int, help="stability spot-checks")
    p.add_argument("--cap", type=int)
    p.add_argument("--seed", type=int)
    p.add_argument("--limit", type=int, help="first N puzzles only")
    p.add_argument("--progress", action="store_true")
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("gen", help="generate random minimal puzzles")
    p.add_argument("--count", type=int)
    p.add_argument("--seed", type=int)
    p.add_argument("--output")
    batch_flags(p)
    p.set_defaults(func=cmd_gen)
    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    configure_logging(args.verbose)
    try:
        config = load_config(args.config)
        return args.func(args, config)
    except (UnknownTheoryError, UnknownStrategyError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (GridParseError, FileNotFoundError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except CspError as exc:
        logger.error("%s", exc)
        return EXIT_DATA

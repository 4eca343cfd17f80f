"""Command-line entry point.

    ringevo run --config cfg.json [--seed S] [--runs N] [--out DIR]
    ringevo tune-mu --config cfg.json --start-mu M [--out DIR]
    ringevo compare --a a.json --b b.json [--allow-untuned] [--out DIR]
    ringevo oracle tsp --instance cities.csv
"""

from __future__ import annotations

import argparse
import logging
import sys
from dataclasses import replace
from pathlib import Path

from ..errors import ConfigError, InstanceError, RingEvoError
from ..problems.layout import LayoutProblem, placements_csv, placements_svg
from ..problems.sched import SchedProblem
from ..problems.tsp import TspInstance, tsp_brute_force
from .campaign import (compare, format_summary, multi_run, tune_from_config, write_progress_csv,
                       write_results_csv)
from .config import RunConfig


def _out_dir(path) -> Path:
    out = Path(path)
    out.mkdir(parents=True, exist_ok=True)
    return out


def _write_phenotype(problem, outcome, out: Path) -> None:
    phenotype = problem.evaluate(outcome.best.chromosome).phenotype
    if isinstance(problem, LayoutProblem):
        placements_svg(phenotype.placements, problem.instance, out / "placements.svg")
        placements_csv(phenotype.placements, out / "placements.csv")
    elif isinstance(problem, SchedProblem):
        phenotype.to_csv(out / "schedule.csv")
        phenotype.load_profile_csv(out / "load_profile.csv")


def cmd_run(args) -> int:
    cfg = RunConfig.from_json(args.config)
    if args.seed is not None:
        cfg = replace(cfg, seed=args.seed)
    if args.runs is not None:
        cfg = replace(cfg, runs=args.runs)
    problem = cfg.build_problem()
    campaign = multi_run(cfg, problem)
    out = _out_dir(args.out)
    write_results_csv(campaign.results, out / "results.csv")
    write_progress_csv(campaign.progress, out / "progress.csv")
    lines = [f"problem: {problem.describe()}", f"runs: {cfg.runs}  master seed: {cfg.seed}"]
    lines += [format_summary(k, s) for k, s in campaign.summaries().items()]
    lines.append(f"wall time: {sum(r.wall_time for r in campaign.results):.2f} s")
    (out / "report.txt").write_text("\n".join(lines) + "\n")
    _write_phenotype(problem, campaign.best_outcome, out)
    print("\n".join(lines))
    return 0


def cmd_tune(args) -> int:
    cfg = RunConfig.from_json(args.config)
    report = tune_from_config(cfg, args.start_mu)
    text = report.to_text()
    if args.out:
        out = _out_dir(args.out)
        (out / "tune_report.txt").write_text(text + "\n")
        report.write_csv(out / "tune_trace.csv")
    print(text)
    return 0


def cmd_compare(args) -> int:
    a, b = RunConfig.from_json(args.a), RunConfig.from_json(args.b)
    report = compare(a, b, allow_untuned=args.allow_untuned)
    if args.out:
        out = _out_dir(args.out)
        report.write_csv(out / "comparison.csv")
        (out / "report.txt").write_text(report.to_text() + "\n")
    print(report.to_text())
    return 0


def cmd_oracle(args) -> int:
    try:
        inst = TspInstance.from_csv(args.instance)
    except OSError as exc:
        raise ConfigError(f"cannot read instance: {exc}") from exc
    tour, length = tsp_brute_force(inst)
    print(f"optimal tour: {' '.join(map(str, tour))}")
    print(f"length: {length!r}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="ringevo", description="Ring-structured evolutionary optimization toolkit")
    ap.add_argument("-v", "--verbose", action="store_true")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("run", help="multi-run campaign")
    p.add_argument("--config", required=True)
    p.add_argument("--seed", type=int)
    p.add_argument("--runs", type=int)
    p.add_argument("--out", default="out")
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("tune-mu", help="population-size tuning")
    p.add_argument("--config", required=True)
    p.add_argument("--start-mu", type=int, required=True)
    p.add_argument("--out")
    p.set_defaults(func=cmd_tune)

    p = sub.add_parser("compare", help="compare two tuned configurations")
    p.add_argument("--a", required=True)
    p.add_argument("--b", required=True)
    p.add_argument("--allow-untuned", action="store_true")
    p.add_argument("--out")
    p.set_defaults(func=cmd_compare)

    p = sub.add_parser("oracle", help="exact reference solutions")
    osub = p.add_subparsers(dest="problem", required=True)
    t = osub.add_parser("tsp", help="brute-force TSP optimum (n <= 10)")
    t.add_argument("--instance", required=True)
    t.set_defaults(func=cmd_oracle)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(message)s")
    try:
        return args.func(args)
    except (ConfigError, InstanceError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except RingEvoError as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())

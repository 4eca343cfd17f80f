"""Multi-run campaigns, population-size tuning and configuration comparison."""

from __future__ import annotations

import csv
import logging
import math
import statistics
import time
import warnings
from dataclasses import dataclass, field, replace
from typing import Callable, Sequence

from ..errors import ConfigError, TuneFailure
from ..population import EngineConfig, RunOutcome, run_engine
from ..problems import ProblemDefinition
from .config import ArchiveConfig, RunConfig
from .stats import StatsSummary, TTestResult, coefficient_of_variation, summarize, two_sample_t_test

log = logging.getLogger(__name__)

MIN_RUNS = 10
RECOMMENDED_RUNS = 30


@dataclass
class RunResult:
    seed: int
    best: float
    evaluations: int
    success: bool | None
    wall_time: float
    status: str
    generations: int
    evals_to_target: int | None
    archive_hits: int = 0

    # wall time is left out so equal seeds give byte-identical files
    CSV_FIELDS = ("seed", "best_fitness", "evaluations", "evals_to_target", "success", "status",
                  "generations", "archive_hits")

    def csv_row(self) -> list:
        return [self.seed, repr(self.best), self.evaluations,
                "" if self.evals_to_target is None else self.evals_to_target,
                "" if self.success is None else int(self.success), self.status,
                self.generations, self.archive_hits]


def run_once(problem: ProblemDefinition, engine: EngineConfig, seed: int, memetic=None,
             archive: ArchiveConfig | None = None,
             on_generation: Callable | None = None) -> tuple[RunResult, RunOutcome]:
    t0 = time.perf_counter()
    arch = archive.build(problem) if archive is not None else None
    outcome = run_engine(problem, engine, seed, memetic=memetic, archive=arch, on_generation=on_generation)
    target = engine.termination.target_fitness
    limit = engine.termination.max_evaluations
    success = None
    if target is not None:
        reached = outcome.evals_to_target
        success = reached is not None and (limit is None or reached <= limit)
    result = RunResult(seed, outcome.best.fitness, outcome.evaluations, success,
                       time.perf_counter() - t0, outcome.status.value, outcome.generations,
                       outcome.evals_to_target, outcome.archive_hits)
    return result, outcome


@dataclass
class Campaign:
    config: RunConfig
    results: list[RunResult]
    outcomes: list[RunOutcome] = field(repr=False)
    progress: list[tuple] = field(repr=False)

    @property
    def successes(self) -> list[bool] | None:
        flags = [r.success for r in self.results]
        return None if any(f is None for f in flags) else flags

    def summaries(self, level: float = 0.95) -> dict[str, StatsSummary]:
        out = {
            "best_fitness": summarize([r.best for r in self.results], self.successes, level),
            "evaluations": summarize([r.evaluations for r in self.results], self.successes, level),
        }
        reached = [r.evals_to_target for r in self.results if r.success]
        if reached:
            out["evals_to_target"] = summarize(reached, None, level)
        return out

    @property
    def best_outcome(self) -> RunOutcome:
        return max(self.outcomes, key=lambda o: o.best.fitness)


def multi_run(config: RunConfig, problem: ProblemDefinition | None = None,
              seeds: Sequence[int] | None = None) -> Campaign:
    """Run ``config.runs`` independent runs with seeds ``master + i``.

    With a target fitness in the termination section a run succeeds when it
    reaches the target within ``max_evaluations``; without one only the
    achieved quality is recorded.
    """
    if config.runs < MIN_RUNS:
        warnings.warn(f"{config.runs} runs: fewer than {MIN_RUNS} runs are not recommended",
                      UserWarning, stacklevel=2)
    elif config.runs < RECOMMENDED_RUNS:
        log.info("%d runs: at least %d are recommended for comparisons", config.runs, RECOMMENDED_RUNS)
    problem = problem or config.build_problem()
    memetic = config.build_memetic(problem)
    seeds = list(seeds) if seeds is not None else [config.seed + i for i in range(config.runs)]
    results, outcomes, progress = [], [], []
    for s in seeds:
        def record(rec, s=s):
            progress.append((s, rec.generation, rec.best, rec.mean, rec.evaluations, rec.acceptances))
        res, out = run_once(problem, config.engine, s, memetic, config.archive, record)
        results.append(res)
        outcomes.append(out)
    return Campaign(config, results, outcomes, progress)


def write_results_csv(results: Sequence[RunResult], path) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(RunResult.CSV_FIELDS)
        for r in sorted(results, key=lambda r: r.seed):
            w.writerow(r.csv_row())


def write_progress_csv(progress: Sequence[tuple], path) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["seed", "generation", "best_fitness", "mean_fitness", "evaluations", "acceptances"])
        for row in progress:
            w.writerow([row[0], row[1], repr(row[2]), repr(row[3]), row[4], row[5]])


def format_summary(name: str, s: StatsSummary) -> str:
    rate = "" if s.success_rate is None else f"  success {s.success_rate:.0%}"
    return (f"{name:16s} n={s.n} mean={s.mean:.6g} median={s.median:.6g} sd={s.stdev:.3g} "
            f"min={s.min:.6g} max={s.max:.6g} {s.level:.0%}CI=[{s.ci_low:.6g}, {s.ci_high:.6g}]{rate}")


# population-size tuning ----------------------------------------------------

@dataclass
class TuneConfig:
    """Tool defaults for the population-size tuner.

    ``fitness_tolerance`` is the largest spread (max - min, on the [0, 1]
    quality scale) of final fitness values accepted as "similar" in phase 1;
    ``effort_cv_limit`` does the same for the effort to reach the target.  In
    phase 2 a batch counts as strongly scattered when its effort coefficient
    of variation exceeds both ``scatter_factor`` times the previous batch's and
    ``light_green_cv``.
    """

    surcharge: float = 0.5
    initial_runs: int = 10
    confirm_runs: int = 20
    batch_runs: int = 10
    descent: float = 0.8
    fitness_tolerance: float = 1e-3
    effort_cv_limit: float = 0.5
    scatter_factor: float = 2.0
    light_green_cv: float = 0.5
    growth: float = 1.25
    max_mu_factor: float = 4.0

    def __post_init__(self):
        if not 0.2 <= self.surcharge <= 1.0:
            raise ConfigError("surcharge must lie in [0.2, 1.0]")
        if not 0.0 < self.descent < 1.0:
            raise ConfigError("descent factor must lie in (0, 1)")
        if self.initial_runs < MIN_RUNS:
            raise ConfigError(f"phase 1 needs at least {MIN_RUNS} runs")
        if not 10 <= self.confirm_runs <= 20:
            raise ConfigError("confirmation batch must have 10 to 20 runs")
        if self.batch_runs < 2 or self.growth <= 1.0:
            raise ConfigError("batch_runs must be >= 2 and growth > 1")

    @classmethod
    def from_dict(cls, d: dict | None) -> "TuneConfig":
        d = dict(d or {})
        known = set(cls.__dataclass_fields__)
        if set(d) - known:
            raise ConfigError(f"tune: unknown keys {sorted(set(d) - known)}")
        return cls(**d)


@dataclass(frozen=True)
class MuTrial:
    mu: int
    phase: int
    runs: int
    success_rate: float
    effort_mean: float
    effort_cv: float
    fitness_mean: float
    fitness_spread: float
    light_green: bool
    seeds: tuple = ()


@dataclass
class MuTuneReport:
    trace: list[MuTrial]
    recommended_mu: int
    target_fitness: float
    mean_fitness: float
    effort_limit: int
    surcharge: float
    settings: TuneConfig
    stop_reason: str

    def trial(self, mu: int, phase: int | None = None) -> MuTrial:
        for t in reversed(self.trace):
            if t.mu == mu and (phase is None or t.phase == phase):
                return t
        raise KeyError(mu)

    @property
    def next_smaller(self) -> MuTrial | None:
        smaller = [t for t in self.trace if t.phase == 2 and t.mu < self.recommended_mu]
        return max(smaller, key=lambda t: t.mu) if smaller else None

    def to_text(self) -> str:
        s = self.settings
        lines = [f"recommended mu: {self.recommended_mu}",
                 f"target fitness: {self.target_fitness!r} (mean achieved {self.mean_fitness!r})",
                 f"effort limit: {self.effort_limit} evaluations (surcharge {self.surcharge:.0%})",
                 f"stop: {self.stop_reason}",
                 f"thresholds: fitness spread <= {s.fitness_tolerance:g}, phase-1 effort cv <= "
                 f"{s.effort_cv_limit:g}, scatter factor {s.scatter_factor:g}, light-green cv {s.light_green_cv:g}",
                 "phase    mu  runs  success  effort_mean  effort_cv  fitness_mean  note"]
        for t in self.trace:
            note = "light-green" if t.light_green else ""
            lines.append(f"{t.phase:5d} {t.mu:5d} {t.runs:5d} {t.success_rate:8.0%} {t.effort_mean:12.1f} "
                         f"{t.effort_cv:10.3f}  {t.fitness_mean:.9f}  {note}")
        return "\n".join(lines)

    def write_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["phase", "mu", "runs", "success_rate", "effort_mean", "effort_cv", "fitness_mean",
                        "fitness_spread", "light_green"])
            for t in self.trace:
                w.writerow([t.phase, t.mu, t.runs, t.success_rate, repr(t.effort_mean), repr(t.effort_cv),
                            repr(t.fitness_mean), repr(t.fitness_spread), int(t.light_green)])


def _batch(problem, engine, memetic, archive, seeds):
    return [run_once(problem, engine, s, memetic, archive)[1] for s in seeds]


def tune_mu(problem: ProblemDefinition, start_mu: int, engine: EngineConfig, memetic=None,
            settings: TuneConfig | None = None, seed: int = 1,
            archive: ArchiveConfig | None = None) -> MuTuneReport:
    """Find a small population size that still reaches the target reliably.

    Phase 1 runs stagnation-terminated batches at ``start_mu`` (raising it
    until final fitness and effort are consistent) and derives the target
    fitness and effort limit.  Phase 2 shrinks mu by ``descent`` per step and
    stops at the first batch with failures or strong effort scatter; the
    previous mu is recommended.
    """
    st = settings or TuneConfig()
    floor = 2 * engine.deme_size
    if start_mu < floor:
        raise ConfigError(f"start mu {start_mu} must be at least twice the deme size {engine.deme_size}")
    if engine.termination.g_acc is None and engine.termination.g_best is None:
        engine = replace(engine, termination=replace(engine.termination, g_acc=20))
    # phase 1 measures attainable quality: no target may cut runs short
    base = replace(engine, termination=replace(engine.termination, target_fitness=None))
    next_seed = seed
    trace: list[MuTrial] = []
    mu = start_mu
    cap = math.ceil(start_mu * st.max_mu_factor)

    def seeds(n):
        nonlocal next_seed
        out = list(range(next_seed, next_seed + n))
        next_seed += n
        return out

    def consistent(outcomes):
        fits = [o.best.fitness for o in outcomes]
        target = min(fits)
        efforts = [o.evals_to_reach(target) for o in outcomes]
        spread = max(fits) - min(fits)
        cv = coefficient_of_variation(efforts)
        ok = spread <= st.fitness_tolerance and cv <= st.effort_cv_limit
        return ok, target, fits, efforts, spread, cv

    while True:
        cfg = replace(base, mu=mu).validate()
        used = seeds(st.initial_runs)
        outcomes = _batch(problem, cfg, memetic, archive, used)
        ok, *_ = consistent(outcomes)
        if ok:
            extra = seeds(st.confirm_runs)
            used += extra
            outcomes += _batch(problem, cfg, memetic, archive, extra)
            ok, target, fits, efforts, spread, cv = consistent(outcomes)
        else:
            _, target, fits, efforts, spread, cv = consistent(outcomes)
        trace.append(MuTrial(mu, 1, len(outcomes), 1.0 if ok else 0.0, statistics.fmean(efforts), cv,
                             statistics.fmean(fits), spread, cv > st.light_green_cv, tuple(used)))
        if ok:
            break
        mu = math.ceil(mu * st.growth)
        if mu > cap:
            raise TuneFailure(f"no consistent results up to mu={cap}")
    mean_fit = statistics.fmean(fits)
    effort_limit = math.ceil(max(efforts) * (1 + st.surcharge))
    budget = effort_limit
    if engine.termination.max_evaluations is not None:
        budget = min(budget, engine.termination.max_evaluations)
    phase2 = replace(base, termination=replace(base.termination, target_fitness=target,
                                               max_evaluations=budget))
    recommended, prev_cv = mu, cv
    stop = "reached the minimum population size (twice the deme size)"
    while mu > floor:
        nxt = max(floor, int(round(mu * st.descent)))
        if nxt >= mu:
            nxt = mu - 1
        cfg = replace(phase2, mu=nxt).validate()
        used = seeds(st.batch_runs)
        results = [run_once(problem, cfg, s, memetic, archive)[0] for s in used]
        rate = sum(r.success for r in results) / len(results)
        efforts = [r.evals_to_target for r in results if r.success]
        cv = coefficient_of_variation(efforts)
        fits = [r.best for r in results]
        trace.append(MuTrial(nxt, 2, len(results), rate, statistics.fmean(efforts) if efforts else math.nan,
                             cv, statistics.fmean(fits), max(fits) - min(fits), cv > st.light_green_cv,
                             tuple(used)))
        if rate < 1.0:
            stop = f"failures at mu={nxt}"
            break
        if cv > max(st.scatter_factor * prev_cv, st.light_green_cv):
            stop = f"effort scatter at mu={nxt} (cv {cv:.3f} vs {prev_cv:.3f})"
            break
        recommended = mu = nxt
        prev_cv = cv
    return MuTuneReport(trace, recommended, target, mean_fit, effort_limit, st.surcharge, st, stop)


def tune_from_config(config: RunConfig, start_mu: int) -> MuTuneReport:
    problem = config.build_problem()
    return tune_mu(problem, start_mu, config.engine, config.build_memetic(problem),
                   TuneConfig.from_dict(config.tune), config.seed, config.archive)


# comparison ------------------------------------------------------------------

@dataclass
class ComparisonReport:
    a: Campaign
    b: Campaign
    tests: dict[str, TTestResult]

    def rows(self) -> list[list]:
        rows = []
        sa, sb = self.a.summaries(), self.b.summaries()
        for metric, test in self.tests.items():
            for label, s in (("a", sa[metric]), ("b", sb[metric])):
                rows.append([metric, label, s.n, repr(s.mean), repr(s.median), repr(s.stdev),
                             repr(s.ci_low), repr(s.ci_high), "" if s.success_rate is None else s.success_rate,
                             "", "", ""])
            rows.append([metric, "verdict", "", "", "", "", "", "", "", repr(test.t), repr(test.df),
                         "significant" if test.significant else "not significant"])
        return rows

    def write_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["metric", "config", "n", "mean", "median", "stdev", "ci_low", "ci_high",
                        "success_rate", "t", "df", "verdict"])
            w.writerows(self.rows())

    def to_text(self) -> str:
        lines = []
        sa, sb = self.a.summaries(), self.b.summaries()
        for metric, test in self.tests.items():
            lines.append(format_summary(f"a {metric}", sa[metric]))
            lines.append(format_summary(f"b {metric}", sb[metric]))
            verdict = "significant" if test.significant else "not significant"
            lines.append(f"{'':16s} Welch t={test.t:.4g} df={test.df:.1f} -> {verdict} at {test.alpha:g}")
        return "\n".join(lines)


def compare(config_a: RunConfig, config_b: RunConfig, allow_untuned: bool = False) -> ComparisonReport:
    """Run both configurations and test every metric for a difference in means."""
    if config_a.problem != config_b.problem:
        raise ConfigError("compared configurations must refer to the same problem")
    if not allow_untuned and not (config_a.tuned and config_b.tuned):
        raise ConfigError("both configurations must be tuned first (set \"tuned\": true or allow untuned)")
    a, b = multi_run(config_a), multi_run(config_b)
    tests = {}
    for metric in ("best_fitness", "evaluations"):
        xa = [getattr(r, "best" if metric == "best_fitness" else metric) for r in a.results]
        xb = [getattr(r, "best" if metric == "best_fitness" else metric) for r in b.results]
        tests[metric] = two_sample_t_test(xa, xb)
    return ComparisonReport(a, b, tests)

"""Local-search hybridization (memetic extension).

Two hooks: improving (part of) the initial population, and improving (part of)
the offspring of every generation.  Offspring improvement is Lamarckian when
the improved chromosome is written back, Baldwinian when only its fitness is.
Every local-search trial goes through the shared evaluator, so effort
comparisons against the plain EA count the same thing.
"""

from __future__ import annotations

import math
import random
import warnings
from dataclasses import dataclass, replace
from typing import Callable

from .errors import LsApplicabilityError
from .genome import Chromosome, ParamKind, Structure
from .problems.base import Evaluation, ProblemDefinition


@dataclass
class MemeticConfig:
    ls_id: str = "hill_climb"
    lamarckian: bool = True
    offspring_fraction: float = 0.5
    selection_mode: str = "best_fitness"
    ls_budget: int = 100
    init_improve_fraction: float = 1.0
    heuristic_seed_cap: float = 0.2

    def __post_init__(self):
        for name in ("offspring_fraction", "init_improve_fraction", "heuristic_seed_cap"):
            if not 0.0 <= getattr(self, name) <= 1.0:
                raise ValueError(f"{name} must lie in [0, 1]")
        if self.ls_budget < 1:
            raise ValueError("ls_budget must be at least 1")
        if self.selection_mode not in ("random", "best_fitness"):
            raise ValueError("selection_mode must be 'random' or 'best_fitness'")

    @classmethod
    def from_dict(cls, d: dict | None) -> "MemeticConfig | None":
        return None if d is None else cls(**d)


@dataclass
class LsResult:
    evaluation: Evaluation
    evaluations: int


Evaluate = Callable[[Chromosome], Evaluation]


@dataclass(frozen=True)
class LocalSearcher:
    id: str
    applicable: Callable[[ProblemDefinition], bool]
    improve: Callable[..., LsResult]


def hill_climb_real(start: Evaluation, problem: ProblemDefinition, budget: int,
                    rng: random.Random, evaluate: Evaluate,
                    initial_step: float = 0.1, min_step: float = 1e-9) -> LsResult:
    """Coordinate-wise hill climber with per-parameter adaptive steps.

    Steps start at ``initial_step`` times the parameter range, double after a
    success and halve after a failed +/- probe.  Stops on budget or when every
    step has underflowed.
    """
    registry = problem.registry
    best = start
    genes = list(start.chromosome.genes)
    coords = [(gi, pi, registry.get(g.type_id).params[pi])
              for gi, g in enumerate(genes) for pi in range(len(g.values))]
    coords = [c for c in coords if c[2].span > 0]
    steps = [c[2].span * initial_step for c in coords]
    used = 0
    while coords and used < budget:
        live = False
        for k, (gi, pi, spec) in enumerate(coords):
            floor = 1 if spec.kind is ParamKind.INTEGER else spec.span * min_step
            if steps[k] < floor:
                continue
            live = True
            success = False
            for sign in (1.0, -1.0):
                if used >= budget:
                    break
                cur = best.chromosome.genes[gi].values[pi]
                new = spec.clamp(cur + sign * steps[k])
                if new == cur:
                    continue
                gs = list(best.chromosome.genes)
                gs[gi] = gs[gi].replace_value(pi, new)
                trial = evaluate(best.chromosome.with_genes(gs))
                used += 1
                if trial.report.final_fitness > best.report.final_fitness:
                    best = trial
                    success = True
                    break
            steps[k] = steps[k] * 2.0 if success else steps[k] / 2.0
            if used >= budget:
                break
        if not live:
            break
    return LsResult(best, used)


def two_opt(start: Evaluation, problem: ProblemDefinition, budget: int,
            rng: random.Random, evaluate: Evaluate) -> LsResult:
    """Best-improvement 2-opt on a permutation-coded tour.

    Each examined edge exchange costs one unit of budget; the final tour is
    evaluated once more through ``evaluate`` to obtain its report.
    """
    genes = list(start.chromosome.genes)
    n = len(genes)
    d = problem.instance.distance
    tour = [g.type_id - 1 for g in genes]
    used = 0
    changed = False
    limit = budget - 1
    while used < limit:
        best_delta, best_move = -1e-12, None
        for i in range(n - 1):
            a, b = tour[i], tour[i + 1]
            for j in range(i + 2, n if i > 0 else n - 1):
                if used >= limit:
                    break
                c, e = tour[j], tour[(j + 1) % n]
                used += 1
                delta = d[a][c] + d[b][e] - d[a][b] - d[c][e]
                if delta < best_delta:
                    best_delta, best_move = delta, (i, j)
        if best_move is None:
            break
        i, j = best_move
        genes[i + 1:j + 1] = genes[i + 1:j + 1][::-1]
        tour[i + 1:j + 1] = tour[i + 1:j + 1][::-1]
        changed = True
    if not changed:
        return LsResult(start, used)
    trial = evaluate(start.chromosome.with_genes(genes))
    used += 1
    if trial.report.final_fitness >= start.report.final_fitness:
        return LsResult(trial, used)
    return LsResult(start, used)


def _is_param_genome(problem) -> bool:
    return any(gt.params for gt in problem.registry.gene_types)


def _is_tour_genome(problem) -> bool:
    return (problem.registry.structure is Structure.PERMUTATION
            and getattr(problem, "encoding", None) == "permutation"
            and hasattr(problem, "instance") and hasattr(problem.instance, "distance"))


SEARCHERS: dict[str, LocalSearcher] = {
    "hill_climb": LocalSearcher("hill_climb", _is_param_genome, hill_climb_real),
    "two_opt": LocalSearcher("two_opt", _is_tour_genome, two_opt),
}


def register_searcher(searcher: LocalSearcher) -> None:
    SEARCHERS[searcher.id] = searcher


def check_seed_fraction(n_seeds: int, mu: int, cap: float = 0.2) -> bool:
    """Warn when pre-generated seeds exceed ``cap`` of the population."""
    if mu and n_seeds > cap * mu:
        warnings.warn(f"{n_seeds} of {mu} initial individuals are pre-generated (cap {cap:.0%})",
                      UserWarning, stacklevel=2)
        return False
    return True


class Memetic:
    def __init__(self, config: MemeticConfig, problem: ProblemDefinition | None = None):
        self.config = config
        if config.ls_id not in SEARCHERS:
            raise LsApplicabilityError(f"unknown local searcher {config.ls_id!r}")
        self.searcher = SEARCHERS[config.ls_id]
        if problem is not None:
            self.check(problem)

    def check(self, problem) -> None:
        if not self.searcher.applicable(problem):
            raise LsApplicabilityError(f"{self.searcher.id} does not apply to {problem.name}")

    def _run(self, ev: Evaluation, problem, rng, evaluate) -> LsResult:
        return self.searcher.improve(ev, problem, self.config.ls_budget, rng, evaluate)

    def improve_initial(self, population, problem, rng: random.Random, evaluate) -> None:
        """Lamarckian improvement of ``ceil(fraction * mu)`` randomly chosen individuals."""
        self.check(problem)
        k = math.ceil(self.config.init_improve_fraction * population.mu)
        if k == 0:
            return
        chosen = sorted(rng.sample(range(population.mu), k))
        for slot in chosen:
            ind = population.individuals[slot]
            start = Evaluation(ind.report, ind.chromosome)
            res = self._run(start, problem, rng, evaluate)
            if res.evaluation is not start:
                ind.chromosome = res.evaluation.chromosome
                ind.report = res.evaluation.report

    def improve_offspring(self, offspring: list[Evaluation], problem, rng: random.Random,
                          evaluate) -> list[Evaluation]:
        k = math.ceil(self.config.offspring_fraction * len(offspring))
        if k == 0:
            return offspring
        if self.config.selection_mode == "random":
            chosen = rng.sample(range(len(offspring)), k)
        else:
            chosen = sorted(range(len(offspring)), key=lambda i: offspring[i].report.final_fitness,
                            reverse=True)[:k]
        out = list(offspring)
        for i in sorted(chosen):
            res = self._run(offspring[i], problem, rng, evaluate)
            if self.config.lamarckian:
                out[i] = res.evaluation
            else:
                out[i] = replace(res.evaluation, chromosome=offspring[i].chromosome,
                                 phenotype=offspring[i].phenotype)
        return out


def improve_initial(population, config: MemeticConfig, problem, rng, evaluate):
    Memetic(config, problem).improve_initial(population, problem, rng, evaluate)
    return population


def improve_offspring(offspring, config: MemeticConfig, problem, rng, evaluate):
    return Memetic(config, problem).improve_offspring(offspring, problem, rng, evaluate)

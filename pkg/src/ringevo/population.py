"""Ring-structured (diffusion) and panmictic populations.

Individuals sit on a ring; each one's deme is itself plus ``(D-1)/2``
neighbours on either side.  Mates are picked inside the deme, and an offspring
can only replace the deme centre.  Overlapping demes let good genetic material
spread slowly, which keeps the population diverse for longer than in a
panmictic population.
"""

from __future__ import annotations

import logging
import math
import random
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from enum import Enum
from typing import Callable, Sequence

from .archive import SolutionArchive
from .errors import ConfigError, EvaluationError, SeedValidationError
from .genome import Chromosome, validate
from .problems.base import Evaluation, ProblemDefinition
from .variation import OperatorConfig, Variation

log = logging.getLogger(__name__)


class AcceptanceRule(str, Enum):
    BETTER_PARENT = "better_parent"
    BETTER_WORST_IN_DEME = "better_worst_in_deme"


class PopulationStructure(str, Enum):
    RING = "ring"
    PANMICTIC = "panmictic"


class Status(str, Enum):
    RUNNING = "running"
    TARGET_REACHED = "target_reached"
    BUDGET_EXHAUSTED = "budget_exhausted"
    CONVERGED = "converged"


@dataclass
class Termination:
    max_evaluations: int | None = None
    target_fitness: float | None = None
    g_acc: int | None = None
    g_best: int | None = None
    max_generations: int | None = None

    def is_set(self) -> bool:
        return any(v is not None for v in (self.max_evaluations, self.target_fitness,
                                            self.g_acc, self.g_best, self.max_generations))


@dataclass
class EngineConfig:
    mu: int = 60
    deme_size: int = 7
    acceptance: AcceptanceRule = AcceptanceRule.BETTER_PARENT
    offspring: int = 2
    structure: PopulationStructure = PopulationStructure.RING
    selection_pressure: float = 2.0
    operators: OperatorConfig = field(default_factory=OperatorConfig)
    termination: Termination = field(default_factory=lambda: Termination(max_evaluations=100_000, g_acc=20))
    workers: int = 1

    def __post_init__(self):
        self.acceptance = AcceptanceRule(self.acceptance)
        self.structure = PopulationStructure(self.structure)

    def validate(self) -> "EngineConfig":
        if self.structure is PopulationStructure.RING:
            if self.deme_size < 3 or self.deme_size % 2 == 0:
                raise ConfigError(f"deme size must be odd and >= 3, got {self.deme_size}")
            if self.mu < 2 * self.deme_size:
                raise ConfigError(
                    f"population size {self.mu} must be at least twice the deme size {self.deme_size}")
            if not 7 <= self.deme_size <= 11:
                log.debug("deme size %d outside the usual 7..11 range", self.deme_size)
        elif self.mu < 2:
            raise ConfigError("panmictic population needs at least two individuals")
        if self.offspring < 1:
            raise ConfigError("at least one offspring per pairing is required")
        if not 1.0 <= self.selection_pressure <= 2.0:
            raise ConfigError("selection pressure must lie in [1, 2]")
        if not self.termination.is_set():
            raise ConfigError("at least one termination criterion must be set")
        return self

    @property
    def effective_deme(self) -> int:
        return self.mu if self.structure is PopulationStructure.PANMICTIC else self.deme_size


@dataclass
class Individual:
    chromosome: Chromosome
    report: object
    id: int
    birth_generation: int = 0

    @property
    def fitness(self) -> float:
        return self.report.final_fitness


class Evaluator:
    """Counts fitness computations, consults the archive, tracks the best seen."""

    def __init__(self, problem: ProblemDefinition, archive: SolutionArchive | None = None,
                 target: float | None = None, workers: int = 1):
        self.problem = problem
        self.archive = archive
        self.target = target
        self.workers = workers
        self.evaluations = 0
        self.archive_hits = 0
        self.best_seen = -math.inf
        self.best_trace: list[tuple[int, float]] = []
        self.evals_to_target: int | None = None
        self._pool = ThreadPoolExecutor(workers) if workers > 1 else None

    def _compute(self, chromosome: Chromosome) -> tuple[Evaluation, bool]:
        if self.archive is not None:
            return self.archive.lookup_or_evaluate(chromosome, self.problem.evaluate)
        return self.problem.evaluate(chromosome), False

    def _account(self, ev: Evaluation, hit: bool) -> Evaluation:
        if hit:
            self.archive_hits += 1
        else:
            self.evaluations += 1
        f = ev.report.final_fitness
        if f > self.best_seen:
            self.best_seen = f
            self.best_trace.append((self.evaluations, f))
            if self.target is not None and self.evals_to_target is None and f >= self.target:
                self.evals_to_target = self.evaluations
        return ev

    def __call__(self, chromosome: Chromosome) -> Evaluation:
        ev, hit = self._compute(chromosome)
        return self._account(ev, hit)

    def many(self, chromosomes: Sequence[Chromosome]) -> list[Evaluation]:
        """Evaluate a batch; results are accounted in input order."""
        if self._pool is None:
            return [self(c) for c in chromosomes]
        results = list(self._pool.map(self._compute, chromosomes))
        return [self._account(ev, hit) for ev, hit in results]

    def close(self):
        if self._pool is not None:
            self._pool.shutdown()


@dataclass
class RingPopulation:
    individuals: list[Individual]
    deme_size: int
    acceptance: AcceptanceRule = AcceptanceRule.BETTER_PARENT
    structure: PopulationStructure = PopulationStructure.RING
    selection_pressure: float = 2.0
    generation: int = 0
    next_id: int = 0

    @property
    def mu(self) -> int:
        return len(self.individuals)

    def fitnesses(self) -> list[float]:
        return [ind.report.final_fitness for ind in self.individuals]

    def best(self) -> Individual:
        return max(self.individuals, key=lambda ind: ind.report.final_fitness)

    def new_id(self) -> int:
        self.next_id += 1
        return self.next_id - 1


@dataclass
class StepReport:
    generation: int
    accepted: list[bool]
    deme_best_improved: list[bool]
    evaluations: int
    best: float
    mean: float

    @property
    def acceptances(self) -> int:
        return sum(self.accepted)


@dataclass
class StagnationState:
    gens_without_acceptance: list[int]
    gens_without_deme_best_improvement: list[int]

    @classmethod
    def fresh(cls, n_demes: int) -> "StagnationState":
        return cls([0] * n_demes, [0] * n_demes)

    def update(self, report: StepReport) -> None:
        for i, (acc, imp) in enumerate(zip(report.accepted, report.deme_best_improved)):
            self.gens_without_acceptance[i] = 0 if acc else self.gens_without_acceptance[i] + 1
            self.gens_without_deme_best_improvement[i] = (
                0 if imp else self.gens_without_deme_best_improvement[i] + 1)


def deme_of(population: RingPopulation, position: int) -> list[int]:
    mu = population.mu
    if population.structure is PopulationStructure.PANMICTIC or population.deme_size >= mu:
        return list(range(mu))
    half = population.deme_size // 2
    return [(position + k) % mu for k in range(-half, half + 1)]


def _rank_weights(values: Sequence[float], pressure: float) -> list[float]:
    """Linear-ranking weights (best first gets ``pressure``, ties share ranks)."""
    n = len(values)
    if n == 1:
        return [1.0]
    order = sorted(range(n), key=lambda i: values[i], reverse=True)
    ranks = [0.0] * n
    k = 0
    while k < n:
        j = k
        while j + 1 < n and values[order[j + 1]] == values[order[k]]:
            j += 1
        avg = (k + j) / 2.0
        for m in range(k, j + 1):
            ranks[order[m]] = avg
        k = j + 1
    return [pressure - 2.0 * (pressure - 1.0) * r / (n - 1) for r in ranks]


def select_partner(population: RingPopulation, center: int, rng: random.Random) -> int:
    members = [p for p in deme_of(population, center) if p != center]
    inds = population.individuals
    weights = _rank_weights([inds[p].report.final_fitness for p in members], population.selection_pressure)
    if not any(weights):
        return rng.choice(members)
    return rng.choices(members, weights)[0]


def init_population(config: EngineConfig, problem: ProblemDefinition, rng: random.Random,
                    evaluator: Evaluator | None = None,
                    seeds: Sequence[Chromosome] | None = None,
                    seed_cap: float = 0.2) -> RingPopulation:
    """Random population with optional seed chromosomes spread evenly over the ring."""
    config.validate()
    evaluator = evaluator or Evaluator(problem)
    seeds = list(seeds or ())
    mu = config.mu
    if len(seeds) > mu:
        raise ConfigError(f"{len(seeds)} seeds exceed population size {mu}")
    for s in seeds:
        problems = validate(problem.registry, s)
        if problems:
            raise SeedValidationError(f"invalid seed chromosome: {problems[0]}")
    if seeds and len(seeds) > seed_cap * mu:
        warnings.warn(f"{len(seeds)} of {mu} individuals are pre-generated seeds, above the "
                      f"{seed_cap:.0%} cap; initial coverage of the search space may suffer",
                      UserWarning, stacklevel=2)
    chromosomes: list[Chromosome | None] = [None] * mu
    for k, s in enumerate(seeds):
        chromosomes[(k * mu) // len(seeds)] = s
    chromosomes = [c if c is not None else problem.random_chromosome(rng) for c in chromosomes]
    evals = evaluator.many(chromosomes)
    pop = RingPopulation([], config.deme_size, config.acceptance, config.structure,
                         config.selection_pressure)
    pop.individuals = [Individual(ev.chromosome, ev.report, pop.new_id(), 0) for ev in evals]
    return pop


def _deme_bests(population: RingPopulation, fitness: Sequence[float]) -> list[float]:
    if population.structure is PopulationStructure.PANMICTIC:
        best = max(fitness)
        return [best] * population.mu
    return [max(fitness[p] for p in deme_of(population, i)) for i in range(population.mu)]


def generation_step(population: RingPopulation, problem: ProblemDefinition, variation: Variation,
                    rng: random.Random, evaluator: Evaluator, offspring: int = 2,
                    memetic=None) -> StepReport:
    """Breed one pairing per ring slot, then accept offspring in slot order."""
    inds = population.individuals
    mu = population.mu
    before = [ind.report.final_fitness for ind in inds]
    brood: list[list[Chromosome]] = []
    for slot in range(mu):
        partner = select_partner(population, slot, rng)
        brood.append(variation.offspring(inds[slot].chromosome, inds[partner].chromosome, offspring, rng))
    flat = [c for kids in brood for c in kids]
    try:
        evaluated = evaluator.many(flat)
    except EvaluationError:
        raise
    except Exception as exc:
        slot = _failing_slot(problem, brood)
        raise EvaluationError(slot, exc) from exc
    if memetic is not None:
        evaluated = memetic.improve_offspring(evaluated, problem, rng, evaluator)
    gen = population.generation + 1
    accepted = [False] * mu
    k = 0
    for slot in range(mu):
        kids = evaluated[k:k + len(brood[slot])]
        k += len(brood[slot])
        best = max(kids, key=lambda ev: ev.report.final_fitness)
        f = best.report.final_fitness
        if population.acceptance is AcceptanceRule.BETTER_PARENT:
            ok = f > inds[slot].report.final_fitness
        else:
            ok = f > min(inds[p].report.final_fitness for p in deme_of(population, slot))
        if ok:
            inds[slot] = Individual(best.chromosome, best.report, population.new_id(), gen)
            accepted[slot] = True
    population.generation = gen
    after = population.fitnesses()
    old_best = _deme_bests(population, before)
    new_best = _deme_bests(population, after)
    improved = [n > o for n, o in zip(new_best, old_best)]
    return StepReport(gen, accepted, improved, evaluator.evaluations, max(after), sum(after) / mu)


def _failing_slot(problem, brood) -> int:
    for slot, kids in enumerate(brood):
        for c in kids:
            try:
                problem.evaluate(c)
            except Exception:
                return slot
    return -1


def check_termination(population: RingPopulation, stagnation: StagnationState,
                      config: EngineConfig, evaluations: int) -> Status:
    term = config.termination
    if term.target_fitness is not None and population.best().fitness >= term.target_fitness:
        return Status.TARGET_REACHED
    if term.max_evaluations is not None and evaluations >= term.max_evaluations:
        return Status.BUDGET_EXHAUSTED
    if term.max_generations is not None and population.generation >= term.max_generations:
        return Status.BUDGET_EXHAUSTED
    if term.g_acc is not None and min(stagnation.gens_without_acceptance) >= term.g_acc:
        return Status.CONVERGED
    if term.g_best is not None and min(stagnation.gens_without_deme_best_improvement) >= term.g_best:
        return Status.CONVERGED
    return Status.RUNNING


@dataclass
class GenerationRecord:
    generation: int
    best: float
    mean: float
    evaluations: int
    acceptances: int


@dataclass
class RunOutcome:
    best: Individual
    status: Status
    evaluations: int
    generations: int
    evals_to_target: int | None
    history: list[GenerationRecord]
    best_trace: list[tuple[int, float]]
    archive_hits: int = 0

    def evals_to_reach(self, target: float) -> int | None:
        for evals, f in self.best_trace:
            if f >= target:
                return evals
        return None


def run_engine(problem: ProblemDefinition, config: EngineConfig, seed: int,
               memetic=None, archive: SolutionArchive | None = None,
               seeds: Sequence[Chromosome] | None = None,
               on_generation: Callable[[GenerationRecord], None] | None = None) -> RunOutcome:
    """Evolve until a termination criterion fires."""
    config.validate()
    rng = random.Random(seed)
    evaluator = Evaluator(problem, archive, config.termination.target_fitness, config.workers)
    variation = Variation(problem.registry, config.operators, problem.variable_length)
    seed_cap = memetic.config.heuristic_seed_cap if memetic is not None else 0.2
    try:
        pop = init_population(config, problem, rng, evaluator, seeds, seed_cap)
        if memetic is not None:
            memetic.improve_initial(pop, problem, rng, evaluator)
        fit = pop.fitnesses()
        history = [GenerationRecord(0, max(fit), sum(fit) / len(fit), evaluator.evaluations, 0)]
        if on_generation:
            on_generation(history[-1])
        stagnation = StagnationState.fresh(pop.mu)
        status = check_termination(pop, stagnation, config, evaluator.evaluations)
        while status is Status.RUNNING:
            step = generation_step(pop, problem, variation, rng, evaluator, config.offspring, memetic)
            stagnation.update(step)
            history.append(GenerationRecord(step.generation, step.best, step.mean,
                                            step.evaluations, step.acceptances))
            if on_generation:
                on_generation(history[-1])
            status = check_termination(pop, stagnation, config, evaluator.evaluations)
    finally:
        evaluator.close()
    return RunOutcome(pop.best(), status, evaluator.evaluations, pop.generation,
                      evaluator.evals_to_target, history, evaluator.best_trace, evaluator.archive_hits)

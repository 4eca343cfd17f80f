"""Problem abstraction binding a genome to a phenotype domain."""

from __future__ import annotations

import random
from dataclasses import dataclass
from typing import Any, Mapping

from ..fitness import FitnessModel, FitnessReport
from ..genome import Chromosome, GenomeRegistry, LengthPolicy, random_chromosome
from ..variation import apply_genotypic_repair


@dataclass(frozen=True)
class Evaluation:
    report: FitnessReport
    chromosome: Chromosome
    phenotype: Any = None

    @property
    def fitness(self) -> float:
        return self.report.final_fitness


class ProblemDefinition:
    """Base class for concrete problems.

    Subclasses set ``registry``, ``policy`` and ``model`` and implement
    :meth:`decode` and :meth:`measure`.  ``decode`` must be total: it repairs or
    devalues instead of failing.  When it repairs genotypically it returns the
    rewritten chromosome alongside the phenotype.
    """

    name = "problem"
    registry: GenomeRegistry
    policy: LengthPolicy
    model: FitnessModel
    static_data: Any = None

    @property
    def variable_length(self) -> bool:
        return not self.policy.is_fixed

    def random_chromosome(self, rng: random.Random) -> Chromosome:
        return random_chromosome(self.registry, self.policy, rng)

    def genotypic_repair(self, chromosome: Chromosome) -> Chromosome | None:
        """Optional chromosome rewrite applied before decoding."""
        return None

    def decode(self, chromosome: Chromosome) -> tuple[Any, Chromosome]:
        raise NotImplementedError

    def measure(self, phenotype) -> tuple[Mapping[str, float], Mapping[str, float]]:
        """Return ``(raw criterion values, penalty violation measures)``."""
        raise NotImplementedError

    def evaluate(self, chromosome: Chromosome) -> Evaluation:
        if type(self).genotypic_repair is not ProblemDefinition.genotypic_repair:
            hook = self.genotypic_repair
            repaired = apply_genotypic_repair(chromosome, lambda c: hook(c) or c)
            chromosome = repaired
        phenotype, chromosome = self.decode(chromosome)
        raw, violations = self.measure(phenotype)
        return Evaluation(self.model.assess(raw, violations), chromosome, phenotype)

    def describe(self) -> dict:
        return {"name": self.name}

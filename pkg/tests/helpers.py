"""Small problems used across tests."""

from ringevo.fitness import Criterion, FitnessModel
from ringevo.genome import GeneType, GenomeRegistry, LengthPolicy, ParamSpec, Structure
from ringevo.problems.base import ProblemDefinition


class FlatProblem(ProblemDefinition):
    """Every chromosome has the same fitness."""

    name = "flat"

    def __init__(self, k=3, value=0.5):
        spec = ParamSpec.real(0, 1)
        ids = tuple(f"x{i}" for i in range(k))
        self.registry = GenomeRegistry(Structure.FIXED_LAYOUT, ids, tuple(GeneType(t, t, (spec,)) for t in ids))
        self.policy = LengthPolicy.fixed(k)
        self.model = FitnessModel([Criterion.linear("c", 0.0, 1.0)])
        self.value = value

    def decode(self, chromosome):
        return None, chromosome

    def measure(self, phenotype):
        return {"c": 1.0 - self.value}, {}


class CountingProblem(ProblemDefinition):
    """Wraps a problem and counts evaluate() calls."""

    def __init__(self, inner):
        self.inner = inner
        self.name = inner.name
        self.registry, self.policy, self.model = inner.registry, inner.policy, inner.model
        self.calls = 0

    def decode(self, chromosome):
        return self.inner.decode(chromosome)

    def measure(self, phenotype):
        return self.inner.measure(phenotype)

    def evaluate(self, chromosome):
        self.calls += 1
        return self.inner.evaluate(chromosome)

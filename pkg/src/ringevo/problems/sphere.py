"""Sphere benchmark: minimize the sum of squares over a box."""

from __future__ import annotations

from ..fitness import Criterion, FitnessModel
from ..genome import GeneType, GenomeRegistry, LengthPolicy, ParamSpec, Structure
from .base import ProblemDefinition


class SphereProblem(ProblemDefinition):
    """Quality is 1 at the origin and 0 at the box corners."""

    name = "sphere"

    def __init__(self, dimensions: int = 5, bounds: tuple[float, float] = (-5.0, 5.0)):
        if dimensions < 1:
            raise ValueError("sphere needs at least one dimension")
        lo, hi = bounds
        self.dimensions = dimensions
        self.bounds = (lo, hi)
        spec = ParamSpec.real(lo, hi)
        ids = tuple(f"x{i}" for i in range(dimensions))
        self.registry = GenomeRegistry(Structure.FIXED_LAYOUT, ids,
                                       tuple(GeneType(t, t, (spec,)) for t in ids))
        self.policy = LengthPolicy.fixed(dimensions)
        worst = dimensions * max(lo * lo, hi * hi)
        self.model = FitnessModel([Criterion.linear("sum_sq", 0.0, worst, name="sum of squares")])

    def point(self, chromosome):
        return [g.values[0] for g in chromosome.genes]

    def decode(self, chromosome):
        return self.point(chromosome), chromosome

    def measure(self, x):
        return {"sum_sq": sum(v * v for v in x)}, {}

    def describe(self):
        return {"name": self.name, "dimensions": self.dimensions, "bounds": list(self.bounds)}


def sphere_problem(dimensions: int = 5, bounds=(-5.0, 5.0)) -> SphereProblem:
    return SphereProblem(dimensions, bounds)

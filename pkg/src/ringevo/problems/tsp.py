"""Travelling salesman problem with three chromosome codings.

``permutation``
    one param-less gene per city; gene order is the tour.
``index_list``
    gene *i* picks the next city by its position in the list of cities not yet
    visited.  All genes share the value range ``[1, n]``, so indices beyond the
    shrinking list are repaired: re-diced and written back (default) or reduced
    modulo the list length without touching the chromosome.  The modulo variant
    favours the head of the list and is only offered for comparison.
``shift``
    ``ceil(n/2)..n`` genes with values in ``[1, n-1]``; starting from the city
    list ``1..n``, gene *i* removes the city at position *i* and reinserts it
    ``value mod n`` places further right, wrapping around the end.
"""

from __future__ import annotations

import csv
import itertools
import math
import random
from dataclasses import dataclass
from typing import Sequence

from ..errors import InstanceError, LengthPolicyError, NotPermutation, TooLarge
from ..fitness import Criterion, FitnessModel
from ..genome import (Chromosome, Gene, GeneType, GenomeRegistry, LengthPolicy, ParamSpec,
                      Structure, permutation_registry)
from .base import ProblemDefinition

ENCODINGS = ("permutation", "index_list", "shift")
BRUTE_FORCE_LIMIT = 10


@dataclass(frozen=True)
class TspInstance:
    coordinates: tuple[tuple[float, float], ...]

    def __post_init__(self):
        coords = tuple((float(x), float(y)) for x, y in self.coordinates)
        if len(coords) < 2:
            raise InstanceError("a tour needs at least two cities")
        object.__setattr__(self, "coordinates", coords)
        n = len(coords)
        dist = [[math.dist(coords[i], coords[j]) for j in range(n)] for i in range(n)]
        object.__setattr__(self, "distance", dist)

    @property
    def n(self) -> int:
        return len(self.coordinates)

    @property
    def max_distance(self) -> float:
        return max(max(row) for row in self.distance)

    @classmethod
    def random(cls, n: int, seed: int, scale: float = 100.0) -> "TspInstance":
        rng = random.Random(seed)
        return cls(tuple((rng.uniform(0, scale), rng.uniform(0, scale)) for _ in range(n)))

    @classmethod
    def from_csv(cls, path) -> "TspInstance":
        rows = []
        with open(path, newline="") as fh:
            for row in csv.reader(fh):
                if not row or row[0].strip().lower() == "id":
                    continue
                try:
                    rows.append((int(row[0]), float(row[1]), float(row[2])))
                except (ValueError, IndexError) as exc:
                    raise InstanceError(f"bad TSP row {row!r}") from exc
        rows.sort()
        if [r[0] for r in rows] != list(range(1, len(rows) + 1)):
            raise InstanceError("city ids must be 1..n")
        return cls(tuple((x, y) for _, x, y in rows))

    def to_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["id", "x", "y"])
            for i, (x, y) in enumerate(self.coordinates, start=1):
                w.writerow([i, repr(x), repr(y)])


def tsp_tour_length(tour: Sequence[int], instance: TspInstance) -> float:
    """Closed tour length; cities are numbered from 1."""
    d = instance.distance
    total = 0.0
    prev = tour[-1] - 1
    for city in tour:
        total += d[prev][city - 1]
        prev = city - 1
    return total


def tsp_brute_force(instance: TspInstance) -> tuple[list[int], float]:
    """Exhaustive optimum over the (n-1)!/2 distinct tours (n <= 10)."""
    n = instance.n
    if n > BRUTE_FORCE_LIMIT:
        raise TooLarge(f"brute force limited to n <= {BRUTE_FORCE_LIMIT}, got {n}")
    if n <= 3:
        tour = list(range(1, n + 1))
        return tour, tsp_tour_length(tour, instance)
    best_tour, best_len = None, math.inf
    for rest in itertools.permutations(range(2, n + 1)):
        if rest[0] > rest[-1]:
            continue
        tour = [1, *rest]
        length = tsp_tour_length(tour, instance)
        if length < best_len:
            best_tour, best_len = tour, length
    return best_tour, best_len


def _check_tour(tour, n):
    if sorted(tour) != list(range(1, n + 1)):
        raise NotPermutation(f"not a permutation of 1..{n}: {tour}")
    return tour


def tsp_decode_permutation(chromosome: Chromosome, instance: TspInstance) -> list[int]:
    return _check_tour([g.type_id for g in chromosome.genes], instance.n)


def _stable_rng(chromosome: Chromosome) -> random.Random:
    # Re-dicing must be a pure function of the chromosome so archives and
    # parallel evaluation stay consistent.
    return random.Random(repr(tuple(g.values for g in chromosome.genes)))


def tsp_decode_index_list(chromosome: Chromosome, instance: TspInstance,
                          repair_mode: str = "redice") -> tuple[list[int], Chromosome]:
    """Walk the remaining-cities list; returns the tour and the (repaired) chromosome."""
    if repair_mode not in ("redice", "modulo"):
        raise ValueError(f"unknown repair mode {repair_mode!r}")
    remaining = list(range(1, instance.n + 1))
    tour = []
    genes = list(chromosome.genes)
    rng = None
    for i, gene in enumerate(genes):
        size = len(remaining)
        v = gene.values[0]
        if not 1 <= v <= size:
            if repair_mode == "modulo":
                v = (v - 1) % size + 1
            else:
                rng = rng or _stable_rng(chromosome)
                v = rng.randint(1, size)
                genes[i] = gene.replace_value(0, v)
        tour.append(remaining.pop(v - 1))
    repaired = chromosome if rng is None else chromosome.with_genes(genes)
    return _check_tour(tour, instance.n), repaired


def tsp_decode_shift(chromosome: Chromosome, instance: TspInstance) -> list[int]:
    n = instance.n
    if len(chromosome) < math.ceil(n / 2):
        raise LengthPolicyError(f"shift coding needs at least {math.ceil(n / 2)} genes")
    cities = list(range(1, n + 1))
    for i, gene in enumerate(chromosome.genes):
        pos = i % n
        v = gene.values[0] % n
        if v == 0:
            continue
        city = cities.pop(pos)
        cities.insert((pos + v) % n, city)
    return _check_tour(cities, n)


class TspProblem(ProblemDefinition):
    name = "tsp"

    def __init__(self, instance: TspInstance, encoding: str = "permutation",
                 repair_mode: str = "redice"):
        if encoding not in ENCODINGS:
            raise ValueError(f"unknown TSP encoding {encoding!r}; choose from {ENCODINGS}")
        self.instance = instance
        self.static_data = instance
        self.encoding = encoding
        self.repair_mode = repair_mode
        n = instance.n
        if encoding == "permutation":
            self.registry = permutation_registry(range(1, n + 1))
            self.policy = LengthPolicy.fixed(n)
        elif encoding == "index_list":
            ids = tuple(f"next{i}" for i in range(1, n + 1))
            spec = ParamSpec.integer(1, n)
            self.registry = GenomeRegistry(Structure.FIXED_LAYOUT, ids,
                                           tuple(GeneType(t, t, (spec,)) for t in ids))
            self.policy = LengthPolicy.fixed(n)
        else:
            spec = ParamSpec.integer(1, max(1, n - 1))
            self.registry = GenomeRegistry(Structure.FREE_SEQUENCE, ("shift",),
                                           (GeneType("shift", "shift", (spec,)),))
            self.policy = LengthPolicy.variable(math.ceil(n / 2), n)
        worst = n * instance.max_distance
        self.model = FitnessModel([Criterion.linear("tour_length", 0.0, worst, name="tour length")])

    def tour(self, chromosome: Chromosome) -> list[int]:
        return self.decode(chromosome)[0]

    def decode(self, chromosome):
        if self.encoding == "permutation":
            return tsp_decode_permutation(chromosome, self.instance), chromosome
        if self.encoding == "index_list":
            return tsp_decode_index_list(chromosome, self.instance, self.repair_mode)
        return tsp_decode_shift(chromosome, self.instance), chromosome

    def measure(self, tour):
        return {"tour_length": tsp_tour_length(tour, self.instance)}, {}

    def quality_of_length(self, length: float) -> float:
        return self.model.assess({"tour_length": length}).final_fitness

    def chromosome_for_tour(self, tour: Sequence[int]) -> Chromosome:
        """Permutation-coded chromosome visiting ``tour`` (for seeding)."""
        if self.encoding != "permutation":
            raise ValueError("only permutation-coded tours can be written back directly")
        return Chromosome(tuple(Gene(c) for c in tour), self.policy)

    def describe(self):
        return {"name": self.name, "n": self.instance.n, "encoding": self.encoding}

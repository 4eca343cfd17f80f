"""Genetic operators on typed chromosomes.

All operators are pure: they take chromosomes and return new ones.  Random
draws go through the caller's ``random.Random`` only, so a seeded stream gives
a reproducible sequence of offspring.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field
from typing import Callable

from .errors import (InvalidMove, LayoutMismatch, LengthPolicyError, NotPermutation,
                     RepairFailed)
from .genome import Chromosome, GenomeRegistry, ParamKind, Structure, validate

MUTATIONS = ("param", "shift_gene", "shift_segment", "invert", "insert", "delete")


@dataclass
class OperatorConfig:
    small_step_fraction: float = 0.5
    small_step_sigma_fraction: float = 0.1
    crossover_rate: float = 0.5
    post_crossover_mutation: float = 0.5
    extra_mutation_prob: float = 0.3
    crossover_points: int = 2
    ox_variant: str = "davis"
    weights: dict = field(default_factory=lambda: {
        "param": 1.0, "shift_gene": 1.0, "shift_segment": 1.0,
        "invert": 1.0, "insert": 0.5, "delete": 0.5,
    })

    def __post_init__(self):
        for name in ("small_step_fraction", "small_step_sigma_fraction", "crossover_rate",
                     "post_crossover_mutation", "extra_mutation_prob"):
            value = getattr(self, name)
            if not 0.0 <= value <= 1.0:
                raise ValueError(f"{name} must lie in [0, 1], got {value}")
        unknown = set(self.weights) - set(MUTATIONS)
        if unknown:
            raise ValueError(f"unknown operators in weights: {sorted(unknown)}")
        if any(w < 0 for w in self.weights.values()):
            raise ValueError("operator weights must be nonnegative")
        if not any(self.weights.values()):
            raise ValueError("operator weights must not all be zero")
        if self.ox_variant not in ("davis", "linear"):
            raise ValueError("ox_variant must be 'davis' or 'linear'")

    @classmethod
    def from_dict(cls, data: dict | None) -> "OperatorConfig":
        data = dict(data or {})
        weights = cls().weights
        weights.update(data.pop("weights", {}))
        return cls(weights=weights, **data)


def _check_index(chromosome: Chromosome, index: int, name: str = "index"):
    if not 0 <= index < len(chromosome):
        raise IndexError(f"{name} {index} out of range for length {len(chromosome)}")


def mutate_parameter(chromosome: Chromosome, gene_index: int, param_index: int,
                     config: OperatorConfig, rng: random.Random,
                     registry: GenomeRegistry) -> Chromosome:
    """Mutate one parameter inside its bounds.

    Small symmetric Gaussian step (scale relative to the bound range, clamped)
    with probability ``small_step_fraction``, otherwise a uniform redraw.
    """
    _check_index(chromosome, gene_index, "gene_index")
    gene = chromosome.genes[gene_index]
    specs = registry.get(gene.type_id).params
    if not 0 <= param_index < len(specs):
        raise IndexError(f"param_index {param_index} out of range")
    spec = specs[param_index]
    old = gene.values[param_index]
    if spec.lower == spec.upper:
        return chromosome
    if rng.random() < config.small_step_fraction:
        step = rng.gauss(0.0, config.small_step_sigma_fraction * spec.span)
        if spec.kind is ParamKind.INTEGER:
            step = int(round(step)) or (1 if step >= 0 else -1)
        new = spec.clamp(old + step)
    else:
        new = spec.draw(rng)
    genes = list(chromosome.genes)
    genes[gene_index] = gene.replace_value(param_index, new)
    return chromosome.with_genes(genes)


def shift_gene(chromosome: Chromosome, from_index: int, to_index: int) -> Chromosome:
    _check_index(chromosome, from_index, "from_index")
    _check_index(chromosome, to_index, "to_index")
    if from_index == to_index:
        return chromosome
    genes = list(chromosome.genes)
    gene = genes.pop(from_index)
    genes.insert(to_index, gene)
    return chromosome.with_genes(genes)


def shift_segment(chromosome: Chromosome, seg_start: int, seg_len: int, to_index: int) -> Chromosome:
    """Move ``genes[seg_start:seg_start+seg_len]`` so it sits before original position ``to_index``.

    ``to_index`` is an insertion point in the original chromosome (0..len) and
    must lie outside the segment, including its two edges.
    """
    n = len(chromosome)
    if seg_len < 1 or seg_start < 0 or seg_start + seg_len > n:
        raise IndexError(f"segment [{seg_start}, {seg_start + seg_len}) outside length {n}")
    if not 0 <= to_index <= n:
        raise IndexError(f"to_index {to_index} out of range")
    end = seg_start + seg_len
    if seg_start <= to_index <= end:
        raise InvalidMove(f"destination {to_index} overlaps segment [{seg_start}, {end})")
    genes = list(chromosome.genes)
    segment = genes[seg_start:end]
    rest = genes[:seg_start] + genes[end:]
    at = to_index if to_index < seg_start else to_index - seg_len
    return chromosome.with_genes(rest[:at] + segment + rest[at:])


def invert_segment(chromosome: Chromosome, seg_start: int, seg_len: int) -> Chromosome:
    n = len(chromosome)
    if seg_len < 1 or seg_start < 0 or seg_start + seg_len > n:
        raise IndexError(f"segment [{seg_start}, {seg_start + seg_len}) outside length {n}")
    if seg_len == 1:
        return chromosome
    genes = list(chromosome.genes)
    genes[seg_start:seg_start + seg_len] = genes[seg_start:seg_start + seg_len][::-1]
    return chromosome.with_genes(genes)


def _ox_child(keep: Chromosome, donor: Chromosome, cut1: int, cut2: int, variant: str) -> Chromosome:
    n = len(keep)
    child = [None] * n
    child[cut1:cut2] = keep.genes[cut1:cut2]
    taken = {g.type_id for g in keep.genes[cut1:cut2]}
    if variant == "davis":
        source = donor.genes[cut2:] + donor.genes[:cut2]
        slots = list(range(cut2, n)) + list(range(0, cut1))
    else:
        source = donor.genes
        slots = list(range(0, cut1)) + list(range(cut2, n))
    fill = (g for g in source if g.type_id not in taken)
    for slot in slots:
        child[slot] = next(fill)
    return keep.with_genes(child)


def order_crossover(parent_a: Chromosome, parent_b: Chromosome, cut1: int | None = None,
                    cut2: int | None = None, rng: random.Random | None = None,
                    variant: str = "davis") -> tuple[Chromosome, Chromosome]:
    """Order crossover (OX) on permutation chromosomes; gene identity is the type id.

    ``davis`` fills the free slots starting at ``cut2`` (wrapping) with the
    donor's genes read from ``cut2`` on; ``linear`` fills free slots left to
    right with the donor's genes in their original order.
    """
    n = len(parent_a)
    ids_a, ids_b = parent_a.type_ids, parent_b.type_ids
    if (n != len(parent_b) or len(set(ids_a)) != n or set(ids_a) != set(ids_b)):
        raise NotPermutation("order crossover needs two permutations of the same gene set")
    if cut1 is None or cut2 is None:
        if rng is None:
            raise ValueError("cut points or an rng are required")
        cut1, cut2 = sorted(rng.sample(range(n + 1), 2)) if n >= 1 else (0, 0)
    if not 0 <= cut1 < cut2 <= n:
        raise IndexError(f"invalid cuts ({cut1}, {cut2}) for length {n}")
    return (_ox_child(parent_a, parent_b, cut1, cut2, variant),
            _ox_child(parent_b, parent_a, cut1, cut2, variant))


def npoint_crossover(parent_a: Chromosome, parent_b: Chromosome, points,
                     rng: random.Random | None = None) -> tuple[Chromosome, Chromosome]:
    """Swap alternating slices between two parents of identical layout.

    ``points`` is an increasing list of interior cut indices, or an int giving
    the number of cut points to draw with ``rng``.
    """
    n = len(parent_a)
    if n != len(parent_b) or parent_a.type_ids != parent_b.type_ids:
        raise LayoutMismatch("n-point crossover needs parents with the same gene layout")
    if isinstance(points, int):
        k = min(points, n - 1)
        points = sorted(rng.sample(range(1, n), k)) if k > 0 else []
    points = list(points)
    if any(not 0 < p < n for p in points) or any(q <= p for p, q in zip(points, points[1:])):
        raise ValueError(f"cut points {points} must be strictly increasing interior indices")
    child_a, child_b = [], []
    bounds = [0] + points + [n]
    for k, (lo, hi) in enumerate(zip(bounds, bounds[1:])):
        src_a, src_b = (parent_a, parent_b) if k % 2 == 0 else (parent_b, parent_a)
        child_a.extend(src_a.genes[lo:hi])
        child_b.extend(src_b.genes[lo:hi])
    return parent_a.with_genes(child_a), parent_b.with_genes(child_b)


def length_mutation(chromosome: Chromosome, mode: str, registry: GenomeRegistry,
                    rng: random.Random) -> Chromosome:
    policy = chromosome.policy
    n = len(chromosome)
    if policy.is_fixed:
        raise LengthPolicyError("length mutation on a fixed-length genome")
    genes = list(chromosome.genes)
    if mode == "insert":
        if n >= policy.max_len:
            raise LengthPolicyError(f"cannot insert: length {n} at maximum {policy.max_len}")
        gene = registry.get(rng.choice(registry.allowed)).random_gene(rng)
        genes.insert(rng.randint(0, n), gene)
    elif mode == "delete":
        if n <= policy.min_len:
            raise LengthPolicyError(f"cannot delete: length {n} at minimum {policy.min_len}")
        del genes[rng.randrange(n)]
    else:
        raise ValueError(f"unknown length mutation mode {mode!r}")
    return chromosome.with_genes(genes)


def apply_genotypic_repair(chromosome: Chromosome, repair_hook: Callable[[Chromosome], Chromosome],
                           registry: GenomeRegistry | None = None) -> Chromosome:
    """Run a problem-supplied repair that rewrites the chromosome."""
    try:
        repaired = repair_hook(chromosome)
    except RepairFailed:
        raise
    except Exception as exc:  # hooks are third-party code
        raise RepairFailed(f"repair hook failed: {exc}") from exc
    if registry is not None:
        problems = validate(registry, repaired)
        if problems:
            raise RepairFailed(f"repaired chromosome is invalid: {problems[0]}")
    return repaired


class Variation:
    """Offspring factory picking operators that suit the genome structure."""

    def __init__(self, registry: GenomeRegistry, config: OperatorConfig | None = None,
                 variable_length: bool = False):
        self.registry = registry
        self.config = config or OperatorConfig()
        self._has_params = any(gt.params for gt in registry.gene_types)
        structure = registry.structure
        candidates = []
        if self._has_params:
            candidates.append("param")
        if structure is not Structure.FIXED_LAYOUT:
            candidates += ["shift_gene", "shift_segment", "invert"]
        if variable_length and structure is Structure.FREE_SEQUENCE:
            candidates += ["insert", "delete"]
        self.mutations = [m for m in candidates if self.config.weights.get(m, 0) > 0]
        if not self.mutations:
            raise ValueError("no applicable mutation has a positive weight")
        self._weights = [self.config.weights[m] for m in self.mutations]
        if structure is Structure.PERMUTATION:
            self.crossover = "order"
        elif structure is Structure.FIXED_LAYOUT:
            self.crossover = "npoint"
        else:
            self.crossover = None

    def mutate(self, chromosome: Chromosome, rng: random.Random) -> Chromosome:
        op = rng.choices(self.mutations, self._weights)[0]
        n = len(chromosome)
        if op == "param":
            slots = [i for i, g in enumerate(chromosome.genes) if self.registry.get(g.type_id).params]
            if not slots:
                return chromosome
            gi = rng.choice(slots)
            pi = rng.randrange(len(chromosome.genes[gi].values))
            return mutate_parameter(chromosome, gi, pi, self.config, rng, self.registry)
        if n < 2:
            return chromosome
        if op == "shift_gene":
            i, j = rng.sample(range(n), 2)
            return shift_gene(chromosome, i, j)
        if op == "shift_segment":
            if n < 3:
                return shift_gene(chromosome, 0, 1)
            seg_len = rng.randint(1, max(1, n // 2))
            start = rng.randint(0, n - seg_len)
            dests = [d for d in range(n + 1) if d < start or d > start + seg_len]
            return shift_segment(chromosome, start, seg_len, rng.choice(dests))
        if op == "invert":
            seg_len = rng.randint(2, n)
            return invert_segment(chromosome, rng.randint(0, n - seg_len), seg_len)
        mode = op
        policy = chromosome.policy
        if mode == "insert" and n >= policy.max_len:
            mode = "delete"
        elif mode == "delete" and n <= policy.min_len:
            mode = "insert"
        if (mode == "insert" and n >= policy.max_len) or (mode == "delete" and n <= policy.min_len):
            return chromosome
        return length_mutation(chromosome, mode, self.registry, rng)

    def mutate_some(self, chromosome: Chromosome, rng: random.Random) -> Chromosome:
        child = self.mutate(chromosome, rng)
        while rng.random() < self.config.extra_mutation_prob:
            child = self.mutate(child, rng)
        return child

    def recombine(self, a: Chromosome, b: Chromosome, rng: random.Random):
        if len(a) < 2:
            return None
        if self.crossover == "order":
            return order_crossover(a, b, rng=rng, variant=self.config.ox_variant)
        if self.crossover == "npoint" and a.type_ids == b.type_ids:
            return npoint_crossover(a, b, self.config.crossover_points, rng)
        return None

    def offspring(self, parent: Chromosome, partner: Chromosome, count: int,
                  rng: random.Random) -> list[Chromosome]:
        children: list[Chromosome] = []
        while len(children) < count:
            pair = None
            if self.crossover and rng.random() < self.config.crossover_rate:
                pair = self.recombine(parent, partner, rng)
            if pair is None:
                children.append(self.mutate_some(parent, rng))
                continue
            for child in pair:
                if len(children) == count:
                    break
                if rng.random() < self.config.post_crossover_mutation:
                    child = self.mutate_some(child, rng)
                children.append(child)
        return children

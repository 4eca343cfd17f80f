"""Typed genes and ordered chromosomes.

A gene type declares a number of bounded integer/real parameters; a chromosome
is an ordered sequence of genes whose order carries meaning.  The registry binds
gene types to a chromosome structure:

``fixed_layout``
    one gene type per position (classic fixed-length parameter vectors),
``free_sequence``
    any allowed gene type at any position, optionally of evolvable length,
``permutation``
    every listed gene type exactly once, in any order (sequence problems).
"""

from __future__ import annotations

import json
import math
import random
from dataclasses import dataclass, field
from enum import Enum
from typing import Hashable, Iterable, Iterator, Sequence

from .errors import DuplicateGeneType, EmptyRegistry, LengthPolicyError


class ParamKind(str, Enum):
    INTEGER = "integer"
    REAL = "real"


class Structure(str, Enum):
    FIXED_LAYOUT = "fixed_layout"
    FREE_SEQUENCE = "free_sequence"
    PERMUTATION = "permutation"


@dataclass(frozen=True, slots=True)
class ParamSpec:
    kind: ParamKind
    lower: float
    upper: float

    def __post_init__(self):
        object.__setattr__(self, "kind", ParamKind(self.kind))
        if not (math.isfinite(self.lower) and math.isfinite(self.upper)):
            raise ValueError("parameter bounds must be finite")
        if self.lower > self.upper:
            raise ValueError(f"lower bound {self.lower} exceeds upper bound {self.upper}")
        if self.kind is ParamKind.INTEGER:
            if self.lower != int(self.lower) or self.upper != int(self.upper):
                raise ValueError("integer parameter bounds must be whole numbers")
            object.__setattr__(self, "lower", int(self.lower))
            object.__setattr__(self, "upper", int(self.upper))

    @classmethod
    def integer(cls, lower, upper) -> "ParamSpec":
        return cls(ParamKind.INTEGER, lower, upper)

    @classmethod
    def real(cls, lower, upper) -> "ParamSpec":
        return cls(ParamKind.REAL, lower, upper)

    @property
    def span(self) -> float:
        return self.upper - self.lower

    def draw(self, rng: random.Random):
        if self.kind is ParamKind.INTEGER:
            return rng.randint(self.lower, self.upper)
        return rng.uniform(self.lower, self.upper)

    def clamp(self, value):
        value = min(max(value, self.lower), self.upper)
        if self.kind is ParamKind.INTEGER:
            value = int(round(value))
        return value

    def admits(self, value) -> bool:
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            return False
        if not math.isfinite(value):
            return False
        if self.kind is ParamKind.INTEGER and value != int(value):
            return False
        return self.lower <= value <= self.upper


@dataclass(frozen=True)
class GeneType:
    type_id: Hashable
    name: str = ""
    params: tuple[ParamSpec, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "params", tuple(self.params))

    def random_gene(self, rng: random.Random) -> "Gene":
        return Gene(self.type_id, tuple(p.draw(rng) for p in self.params))


@dataclass(frozen=True, slots=True)
class Gene:
    type_id: Hashable
    values: tuple = ()

    def replace_value(self, index: int, value) -> "Gene":
        values = list(self.values)
        values[index] = value
        return Gene(self.type_id, tuple(values))


@dataclass(frozen=True, slots=True)
class LengthPolicy:
    min_len: int
    max_len: int

    def __post_init__(self):
        if self.min_len < 0 or self.min_len > self.max_len:
            raise LengthPolicyError(f"invalid length policy [{self.min_len}, {self.max_len}]")

    @classmethod
    def fixed(cls, n: int) -> "LengthPolicy":
        return cls(n, n)

    @classmethod
    def variable(cls, min_len: int, max_len: int) -> "LengthPolicy":
        return cls(min_len, max_len)

    @property
    def is_fixed(self) -> bool:
        return self.min_len == self.max_len

    def admits(self, length: int) -> bool:
        return self.min_len <= length <= self.max_len


@dataclass(frozen=True, slots=True)
class Chromosome:
    genes: tuple[Gene, ...]
    policy: LengthPolicy

    def __post_init__(self):
        if not isinstance(self.genes, tuple):
            object.__setattr__(self, "genes", tuple(self.genes))

    def __len__(self) -> int:
        return len(self.genes)

    def __iter__(self) -> Iterator[Gene]:
        return iter(self.genes)

    def __getitem__(self, index):
        return self.genes[index]

    def with_genes(self, genes: Iterable[Gene]) -> "Chromosome":
        return Chromosome(tuple(genes), self.policy)

    @property
    def type_ids(self) -> tuple:
        return tuple(g.type_id for g in self.genes)

    def to_dict(self) -> dict:
        return {
            "policy": [self.policy.min_len, self.policy.max_len],
            "genes": [{"type": g.type_id, "values": list(g.values)} for g in self.genes],
        }

    @classmethod
    def from_dict(cls, data: dict) -> "Chromosome":
        lo, hi = data["policy"]
        genes = tuple(Gene(g["type"], tuple(g["values"])) for g in data["genes"])
        return cls(genes, LengthPolicy(lo, hi))


@dataclass(frozen=True)
class Violation:
    kind: str
    position: int | None
    detail: str = ""


@dataclass(frozen=True)
class GenomeRegistry:
    """Gene types plus the structure rule chromosomes must follow.

    ``layout`` is the per-position type list for ``fixed_layout``, the type set
    for ``permutation`` and the allowed types for ``free_sequence`` (``None``
    there means every registered type).
    """

    structure: Structure = Structure.FREE_SEQUENCE
    layout: tuple | None = None
    gene_types: tuple[GeneType, ...] = ()
    _index: dict = field(default=None, init=False, repr=False, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "structure", Structure(self.structure))
        if self.layout is not None:
            object.__setattr__(self, "layout", tuple(self.layout))
        if self.structure is Structure.FREE_SEQUENCE and self.layout is not None and not self.layout:
            raise ValueError("free_sequence allowed set must be non-empty")
        index = {}
        for gt in self.gene_types:
            if gt.type_id in index:
                raise DuplicateGeneType(gt.type_id)
            index[gt.type_id] = gt
        object.__setattr__(self, "_index", index)

    def __contains__(self, type_id) -> bool:
        return type_id in self._index

    def __len__(self) -> int:
        return len(self.gene_types)

    def get(self, type_id) -> GeneType:
        return self._index[type_id]

    @property
    def allowed(self) -> tuple:
        if self.structure is Structure.FREE_SEQUENCE and self.layout is None:
            return tuple(self._index)
        return self.layout

    def default_policy(self) -> LengthPolicy:
        if self.structure is Structure.FREE_SEQUENCE:
            raise LengthPolicyError("free_sequence genomes need an explicit length policy")
        return LengthPolicy.fixed(len(self.layout))

    def register(self, gene_type: GeneType) -> "GenomeRegistry":
        return register_gene_type(self, gene_type)

    def to_dict(self) -> dict:
        return {
            "structure": {"kind": self.structure.value,
                          "types": None if self.layout is None else list(self.layout)},
            "gene_types": [
                {"type_id": gt.type_id, "name": gt.name,
                 "params": [{"kind": p.kind.value, "lower": p.lower, "upper": p.upper}
                            for p in gt.params]}
                for gt in self.gene_types
            ],
        }

    def to_json(self, **kwargs) -> str:
        return json.dumps(self.to_dict(), **kwargs)

    @classmethod
    def from_dict(cls, data: dict) -> "GenomeRegistry":
        struct = data.get("structure", {"kind": "free_sequence", "types": None})
        types = tuple(
            GeneType(gt["type_id"], gt.get("name", ""),
                     tuple(ParamSpec(p["kind"], p["lower"], p["upper"]) for p in gt.get("params", ())))
            for gt in data["gene_types"]
        )
        return cls(struct["kind"], struct.get("types"), types)

    @classmethod
    def from_json(cls, text: str) -> "GenomeRegistry":
        return cls.from_dict(json.loads(text))


def register_gene_type(registry: GenomeRegistry, gene_type: GeneType) -> GenomeRegistry:
    if gene_type.type_id in registry:
        raise DuplicateGeneType(gene_type.type_id)
    return GenomeRegistry(registry.structure, registry.layout, registry.gene_types + (gene_type,))


def random_chromosome(registry: GenomeRegistry, policy: LengthPolicy | None,
                      rng: random.Random, length: int | None = None) -> Chromosome:
    """Draw a valid chromosome.

    Variable-length genomes get a length drawn uniformly from the policy unless
    ``length`` pins it (e.g. to an estimated maximum size).
    """
    if not len(registry):
        raise EmptyRegistry("registry holds no gene types")
    if policy is None:
        policy = registry.default_policy()
    if registry.structure is Structure.FIXED_LAYOUT:
        if not policy.admits(len(registry.layout)):
            raise LengthPolicyError("fixed layout length outside the length policy")
        genes = [registry.get(t).random_gene(rng) for t in registry.layout]
    elif registry.structure is Structure.PERMUTATION:
        if not policy.admits(len(registry.layout)):
            raise LengthPolicyError("permutation length outside the length policy")
        order = list(registry.layout)
        rng.shuffle(order)
        genes = [registry.get(t).random_gene(rng) for t in order]
    else:
        if length is None:
            length = rng.randint(policy.min_len, policy.max_len)
        elif not policy.admits(length):
            raise LengthPolicyError(f"length {length} outside policy")
        allowed = registry.allowed
        genes = [registry.get(rng.choice(allowed)).random_gene(rng) for _ in range(length)]
    return Chromosome(tuple(genes), policy)


def validate_gene(registry: GenomeRegistry, gene: Gene, position: int | None = None) -> list[Violation]:
    if gene.type_id not in registry:
        return [Violation("UnknownType", position, repr(gene.type_id))]
    specs = registry.get(gene.type_id).params
    if len(gene.values) != len(specs):
        return [Violation("ArityMismatch", position,
                          f"{len(gene.values)} values for {len(specs)} parameters")]
    out = []
    for k, (value, spec) in enumerate(zip(gene.values, specs)):
        if not spec.admits(value):
            out.append(Violation("BoundViolation", position,
                                 f"param {k}: {value!r} not in {spec.kind.value}[{spec.lower}, {spec.upper}]"))
    return out


def validate(registry: GenomeRegistry, chromosome: Chromosome) -> list[Violation]:
    """Return every invariant violation of ``chromosome``; empty means valid."""
    out: list[Violation] = []
    if not chromosome.policy.admits(len(chromosome)):
        out.append(Violation("LengthViolation", None,
                             f"length {len(chromosome)} outside [{chromosome.policy.min_len}, "
                             f"{chromosome.policy.max_len}]"))
    for pos, gene in enumerate(chromosome.genes):
        out.extend(validate_gene(registry, gene, pos))
    ids = chromosome.type_ids
    if registry.structure is Structure.FIXED_LAYOUT:
        if ids != registry.layout:
            out.append(Violation("LayoutMismatch", None, "gene types do not follow the layout"))
    elif registry.structure is Structure.PERMUTATION:
        if sorted(map(repr, ids)) != sorted(map(repr, registry.layout)):
            out.append(Violation("NotPermutation", None, "genes are not a permutation of the layout"))
    else:
        allowed = set(registry.allowed)
        for pos, t in enumerate(ids):
            if t in registry and t not in allowed:
                out.append(Violation("TypeNotAllowed", pos, repr(t)))
    return out


def is_valid(registry: GenomeRegistry, chromosome: Chromosome) -> bool:
    return not validate(registry, chromosome)


def permutation_registry(items: Sequence[Hashable], params: Sequence[ParamSpec] = ()) -> GenomeRegistry:
    """One gene type per item; chromosomes are orderings of all items."""
    types = tuple(GeneType(t, str(t), tuple(params)) for t in items)
    return GenomeRegistry(Structure.PERMUTATION, tuple(items), types)

"""Solution archive: chromosomes that quantize to the same key share one evaluation."""

from __future__ import annotations

import math
import threading
from collections import OrderedDict
from dataclasses import dataclass, field
from typing import Callable, Hashable, Mapping

from .genome import Chromosome, GenomeRegistry, ParamKind


@dataclass(frozen=True)
class SimilarityScheme:
    """Per-parameter quantization steps.

    ``default_epsilon`` applies to every real parameter without an entry in
    ``epsilon`` (keyed by ``(type_id, param_index)``); integer parameters use a
    step of 1 unless overridden.
    """

    default_epsilon: float = 1e-6
    epsilon: Mapping[tuple, float] = field(default_factory=dict)
    sequence_sensitive: bool = True

    def __post_init__(self):
        if self.default_epsilon <= 0 or any(e <= 0 for e in self.epsilon.values()):
            raise ValueError("quantization steps must be positive")

    def step(self, registry: GenomeRegistry | None, type_id, index: int) -> float:
        eps = self.epsilon.get((type_id, index))
        if eps is not None:
            return eps
        if registry is not None and type_id in registry:
            if registry.get(type_id).params[index].kind is ParamKind.INTEGER:
                return 1
        return self.default_epsilon


def quantize(value: float, eps: float) -> int:
    """Grid cell index with deterministic round-half-up."""
    return math.floor(value / eps + 0.5)


def canonical_key(chromosome: Chromosome, scheme: SimilarityScheme,
                  registry: GenomeRegistry | None = None) -> Hashable:
    genes = tuple(
        (g.type_id, tuple(quantize(v, scheme.step(registry, g.type_id, k)) for k, v in enumerate(g.values)))
        for g in chromosome.genes
    )
    if scheme.sequence_sensitive:
        return genes
    return tuple(sorted(genes, key=repr))


class SolutionArchive:
    """LRU store of fitness reports keyed by canonical chromosome keys.

    Lookups are thread-safe; concurrent misses on one key trigger a single
    evaluation, the other callers wait for its result.
    """

    def __init__(self, scheme: SimilarityScheme, registry: GenomeRegistry | None = None,
                 capacity: int = 1_000_000):
        if capacity < 0:
            raise ValueError("capacity must be nonnegative")
        self.scheme = scheme
        self.registry = registry
        self.capacity = capacity
        self.hit_count = 0
        self.miss_count = 0
        self._entries: OrderedDict = OrderedDict()
        self._pending: dict = {}
        self._lock = threading.Lock()

    @property
    def enabled(self) -> bool:
        return self.capacity > 0

    @property
    def lookups(self) -> int:
        return self.hit_count + self.miss_count

    def __len__(self) -> int:
        return len(self._entries)

    def key(self, chromosome: Chromosome) -> Hashable:
        return canonical_key(chromosome, self.scheme, self.registry)

    def lookup_or_evaluate(self, chromosome: Chromosome, evaluator: Callable[[Chromosome], object]):
        """Return ``(value, hit)``; ``evaluator`` runs only on a miss."""
        if not self.enabled:
            with self._lock:
                self.miss_count += 1
            return evaluator(chromosome), False
        key = self.key(chromosome)
        while True:
            with self._lock:
                if key in self._entries:
                    self._entries.move_to_end(key)
                    self.hit_count += 1
                    return self._entries[key], True
                waiter = self._pending.get(key)
                if waiter is None:
                    done = threading.Event()
                    self._pending[key] = done
                    self.miss_count += 1
                    break
            waiter.wait()
        try:
            value = evaluator(chromosome)
        except BaseException:
            with self._lock:
                self._pending.pop(key).set()
            raise
        with self._lock:
            self._entries[key] = value
            if len(self._entries) > self.capacity:
                self._entries.popitem(last=False)
            self._pending.pop(key).set()
        return value, False


def lookup_or_evaluate(archive: SolutionArchive, chromosome: Chromosome, evaluator):
    return archive.lookup_or_evaluate(chromosome, evaluator)[0]

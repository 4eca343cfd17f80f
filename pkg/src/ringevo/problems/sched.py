"""Energy-aware scheduling with start-time delays.

Work steps belong to orders, run on one of their eligible single-capacity
resources and draw constant power while running.  A chromosome fixes the
order in which steps are handed to the scheduler plus a delay (added to the
earliest possible start) for each delay-capable step.

Two codings are offered:

``swap``
    integer genes only, in two parts.  The first ``n`` genes permute the
    canonical step list: gene *i* (1-based) with value *d* swaps list positions
    *i* and ``(i + d) mod (n + 1)``; a target of 0 or *i* leaves the list
    unchanged.  The remaining genes are the delays, one per delay-capable step.
``sequence``
    one gene per step whose position is the scheduling order; delay-capable
    steps carry their delay as a parameter.

Precedence violations are repaired phenotypically (the step is held back until
its predecessors are placed; the chromosome is untouched) or genotypically
(the chromosome is rewritten so the step comes after its predecessors).
"""

from __future__ import annotations

import csv
import graphlib
import json
import random
from dataclasses import dataclass, field
from typing import Sequence

from ..errors import InstanceError, RepairFailed
from ..fitness import Criterion, FitnessModel
from ..genome import (Chromosome, Gene, GeneType, GenomeRegistry, LengthPolicy, ParamSpec,
                      Structure)
from .base import ProblemDefinition

VARIANTS = ("fixed_step_delays", "reordered_delays")
REPAIR_MODES = ("phenotypic", "genotypic")


@dataclass(frozen=True)
class Step:
    id: str
    order: str
    duration: float
    resources: tuple[str, ...]
    energy: float = 0.0
    predecessors: tuple[str, ...] = ()
    delay_capable: bool = False


@dataclass(frozen=True)
class SchedInstance:
    steps: tuple[Step, ...]
    resources: tuple[str, ...]
    deadlines: dict
    e_max: float
    max_delay: int = 20

    def __post_init__(self):
        object.__setattr__(self, "steps", tuple(self.steps))
        object.__setattr__(self, "resources", tuple(self.resources))
        ids = [s.id for s in self.steps]
        if len(set(ids)) != len(ids):
            raise InstanceError("step ids must be unique")
        known = set(ids)
        graph = {}
        for s in self.steps:
            if s.duration <= 0:
                raise InstanceError(f"step {s.id}: duration must be positive")
            missing = set(s.predecessors) - known
            if missing:
                raise InstanceError(f"step {s.id}: unknown predecessors {sorted(missing)}")
            graph[s.id] = set(s.predecessors)
        try:
            tuple(graphlib.TopologicalSorter(graph).static_order())
        except graphlib.CycleError as exc:
            raise InstanceError(f"precedence graph has a cycle: {exc.args[1]}") from exc
        object.__setattr__(self, "index", {s.id: s for s in self.steps})

    @property
    def n(self) -> int:
        return len(self.steps)

    @property
    def delay_steps(self) -> list[str]:
        return [s.id for s in self.steps if s.delay_capable]

    def step(self, step_id: str) -> Step:
        return self.index[step_id]

    @classmethod
    def from_dict(cls, d: dict) -> "SchedInstance":
        steps = tuple(
            Step(s["id"], s["order"], s["duration"], tuple(s["resources"]), s.get("energy", 0.0),
                 tuple(s.get("predecessors", ())), s.get("delay_capable", False))
            for s in d["steps"]
        )
        deadlines = {o["id"]: o["deadline"] for o in d["orders"]}
        return cls(steps, tuple(d["resources"]), deadlines, d["e_max"], d.get("max_delay", 20))

    @classmethod
    def from_json(cls, path) -> "SchedInstance":
        with open(path) as fh:
            return cls.from_dict(json.load(fh))

    def to_dict(self) -> dict:
        return {
            "resources": list(self.resources),
            "e_max": self.e_max,
            "max_delay": self.max_delay,
            "orders": [{"id": o, "deadline": dl} for o, dl in self.deadlines.items()],
            "steps": [{"id": s.id, "order": s.order, "duration": s.duration,
                       "resources": list(s.resources), "energy": s.energy,
                       "predecessors": list(s.predecessors), "delay_capable": s.delay_capable}
                      for s in self.steps],
        }

    @classmethod
    def random(cls, n_steps: int = 20, n_resources: int = 3, n_orders: int = 2, seed: int = 0,
               edge_prob: float = 0.3, max_delay: int = 10) -> "SchedInstance":
        rng = random.Random(seed)
        resources = tuple(f"r{k + 1}" for k in range(n_resources))
        orders = [f"o{k + 1}" for k in range(n_orders)]
        steps = []
        by_order: dict[str, list[str]] = {o: [] for o in orders}
        for k in range(n_steps):
            order = orders[k * n_orders // n_steps]
            sid = f"s{k + 1}"
            preds = tuple(p for p in by_order[order] if rng.random() < edge_prob)
            eligible = tuple(sorted(rng.sample(resources, rng.randint(1, n_resources))))
            steps.append(Step(sid, order, rng.randint(1, 6), eligible, rng.randint(1, 8),
                              preds, rng.random() < 0.4))
            by_order[order].append(sid)
        work = sum(s.duration for s in steps)
        deadlines = {o: round(0.6 * work / n_resources) + 5 * i for i, o in enumerate(orders)}
        return cls(tuple(steps), resources, deadlines, e_max=12, max_delay=max_delay)


@dataclass
class Schedule:
    """Placed steps: ``entries[step] = (start, end, resource)``."""

    entries: dict
    order: list[str]
    ready: dict
    instance: SchedInstance = field(repr=False)

    def completion(self, order_id: str) -> float:
        ends = [e[1] for sid, e in self.entries.items() if self.instance.step(sid).order == order_id]
        return max(ends) if ends else 0.0

    def load_profile(self) -> list[tuple[float, float, float]]:
        """Piecewise-constant total power as ``(t_start, t_end, load)`` segments."""
        events: dict[float, float] = {}
        for sid, (start, end, _) in self.entries.items():
            e = self.instance.step(sid).energy
            events[start] = events.get(start, 0.0) + e
            events[end] = events.get(end, 0.0) - e
        times = sorted(events)
        segs = []
        load = 0.0
        for t0, t1 in zip(times, times[1:]):
            load += events[t0]
            segs.append((t0, t1, load))
        return segs

    def to_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["step", "start", "end", "resource"])
            for sid in self.order:
                start, end, res = self.entries[sid]
                w.writerow([sid, start, end, res])

    def load_profile_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["t_start", "t_end", "load"])
            for seg in self.load_profile():
                w.writerow(seg)


def swap_trace(order_genes: Sequence[int], canonical: Sequence[str]) -> list[list[str]]:
    """Step list after each order gene (first entry is the canonical list)."""
    lst = list(canonical)
    n = len(lst)
    trace = [list(lst)]
    for i, d in enumerate(order_genes, start=1):
        t = (i + d) % (n + 1)
        if t != 0 and t != i:
            lst[i - 1], lst[t - 1] = lst[t - 1], lst[i - 1]
        trace.append(list(lst))
    return trace


def encode_order(order: Sequence[str], canonical: Sequence[str]) -> list[int]:
    """Order genes that make :func:`swap_trace` produce ``order``."""
    lst = list(canonical)
    genes = []
    for i, target in enumerate(order, start=1):
        j = lst.index(target) + 1
        genes.append(j - i)
        lst[i - 1], lst[j - 1] = lst[j - 1], lst[i - 1]
    return genes


def sched_decode(chromosome: Chromosome, instance: SchedInstance,
                 variant: str = "fixed_step_delays") -> tuple[list[str], dict]:
    """Decode a swap-coded chromosome into (step order, delay per step)."""
    if variant not in VARIANTS:
        raise ValueError(f"unknown delay variant {variant!r}")
    n = instance.n
    values = [g.values[0] for g in chromosome.genes]
    order = swap_trace(values[:n], [s.id for s in instance.steps])[-1]
    delay_values = values[n:]
    if variant == "fixed_step_delays":
        capable = instance.delay_steps
    else:
        capable = [sid for sid in order if instance.step(sid).delay_capable]
    return order, dict(zip(capable, delay_values))


def genotypic_order(order: Sequence[str], instance: SchedInstance) -> list[str]:
    """Move each step behind the last of its predecessors until none precedes them."""
    seq = list(order)
    k = 0
    moves = 0
    limit = len(seq) ** 2 + 1
    while k < len(seq):
        sid = seq[k]
        preds = instance.step(sid).predecessors
        last = max((seq.index(p) for p in preds), default=-1)
        if last > k:
            seq.pop(k)
            seq.insert(last, sid)
            moves += 1
            if moves > limit:
                raise RepairFailed("genotypic reordering did not settle")
            continue
        k += 1
    return seq


def sched_build(order: Sequence[str], delays: dict, instance: SchedInstance,
                repair_mode: str = "phenotypic") -> Schedule:
    """Greedy placement in the given order with precedence repair."""
    if repair_mode not in REPAIR_MODES:
        raise ValueError(f"unknown repair mode {repair_mode!r}")
    if repair_mode == "genotypic":
        order = genotypic_order(order, instance)
    free = {r: 0.0 for r in instance.resources}
    entries: dict = {}
    ready: dict = {}
    emitted: list[str] = []

    def place(sid):
        step = instance.step(sid)
        eligible = [r for r in step.resources if r in free]
        if not eligible:
            raise InstanceError(f"step {sid} has no eligible resource")
        t_ready = max((entries[p][1] for p in step.predecessors), default=0.0)
        res = min(eligible, key=lambda r: (max(free[r], t_ready), instance.resources.index(r)))
        start = max(free[res], t_ready) + delays.get(sid, 0)
        end = start + step.duration
        free[res] = end
        entries[sid] = (start, end, res)
        ready[sid] = t_ready
        emitted.append(sid)

    pending: list[str] = []
    for sid in order:
        if all(p in entries for p in instance.step(sid).predecessors):
            place(sid)
            progress = True
            while progress and pending:
                progress = False
                for p in list(pending):
                    if all(q in entries for q in instance.step(p).predecessors):
                        pending.remove(p)
                        place(p)
                        progress = True
                        break
        else:
            pending.append(sid)
    if pending:
        raise RepairFailed(f"steps never became ready: {pending}")
    return Schedule(entries, emitted, ready, instance)


def peak_measures(schedule: Schedule, e_max: float) -> tuple[int, float, float]:
    """Number of maximal over-limit intervals, highest excess, and excess area."""
    count, peak_max, area = 0, 0.0, 0.0
    above = False
    last_end = None
    for t0, t1, load in schedule.load_profile():
        excess = load - e_max
        if excess > 0:
            if not above or last_end != t0:
                count += 1
            above = True
            last_end = t1
            peak_max = max(peak_max, excess)
            area += excess * (t1 - t0)
        else:
            above = False
    return count, peak_max, area


def sched_criteria(schedule: Schedule, instance: SchedInstance, ontime_weight: float = 0.0) -> dict:
    tardiness = {o: max(0.0, schedule.completion(o) - dl) for o, dl in instance.deadlines.items()}
    count, peak_max, area = peak_measures(schedule, instance.e_max)
    waiting = 0.0
    for sid, (start, _, _) in schedule.entries.items():
        order = instance.step(sid).order
        weight = 1.0 if tardiness.get(order, 0.0) > 0 else ontime_weight
        waiting += weight * (start - schedule.ready[sid])
    return {
        "deadline_compliance": sum(tardiness.values()),
        "peak_count": count,
        "peak_max": peak_max,
        "peak_area": area,
        "waiting_time": waiting,
    }


DEFAULT_WEIGHTS = {"deadline_compliance": 0.35, "peak_count": 0.15, "peak_max": 0.15,
                   "peak_area": 0.2, "waiting_time": 0.15}


class SchedProblem(ProblemDefinition):
    name = "sched"

    def __init__(self, instance: SchedInstance, encoding: str = "swap",
                 variant: str = "fixed_step_delays", repair_mode: str = "phenotypic",
                 weights: dict | None = None, ontime_weight: float = 0.0):
        if encoding not in ("swap", "sequence"):
            raise ValueError(f"unknown scheduling encoding {encoding!r}")
        if variant not in VARIANTS or repair_mode not in REPAIR_MODES:
            raise ValueError("bad variant or repair mode")
        self.instance = instance
        self.static_data = instance
        self.encoding = encoding
        self.variant = variant
        self.repair_mode = repair_mode
        self.ontime_weight = ontime_weight
        n = instance.n
        delay = ParamSpec.integer(0, instance.max_delay)
        if encoding == "swap":
            order_ids = tuple(f"order{i}" for i in range(1, n + 1))
            delay_ids = tuple(f"delay{k}" for k in range(1, len(instance.delay_steps) + 1))
            types = tuple(GeneType(t, t, (ParamSpec.integer(0, n),)) for t in order_ids)
            types += tuple(GeneType(t, t, (delay,)) for t in delay_ids)
            self.registry = GenomeRegistry(Structure.FIXED_LAYOUT, order_ids + delay_ids, types)
            self.policy = LengthPolicy.fixed(len(order_ids) + len(delay_ids))
        else:
            types = tuple(GeneType(s.id, s.id, (delay,) if s.delay_capable else ())
                          for s in instance.steps)
            self.registry = GenomeRegistry(Structure.PERMUTATION, tuple(s.id for s in instance.steps), types)
            self.policy = LengthPolicy.fixed(n)
        horizon = sum(s.duration for s in instance.steps) + instance.max_delay * len(instance.delay_steps)
        energy = sum(s.energy for s in instance.steps)
        scales = {"deadline_compliance": horizon * len(instance.deadlines), "peak_count": n,
                  "peak_max": energy, "peak_area": sum(s.energy * s.duration for s in instance.steps),
                  "waiting_time": horizon * n}
        w = dict(DEFAULT_WEIGHTS, **(weights or {}))
        aux = {"peak_area", "waiting_time"}
        self.model = FitnessModel(
            [Criterion.linear(k, 0.0, max(scales[k], 1e-9), w[k], auxiliary=k in aux) for k in DEFAULT_WEIGHTS],
            normalize_weights=True)

    def order_and_delays(self, chromosome: Chromosome) -> tuple[list[str], dict]:
        if self.encoding == "swap":
            return sched_decode(chromosome, self.instance, self.variant)
        order = [g.type_id for g in chromosome.genes]
        delays = {g.type_id: g.values[0] for g in chromosome.genes if g.values}
        return order, delays

    def _rewrite(self, chromosome: Chromosome, new_order: list[str], delays: dict) -> Chromosome:
        if self.encoding == "sequence":
            by_id = {g.type_id: g for g in chromosome.genes}
            return chromosome.with_genes(by_id[sid] for sid in new_order)
        n = self.instance.n
        order_genes = encode_order(new_order, [s.id for s in self.instance.steps])
        if self.variant == "fixed_step_delays":
            capable = self.instance.delay_steps
        else:
            capable = [sid for sid in new_order if self.instance.step(sid).delay_capable]
        delay_genes = [delays[sid] for sid in capable]
        values = order_genes + delay_genes
        genes = [Gene(g.type_id, (v,)) for g, v in zip(chromosome.genes, values)]
        return chromosome.with_genes(genes[:n] + genes[n:])

    def decode(self, chromosome):
        order, delays = self.order_and_delays(chromosome)
        schedule = sched_build(order, delays, self.instance, self.repair_mode)
        if self.repair_mode == "genotypic" and schedule.order != order:
            chromosome = self._rewrite(chromosome, schedule.order, delays)
        return schedule, chromosome

    def measure(self, schedule):
        return sched_criteria(schedule, self.instance, self.ontime_weight), {}

    def describe(self):
        return {"name": self.name, "steps": self.instance.n, "encoding": self.encoding,
                "variant": self.variant, "repair": self.repair_mode}

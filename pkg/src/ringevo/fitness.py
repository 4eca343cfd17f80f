"""Multi-criteria fitness: normalization, weighted sum, penalties, forbidden-zone
shaping and Pareto dominance helpers.

Every criterion is mapped onto a common quality scale in [0, 1] by a
piecewise-linear curve.  Qualities are aggregated by a weighted sum into the
raw fitness, which is then multiplied by penalty factors in [0, 1].
"""

from __future__ import annotations

import bisect
import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Any, Callable, Mapping, Sequence

from .errors import PenaltyRangeError, ShapeError, WeightError

WEIGHT_TOL = 1e-9


class Direction(str, Enum):
    MINIMIZE = "minimize"
    MAXIMIZE = "maximize"


def _interp(xs: Sequence[float], ys: Sequence[float], x: float) -> float:
    if x <= xs[0]:
        return ys[0]
    if x >= xs[-1]:
        return ys[-1]
    k = bisect.bisect_right(xs, x)
    x0, x1 = xs[k - 1], xs[k]
    y0, y1 = ys[k - 1], ys[k]
    return y0 + (y1 - y0) * (x - x0) / (x1 - x0)


@dataclass(frozen=True)
class Criterion:
    id: str
    breakpoints: tuple[tuple[float, float], ...]
    direction: Direction = Direction.MAXIMIZE
    weight: float = 1.0
    name: str = ""
    auxiliary: bool = False

    def __post_init__(self):
        object.__setattr__(self, "direction", Direction(self.direction))
        bps = tuple((float(r), float(q)) for r, q in self.breakpoints)
        object.__setattr__(self, "breakpoints", bps)
        if len(bps) < 2:
            raise ValueError(f"criterion {self.id}: need at least two breakpoints")
        raws = [r for r, _ in bps]
        quals = [q for _, q in bps]
        if any(b <= a for a, b in zip(raws, raws[1:])):
            raise ValueError(f"criterion {self.id}: breakpoint raw values must be strictly increasing")
        if any(not 0.0 <= q <= 1.0 for q in quals):
            raise ValueError(f"criterion {self.id}: qualities must lie in [0, 1]")
        step = (lambda a, b: b <= a) if self.direction is Direction.MINIMIZE else (lambda a, b: b >= a)
        if not all(step(a, b) for a, b in zip(quals, quals[1:])):
            raise ValueError(f"criterion {self.id}: qualities must follow the {self.direction.value} direction")
        if self.weight < 0:
            raise ValueError(f"criterion {self.id}: negative weight")
        object.__setattr__(self, "_xs", tuple(raws))
        object.__setattr__(self, "_ys", tuple(quals))

    @classmethod
    def linear(cls, id: str, best: float, worst: float, weight: float = 1.0, **kw) -> "Criterion":
        """Quality 1 at ``best``, 0 at ``worst``; direction follows their order."""
        if best < worst:
            return cls(id, ((best, 1.0), (worst, 0.0)), Direction.MINIMIZE, weight, **kw)
        return cls(id, ((worst, 0.0), (best, 1.0)), Direction.MAXIMIZE, weight, **kw)

    def to_dict(self) -> dict:
        return {"id": self.id, "name": self.name, "direction": self.direction.value,
                "breakpoints": [list(bp) for bp in self.breakpoints],
                "weight": self.weight, "auxiliary": self.auxiliary}

    @classmethod
    def from_dict(cls, d: dict) -> "Criterion":
        return cls(d["id"], tuple(tuple(bp) for bp in d["breakpoints"]), d.get("direction", "maximize"),
                   d.get("weight", 1.0), d.get("name", ""), d.get("auxiliary", False))


def normalize(criterion: Criterion, raw_value: float) -> float:
    return _interp(criterion._xs, criterion._ys, float(raw_value))


def weighted_sum(qualities: Sequence[float], weights: Sequence[float]) -> float:
    if len(qualities) != len(weights):
        raise ShapeError(f"{len(qualities)} qualities vs {len(weights)} weights")
    total = math.fsum(weights)
    if abs(total - 1.0) > WEIGHT_TOL:
        raise WeightError(f"weights sum to {total!r}, expected 1")
    return math.fsum(w * q for w, q in zip(weights, qualities))


@dataclass(frozen=True)
class PenaltySpec:
    """Maps a nonnegative violation measure to a factor; zero violation gives 1."""

    id: str
    mapping: tuple[tuple[float, float], ...]
    violation_measure: str = ""

    def __post_init__(self):
        mp = tuple((float(v), float(f)) for v, f in self.mapping)
        object.__setattr__(self, "mapping", mp)
        if len(mp) < 2 or mp[0] != (0.0, 1.0):
            raise ValueError(f"penalty {self.id}: mapping must start at (0, 1) and have two points")
        vs = [v for v, _ in mp]
        fs = [f for _, f in mp]
        if any(b <= a for a, b in zip(vs, vs[1:])):
            raise ValueError(f"penalty {self.id}: violation breakpoints must be strictly increasing")
        if any(b > a for a, b in zip(fs, fs[1:])) or any(not 0.0 <= f <= 1.0 for f in fs):
            raise ValueError(f"penalty {self.id}: factors must be non-increasing within [0, 1]")
        object.__setattr__(self, "_xs", tuple(vs))
        object.__setattr__(self, "_ys", tuple(fs))

    def factor(self, violation: float) -> float:
        if violation <= 0:
            return 1.0
        return _interp(self._xs, self._ys, float(violation))

    def to_dict(self) -> dict:
        return {"id": self.id, "violation_measure": self.violation_measure,
                "mapping": [list(p) for p in self.mapping]}

    @classmethod
    def from_dict(cls, d: dict) -> "PenaltySpec":
        return cls(d["id"], tuple(tuple(p) for p in d["mapping"]), d.get("violation_measure", ""))


def apply_penalties(raw_fitness: float, penalty_factors: Sequence[float]) -> float:
    result = raw_fitness
    for f in penalty_factors:
        if not 0.0 <= f <= 1.0:
            raise PenaltyRangeError(f"penalty factor {f!r} outside [0, 1]")
        result *= f
    return result


@dataclass(frozen=True)
class FitnessReport:
    raw_values: Mapping[str, float]
    qualities: Mapping[str, float]
    raw_fitness: float
    penalty_factors: Mapping[str, float]
    final_fitness: float
    extras: Mapping[str, Any] = field(default_factory=dict, compare=False)

    @classmethod
    def scalar(cls, value: float) -> "FitnessReport":
        return cls({}, {}, value, {}, value)


class FitnessModel:
    """Criteria plus penalties; turns raw measurements into a FitnessReport."""

    def __init__(self, criteria: Sequence[Criterion], penalties: Sequence[PenaltySpec] = (),
                 normalize_weights: bool = False):
        criteria = list(criteria)
        if not criteria:
            raise ValueError("at least one criterion is required")
        total = math.fsum(c.weight for c in criteria)
        if normalize_weights:
            if total <= 0:
                raise WeightError("weights sum to zero")
            criteria = [Criterion(c.id, c.breakpoints, c.direction, c.weight / total, c.name, c.auxiliary)
                        for c in criteria]
        elif abs(total - 1.0) > WEIGHT_TOL:
            raise WeightError(f"criterion weights sum to {total!r}, expected 1")
        ids = [c.id for c in criteria] + [p.id for p in penalties]
        if len(set(ids)) != len(ids):
            raise ValueError("criterion and penalty ids must be unique")
        self.criteria = tuple(criteria)
        self.penalties = tuple(penalties)
        self._weights = [c.weight for c in self.criteria]

    def assess(self, raw_values: Mapping[str, float], violations: Mapping[str, float] | None = None,
               extras: Mapping[str, Any] | None = None) -> FitnessReport:
        qualities = {c.id: normalize(c, raw_values[c.id]) for c in self.criteria}
        raw = weighted_sum(list(qualities.values()), self._weights)
        violations = violations or {}
        factors = {p.id: p.factor(violations.get(p.id, 0.0)) for p in self.penalties}
        final = apply_penalties(raw, factors.values())
        return FitnessReport(dict(raw_values), qualities, raw, factors, final, dict(extras or {}))

    def to_dict(self) -> dict:
        return {"criteria": [c.to_dict() for c in self.criteria],
                "penalties": [p.to_dict() for p in self.penalties]}

    @classmethod
    def from_dict(cls, d: dict, normalize_weights: bool = False) -> "FitnessModel":
        return cls([Criterion.from_dict(c) for c in d["criteria"]],
                   [PenaltySpec.from_dict(p) for p in d.get("penalties", ())], normalize_weights)


@dataclass(frozen=True)
class ForbiddenZoneShaper:
    """Replaces fitness inside an infeasible region by a bowl rising toward its border.

    The shaped value runs from ``floor`` at distance ``d_max`` (or farther) up
    to just below ``ceiling`` at the border, and the ceiling is held below
    ``margin * boundary_min``, the caller's estimate of the lowest fitness on
    the feasible side of the border.
    """

    feasibility_distance: Callable[[Any], float]
    d_max: float
    floor: float
    ceiling: float
    boundary_min: float
    margin: float = 0.9

    def __post_init__(self):
        if self.d_max <= 0:
            raise ValueError("d_max must be positive")
        if not self.floor < self.ceiling:
            raise ValueError("floor must be below ceiling")
        if not 0 < self.margin < 1:
            raise ValueError("margin must lie in (0, 1)")
        if self.ceiling > self.margin * self.boundary_min:
            raise ValueError(
                f"ceiling {self.ceiling} exceeds margin * boundary_min = {self.margin * self.boundary_min}")


def shape_forbidden(shaper: ForbiddenZoneShaper, phenotype, base_fitness: float) -> float:
    d = shaper.feasibility_distance(phenotype)
    if d <= 0:
        return base_fitness
    closeness = 1.0 - min(d, shaper.d_max) / shaper.d_max
    return shaper.floor + (shaper.ceiling - shaper.floor) * closeness


def _signs(directions, m):
    if len(directions) != m:
        raise ShapeError(f"{len(directions)} directions for {m} criteria")
    return [1.0 if Direction(d) is Direction.MAXIMIZE else -1.0 for d in directions]


def dominates(a: Sequence[float], b: Sequence[float], directions: Sequence) -> bool:
    if len(a) != len(b):
        raise ShapeError(f"vectors of length {len(a)} and {len(b)}")
    signs = _signs(directions, len(a))
    strictly = False
    for x, y, s in zip(a, b, signs):
        x, y = s * x, s * y
        if x < y:
            return False
        if x > y:
            strictly = True
    return strictly


def nondominated_indices(points: Sequence[Sequence[float]], directions: Sequence) -> list[int]:
    """Indices of the non-dominated points, in input order.

    Points are visited in decreasing lexicographic order of their
    direction-adjusted vectors; a point can only be dominated by an earlier one,
    and by transitivity it suffices to test it against the current front.
    """
    if not points:
        return []
    signs = _signs(directions, len(points[0]))
    keyed = [tuple(s * v for s, v in zip(signs, p)) for p in points]
    order = sorted(range(len(points)), key=lambda i: keyed[i], reverse=True)
    front: list[int] = []
    for i in order:
        p = keyed[i]
        dominated = False
        for j in front:
            q = keyed[j]
            if q != p and all(x >= y for x, y in zip(q, p)):
                dominated = True
                break
        if not dominated:
            front.append(i)
    return sorted(front)


def nondominated_front(points: Sequence[Sequence[float]], directions: Sequence) -> list:
    return [points[i] for i in nondominated_indices(points, directions)]

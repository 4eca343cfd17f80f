"""2-D layout packing by left-shift placement.

Objects of five types (equilateral triangle, square, rectangle, circle, oval)
are placed on a rectangular surface of width ``w`` (cross axis, y) and length
``l`` (shift axis, x).  Each gene names a type and carries the cross-axis
position ``w_pos`` of the object's centre plus, except for circles, an integer
rotation ``alpha`` in degrees reduced by the shape's symmetry.

Decoding enters each object at the right end of the surface and slides it
left until it touches the left edge or another object.  Contact is computed
exactly on the polygon outlines: for convex shapes the gap along the shift
axis is a piecewise-linear function of y whose extremes lie on vertex heights,
so evaluating the boundary chains there gives the first-contact position.
Circles and ovals use inscribed 32-gons.
"""

from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

from ..fitness import Criterion, FitnessModel, PenaltySpec
from ..genome import Chromosome, GeneType, GenomeRegistry, LengthPolicy, ParamSpec, Structure
from .base import ProblemDefinition

SHAPES = ("triangle", "square", "rectangle", "circle", "oval")
ROTATION_RANGE = {"triangle": 119, "square": 89, "rectangle": 179, "circle": None, "oval": 179}
CURVE_SEGMENTS = 32
BALANCE_TOLERANCE = 0.10
DISCARD_STREAK = 3
GEOM_TOL = 1e-12

DEFAULT_DIMENSIONS = {
    "triangle": {"side": 3.0},
    "square": {"side": 2.5},
    "rectangle": {"a": 3.0, "b": 2.0},
    "circle": {"radius": 1.2},
    "oval": {"a": 1.6, "b": 1.0},
}


@dataclass(frozen=True)
class LayoutInstance:
    width: float = 20.0
    length: float = 30.0
    dimensions: dict = field(default_factory=lambda: {k: dict(v) for k, v in DEFAULT_DIMENSIONS.items()})
    max_genes: int | None = None

    def __post_init__(self):
        if self.width <= 0 or self.length <= 0:
            raise ValueError("surface dimensions must be positive")
        dims = {k: dict(v) for k, v in DEFAULT_DIMENSIONS.items()}
        for k, v in self.dimensions.items():
            if k not in dims:
                raise ValueError(f"unknown shape {k!r}")
            dims[k].update(v)
        for k, v in dims.items():
            if any(x <= 0 for x in v.values()):
                raise ValueError(f"{k}: dimensions must be positive")
        object.__setattr__(self, "dimensions", dims)
        if self.max_genes is None:
            object.__setattr__(self, "max_genes", self.estimate_max_genes())

    def area(self, shape: str) -> float:
        d = self.dimensions[shape]
        if shape == "triangle":
            return math.sqrt(3) / 4 * d["side"] ** 2
        if shape == "square":
            return d["side"] ** 2
        if shape == "rectangle":
            return d["a"] * d["b"]
        if shape == "circle":
            return math.pi * d["radius"] ** 2
        return math.pi * d["a"] * d["b"]

    @property
    def smallest(self) -> str:
        return min(SHAPES, key=self.area)

    def estimate_max_genes(self) -> int:
        # enough genes to cover the surface with the smallest object, plus slack
        return max(DISCARD_STREAK + 1, math.ceil(1.1 * self.width * self.length / self.area(self.smallest)))

    @property
    def scale(self) -> float:
        return max(self.width, self.length)

    @classmethod
    def from_dict(cls, d: dict) -> "LayoutInstance":
        return cls(d["width"], d["length"], d.get("shapes", {}), d.get("max_genes"))

    @classmethod
    def from_json(cls, path) -> "LayoutInstance":
        with open(path) as fh:
            return cls.from_dict(json.load(fh))

    def to_dict(self) -> dict:
        return {"width": self.width, "length": self.length, "shapes": self.dimensions,
                "max_genes": self.max_genes}

    def __hash__(self):
        return hash((self.width, self.length, json.dumps(self.dimensions, sort_keys=True)))


def base_outline(shape: str, dims: dict) -> np.ndarray:
    """Counter-clockwise outline centred on the origin at zero rotation."""
    if shape == "triangle":
        r = dims["side"] / math.sqrt(3)
        angles = np.radians([-90.0, 30.0, 150.0])
        return np.column_stack([r * np.cos(angles), r * np.sin(angles)])
    if shape == "square":
        h = dims["side"] / 2
        return np.array([[-h, -h], [h, -h], [h, h], [-h, h]])
    if shape == "rectangle":
        a, b = dims["a"] / 2, dims["b"] / 2
        return np.array([[-a, -b], [a, -b], [a, b], [-a, b]])
    t = np.arange(CURVE_SEGMENTS) * 2 * math.pi / CURVE_SEGMENTS
    if shape == "circle":
        a = b = dims["radius"]
    else:
        a, b = dims["a"], dims["b"]
    return np.column_stack([a * np.cos(t), b * np.sin(t)])


def rotate(poly: np.ndarray, alpha: float) -> np.ndarray:
    c, s = math.cos(math.radians(alpha)), math.sin(math.radians(alpha))
    return poly @ np.array([[c, s], [-s, c]])


def _chains(poly: np.ndarray):
    """Right and left boundary of a convex CCW polygon as x(y) with ascending y."""
    ys = poly[:, 1]
    k = len(poly)
    ymin, ymax = ys.min(), ys.max()
    tol = GEOM_TOL * (1.0 + ymax - ymin)
    bottom = np.flatnonzero(ys <= ymin + tol)
    top = np.flatnonzero(ys >= ymax - tol)
    r0, r1 = bottom[np.argmax(poly[bottom, 0])], top[np.argmax(poly[top, 0])]
    l0, l1 = top[np.argmin(poly[top, 0])], bottom[np.argmin(poly[bottom, 0])]

    def walk(a, b):
        idx = [a]
        while idx[-1] != b:
            idx.append((idx[-1] + 1) % k)
        return poly[idx]

    right = walk(r0, r1)
    left = walk(l0, l1)[::-1]
    right[0, 1], right[-1, 1] = ymin, ymax
    left[0, 1], left[-1, 1] = ymin, ymax
    return right, left


@dataclass(frozen=True)
class Outline:
    """Rotated outline relative to the object centre, with its boundary chains."""

    poly: np.ndarray
    right: np.ndarray
    left: np.ndarray
    xmin: float
    xmax: float
    ymin: float
    ymax: float

    @classmethod
    def of(cls, poly: np.ndarray) -> "Outline":
        right, left = _chains(poly)
        return cls(poly, right, left, float(poly[:, 0].min()), float(poly[:, 0].max()),
                   float(poly[:, 1].min()), float(poly[:, 1].max()))


@lru_cache(maxsize=None)
def outline(instance: LayoutInstance, shape: str, alpha: int) -> Outline:
    return Outline.of(rotate(base_outline(shape, instance.dimensions[shape]), alpha))


def _alphas(shape):
    top = ROTATION_RANGE[shape]
    return [0] if top is None else range(top + 1)


@lru_cache(maxsize=None)
def w_pos_range(instance: LayoutInstance, shape: str) -> tuple[float, float]:
    """Centre positions from which some rotation still fits against either edge."""
    outs = [outline(instance, shape, a) for a in _alphas(shape)]
    lo = min(-o.ymin for o in outs)
    hi = instance.width - min(o.ymax for o in outs)
    return float(lo), float(max(lo, hi))


@dataclass
class Placement:
    shape: str
    alpha: int
    w_pos: float
    x: float
    y: float
    polygon: np.ndarray = field(repr=False)
    repaired: bool = False
    wrapped: bool = False
    gene_index: int = -1
    right: np.ndarray = field(default=None, repr=False)
    xmax: float = 0.0
    ymin: float = 0.0
    ymax: float = 0.0


@dataclass
class LayoutResult:
    placements: list[Placement]
    status: str
    discarded: int = 0
    wrap_count: int = 0

    def counts(self) -> dict:
        out = {s: 0 for s in SHAPES}
        for p in self.placements:
            out[p.shape] += 1
        return out


def contact_x(out: Outline, cy: float, placed: list[Placement]) -> float:
    """Centre x at which ``out`` (centred at height ``cy``) stops sliding left."""
    best = -out.xmin
    lo_a, hi_a = out.ymin + cy, out.ymax + cy
    left_y = out.left[:, 1] + cy
    for p in placed:
        if p.xmax - out.xmin <= best:
            break
        lo, hi = max(lo_a, p.ymin), min(hi_a, p.ymax)
        if hi - lo <= GEOM_TOL:
            continue
        ys = np.concatenate((left_y, p.right[:, 1], (lo, hi)))
        ys = ys[(ys >= lo) & (ys <= hi)]
        gap = np.interp(ys, p.right[:, 1], p.right[:, 0]) - np.interp(ys, left_y, out.left[:, 0])
        best = max(best, float(gap.max()))
    return best


class LayoutDecoder:
    def __init__(self, instance: LayoutInstance):
        self.instance = instance

    def _try(self, shape, alpha, w_pos, placed):
        inst = self.instance
        out = outline(inst, shape, alpha)
        if out.ymax - out.ymin > inst.width + GEOM_TOL:
            return None
        cy = min(max(w_pos, -out.ymin), inst.width - out.ymax)
        x = contact_x(out, cy, placed)
        if x + out.xmax > inst.length + GEOM_TOL * inst.scale:
            return None
        poly = out.poly + (x, cy)
        return Placement(shape, alpha, w_pos, x, cy, poly, repaired=abs(cy - w_pos) > 1e-12,
                         right=out.right + (x, cy), xmax=x + out.xmax,
                         ymin=cy + out.ymin, ymax=cy + out.ymax)

    def smallest_fits(self, placed, angles: int = 8, positions: int = 24) -> bool:
        shape = self.instance.smallest
        top = ROTATION_RANGE[shape]
        alphas = [0] if top is None else sorted({round(k * (top + 1) / angles) for k in range(angles)})
        lo, hi = w_pos_range(self.instance, shape)
        for a in alphas:
            for j in range(positions):
                y = lo + (hi - lo) * j / max(1, positions - 1)
                if self._try(shape, a, y, placed) is not None:
                    return True
        return False

    def decode(self, chromosome: Chromosome) -> LayoutResult:
        placed: list[Placement] = []
        by_x: list[Placement] = []
        streak = discarded = wrap_count = 0
        genes = list(chromosome.genes)
        for lap in (0, 1):
            for gi, gene in enumerate(genes):
                alpha = int(gene.values[1]) if len(gene.values) > 1 else 0
                p = self._try(gene.type_id, alpha, gene.values[0], by_x)
                if p is None:
                    discarded += 1
                    streak += 1
                    if streak >= DISCARD_STREAK:
                        if not self.smallest_fits(by_x):
                            return LayoutResult(placed, "filled", discarded, wrap_count)
                        streak = 0
                    continue
                streak = 0
                p.gene_index = gi
                p.wrapped = lap == 1
                wrap_count += lap
                placed.append(p)
                by_x.append(p)
                by_x.sort(key=lambda q: q.xmax, reverse=True)
        return LayoutResult(placed, "exhausted", discarded, wrap_count)


def layout_decode(chromosome: Chromosome, instance: LayoutInstance) -> LayoutResult:
    return LayoutDecoder(instance).decode(chromosome)


def balance_violation(counts) -> float:
    vals = list(counts.values()) if isinstance(counts, dict) else list(counts)
    if not vals:
        return 0.0
    lo, hi = min(vals), max(vals)
    return max(0.0, (hi - lo) / max(lo, 1) - BALANCE_TOLERANCE)


def layout_criteria(placements, instance: LayoutInstance) -> dict:
    counts = {s: 0 for s in SHAPES}
    for p in placements:
        counts[p.shape] += 1
    used = sum(instance.area(s) * c for s, c in counts.items())
    return {"unused_area": instance.width * instance.length - used,
            "balance_violation": balance_violation(counts)}


class LayoutProblem(ProblemDefinition):
    name = "layout"

    def __init__(self, instance: LayoutInstance | None = None, min_genes: int = 1,
                 balance_mapping=((0.0, 1.0), (0.5, 0.5), (2.0, 0.1)),
                 wrap_mapping=((0.0, 1.0), (1.0, 0.5))):
        self.instance = instance or LayoutInstance()
        self.static_data = self.instance
        types = []
        for shape in SHAPES:
            lo, hi = w_pos_range(self.instance, shape)
            params = [ParamSpec.real(lo, hi)]
            if ROTATION_RANGE[shape] is not None:
                params.append(ParamSpec.integer(0, ROTATION_RANGE[shape]))
            types.append(GeneType(shape, shape, tuple(params)))
        self.registry = GenomeRegistry(Structure.FREE_SEQUENCE, SHAPES, tuple(types))
        self.policy = LengthPolicy.variable(min(min_genes, self.instance.max_genes), self.instance.max_genes)
        surface = self.instance.width * self.instance.length
        self.model = FitnessModel(
            [Criterion.linear("unused_area", 0.0, surface, name="unused area")],
            [PenaltySpec("balance", balance_mapping, "balance_violation"),
             PenaltySpec("wrap", wrap_mapping, "wrap_fraction")])
        self._decoder = LayoutDecoder(self.instance)

    def decode(self, chromosome):
        return self._decoder.decode(chromosome), chromosome

    def measure(self, result: LayoutResult):
        raw = layout_criteria(result.placements, self.instance)
        balance = raw.pop("balance_violation")
        wrap = result.wrap_count / max(1, len(result.placements))
        return raw, {"balance": balance, "wrap": wrap}

    def describe(self):
        return {"name": self.name, "width": self.instance.width, "length": self.instance.length,
                "max_genes": self.instance.max_genes}


def placements_csv(placements, path) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["type", "x", "y", "alpha"])
        for p in placements:
            w.writerow([p.shape, p.x, p.y, p.alpha])


COLORS = {"triangle": "#d95f02", "square": "#1b9e77", "rectangle": "#7570b3",
          "circle": "#e7298a", "oval": "#66a61e"}


def placements_svg(placements, instance: LayoutInstance, path, scale: float = 20.0) -> None:
    W, H = instance.length * scale, instance.width * scale
    parts = [f'<svg xmlns="http://www.w3.org/2000/svg" width="{W:.0f}" height="{H:.0f}" '
             f'viewBox="0 0 {W:.2f} {H:.2f}">',
             f'<rect x="0" y="0" width="{W:.2f}" height="{H:.2f}" fill="white" stroke="black"/>']
    for p in placements:
        pts = " ".join(f"{x * scale:.2f},{H - y * scale:.2f}" for x, y in p.polygon)
        parts.append(f'<polygon points="{pts}" fill="{COLORS[p.shape]}" fill-opacity="0.7" stroke="black" '
                     f'stroke-width="0.5"/>')
    parts.append("</svg>")
    with open(path, "w") as fh:
        fh.write("\n".join(parts) + "\n")


"""Reference problems and a factory that builds them from config dictionaries."""

from __future__ import annotations

from pathlib import Path

from .base import Evaluation, ProblemDefinition
from .layout import LayoutInstance, LayoutProblem, layout_criteria, layout_decode
from .sched import SchedInstance, SchedProblem, sched_build, sched_criteria, sched_decode
from .sphere import SphereProblem, sphere_problem
from .tsp import (TspInstance, TspProblem, tsp_brute_force, tsp_decode_index_list,
                  tsp_decode_permutation, tsp_decode_shift, tsp_tour_length)


def build_problem(spec: dict, base_dir: Path | str | None = None) -> ProblemDefinition:
    """Build a problem from ``{"name": ..., "instance": path, ...}``.

    Instance paths are resolved relative to ``base_dir``.  TSP also accepts
    ``"random": {"n": .., "seed": ..}`` and scheduling ``"random": {...}``.
    """
    spec = dict(spec)
    name = spec.pop("name")
    base = Path(base_dir) if base_dir else Path.cwd()
    path = spec.pop("instance", None)
    path = base / path if path else None
    rnd = spec.pop("random", None)
    if name == "sphere":
        return SphereProblem(spec.get("dimensions", 5), tuple(spec.get("bounds", (-5.0, 5.0))))
    if name == "tsp":
        inst = TspInstance.from_csv(path) if path else TspInstance.random(**rnd)
        return TspProblem(inst, spec.get("encoding", "permutation"), spec.get("repair_mode", "redice"))
    if name == "sched":
        inst = SchedInstance.from_json(path) if path else SchedInstance.random(**(rnd or {}))
        return SchedProblem(inst, **spec)
    if name == "layout":
        inst = LayoutInstance.from_json(path) if path else LayoutInstance(**(rnd or {}))
        return LayoutProblem(inst, **spec)
    raise ValueError(f"unknown problem {name!r}")


__all__ = [
    "Evaluation", "ProblemDefinition", "build_problem",
    "LayoutInstance", "LayoutProblem", "layout_criteria", "layout_decode",
    "SchedInstance", "SchedProblem", "sched_build", "sched_criteria", "sched_decode",
    "SphereProblem", "sphere_problem",
    "TspInstance", "TspProblem", "tsp_brute_force", "tsp_decode_index_list",
    "tsp_decode_permutation", "tsp_decode_shift", "tsp_tour_length",
]

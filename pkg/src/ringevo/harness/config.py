"""JSON run configuration.

Schema (all sections except ``problem`` optional)::

    {
      "problem": {"name": "sphere" | "tsp" | "sched" | "layout",
                  "instance": "relative/or/absolute/path", ...problem options},
      "engine": {"mu": 60, "deme_size": 7, "acceptance": "better_parent",
                 "offspring": 2, "structure": "ring", "selection_pressure": 2.0,
                 "workers": 1, "operators": {...},
                 "termination": {"max_evaluations": 100000, "target_fitness": null,
                                 "g_acc": 20, "g_best": null, "max_generations": null}},
      "memetic": {"ls_id": "hill_climb", "lamarckian": true, ...} or null,
      "archive": {"epsilon": 1e-6, "capacity": 1000000, "sequence_sensitive": true} or null,
      "seed": 1, "runs": 30, "tuned": false,
      "tune": {"surcharge": 0.5, "initial_runs": 10, ...}
    }
"""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass, field, fields
from pathlib import Path

from ..archive import SimilarityScheme, SolutionArchive
from ..errors import ConfigError
from ..memetic import Memetic, MemeticConfig
from ..population import EngineConfig, Termination
from ..problems import ProblemDefinition, build_problem
from ..variation import OperatorConfig


def _build(cls, data: dict, what: str):
    known = {f.name for f in fields(cls)}
    extra = set(data) - known
    if extra:
        raise ConfigError(f"{what}: unknown keys {sorted(extra)}")
    try:
        return cls(**data)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"{what}: {exc}") from exc


def engine_from_dict(data: dict | None) -> EngineConfig:
    data = dict(data or {})
    try:
        ops = OperatorConfig.from_dict(data.pop("operators", None))
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"operators: {exc}") from exc
    term = data.pop("termination", None)
    if term is not None:
        data["termination"] = _build(Termination, term, "termination")
    cfg = _build(EngineConfig, dict(data, operators=ops), "engine")
    return cfg.validate()


@dataclass
class ArchiveConfig:
    epsilon: float = 1e-6
    capacity: int = 1_000_000
    sequence_sensitive: bool = True

    def build(self, problem: ProblemDefinition) -> SolutionArchive:
        scheme = SimilarityScheme(self.epsilon, sequence_sensitive=self.sequence_sensitive)
        return SolutionArchive(scheme, problem.registry, self.capacity)


@dataclass
class RunConfig:
    problem: dict
    engine: EngineConfig = field(default_factory=EngineConfig)
    memetic: MemeticConfig | None = None
    archive: ArchiveConfig | None = None
    seed: int = 1
    runs: int = 30
    tuned: bool = False
    tune: dict = field(default_factory=dict)
    base_dir: Path | None = None

    def __post_init__(self):
        if self.runs < 1:
            raise ConfigError("runs must be at least 1")
        if "name" not in self.problem:
            raise ConfigError("problem.name is required")

    @classmethod
    def from_dict(cls, data: dict, base_dir=None) -> "RunConfig":
        data = dict(data)
        known = {"problem", "engine", "memetic", "archive", "seed", "runs", "tuned", "tune"}
        extra = set(data) - known
        if extra:
            raise ConfigError(f"unknown top-level keys {sorted(extra)}")
        if "problem" not in data:
            raise ConfigError("missing 'problem' section")
        memetic = data.get("memetic")
        archive = data.get("archive")
        return cls(
            problem=dict(data["problem"]),
            engine=engine_from_dict(data.get("engine")),
            memetic=None if memetic is None else _build(MemeticConfig, memetic, "memetic"),
            archive=None if archive is None else _build(ArchiveConfig, archive, "archive"),
            seed=int(data.get("seed", 1)),
            runs=int(data.get("runs", 30)),
            tuned=bool(data.get("tuned", False)),
            tune=dict(data.get("tune", {})),
            base_dir=Path(base_dir) if base_dir else None,
        )

    @classmethod
    def from_json(cls, path) -> "RunConfig":
        path = Path(path)
        try:
            data = json.loads(path.read_text())
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError(f"cannot read config {path}: {exc}") from exc
        return cls.from_dict(data, base_dir=path.parent)

    def build_problem(self) -> ProblemDefinition:
        try:
            return build_problem(self.problem, self.base_dir)
        except (OSError, KeyError, TypeError, ValueError) as exc:
            raise ConfigError(f"cannot build problem {self.problem.get('name')!r}: {exc}") from exc

    def build_memetic(self, problem) -> Memetic | None:
        if self.memetic is None:
            return None
        try:
            return Memetic(self.memetic, problem)
        except Exception as exc:
            raise ConfigError(str(exc)) from exc

    def to_dict(self) -> dict:
        eng = asdict(self.engine)
        eng["acceptance"] = self.engine.acceptance.value
        eng["structure"] = self.engine.structure.value
        return {"problem": self.problem, "engine": eng,
                "memetic": None if self.memetic is None else asdict(self.memetic),
                "archive": None if self.archive is None else asdict(self.archive),
                "seed": self.seed, "runs": self.runs, "tuned": self.tuned, "tune": self.tune}

"""Ring-structured evolutionary and memetic optimization toolkit."""

from .archive import SimilarityScheme, SolutionArchive, canonical_key
from .fitness import Criterion, FitnessModel, FitnessReport, ForbiddenZoneShaper, PenaltySpec
from .genome import Chromosome, Gene, GeneType, GenomeRegistry, LengthPolicy, ParamSpec, Structure
from .memetic import Memetic, MemeticConfig
from .population import AcceptanceRule, EngineConfig, PopulationStructure, Termination, run_engine
from .variation import OperatorConfig, Variation

__version__ = "0.1.0"

__all__ = [
    "AcceptanceRule", "Chromosome", "Criterion", "EngineConfig", "FitnessModel", "FitnessReport",
    "ForbiddenZoneShaper", "Gene", "GeneType", "GenomeRegistry", "LengthPolicy", "Memetic", "MemeticConfig",
    "OperatorConfig", "ParamSpec", "PenaltySpec", "PopulationStructure", "SimilarityScheme", "SolutionArchive",
    "Structure", "Termination", "Variation", "canonical_key", "run_engine",
]

import threading
import time

from helpers import CountingProblem
from ringevo.archive import SimilarityScheme, SolutionArchive, canonical_key, lookup_or_evaluate, quantize
from ringevo.genome import Chromosome, Gene, LengthPolicy
from ringevo.population import EngineConfig, Termination, run_engine
from ringevo.problems import SphereProblem

POL = LengthPolicy.fixed(1)


def one(v):
    return Chromosome((Gene("x", (v,)),), POL)


def test_quantize_grid():
    s = SimilarityScheme(0.1)
    assert canonical_key(one(0.44), s) == canonical_key(one(0.41), s)
    assert canonical_key(one(0.44), s) != canonical_key(one(0.46), s)
    assert canonical_key(one(0.3), s) == canonical_key(one(0.3), s)
    assert quantize(0.25, 0.1) == 3  # round half up


def test_sequence_insensitive_key():
    pol = LengthPolicy.fixed(2)
    a = Chromosome((Gene("a", (1.0,)), Gene("b", (2.0,))), pol)
    b = Chromosome((Gene("b", (2.0,)), Gene("a", (1.0,))), pol)
    assert canonical_key(a, SimilarityScheme()) != canonical_key(b, SimilarityScheme())
    loose = SimilarityScheme(sequence_sensitive=False)
    assert canonical_key(a, loose) == canonical_key(b, loose)


def test_lookup_counts():
    calls = []

    def ev(c):
        calls.append(c)
        return ("report", c.genes[0].values[0])

    arch = SolutionArchive(SimilarityScheme(0.1))
    r1 = lookup_or_evaluate(arch, one(0.44), ev)
    r2 = lookup_or_evaluate(arch, one(0.44), ev)
    r3 = lookup_or_evaluate(arch, one(0.41), ev)
    assert len(calls) == 1 and r1 == r2 == r3
    assert arch.hit_count == 2 and arch.miss_count == 1
    off = SolutionArchive(SimilarityScheme(0.1), capacity=0)
    for _ in range(3):
        lookup_or_evaluate(off, one(0.44), ev)
    assert len(calls) == 4


def test_lru_eviction():
    arch = SolutionArchive(SimilarityScheme(1.0), capacity=2)
    ev = lambda c: c.genes[0].values[0]
    for v in (1.0, 2.0, 1.0, 3.0):
        arch.lookup_or_evaluate(one(v), ev)
    assert arch.lookup_or_evaluate(one(1.0), ev)[1]
    assert not arch.lookup_or_evaluate(one(2.0), ev)[1]


def test_single_flight():
    calls = []

    def slow(c):
        calls.append(1)
        time.sleep(0.05)
        return 42

    arch = SolutionArchive(SimilarityScheme(0.1))
    out = []
    threads = [threading.Thread(target=lambda: out.append(arch.lookup_or_evaluate(one(0.5), slow)[0]))
               for _ in range(8)]
    for t in threads:
        t.start()
    for t in threads:
        t.join()
    assert len(calls) == 1 and out == [42] * 8


def test_engine_calls_equal_distinct_keys():
    p = CountingProblem(SphereProblem(3))
    scheme = SimilarityScheme(1e-3)
    arch = SolutionArchive(scheme, p.registry)
    cfg = EngineConfig(mu=14, deme_size=7, termination=Termination(max_evaluations=3000))
    out = run_engine(p, cfg, 1, archive=arch)
    assert p.calls == len(arch) == out.evaluations
    assert out.archive_hits == arch.hit_count

import json
import random

import pytest
from hypothesis import given, settings, strategies as st

from ringevo.errors import DuplicateGeneType, EmptyRegistry, LengthPolicyError
from ringevo.genome import (Chromosome, Gene, GeneType, GenomeRegistry, LengthPolicy, ParamKind, ParamSpec,
                            Structure, is_valid, permutation_registry, random_chromosome, register_gene_type,
                            validate)


def triangle():
    return GeneType("triangle", "triangle", (ParamSpec.real(0, 10), ParamSpec.integer(0, 119)))


def mixed_registry():
    reg = GenomeRegistry(Structure.FREE_SEQUENCE)
    reg = register_gene_type(reg, triangle())
    reg = register_gene_type(reg, GeneType("circle", "circle", (ParamSpec.real(0, 10),)))
    return register_gene_type(reg, GeneType("marker", "marker", ()))


def test_register_type_and_duplicate():
    reg = register_gene_type(GenomeRegistry(), triangle())
    assert "triangle" in reg
    assert reg.get("triangle").params[1].kind is ParamKind.INTEGER
    with pytest.raises(DuplicateGeneType):
        register_gene_type(reg, triangle())


def test_paramless_type_accepted():
    reg = register_gene_type(GenomeRegistry(), GeneType("step", "step", ()))
    assert reg.get("step").params == ()


def test_param_spec_validation():
    with pytest.raises(ValueError):
        ParamSpec.real(2, 1)
    with pytest.raises(ValueError):
        ParamSpec.integer(0.5, 3)
    with pytest.raises(ValueError):
        ParamSpec.real(0, float("inf"))


def test_fixed_permutation_layout(rng):
    reg = permutation_registry(range(1, 6))
    c = random_chromosome(reg, LengthPolicy.fixed(5), rng)
    assert len(c) == 5 and sorted(c.type_ids) == [1, 2, 3, 4, 5]
    assert validate(reg, c) == []


def test_variable_length_draws(rng):
    reg = mixed_registry()
    lengths = {len(random_chromosome(reg, LengthPolicy.variable(3, 8), rng)) for _ in range(1000)}
    assert lengths == set(range(3, 9))


def test_integer_draws_whole_and_in_range(rng):
    spec = ParamSpec.integer(0, 119)
    vals = [spec.draw(rng) for _ in range(10_000)]
    assert all(isinstance(v, int) and 0 <= v <= 119 for v in vals)
    assert {0, 119} <= set(vals)


def test_closed_bounds_are_valid():
    reg = mixed_registry()
    pol = LengthPolicy.variable(1, 3)
    lo = Chromosome((Gene("triangle", (0.0, 0)),), pol)
    hi = Chromosome((Gene("triangle", (10.0, 119)),), pol)
    assert is_valid(reg, lo) and is_valid(reg, hi)


def test_validate_reports_violations():
    reg = mixed_registry()
    pol = LengthPolicy.variable(1, 3)
    over = Chromosome((Gene("triangle", (11.0, 5)),), pol)
    assert [v.kind for v in validate(reg, over)] == ["BoundViolation"]
    unknown = Chromosome((Gene("hexagon", ()),), pol)
    assert [v.kind for v in validate(reg, unknown)] == ["UnknownType"]
    too_long = Chromosome(tuple(Gene("marker") for _ in range(4)), pol)
    assert [v.kind for v in validate(reg, too_long)] == ["LengthViolation"]
    frac = Chromosome((Gene("triangle", (1.0, 2.5)),), pol)
    assert [v.kind for v in validate(reg, frac)] == ["BoundViolation"]


def test_permutation_violation():
    reg = permutation_registry(range(1, 4))
    dup = Chromosome((Gene(1), Gene(1), Gene(2)), LengthPolicy.fixed(3))
    assert "NotPermutation" in [v.kind for v in validate(reg, dup)]


def test_fixed_layout_mismatch():
    spec = ParamSpec.real(0, 1)
    reg = GenomeRegistry(Structure.FIXED_LAYOUT, ("x", "y"),
                         (GeneType("x", "x", (spec,)), GeneType("y", "y", (spec,))))
    swapped = Chromosome((Gene("y", (0.5,)), Gene("x", (0.5,))), LengthPolicy.fixed(2))
    assert "LayoutMismatch" in [v.kind for v in validate(reg, swapped)]


def test_empty_registry(rng):
    with pytest.raises(EmptyRegistry):
        random_chromosome(GenomeRegistry(), LengthPolicy.variable(1, 2), rng)


def test_bad_length_policy():
    with pytest.raises(LengthPolicyError):
        LengthPolicy(5, 3)


@settings(max_examples=200, deadline=None)
@given(st.integers(0, 2**32))
def test_random_chromosomes_validate(seed):
    rng = random.Random(seed)
    reg = mixed_registry()
    assert validate(reg, random_chromosome(reg, LengthPolicy.variable(1, 12), rng)) == []


def test_round_trip_many_seeds():
    reg = mixed_registry()
    for seed in range(10_000):
        c = random_chromosome(reg, LengthPolicy.variable(1, 6), random.Random(seed))
        assert not validate(reg, c)


def test_serialization_preserves_order(rng):
    reg = mixed_registry()
    c = random_chromosome(reg, LengthPolicy.variable(5, 10), rng)
    back = Chromosome.from_dict(json.loads(json.dumps(c.to_dict())))
    assert back == c
    reg2 = GenomeRegistry.from_json(reg.to_json())
    assert reg2.get("triangle") == reg.get("triangle")
    assert [gt.type_id for gt in reg2.gene_types] == [gt.type_id for gt in reg.gene_types]

import random

import pytest

from verifiers import schedule_problems
from ringevo.errors import InstanceError
from ringevo.genome import Chromosome, Gene, LengthPolicy, validate
from ringevo.problems.sched import (SchedInstance, SchedProblem, Step, encode_order, peak_measures,
                                    sched_build, sched_criteria, sched_decode, swap_trace)

# initial list, then after genes 1..5 (gene 4 is a no-op)
SWAP_TRACE = ["abcde", "cbade", "cabde", "bacde", "bacde", "eacdb"]


def table_instance():
    steps = tuple(Step(s, "o1", 1, ("r1",), 1, (), s in "bde") for s in "abcde")
    return SchedInstance(steps, ("r1",), {"o1": 100}, e_max=10, max_delay=20)


def swap_chromosome(order_genes, delay_genes):
    vals = list(order_genes) + list(delay_genes)
    ids = [f"order{i + 1}" for i in range(len(order_genes))] + [f"delay{k + 1}" for k in range(len(delay_genes))]
    return Chromosome(tuple(Gene(t, (v,)) for t, v in zip(ids, vals)), LengthPolicy.fixed(len(vals)))


def test_swap_trace_and_delays():
    inst = table_instance()
    trace = swap_trace([2, 1, 4, 0, 2], list("abcde"))
    assert ["".join(t) for t in trace] == SWAP_TRACE
    c = swap_chromosome([2, 1, 4, 0, 2], [7, 5, 12])
    order, fixed = sched_decode(c, inst, "fixed_step_delays")
    assert order == list("eacdb") and fixed == {"b": 7, "d": 5, "e": 12}
    order2, reordered = sched_decode(c, inst, "reordered_delays")
    assert order2 == order and reordered == {"e": 7, "d": 5, "b": 12}
    assert sched_decode(swap_chromosome([0] * 5, [0, 0, 0]), inst)[0] == list("abcde")


def test_encode_order_inverts_decode():
    rng = random.Random(0)
    canon = [f"s{i}" for i in range(12)]
    for _ in range(500):
        target = canon[:]
        rng.shuffle(target)
        genes = encode_order(target, canon)
        assert all(0 <= g <= len(canon) for g in genes)
        assert swap_trace(genes, canon)[-1] == target


def chain_instance():
    steps = (Step("a", "o1", 2, ("r1",), 1), Step("b", "o1", 3, ("r1", "r2"), 1, ("a",)))
    return SchedInstance(steps, ("r1", "r2"), {"o1": 50}, e_max=10)


def test_phenotypic_postpones():
    p = SchedProblem(chain_instance(), encoding="sequence", repair_mode="phenotypic")
    c = Chromosome((Gene("b"), Gene("a")), p.policy)
    ev = p.evaluate(c)
    assert ev.phenotype.order == ["a", "b"] and ev.chromosome == c
    assert ev.phenotype.entries["b"][0] >= ev.phenotype.entries["a"][1]


def test_genotypic_moves_gene():
    p = SchedProblem(chain_instance(), encoding="sequence", repair_mode="genotypic")
    ev = p.evaluate(Chromosome((Gene("b"), Gene("a")), p.policy))
    assert [g.type_id for g in ev.chromosome.genes] == ["a", "b"]


def test_genotypic_swap_rewrites_chromosome():
    p = SchedProblem(chain_instance(), encoding="swap", repair_mode="genotypic")
    c = swap_chromosome([1, 0], [])
    ev = p.evaluate(c)
    assert ev.phenotype.order == ["a", "b"]
    assert sched_decode(ev.chromosome, p.instance)[0] == ["a", "b"]
    assert validate(p.registry, ev.chromosome) == []


def test_independent_steps_start_early():
    steps = tuple(Step(s, "o1", 2, ("r1", "r2"), 1) for s in "abcd")
    inst = SchedInstance(steps, ("r1", "r2"), {"o1": 50}, e_max=10)
    sched = sched_build(list("abcd"), {}, inst)
    assert [sched.entries[s][:1] for s in "abcd"] == [(0.0,), (0.0,), (2.0,), (2.0,)]
    assert [sched.entries[s][2] for s in "abcd"] == ["r1", "r2", "r1", "r2"]


def test_no_eligible_resource():
    inst = SchedInstance((Step("a", "o1", 1, ("r9",)),), ("r1",), {"o1": 5}, e_max=1)
    with pytest.raises(InstanceError):
        sched_build(["a"], {}, inst)


def test_cycle_rejected():
    with pytest.raises(InstanceError):
        SchedInstance((Step("a", "o", 1, ("r",), 0, ("b",)), Step("b", "o", 1, ("r",), 0, ("a",))),
                      ("r",), {"o": 1}, 1)


def test_peak_rectangle():
    inst = SchedInstance((Step("a", "o1", 5, ("r1",), 12),), ("r1",), {"o1": 100}, e_max=10)
    crit = sched_criteria(sched_build(["a"], {}, inst), inst)
    assert crit["peak_area"] == 10 and crit["peak_count"] == 1 and crit["peak_max"] == 2


def two_peaks(second_duration):
    steps = (Step("a", "o1", 5, ("r1",), 12), Step("b", "o1", second_duration, ("r1",), 12, (), True))
    inst = SchedInstance(steps, ("r1",), {"o1": 100}, e_max=10)
    return sched_criteria(sched_build(["a", "b"], {"b": 5}, inst), inst)


def test_shortened_peak():
    full, short = two_peaks(5), two_peaks(3)
    assert full["peak_count"] == short["peak_count"] == 2
    assert full["peak_max"] == short["peak_max"] == 2
    assert short["peak_area"] < full["peak_area"]


def test_adjacent_overlimit_segments_are_one_peak():
    steps = (Step("a", "o", 4, ("r1",), 11), Step("b", "o", 4, ("r2",), 3, (), True))
    inst = SchedInstance(steps, ("r1", "r2"), {"o": 100}, e_max=10)
    sched = sched_build(["a", "b"], {"b": 2}, inst)
    assert peak_measures(sched, 10) == (1, 4, 1 * 2 + 4 * 2)


def test_waiting_time_counts_delay_of_late_order():
    steps = (Step("a", "o1", 5, ("r1",)), Step("b", "o1", 1, ("r1",), 0, ("a",), True))
    inst = SchedInstance(steps, ("r1",), {"o1": 0}, e_max=10)
    crit = sched_criteria(sched_build(["a", "b"], {"b": 4}, inst), inst)
    assert crit["waiting_time"] == 4
    on_time = SchedInstance(steps, ("r1",), {"o1": 100}, e_max=10)
    s = sched_build(["a", "b"], {"b": 4}, on_time)
    assert sched_criteria(s, on_time)["waiting_time"] == 0
    assert sched_criteria(s, on_time, ontime_weight=0.5)["waiting_time"] == 2


def test_tardiness():
    steps = (Step("a", "o1", 5, ("r1",)), Step("b", "o2", 5, ("r1",)))
    inst = SchedInstance(steps, ("r1",), {"o1": 4, "o2": 20}, e_max=10)
    assert sched_criteria(sched_build(["a", "b"], {}, inst), inst)["deadline_compliance"] == 1


@pytest.mark.parametrize("encoding", ["swap", "sequence"])
@pytest.mark.parametrize("repair", ["phenotypic", "genotypic"])
def test_random_schedules_valid(encoding, repair):
    inst = SchedInstance.random(20, 3, 2, seed=4)
    p = SchedProblem(inst, encoding=encoding, repair_mode=repair)
    rng = random.Random(2)
    for _ in range(150):
        c = p.random_chromosome(rng)
        ev = p.evaluate(c)
        assert schedule_problems(ev.phenotype, inst) == []
        if repair == "phenotypic":
            assert ev.chromosome == c
        elif encoding == "sequence":
            assert sorted(ev.chromosome.genes, key=repr) == sorted(c.genes, key=repr)


def test_variants_same_order():
    inst = SchedInstance.random(12, 2, 2, seed=1)
    a = SchedProblem(inst, variant="fixed_step_delays")
    rng = random.Random(3)
    for _ in range(200):
        c = a.random_chromosome(rng)
        assert sched_decode(c, inst, "fixed_step_delays")[0] == sched_decode(c, inst, "reordered_delays")[0]


def test_json_and_csv(tmp_path):
    inst = SchedInstance.random(8, 2, 2, seed=9)
    again = SchedInstance.from_dict(inst.to_dict())
    assert again.steps == inst.steps and again.deadlines == inst.deadlines
    sched = SchedProblem(inst).evaluate(SchedProblem(inst).random_chromosome(random.Random(1))).phenotype
    sched.to_csv(tmp_path / "s.csv")
    sched.load_profile_csv(tmp_path / "l.csv")
    rows = (tmp_path / "s.csv").read_text().splitlines()
    assert rows[0] == "step,start,end,resource" and len(rows) == 9

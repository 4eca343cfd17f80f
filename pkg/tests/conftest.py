import random

import pytest

from ringevo.genome import Chromosome, Gene, LengthPolicy, permutation_registry


def letters(s: str) -> Chromosome:
    return Chromosome(tuple(Gene(c) for c in s), LengthPolicy.fixed(len(s)))


def ids(chrom) -> str:
    return "".join(str(g.type_id) for g in chrom.genes)


@pytest.fixture
def rng():
    return random.Random(12345)


@pytest.fixture
def abcde():
    return letters("abcde")


@pytest.fixture
def perm5():
    return permutation_registry(range(1, 6))


# acceptance reporting: one PASS/FAIL line per criterion after the run
_CRITERIA: dict[int, list] = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(n, title): acceptance criterion number and title")


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    mark = item.get_closest_marker("criterion")
    if mark is None or (rep.when != "call" and not rep.failed):
        return
    n, title = mark.args
    entry = _CRITERIA.setdefault(n, [title, True])
    entry[1] = entry[1] and rep.passed


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    terminalreporter.write_sep("=", "acceptance criteria")
    for n in sorted(_CRITERIA):
        title, ok = _CRITERIA[n]
        terminalreporter.write_line(f"criterion {n:2d} {'PASS' if ok else 'FAIL'}  {title}")

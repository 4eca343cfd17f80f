"""Summary statistics, t-based confidence intervals and Welch's t-test."""

from __future__ import annotations

import math
import statistics
from dataclasses import dataclass
from typing import Sequence

from scipy import stats as sps

from ..errors import InsufficientData


def _check(samples, name="samples"):
    xs = [float(v) for v in samples]
    if len(xs) < 2:
        raise InsufficientData(f"{name}: need at least 2 values, got {len(xs)}")
    return xs


def t_quantile(p: float, df: float) -> float:
    return float(sps.t.ppf(p, df))


def confidence_interval(samples: Sequence[float], level: float = 0.95) -> tuple[float, float]:
    """Two-sided t interval for the mean."""
    if not 0.0 < level < 1.0:
        raise ValueError("level must lie in (0, 1)")
    xs = _check(samples)
    n = len(xs)
    mean = statistics.fmean(xs)
    half = t_quantile((1 + level) / 2, n - 1) * statistics.stdev(xs) / math.sqrt(n)
    return mean - half, mean + half


@dataclass(frozen=True)
class TTestResult:
    t: float
    df: float
    significant: bool
    critical: float
    alpha: float = 0.05


def two_sample_t_test(a: Sequence[float], b: Sequence[float], alpha: float = 0.05) -> TTestResult:
    """Welch's unequal-variance test, two-sided at level ``alpha``."""
    xa, xb = _check(a, "a"), _check(b, "b")
    na, nb = len(xa), len(xb)
    va, vb = statistics.variance(xa) / na, statistics.variance(xb) / nb
    diff = statistics.fmean(xa) - statistics.fmean(xb)
    se2 = va + vb
    if se2 == 0.0:
        df = float(na + nb - 2)
        t = 0.0 if diff == 0.0 else math.copysign(math.inf, diff)
    else:
        t = diff / math.sqrt(se2)
        df = se2 ** 2 / (va ** 2 / (na - 1) + vb ** 2 / (nb - 1))
    crit = t_quantile(1 - alpha / 2, df)
    return TTestResult(t, df, abs(t) > crit, crit, alpha)


def coefficient_of_variation(samples: Sequence[float]) -> float:
    xs = [float(v) for v in samples]
    if len(xs) < 2:
        return 0.0
    mean = statistics.fmean(xs)
    return statistics.stdev(xs) / mean if mean else 0.0


@dataclass(frozen=True)
class StatsSummary:
    n: int
    mean: float
    median: float
    stdev: float
    min: float
    max: float
    success_rate: float | None
    level: float
    ci_low: float
    ci_high: float

    def row(self) -> dict:
        return {k: getattr(self, k) for k in self.__dataclass_fields__}


def summarize(values: Sequence[float], successes: Sequence[bool] | None = None,
              level: float = 0.95) -> StatsSummary:
    xs = [float(v) for v in values]
    if not xs:
        raise InsufficientData("no values to summarize")
    mean = statistics.fmean(xs)
    if len(xs) >= 2:
        lo, hi = confidence_interval(xs, level)
        sd = statistics.stdev(xs)
    else:
        lo = hi = mean
        sd = 0.0
    rate = None if successes is None else sum(map(bool, successes)) / len(successes)
    return StatsSummary(len(xs), mean, statistics.median(xs), sd, min(xs), max(xs), rate, level, lo, hi)

"""Experiment harness: campaigns, statistics, tuning and the CLI."""

from .campaign import (Campaign, ComparisonReport, MuTrial, MuTuneReport, RunResult, TuneConfig, compare,
                       multi_run, tune_mu)
from .config import ArchiveConfig, RunConfig
from .stats import StatsSummary, confidence_interval, summarize, two_sample_t_test

__all__ = ["ArchiveConfig", "Campaign", "ComparisonReport", "MuTrial", "MuTuneReport", "RunConfig",
           "RunResult", "StatsSummary", "TuneConfig", "compare", "confidence_interval", "multi_run",
           "summarize", "tune_mu", "two_sample_t_test"]

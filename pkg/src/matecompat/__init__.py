"""Evolutionary mate-choice model and mating-preference compatibility analytics."""

from .metrics import Histogram, SummaryStats, build_histogram, compatibility, summary_stats
from .model import FEMALE, MALE, Genotype, Population, SimParams

__all__ = [
    "FEMALE",
    "MALE",
    "Genotype",
    "Histogram",
    "Population",
    "SimParams",
    "SummaryStats",
    "build_histogram",
    "compatibility",
    "summary_stats",
]

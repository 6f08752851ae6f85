"""Single realizations and seed-indexed ensembles of the mating model."""

from __future__ import annotations

import csv
import io
import json
import statistics
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Callable, NamedTuple, Sequence

import numpy as np

from .metrics import build_histogram, compatibility, realized_preferred_differences
from .model import GenerationResult, Population, SimParams, advance_generation, genotype_variety, init_population

CONVERGED = "converged"
EXTINCT = "extinct"
MAX_GENERATIONS = "max_generations_reached"

TRACE_COLUMNS = ("generation", "rho", "variety", "n_females", "n_males", "matings")


class GenerationRecord(NamedTuple):
    generation: int
    rho: float
    variety: int
    n_females: int
    n_males: int
    matings: int


@dataclass
class RealizationTrace:
    seed: int
    records: list[GenerationRecord] = field(default_factory=list)
    status: str = MAX_GENERATIONS
    terminal_generation: int = 0
    # variety of the two genders at the last recorded generation
    final_female_genotypes: int = 0
    final_male_genotypes: int = 0

    @property
    def final_rho(self) -> float:
        return self.records[-1].rho if self.records else 0.0

    def first_generation_reaching(self, threshold: float) -> int | None:
        for rec in self.records:
            if rec.rho >= threshold:
                return rec.generation
        return None

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(TRACE_COLUMNS)
        for r in self.records:
            w.writerow([r.generation, f"{r.rho:.6f}", r.variety, r.n_females, r.n_males, r.matings])
        return buf.getvalue()


@dataclass
class EnsembleSummary:
    n_realizations: int
    extinction_fraction: float
    convergence_fraction: float
    max_generations_fraction: float
    median_generations_to_convergence: float | None
    convergence_threshold: float
    seeds: list[int]
    statuses: dict[str, int]

    def to_json(self) -> str:
        return json.dumps(self.__dict__, indent=2, sort_keys=True)


def run_realization(
    params: SimParams,
    convergence_threshold: float = 0.999,
    bin_width: float = 1.0,
    observer: Callable[[Population, GenerationResult], None] | None = None,
) -> RealizationTrace:
    """Iterate generations until convergence, extinction or the generation cap.

    The record for generation ``t`` describes the population alive during
    ``t`` and the matings that happened in it. Convergence is tested before
    extinction, so a generation that reaches the threshold ends the run as
    converged even if its offspring would have died out. ``observer`` sees
    every parent population together with its generation result.
    """
    if not 0 < convergence_threshold <= 1:
        raise ValueError(f"convergence_threshold must lie in (0, 1], got {convergence_threshold}")
    rng = np.random.default_rng(params.seed)
    pop = init_population(params, rng)
    trace = RealizationTrace(seed=params.seed)

    for t in range(params.max_generations):
        result = advance_generation(pop, params, rng)
        if observer is not None:
            observer(pop, result)
        d_f, d_m = realized_preferred_differences(result.mating_log, pop)
        rho = compatibility(build_histogram(d_f, bin_width), build_histogram(d_m, bin_width))
        trace.records.append(
            GenerationRecord(t, rho, genotype_variety(pop), pop.n_females, pop.n_males, len(result.mating_log))
        )
        trace.terminal_generation = t
        trace.final_female_genotypes = len(np.unique(pop.females, axis=0))
        trace.final_male_genotypes = len(np.unique(pop.males, axis=0))
        if rho >= convergence_threshold:
            trace.status = CONVERGED
            break
        if result.extinct:
            trace.status = EXTINCT
            break
        pop = result.children
    else:
        trace.status = MAX_GENERATIONS
    return trace


def _run_one(args: tuple[SimParams, float, float]) -> RealizationTrace:
    params, threshold, width = args
    return run_realization(params, threshold, width)


def seeds_from_base(base_seed: int, count: int) -> list[int]:
    return [base_seed + i for i in range(count)]


def run_ensemble(
    params: SimParams,
    seeds: Sequence[int],
    parallelism: int = 1,
    convergence_threshold: float = 0.999,
    bin_width: float = 1.0,
) -> tuple[list[RealizationTrace], EnsembleSummary]:
    """One realization per seed; results come back ordered by seed.

    ``params.seed`` is ignored in favour of each entry of ``seeds``.
    """
    seeds = [int(s) for s in seeds]
    if len(set(seeds)) != len(seeds):
        dupes = sorted({s for s in seeds if seeds.count(s) > 1})
        raise ValueError(f"duplicate seeds: {dupes}")
    if parallelism < 1:
        raise ValueError(f"parallelism must be >= 1, got {parallelism}")
    jobs = [(replace(params, seed=s), convergence_threshold, bin_width) for s in sorted(seeds)]

    if parallelism == 1 or len(jobs) <= 1:
        traces = [_run_one(j) for j in jobs]
    else:
        with ProcessPoolExecutor(max_workers=parallelism) as pool:
            traces = list(pool.map(_run_one, jobs))
    return traces, summarize(traces, convergence_threshold)


def summarize(traces: Sequence[RealizationTrace], convergence_threshold: float) -> EnsembleSummary:
    n = len(traces)
    statuses = {CONVERGED: 0, EXTINCT: 0, MAX_GENERATIONS: 0}
    for t in traces:
        statuses[t.status] += 1
    conv_gens = [t.terminal_generation for t in traces if t.status == CONVERGED]
    return EnsembleSummary(
        n_realizations=n,
        extinction_fraction=statuses[EXTINCT] / n if n else 0.0,
        convergence_fraction=statuses[CONVERGED] / n if n else 0.0,
        max_generations_fraction=statuses[MAX_GENERATIONS] / n if n else 0.0,
        median_generations_to_convergence=float(statistics.median(conv_gens)) if conv_gens else None,
        convergence_threshold=convergence_threshold,
        seeds=[t.seed for t in traces],
        statuses=statuses,
    )


def write_ensemble(traces: Sequence[RealizationTrace], summary: EnsembleSummary, out_dir: Path) -> list[Path]:
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    paths = []
    for t in traces:
        p = out_dir / f"trace_seed{t.seed}.csv"
        p.write_text(t.to_csv())
        paths.append(p)
    p = out_dir / "summary.json"
    p.write_text(summary.to_json() + "\n")
    paths.append(p)
    return paths

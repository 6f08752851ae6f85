"""Exit criteria for the package, one test per criterion.

Each test records a PASS/FAIL line, collected in the pytest terminal summary
under "acceptance criteria".
"""

import json

import numpy as np
import pytest

from matecompat.analytics import matings_to_csv
from matecompat.cli import main
from matecompat.metrics import Histogram, build_histogram, compatibility
from matecompat.model import Genotype, SimParams, agrees
from matecompat.runner import CONVERGED, run_realization
from matecompat.synthetic import SyntheticSpec, generate_synthetic


def brute_rho(f: dict, m: dict) -> float:
    xs = set(f) | {-k for k in m}
    return sum(min(f.get(x, 0.0), m.get(-x, 0.0)) for x in xs)


def test_c1_worked_example_rho(acceptance):
    f = Histogram(1.0, {-1: 0.30, 0: 0.50, 1: 0.20}, 0)
    m = Histogram(1.0, {-1: 0.10, 0: 0.60, 1: 0.30}, 0)
    rho = compatibility(f, m)
    assert acceptance("C1 worked example", abs(rho - 0.90) <= 1e-12, f"rho={rho!r} (target 0.90 +- 1e-12)")


def test_c2_agreement_example(acceptance):
    male, female = Genotype(1, 5, 2, 5), Genotype(0, 2, 6, 8)
    ok = agrees(male, female) is True and agrees(female, male) is False
    assert acceptance("C2 agreement example", ok, f"male->female={agrees(male, female)} female->male={agrees(female, male)}")


def test_c3_fig3_qualitative(tmp_path, acceptance):
    out = tmp_path / "fig3"
    rc = main(["simulate", "--n", "100", "--r", "9", "--m", "20000", "--seeds", "1..50",
               "--threshold", "0.99", "--max-generations", "200", "--out", str(out)])
    assert rc == 0
    reached = 0
    for seed in range(1, 51):
        rows = (out / f"trace_seed{seed}.csv").read_text().splitlines()[1:]
        if any(float(r.split(",")[1]) >= 0.99 and int(r.split(",")[0]) < 200 for r in rows):
            reached += 1
    summary = json.loads((out / "summary.json").read_text())
    frac_conv = reached / 50
    frac_ext = summary["extinction_fraction"]
    ok = frac_conv >= 0.60 and frac_ext < 0.5
    assert acceptance(
        "C3 Fig 3 qualitative",
        ok,
        f"reached rho>=0.99 within 200 gens: {frac_conv:.2f} (need >= 0.60); "
        f"extinct: {frac_ext:.2f} (need < 0.50); median gens {summary['median_generations_to_convergence']}",
    )


class _Checker:
    def __init__(self, n: int):
        self.n = n
        self.violations: list[str] = []
        self.generations = 0

    def __call__(self, pop, result):
        self.generations += 1
        kids = result.children
        for label, group in (("parent", pop), ("child", kids)):
            if len(group.females) and not np.all(group.females[:, 0] <= group.females[:, 1]):
                self.violations.append(f"{label} female rule at gen {pop.generation_index}")
            if len(group.males) and not np.all(group.males[:, 0] >= group.males[:, 2]):
                self.violations.append(f"{label} male rule at gen {pop.generation_index}")
        if not {tuple(x) for x in kids.females} <= {tuple(x) for x in pop.females}:
            self.violations.append(f"female closure at gen {pop.generation_index}")
        if not {tuple(x) for x in kids.males} <= {tuple(x) for x in pop.males}:
            self.violations.append(f"male closure at gen {pop.generation_index}")
        if kids.n_females > self.n or kids.n_males > self.n:
            self.violations.append(f"cap at gen {pop.generation_index}")
        parent_variety = len({tuple(x) for x in pop.females}) + len({tuple(x) for x in pop.males})
        if result.variety > parent_variety:
            self.violations.append(f"variety grew at gen {pop.generation_index}")


@pytest.fixture(scope="module")
def full_runs():
    """20 seeds run to termination with default settings, every generation checked."""
    params = SimParams(n=100, r=9, m=20_000, max_generations=1_000)
    checker = _Checker(params.n)
    traces = [run_realization(SimParams(**{**params.__dict__, "seed": s}), observer=checker) for s in range(101, 121)]
    return traces, checker


def test_c4_property_suite(full_runs, acceptance):
    traces, checker = full_runs
    for t in traces:
        v = [r.variety for r in t.records]
        if any(b > a for a, b in zip(v, v[1:])):
            checker.violations.append(f"trace variety grew for seed {t.seed}")
    ok = not checker.violations and len(traces) >= 20
    assert acceptance(
        "C4 model invariants",
        ok,
        f"{len(traces)} seeds, {checker.generations} generations checked, {len(checker.violations)} violations"
        + (f" first: {checker.violations[0]}" if checker.violations else ""),
    )


def _random_count_hist(rng):
    w = float(rng.choice([0.5, 1.0, 2.0]))
    vals = rng.normal(rng.uniform(-5, 5), rng.uniform(0.2, 6), size=int(rng.integers(1, 300)))
    if rng.random() < 0.2:
        vals = np.round(vals * 2) / 2 * w  # land on bin edges
    return w, vals


def test_c5_metric_properties(acceptance):
    rng = np.random.default_rng(20240501)
    failures = []
    for i in range(1000):
        w, a = _random_count_hist(rng)
        _, b = _random_count_hist(rng)
        f, m = build_histogram(a, w), build_histogram(b, w)
        rho = compatibility(f, m)
        if not 0 <= rho <= 1:
            failures.append(f"bounds #{i}")
        if abs(rho - compatibility(m, f)) > 1e-12:
            failures.append(f"symmetry #{i}")
        if compatibility(f, f.mirror()) != 1.0:
            failures.append(f"mirror #{i}")
        if abs(rho - brute_rho(f.bins, m.bins)) > 1e-12:
            failures.append(f"oracle #{i}")
        # same checks on raw float masses without counts
        kf = rng.integers(-10, 11, size=rng.integers(1, 20))
        km = rng.integers(-10, 11, size=rng.integers(1, 20))
        pf = {int(k): float(v) for k, v in zip(kf, rng.dirichlet(np.ones(len(kf))))}
        pm = {int(k): float(v) for k, v in zip(km, rng.dirichlet(np.ones(len(km))))}
        hf, hm = Histogram(1.0, pf, 0), Histogram(1.0, pm, 0)
        r2 = compatibility(hf, hm)
        if not 0 <= r2 <= 1 + 1e-12 or abs(r2 - compatibility(hm, hf)) > 1e-12 or abs(r2 - brute_rho(pf, pm)) > 1e-12:
            failures.append(f"float masses #{i}")
    assert acceptance("C5 metric properties", not failures, f"2000 pairs, {len(failures)} failures {failures[:3]}")


def test_c6_single_genotype_endgame(full_runs, acceptance):
    traces, _ = full_runs
    eligible = [
        t for t in traces
        if t.status == CONVERGED and t.final_female_genotypes == 1 and t.final_male_genotypes == 1
        and t.records[-1].matings >= 1
    ]
    bad = [t.seed for t in eligible if t.final_rho != 1.0]
    ok = bool(eligible) and not bad
    assert acceptance("C6 single-genotype endgame", ok, f"{len(eligible)} eligible runs, final rho != 1 for {bad}")


def test_c7_pipeline_oracle(tmp_path, acceptance):
    spec = SyntheticSpec(mu_f=2.74, sigma_f=5.23, mu_m=-2.90, sigma_m=5.06)
    ds = generate_synthetic(spec, 20_000, np.random.default_rng(7))
    (tmp_path / "profiles.csv").write_text(ds.profiles.to_csv())
    (tmp_path / "matings.csv").write_text(matings_to_csv(ds.edges))
    rc = main(["analyze", "--profiles", str(tmp_path / "profiles.csv"), "--matings", str(tmp_path / "matings.csv"),
               "--properties", "age", "--bin-width", "age=1", "--out", str(tmp_path / "report")])
    assert rc == 0
    header, line = (tmp_path / "report" / "report.csv").read_text().splitlines()
    row = dict(zip(header.split(","), line.split(",")))
    mu_f, mu_m = float(row["mu_f"]), float(row["mu_m"])
    s_f, s_m = float(row["sigma_f"]), float(row["sigma_m"])
    ok = (
        int(row["n_f"]) == 10_000 and int(row["n_m"]) == 10_000
        and abs(mu_f - 2.74) <= 0.2 and abs(mu_m + 2.90) <= 0.2
        and abs(s_f - 5.23) <= 0.2 and abs(s_m - 5.06) <= 0.2
        and mu_f > 0 > mu_m
    )
    assert acceptance(
        "C7 pipeline oracle",
        ok,
        f"mu_f={mu_f:.3f} mu_m={mu_m:.3f} sigma_f={s_f:.3f} sigma_m={s_m:.3f} rho={row['rho']} (tol 0.2)",
    )


def test_c8_parallel_determinism(tmp_path, acceptance):
    base = ["simulate", "--n", "100", "--r", "9", "--m", "20000", "--seeds", "1..8", "--max-generations", "40"]
    assert main(base + ["--parallelism", "1", "--out", str(tmp_path / "p1")]) == 0
    assert main(base + ["--parallelism", "8", "--out", str(tmp_path / "p8")]) == 0
    names = sorted(p.name for p in (tmp_path / "p1").iterdir())
    same = names == sorted(p.name for p in (tmp_path / "p8").iterdir()) and all(
        (tmp_path / "p1" / n).read_bytes() == (tmp_path / "p8" / n).read_bytes() for n in names
    )
    assert acceptance("C8 parallel determinism", same and len(names) == 9, f"{len(names)} files compared")

"""Evolutionary mate-choice model.

Agents carry a single integer property and an acceptance range over the
opposite gender's property. Females start out preferring partners with
higher values than their own and males prefer lower ones. Random
female/male meetings produce a child only when both sides accept each
other; the child copies the genotype of the same-gender parent. Nothing
ever mutates, so genotype variety can only shrink.

Populations are stored as ``(n, 3)`` integer arrays with columns
``(p, p_min, p_max)`` so a whole generation of meetings can be evaluated
with a handful of vectorized operations.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, NamedTuple

import numpy as np

FEMALE = 0
MALE = 1

# column layout of the per-gender genotype arrays
P, P_MIN, P_MAX = 0, 1, 2


class ExtinctionError(RuntimeError):
    """Raised when a meeting is requested but one gender has no members."""


class Genotype(NamedTuple):
    gender: int
    p: int
    p_min: int
    p_max: int


@dataclass(frozen=True)
class SimParams:
    """Parameters of one realization.

    ``n`` caps each gender, ``r`` is the top of the value range ``1..r`` and
    ``m`` is the number of meetings making up one generation.
    """

    n: int = 100
    r: int = 9
    m: int = 20_000
    max_generations: int = 1_000
    seed: int = 0

    def __post_init__(self) -> None:
        if self.n < 1:
            raise ValueError(f"n must be >= 1, got {self.n}")
        if self.r < 1:
            raise ValueError(f"r must be >= 1, got {self.r}")
        if self.m < 0:
            raise ValueError(f"m must be >= 0, got {self.m}")
        if self.max_generations < 1:
            raise ValueError(f"max_generations must be >= 1, got {self.max_generations}")
        if self.seed < 0:
            raise ValueError(f"seed must be non-negative, got {self.seed}")


def _empty() -> np.ndarray:
    return np.empty((0, 3), dtype=np.int64)


@dataclass
class Population:
    females: np.ndarray = field(default_factory=_empty)
    males: np.ndarray = field(default_factory=_empty)
    generation_index: int = 0

    @classmethod
    def from_genotypes(cls, genotypes: Iterable[Genotype], generation_index: int = 0) -> Population:
        fem, mal = [], []
        for g in genotypes:
            (fem if g.gender == FEMALE else mal).append((g.p, g.p_min, g.p_max))
        return cls(
            np.array(fem, dtype=np.int64).reshape(-1, 3),
            np.array(mal, dtype=np.int64).reshape(-1, 3),
            generation_index,
        )

    def female_genotypes(self) -> list[Genotype]:
        return [Genotype(FEMALE, *map(int, row)) for row in self.females]

    def male_genotypes(self) -> list[Genotype]:
        return [Genotype(MALE, *map(int, row)) for row in self.males]

    def genotypes(self) -> list[Genotype]:
        return self.female_genotypes() + self.male_genotypes()

    @property
    def n_females(self) -> int:
        return len(self.females)

    @property
    def n_males(self) -> int:
        return len(self.males)

    @property
    def extinct(self) -> bool:
        return self.n_females == 0 or self.n_males == 0


@dataclass
class GenerationResult:
    mating_log: np.ndarray  # (k, 2) rows of (female index, male index)
    children: Population
    variety: int
    extinct: bool


def genotype_from_draws(gender: int, draws: Iterable[int]) -> Genotype:
    """Arrange three draws into a genotype.

    The smallest draw becomes a female's own value with the other two as
    her acceptance range; a male takes the largest value and accepts the
    two smaller ones.
    """
    p1, p2, p3 = sorted(int(d) for d in draws)
    if gender == FEMALE:
        return Genotype(FEMALE, p1, p2, p3)
    if gender == MALE:
        return Genotype(MALE, p3, p1, p2)
    raise ValueError(f"gender must be 0 or 1, got {gender!r}")


def init_agent(gender: int, r: int, rng: np.random.Generator) -> Genotype:
    if r < 1:
        raise ValueError(f"value range r must be >= 1, got {r}")
    return genotype_from_draws(gender, rng.integers(1, r + 1, size=3))


def init_population(params: SimParams, rng: np.random.Generator) -> Population:
    """First generation: ``n`` females, then ``n`` males, from the same stream."""
    agents = [init_agent(FEMALE, params.r, rng) for _ in range(params.n)]
    agents += [init_agent(MALE, params.r, rng) for _ in range(params.n)]
    return Population.from_genotypes(agents)


def agrees(i: Genotype, j: Genotype) -> bool:
    """True if agent ``i`` accepts ``j`` as a mate."""
    if i.gender == j.gender:
        raise ValueError(f"agreement is only defined across genders: {i} vs {j}")
    return i.p_min <= j.p <= i.p_max


def mutual_agreement(f: Genotype, m: Genotype) -> bool:
    if f.gender != FEMALE or m.gender != MALE:
        raise ValueError(f"expected (female, male), got {f} and {m}")
    return agrees(f, m) and agrees(m, f)


def meet(
    pop: Population,
    rng: np.random.Generator,
    mating_log: list[tuple[int, int]] | None = None,
) -> Genotype | None:
    """One random meeting.

    Draws a female index, a male index and, only if the pair agrees, a
    child-gender uniform. Returns the child or ``None``.
    """
    if pop.extinct:
        raise ExtinctionError(
            f"no meeting possible with {pop.n_females} females and {pop.n_males} males"
        )
    fi = int(rng.integers(pop.n_females))
    mi = int(rng.integers(pop.n_males))
    f = Genotype(FEMALE, *map(int, pop.females[fi]))
    m = Genotype(MALE, *map(int, pop.males[mi]))
    if not mutual_agreement(f, m):
        return None
    if mating_log is not None:
        mating_log.append((fi, mi))
    return f if rng.random() < 0.5 else m


def _cull(group: np.ndarray, cap: int, rng: np.random.Generator) -> np.ndarray:
    if len(group) <= cap:
        return group
    keep = np.sort(rng.choice(len(group), size=cap, replace=False))
    return group[keep]


def advance_generation(pop: Population, params: SimParams, rng: np.random.Generator) -> GenerationResult:
    """Run ``params.m`` meetings and assemble the culled next generation.

    Draw order: all ``m`` female indices, all ``m`` male indices, one
    child-gender uniform per successful meeting in meeting order, then the
    female cull followed by the male cull.
    """
    if pop.extinct:
        raise ExtinctionError("cannot advance an extinct population")
    fi = rng.integers(0, pop.n_females, size=params.m)
    mi = rng.integers(0, pop.n_males, size=params.m)
    fem = pop.females[fi]
    mal = pop.males[mi]
    ok = (
        (fem[:, P_MIN] <= mal[:, P])
        & (mal[:, P] <= fem[:, P_MAX])
        & (mal[:, P_MIN] <= fem[:, P])
        & (fem[:, P] <= mal[:, P_MAX])
    )
    fi, mi = fi[ok], mi[ok]
    girl = rng.random(len(fi)) < 0.5
    daughters = _cull(pop.females[fi[girl]], params.n, rng)
    sons = _cull(pop.males[mi[~girl]], params.n, rng)
    children = Population(daughters, sons, pop.generation_index + 1)
    return GenerationResult(
        mating_log=np.column_stack([fi, mi]),
        children=children,
        variety=genotype_variety(children),
        extinct=children.extinct,
    )


def genotype_variety(pop: Population) -> int:
    """Number of distinct genotypes alive, counting both genders."""
    # genders never share a tuple, so per-gender counts simply add up
    total = 0
    for group in (pop.females, pop.males):
        if len(group):
            total += len(np.unique(group, axis=0))
    return total

"""Synthetic profile/mating datasets with known preferred differences.

Any mating graph obeys ``sum_i deg_i * delta_i = 0``: every partner value is
counted once from each side of its edge. Independent draws for the two
genders do not satisfy this, so the generator

1. draws a target difference for every user,
2. assigns each user a degree and swaps degrees within a gender until the
   weighted sum is (almost) zero, projecting away the small remainder,
3. realizes the degrees as a single bipartite tree, and
4. solves the tree for property values that reproduce the targets.

Targets therefore keep their drawn values up to a shift of order
``1e-4`` at most; degree ends up correlated with the difference, much like
in real data where the two gender means are not exact mirrors.
Property values are only meaningful up to a common offset and may drift
far from a natural scale; only differences are used downstream.
"""

from __future__ import annotations

import math
from collections import deque
from dataclasses import dataclass

import numpy as np

from .analytics import DEFAULT_PROPERTIES, MatingEdge, Profile, ProfileTable
from .model import FEMALE, MALE


@dataclass(frozen=True)
class SyntheticSpec:
    """Per-gender normal distributions of the preferred difference.

    With ``mirror=True`` each man's target is the negation of one woman's,
    so the male parameters are ignored and both genders have equal size.
    """

    mu_f: float
    sigma_f: float
    mu_m: float = 0.0
    sigma_m: float = 0.0
    mirror: bool = False

    def __post_init__(self) -> None:
        for name in ("mu_f", "sigma_f", "mu_m", "sigma_m"):
            if not math.isfinite(getattr(self, name)):
                raise ValueError(f"{name} must be finite")
        if self.sigma_f < 0 or self.sigma_m < 0:
            raise ValueError("standard deviations must be non-negative")


@dataclass
class SyntheticDataset:
    profiles: ProfileTable
    edges: list[MatingEdge]
    prop: str
    ground_truth: dict[str, float]  # realized difference per user
    targets: dict[str, float]  # balanced targets the values were solved for


def _balance_degrees(t: np.ndarray, d: np.ndarray, gender: np.ndarray, rng: np.random.Generator) -> None:
    """Swap degrees within a gender to push ``sum(d * t)`` towards zero, in place."""
    groups = [np.flatnonzero(gender == g) for g in (FEMALE, MALE)]
    groups = [g for g in groups if len(g) > 1]
    if not groups:
        return
    s = float(np.dot(d, t))
    misses = 0
    while abs(s) > 1e-9 and misses < 20:
        g = groups[rng.integers(len(groups))]
        a = rng.choice(g, size=512)
        b = rng.choice(g, size=512)
        # giving a the degree of b and vice versa changes s by:
        gain = (d[b] - d[a]) * (t[a] - t[b])
        ok = (np.sign(gain) == -np.sign(s)) & (np.abs(gain) <= abs(s))
        if not ok.any():
            misses += 1
            continue
        k = np.flatnonzero(ok)[np.argmax(np.abs(gain[ok]))]
        d[a[k]], d[b[k]] = d[b[k]], d[a[k]]
        s = float(np.dot(d, t))
        misses = 0


def _build_tree(d: np.ndarray, gender: np.ndarray) -> tuple[list[int], np.ndarray]:
    """Bipartite tree with the given degrees.

    Nodes are attached breadth first, highest degree first within each
    gender, which cannot stall when each gender's degrees sum to ``V - 1``.
    Returns the BFS order and the parent of every node (root: -1).
    """
    fem = sorted(np.flatnonzero(gender == FEMALE), key=lambda i: -d[i])
    mal = sorted(np.flatnonzero(gender == MALE), key=lambda i: -d[i])
    root = fem[0]
    pools = {FEMALE: deque(fem[1:]), MALE: deque(mal)}
    parent = np.full(len(d), -1, dtype=np.int64)
    order = [root]
    queue = deque([(root, int(d[root]))])
    while queue:
        node, slots = queue.popleft()
        pool = pools[1 - gender[node]]
        for _ in range(slots):
            child = pool.popleft()
            parent[child] = node
            order.append(child)
            queue.append((child, int(d[child]) - 1))
    assert not pools[FEMALE] and not pools[MALE], "degree sequence is not a bipartite tree"
    return order, parent


def _solve_values(order: list[int], parent: np.ndarray, d: np.ndarray, t: np.ndarray, base: float) -> np.ndarray:
    # every non-root v satisfies p[v] = p[parent] + c[v], c[v] = sum(c[children]) - d[v] t[v]
    c = -d * t
    for v in reversed(order[1:]):
        c[parent[v]] += c[v]
    p = np.empty(len(d))
    p[order[0]] = base
    for v in order[1:]:
        p[v] = p[parent[v]] + c[v]
    return p


def generate_synthetic(
    spec: SyntheticSpec,
    n_users: int,
    rng: np.random.Generator,
    prop: str = "age",
    base: float = 40.0,
) -> SyntheticDataset:
    """Generate ``n_users`` profiles (half female, rounded down) and a mating tree."""
    n_f = n_users // 2
    n_m = n_users - n_f
    if n_f < 1 or n_m < 1:
        raise ValueError(f"need at least one user of each gender, got n_users={n_users}")
    if spec.mirror and n_f != n_m:
        raise ValueError("mirrored spec needs an even n_users")

    t_f = rng.normal(spec.mu_f, spec.sigma_f, n_f)
    t_m = -t_f if spec.mirror else rng.normal(spec.mu_m, spec.sigma_m, n_m)
    t = np.concatenate([t_f, t_m])
    gender = np.array([FEMALE] * n_f + [MALE] * n_m)

    # each gender's degrees sum to the tree's edge count n_f + n_m - 1
    d = np.concatenate([
        1 + rng.multinomial(n_m - 1, np.full(n_f, 1.0 / n_f)),
        1 + rng.multinomial(n_f - 1, np.full(n_m, 1.0 / n_m)),
    ]).astype(float)
    _balance_degrees(t, d, gender, rng)
    t = t - d * (np.dot(d, t) / np.dot(d, d))

    order, parent = _build_tree(d.astype(np.int64), gender)
    values = np.round(_solve_values(order, parent, d, t, base), 6)

    ids = [f"f{i:06d}" for i in range(n_f)] + [f"m{i:06d}" for i in range(n_m)]
    names = DEFAULT_PROPERTIES if prop in DEFAULT_PROPERTIES else (prop,)
    profiles = ProfileTable.from_profiles(
        (Profile(ids[i], int(gender[i]), {k: (float(values[i]) if k == prop else None) for k in names})
         for i in range(len(ids))),
        names,
    )
    edges = []
    for v in order[1:]:
        u = int(parent[v])
        f, m = (u, v) if gender[u] == FEMALE else (v, u)
        edges.append(MatingEdge(ids[f], ids[m]))

    nbrs: dict[int, list[int]] = {}
    for v in order[1:]:
        nbrs.setdefault(v, []).append(int(parent[v]))
        nbrs.setdefault(int(parent[v]), []).append(v)
    truth = {ids[i]: math.fsum(values[j] for j in nb) / len(nb) - values[i] for i, nb in nbrs.items()}
    return SyntheticDataset(profiles, edges, prop, truth, {ids[i]: float(t[i]) for i in range(len(ids))})

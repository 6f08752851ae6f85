"""Preferred-difference histograms and the reflected overlap ``rho``.

A woman who prefers a difference ``x`` can only be paired with a man who
prefers ``-x``, so compatibility compares ``f(x)`` against ``m(-x)``::

    rho = sum_x min(f(x), m(-x))
"""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable

import numpy as np

from .model import Population, P


@dataclass(frozen=True)
class Histogram:
    """Normalized histogram keyed by signed integer bin index.

    Bin ``k`` is centred on ``k * bin_width``. ``counts`` keeps the raw
    integer tallies when known so that overlap sums can be evaluated exactly.
    """

    bin_width: float
    bins: dict[int, float]
    total_count: int
    counts: dict[int, int] | None = field(default=None, compare=False, repr=False)

    @property
    def empty(self) -> bool:
        return not self.bins

    def mirror(self) -> Histogram:
        counts = None if self.counts is None else {-k: c for k, c in self.counts.items()}
        return Histogram(self.bin_width, {-k: v for k, v in self.bins.items()}, self.total_count, counts)

    def to_dict(self) -> dict:
        return {
            "bin_width": self.bin_width,
            "bins": {str(k): self.bins[k] for k in sorted(self.bins)},
            "total_count": self.total_count,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2)

    @classmethod
    def from_dict(cls, data: dict) -> Histogram:
        try:
            width = float(data["bin_width"])
            bins = {int(k): float(v) for k, v in data["bins"].items()}
            total = int(data.get("total_count", 0))
        except (KeyError, TypeError, ValueError, AttributeError) as exc:
            raise ValueError(f"malformed histogram: {exc}") from exc
        if not width > 0:
            raise ValueError(f"bin_width must be positive, got {width}")
        if any(v < 0 or not math.isfinite(v) for v in bins.values()):
            raise ValueError("histogram masses must be finite and non-negative")
        return cls(width, bins, total, _recover_counts(bins, total))

    @classmethod
    def from_json(cls, text: str) -> Histogram:
        return cls.from_dict(json.loads(text))

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["bin_center", "mass"])
        for k in sorted(self.bins):
            w.writerow([f"{k * self.bin_width:.6f}", f"{self.bins[k]:.6f}"])
        return buf.getvalue()

    @classmethod
    def from_csv(cls, text: str, bin_width: float) -> Histogram:
        """Parse ``bin_center,mass`` rows. The width is not stored in the CSV."""
        if not bin_width > 0:
            raise ValueError(f"bin_width must be positive, got {bin_width}")
        rows = list(csv.reader(io.StringIO(text)))
        if not rows or [c.strip() for c in rows[0]] != ["bin_center", "mass"]:
            raise ValueError("expected header 'bin_center,mass'")
        bins: dict[int, float] = {}
        for lineno, row in enumerate(rows[1:], start=2):
            if not row:
                continue
            try:
                center, mass = float(row[0]), float(row[1])
            except (IndexError, ValueError) as exc:
                raise ValueError(f"line {lineno}: {exc}") from exc
            bins[_round_half_away(center / bin_width)] = mass
        return cls(bin_width, bins, 0)


def _recover_counts(bins: dict[int, float], total: int) -> dict[int, int] | None:
    if total <= 0:
        return None
    counts = {k: round(v * total) for k, v in bins.items()}
    if sum(counts.values()) != total:
        return None
    if any(abs(c / total - bins[k]) > 1e-9 for k, c in counts.items()):
        return None
    return counts


def _round_half_away(q: float) -> int:
    a = abs(q)
    k = math.floor(a)
    if a - k >= 0.5:
        k += 1
    return int(k if q >= 0 else -k)


def bin_indices(values: np.ndarray, bin_width: float) -> np.ndarray:
    """Round ``values / bin_width`` half away from zero."""
    q = np.asarray(values, dtype=float) / bin_width
    a = np.abs(q)
    k = np.floor(a)
    # a - floor(a) is exact, unlike floor(a + 0.5)
    k += (a - k) >= 0.5
    return (np.sign(q) * k).astype(np.int64)


def build_histogram(values: Iterable[float], bin_width: float = 1.0) -> Histogram:
    if not bin_width > 0:
        raise ValueError(f"bin_width must be positive, got {bin_width}")
    v = np.asarray(list(values) if not isinstance(values, np.ndarray) else values, dtype=float)
    n = len(v)
    if n == 0:
        return Histogram(float(bin_width), {}, 0, {})
    idx, cnt = np.unique(bin_indices(v, bin_width), return_counts=True)
    counts = {int(k): int(c) for k, c in zip(idx, cnt)}
    return Histogram(float(bin_width), {k: c / n for k, c in counts.items()}, n, counts)


def compatibility(f: Histogram, m: Histogram) -> float:
    """Fraction of women (equivalently men) that find a mirrored partner."""
    if not math.isclose(f.bin_width, m.bin_width, rel_tol=1e-12, abs_tol=0.0):
        raise ValueError(f"bin widths differ: {f.bin_width} vs {m.bin_width}")
    if f.empty or m.empty:
        return 0.0
    if f.counts is not None and m.counts is not None and f.total_count and m.total_count:
        exact = sum(
            (min(Fraction(c, f.total_count), Fraction(m.counts.get(-k, 0), m.total_count))
             for k, c in f.counts.items()),
            Fraction(0),
        )
        return float(exact)
    return math.fsum(min(v, m.bins.get(-k, 0.0)) for k, v in f.bins.items())


def realized_preferred_differences(
    mating_log: np.ndarray, parents: Population
) -> tuple[np.ndarray, np.ndarray]:
    """Per-agent preferred difference over realized partners.

    Partners are counted with multiplicity. Agents that never mated are
    left out. Output is ordered by agent index within each gender.
    """
    log = np.asarray(mating_log, dtype=np.int64).reshape(-1, 2)
    pf = parents.females[:, P].astype(float)
    pm = parents.males[:, P].astype(float)
    fi, mi = log[:, 0], log[:, 1]
    out = []
    for own, idx, partner_vals, n in ((pf, fi, pm[mi], len(pf)), (pm, mi, pf[fi], len(pm))):
        cnt = np.bincount(idx, minlength=n)
        tot = np.bincount(idx, weights=partner_vals, minlength=n)
        hit = cnt > 0
        out.append(tot[hit] / cnt[hit] - own[hit])
    return out[0], out[1]


@dataclass(frozen=True)
class SummaryStats:
    mean: float
    std: float
    n: int

    @property
    def defined(self) -> bool:
        return self.n > 0


def summary_stats(values: Iterable[float], ddof: int = 0) -> SummaryStats:
    """Mean and standard deviation; population std (``ddof=0``) by default."""
    xs = [float(x) for x in values]
    n = len(xs)
    if n == 0:
        return SummaryStats(math.nan, math.nan, 0)
    mean = math.fsum(xs) / n
    if n - ddof <= 0:
        return SummaryStats(mean, math.nan, n)
    var = math.fsum((x - mean) ** 2 for x in xs) / (n - ddof)
    return SummaryStats(mean, math.sqrt(var), n)

"""Profile/mating ingestion and per-property preferred-difference reports."""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Iterator, Mapping, Sequence

from .metrics import Histogram, SummaryStats, build_histogram, compatibility, summary_stats
from .model import FEMALE, MALE

GENDER_CODES = {"F": FEMALE, "M": MALE}
GENDER_LABELS = {FEMALE: "F", MALE: "M"}
DEFAULT_PROPERTIES = ("age", "height", "education", "income")
DEFAULT_BIN_WIDTHS = {"age": 1.0, "height": 1.0, "education": 1.0, "income": 1.0}

REPORT_COLUMNS = ("property", "mu_m", "mu_f", "sigma_m", "sigma_f", "rho", "n_m", "n_f")


class IngestError(ValueError):
    """Bad input file; the message carries the file and line."""


@dataclass(frozen=True)
class Profile:
    user_id: str
    gender: int
    properties: dict[str, float | None] = field(default_factory=dict)

    def value(self, prop: str) -> float | None:
        return self.properties.get(prop)


@dataclass
class ProfileTable:
    profiles: dict[str, Profile]
    property_names: tuple[str, ...] = DEFAULT_PROPERTIES

    def __len__(self) -> int:
        return len(self.profiles)

    def __iter__(self) -> Iterator[Profile]:
        return iter(self.profiles.values())

    def __contains__(self, user_id: object) -> bool:
        return user_id in self.profiles

    def __getitem__(self, user_id: str) -> Profile:
        return self.profiles[user_id]

    @classmethod
    def from_profiles(cls, profiles: Iterable[Profile], property_names: Sequence[str] = DEFAULT_PROPERTIES) -> ProfileTable:
        table: dict[str, Profile] = {}
        for p in profiles:
            if p.user_id in table:
                raise IngestError(f"duplicate user_id {p.user_id!r}")
            table[p.user_id] = p
        return cls(table, tuple(property_names))

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["user_id", "gender", *self.property_names])
        for p in self:
            vals = [p.value(k) for k in self.property_names]
            w.writerow([p.user_id, GENDER_LABELS[p.gender], *("" if v is None else repr(v) for v in vals)])
        return buf.getvalue()


@dataclass(frozen=True)
class MatingEdge:
    user_a: str
    user_b: str


def _parse_value(cell: str, where: str) -> float | None:
    cell = cell.strip()
    if cell == "":
        return None
    try:
        v = float(cell)
    except ValueError:
        raise IngestError(f"{where}: not a number: {cell!r}") from None
    if not math.isfinite(v):
        raise IngestError(f"{where}: non-finite value {cell!r}")
    return v


def parse_profiles(text: str, source: str = "<profiles>") -> ProfileTable:
    reader = csv.reader(io.StringIO(text))
    header = next(reader, None)
    if header is None:
        raise IngestError(f"{source}: empty file")
    header = [h.strip() for h in header]
    if header[:2] != ["user_id", "gender"] or len(header) < 3:
        raise IngestError(f"{source}:1: header must start with 'user_id,gender' followed by property columns")
    props = tuple(header[2:])
    profiles: dict[str, Profile] = {}
    for lineno, row in enumerate(reader, start=2):
        if not row or all(not c.strip() for c in row):
            continue
        where = f"{source}:{lineno}"
        if len(row) != len(header):
            raise IngestError(f"{where}: expected {len(header)} columns, got {len(row)}")
        uid = row[0].strip()
        if not uid:
            raise IngestError(f"{where}: empty user_id")
        code = row[1].strip()
        if code not in GENDER_CODES:
            raise IngestError(f"{where}: unknown gender code {code!r} (expected F or M)")
        if uid in profiles:
            raise IngestError(f"{where}: duplicate user_id {uid!r}")
        values = {k: _parse_value(c, f"{where} column {k!r}") for k, c in zip(props, row[2:])}
        profiles[uid] = Profile(uid, GENDER_CODES[code], values)
    return ProfileTable(profiles, props)


def load_profiles(path: str | Path) -> ProfileTable:
    path = Path(path)
    return parse_profiles(path.read_text(), str(path))


def parse_matings(text: str, profiles: ProfileTable, source: str = "<matings>") -> list[MatingEdge]:
    """Validated, deduplicated edges, each oriented (female, male)."""
    reader = csv.reader(io.StringIO(text))
    header = next(reader, None)
    if header is None or [h.strip() for h in header] != ["user_a", "user_b"]:
        raise IngestError(f"{source}:1: header must be 'user_a,user_b'")
    seen: set[tuple[str, str]] = set()
    edges: list[MatingEdge] = []
    for lineno, row in enumerate(reader, start=2):
        if not row or all(not c.strip() for c in row):
            continue
        where = f"{source}:{lineno}"
        if len(row) != 2:
            raise IngestError(f"{where}: expected 2 columns, got {len(row)}")
        a, b = row[0].strip(), row[1].strip()
        for uid in (a, b):
            if uid not in profiles:
                raise IngestError(f"{where}: unknown user_id {uid!r} in edge ({a}, {b})")
        if a == b:
            raise IngestError(f"{where}: self-edge ({a}, {b})")
        ga, gb = profiles[a].gender, profiles[b].gender
        if ga == gb:
            raise IngestError(f"{where}: same-gender edge ({a}, {b}); only female-male pairs are supported")
        key = (a, b) if ga == FEMALE else (b, a)
        if key not in seen:
            seen.add(key)
            edges.append(MatingEdge(*key))
    return edges


def load_matings(path: str | Path, profiles: ProfileTable) -> list[MatingEdge]:
    path = Path(path)
    return parse_matings(path.read_text(), profiles, str(path))


def matings_to_csv(edges: Iterable[MatingEdge]) -> str:
    lines = ["user_a,user_b"] + [f"{e.user_a},{e.user_b}" for e in edges]
    return "\n".join(lines) + "\n"


@dataclass(frozen=True)
class DeltaRecord:
    user_id: str
    gender: int
    own: float
    preferred: float
    delta: float
    n_partners: int


@dataclass
class PreferredDifferences:
    prop: str
    records: list[DeltaRecord]
    # per gender: users left out because their own value is missing, or
    # because none of their partners (possibly zero) has the value
    excluded_missing_own: dict[int, int]
    excluded_no_partner_value: dict[int, int]

    def deltas(self, gender: int) -> list[float]:
        return [r.delta for r in self.records if r.gender == gender]

    def excluded(self, gender: int) -> int:
        return self.excluded_missing_own[gender] + self.excluded_no_partner_value[gender]


def _partners(edges: Iterable[MatingEdge]) -> dict[str, set[str]]:
    out: dict[str, set[str]] = {}
    for e in edges:
        out.setdefault(e.user_a, set()).add(e.user_b)
        out.setdefault(e.user_b, set()).add(e.user_a)
    return out


def preferred_difference_table(profiles: ProfileTable, edges: Iterable[MatingEdge], prop: str) -> PreferredDifferences:
    """Preferred difference of every user for one property.

    The preferred value is the mean over distinct partners that report the
    property; the difference subtracts the user's own value.
    """
    if prop not in profiles.property_names:
        raise KeyError(f"unknown property {prop!r}; known: {', '.join(profiles.property_names)}")
    partners = _partners(edges)
    records: list[DeltaRecord] = []
    miss_own = {FEMALE: 0, MALE: 0}
    miss_partner = {FEMALE: 0, MALE: 0}
    for p in profiles:
        own = p.value(prop)
        if own is None:
            miss_own[p.gender] += 1
            continue
        vals = [profiles[j].value(prop) for j in sorted(partners.get(p.user_id, ()))]
        vals = [v for v in vals if v is not None]
        if not vals:
            miss_partner[p.gender] += 1
            continue
        pref = math.fsum(vals) / len(vals)
        records.append(DeltaRecord(p.user_id, p.gender, own, pref, pref - own, len(vals)))
    return PreferredDifferences(prop, records, miss_own, miss_partner)


@dataclass
class StatsRow:
    property: str
    mu_m: float
    mu_f: float
    sigma_m: float
    sigma_f: float
    rho: float
    n_m: int
    n_f: int
    hist_m: Histogram | None = field(default=None, repr=False, compare=False)
    hist_f: Histogram | None = field(default=None, repr=False, compare=False)

    @property
    def defined(self) -> bool:
        return self.n_m > 0 and self.n_f > 0

    def csv_fields(self) -> list[str]:
        def fmt(x: float) -> str:
            return "nan" if math.isnan(x) else f"{x:.6f}"

        return [
            self.property,
            fmt(self.mu_m), fmt(self.mu_f), fmt(self.sigma_m), fmt(self.sigma_f), fmt(self.rho),
            str(self.n_m), str(self.n_f),
        ]


def stats_row(table: PreferredDifferences, bin_width: float, ddof: int = 0) -> StatsRow:
    d_f, d_m = table.deltas(FEMALE), table.deltas(MALE)
    s_f: SummaryStats = summary_stats(d_f, ddof)
    s_m: SummaryStats = summary_stats(d_m, ddof)
    h_f = build_histogram(d_f, bin_width)
    h_m = build_histogram(d_m, bin_width)
    return StatsRow(
        table.prop, s_m.mean, s_f.mean, s_m.std, s_f.std, compatibility(h_f, h_m), s_m.n, s_f.n, h_m, h_f
    )


def property_report(
    profiles: ProfileTable,
    edges: Sequence[MatingEdge],
    properties: Sequence[str] | None = None,
    bin_widths: Mapping[str, float] | None = None,
    ddof: int = 0,
) -> list[StatsRow]:
    props = list(properties) if properties is not None else list(profiles.property_names)
    widths = {**DEFAULT_BIN_WIDTHS, **(bin_widths or {})}
    return [stats_row(preferred_difference_table(profiles, edges, p), widths.get(p, 1.0), ddof) for p in props]


def report_to_csv(rows: Iterable[StatsRow]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(REPORT_COLUMNS)
    for r in rows:
        w.writerow(r.csv_fields())
    return buf.getvalue()


def write_report(rows: Sequence[StatsRow], out_dir: str | Path) -> list[Path]:
    """``report.csv`` plus CSV and JSON histogram sidecars per property and gender."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    written = [out_dir / "report.csv"]
    written[0].write_text(report_to_csv(rows))
    for r in rows:
        for label, h in (("female", r.hist_f), ("male", r.hist_m)):
            if h is None:
                continue
            stem = out_dir / f"hist_{r.property}_{label}"
            stem.with_suffix(".csv").write_text(h.to_csv())
            stem.with_suffix(".json").write_text(h.to_json() + "\n")
            written += [stem.with_suffix(".csv"), stem.with_suffix(".json")]
    return written

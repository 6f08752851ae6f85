"""Command-line front end: ``simulate``, ``analyze``, ``compat``, ``demo``, ``synth``."""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path
from typing import Sequence

import numpy as np

from . import analytics
from .metrics import Histogram, compatibility
from .model import SimParams
from .runner import run_ensemble, seeds_from_base, write_ensemble
from .synthetic import SyntheticSpec, generate_synthetic

# worked example: three possible differences, -1, 0 and +1
DEMO_FEMALE = {-1: 0.30, 0: 0.50, 1: 0.20}
DEMO_MALE = {-1: 0.10, 0: 0.60, 1: 0.30}


class CliError(Exception):
    pass


def parse_seeds(text: str) -> list[int]:
    """``"1..50"`` (inclusive), ``"3,7,11"`` or a mix such as ``"1..3,10"``."""
    seeds: list[int] = []
    for part in text.split(","):
        part = part.strip()
        if not part:
            continue
        try:
            if ".." in part:
                lo, hi = (int(x) for x in part.split("..", 1))
                if hi < lo:
                    raise ValueError(f"empty range {part!r}")
                seeds.extend(range(lo, hi + 1))
            else:
                seeds.append(int(part))
        except ValueError as exc:
            raise argparse.ArgumentTypeError(f"bad seed list {text!r}: {exc}") from None
    return seeds


def parse_bin_widths(items: Sequence[str]) -> dict[str, float]:
    widths = {}
    for item in items:
        name, sep, val = item.partition("=")
        try:
            w = float(val)
        except ValueError:
            w = float("nan")
        if not sep or not name or not w > 0:
            raise CliError(f"--bin-width expects PROPERTY=POSITIVE_NUMBER, got {item!r}")
        widths[name] = w
    return widths


def _prepare_out(path: Path) -> Path:
    try:
        path.mkdir(parents=True, exist_ok=True)
        probe = path / ".write_probe"
        probe.write_text("")
        probe.unlink()
    except OSError as exc:
        raise CliError(f"output directory {path} is not writable: {exc}") from None
    return path


def cmd_simulate(args: argparse.Namespace) -> int:
    try:
        params = SimParams(n=args.n, r=args.r, m=args.m, max_generations=args.max_generations)
    except ValueError as exc:
        raise CliError(str(exc)) from None
    if args.seeds is not None:
        seeds = args.seeds
    else:
        seeds = seeds_from_base(args.base_seed, args.count)
    if not 0 < args.threshold <= 1:
        raise CliError(f"--threshold must lie in (0, 1], got {args.threshold}")
    out = _prepare_out(args.out)
    try:
        traces, summary = run_ensemble(params, seeds, args.parallelism, args.threshold, args.bin_width)
    except ValueError as exc:
        raise CliError(str(exc)) from None
    write_ensemble(traces, summary, out)
    for t in traces:
        print(
            f"seed={t.seed} status={t.status} generation={t.terminal_generation} "
            f"rho={t.final_rho:.6f} variety={t.records[-1].variety}"
        )
    print(
        f"realizations={summary.n_realizations} converged={summary.convergence_fraction:.6f} "
        f"extinct={summary.extinction_fraction:.6f} -> {out}"
    )
    return 0


def cmd_analyze(args: argparse.Namespace) -> int:
    for flag, path in (("--profiles", args.profiles), ("--matings", args.matings)):
        if not path.is_file():
            raise CliError(f"{flag}: no such file {path}")
    try:
        profiles = analytics.load_profiles(args.profiles)
        edges = analytics.load_matings(args.matings, profiles)
    except analytics.IngestError as exc:
        raise CliError(str(exc)) from None
    props = [p.strip() for p in args.properties.split(",") if p.strip()] if args.properties else None
    for p in props or []:
        if p not in profiles.property_names:
            raise CliError(f"--properties: unknown property {p!r}; known: {', '.join(profiles.property_names)}")
    rows = analytics.property_report(profiles, edges, props, parse_bin_widths(args.bin_width))
    out = _prepare_out(args.out)
    analytics.write_report(rows, out)
    sys.stdout.write(analytics.report_to_csv(rows))
    return 0


def _load_hist(path: Path, bin_width: float | None) -> Histogram:
    if not path.is_file():
        raise CliError(f"no such histogram file {path}")
    try:
        text = path.read_text()
        if path.suffix.lower() == ".csv":
            if bin_width is None:
                raise CliError(f"{path}: CSV histograms need --bin-width")
            return Histogram.from_csv(text, bin_width)
        return Histogram.from_json(text)
    except (ValueError, json.JSONDecodeError) as exc:
        raise CliError(f"{path}: {exc}") from None


def cmd_compat(args: argparse.Namespace) -> int:
    f = _load_hist(args.female, args.bin_width)
    m = _load_hist(args.male, args.bin_width)
    try:
        rho = compatibility(f, m)
    except ValueError as exc:
        raise CliError(f"{args.female} vs {args.male}: {exc}") from None
    print(f"{rho:.6f}")
    return 0


def cmd_demo(args: argparse.Namespace) -> int:
    f = Histogram(1.0, dict(DEMO_FEMALE), 0)
    m = Histogram(1.0, dict(DEMO_MALE), 0)
    print("women prefer dp = x, men must prefer dp = -x")
    print(f"{'x':>3}  {'f(x)':>6}  {'m(-x)':>6}  {'min':>6}")
    for x in sorted(f.bins):
        fx, mx = f.bins[x], m.bins.get(-x, 0.0)
        print(f"{x:>+3d}  {fx:6.2f}  {mx:6.2f}  {min(fx, mx):6.2f}")
    print(f"rho = {compatibility(f, m):.2f}")
    return 0


def cmd_synth(args: argparse.Namespace) -> int:
    try:
        spec = SyntheticSpec(args.mu_f, args.sigma_f, args.mu_m, args.sigma_m, args.mirror)
        ds = generate_synthetic(spec, args.n_users, np.random.default_rng(args.seed), args.property)
    except ValueError as exc:
        raise CliError(str(exc)) from None
    out = _prepare_out(args.out)
    (out / "profiles.csv").write_text(ds.profiles.to_csv())
    (out / "matings.csv").write_text(analytics.matings_to_csv(ds.edges))
    truth = "".join(f"{uid},{ds.ground_truth[uid]:.6f}\n" for uid in sorted(ds.ground_truth))
    (out / "ground_truth.csv").write_text("user_id,delta\n" + truth)
    print(f"wrote {len(ds.profiles)} profiles and {len(ds.edges)} matings to {out}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="matecompat", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate", help="run realizations of the evolutionary model")
    p.add_argument("--n", type=int, default=100, help="per-gender population cap")
    p.add_argument("--r", type=int, default=9, help="property values range over 1..R")
    p.add_argument("--m", type=int, default=20_000, help="meetings per generation")
    p.add_argument("--max-generations", type=int, default=1_000)
    seeds = p.add_mutually_exclusive_group()
    seeds.add_argument("--seeds", type=parse_seeds, help="e.g. 1..50 (inclusive) or 1,4,9")
    seeds.add_argument("--base-seed", type=int, default=0, help="with --count: seeds base, base+1, ...")
    p.add_argument("--count", type=int, default=1)
    p.add_argument("--threshold", type=float, default=0.999, help="rho at which a run counts as converged")
    p.add_argument("--bin-width", type=float, default=1.0)
    p.add_argument("--parallelism", type=int, default=1)
    p.add_argument("--out", type=Path, default=Path("out"))
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("analyze", help="preferred-difference report from profile and mating CSVs")
    p.add_argument("--profiles", type=Path, required=True)
    p.add_argument("--matings", type=Path, required=True)
    p.add_argument("--properties", help="comma separated; default: every property column")
    p.add_argument("--bin-width", action="append", default=[], metavar="PROP=W")
    p.add_argument("--out", type=Path, default=Path("out"))
    p.set_defaults(func=cmd_analyze)

    p = sub.add_parser("compat", help="rho of a female and a male histogram file")
    p.add_argument("female", type=Path)
    p.add_argument("male", type=Path)
    p.add_argument("--bin-width", type=float, help="required for CSV histograms")
    p.set_defaults(func=cmd_compat)

    p = sub.add_parser("demo", help="step through the three-bin worked example")
    p.set_defaults(func=cmd_demo)

    p = sub.add_parser("synth", help="write a synthetic dataset with known preferred differences")
    p.add_argument("--n-users", type=int, default=20_000)
    p.add_argument("--mu-f", type=float, default=2.74)
    p.add_argument("--sigma-f", type=float, default=5.23)
    p.add_argument("--mu-m", type=float, default=-2.90)
    p.add_argument("--sigma-m", type=float, default=5.06)
    p.add_argument("--mirror", action="store_true")
    p.add_argument("--property", default="age")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", type=Path, default=Path("out"))
    p.set_defaults(func=cmd_synth)
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except CliError as exc:
        parser.print_usage(sys.stderr)
        print(f"{parser.prog} {args.command}: error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())

"""Command-line pipeline: synth -> ingest -> mine -> sweep/score.

Stages communicate through files (readings CSV -> day cache -> motif catalog
-> reports) so a single ingest pass can feed many mining runs. Defaults are
the standard analysis settings; a config file (INI) can override them and
flags override the config. Exit codes: 0 success, 1 data error, 2 usage
error.
"""

from __future__ import annotations

import argparse
import configparser
import datetime as dt
import json
import sys

from . import evaluate, ingest, mine, synth
from .params import (
    APPLIANCE_CUTOFFS,
    DEFAULT_REGIONS,
    MEASURES,
    VERSION,
    BandScheme,
    FilterConfig,
    ParameterSet,
    RegionConfig,
    standard_grid,
)


def _load_config(path) -> "configparser.ConfigParser | None":
    if path is None:
        return None
    cfg = configparser.ConfigParser()
    with open(path, encoding="utf-8") as handle:
        cfg.read_file(handle)
    return cfg


def _cfg(cfg, section: str, key: str, conv=str):
    if cfg is None or not cfg.has_option(section, key):
        return None
    if conv is bool:
        return cfg.getboolean(section, key)
    return conv(cfg.get(section, key))


def _pick(flag, cfg, section: str, key: str, default, conv=str):
    """Resolution order: explicit flag, then config file, then default."""
    if flag is not None:
        return flag
    value = _cfg(cfg, section, key, conv)
    return default if value is None else value


def _params_from(args, cfg) -> ParameterSet:
    return ParameterSet(
        alphabet_size=_pick(args.alphabet, cfg, "mine", "alphabet", 5, int),
        motif_len=_pick(args.motif_len, cfg, "mine", "motif_len", 6, int),
        variant=_pick(args.variant, cfg, "mine", "variant", "difference"),
        normalization=_pick(
            args.normalization, cfg, "mine", "normalization", "within_window"
        ),
        compression=_pick(args.compress, cfg, "mine", "compression", True, bool),
        range_mode=_pick(args.range_mode, cfg, "mine", "range_mode", "appliance"),
    )


def _filters_from(args, cfg) -> FilterConfig:
    return FilterConfig(
        min_range=_pick(args.min_range, cfg, "mine", "min_range", 100.0, float),
        middle_prefix_len=_pick(
            args.middle_prefix, cfg, "mine", "middle_prefix_len", 2, int
        ),
    )


def _scheme_from(params: ParameterSet, cfg) -> BandScheme:
    raw = _cfg(cfg, "mine", "appliance_cutoffs")
    cutoffs = (
        tuple(float(c) for c in raw.split(",")) if raw else APPLIANCE_CUTOFFS
    )
    return BandScheme(mode=params.range_mode, cutoffs=cutoffs)


def _regions_from(args, cfg, measures: "list[str] | None") -> list[RegionConfig]:
    overrides = {}
    for spec in getattr(args, "region", None) or ():
        parts = spec.split(":")
        if len(parts) != 4:
            raise ValueError(
                f"region spec must look like measure:x:y:z, got {spec!r}"
            )
        overrides[parts[0]] = (float(parts[1]), float(parts[2]), int(parts[3]))
    regions = []
    for default in DEFAULT_REGIONS:
        m = default.measure
        if measures is not None and m not in measures:
            continue
        if m in overrides:
            x, y, z = overrides[m]
        else:
            x = _pick(None, cfg, f"region.{m}", "x", default.x, float)
            y = _pick(None, cfg, f"region.{m}", "y", default.y, float)
            z = _pick(None, cfg, f"region.{m}", "z", default.z, int)
        regions.append(RegionConfig(m, x=x, y=y, z=z))
    if not regions:
        raise ValueError(f"no regions selected; measures must be among {MEASURES}")
    unknown = set(overrides) - {r.measure for r in DEFAULT_REGIONS}
    if unknown:
        raise ValueError(f"unknown measures in --region: {sorted(unknown)}")
    return regions


def _grid_from(args, cfg) -> list[ParameterSet]:
    name = _pick(args.grid, cfg, "sweep", "grid", "standard")
    if name == "standard":
        return standard_grid()
    if name != "config":
        raise ValueError(f"--grid must be 'standard' or 'config', got {name!r}")
    if cfg is None or not cfg.has_section("grid"):
        raise ValueError("--grid config needs a [grid] section in the config file")

    def listed(key: str, default: str) -> list[str]:
        return [v.strip() for v in cfg.get("grid", key, fallback=default).split(",")]

    grid = []
    for alphabet in listed("alphabets", "5,7,9"):
        for motif_len in listed("motif_lens", "4,6,9,12"):
            for variant in listed("variants", "difference,raw"):
                for normalization in listed("normalizations", "within_window,within_household"):
                    for compression in listed("compression", "true"):
                        for range_mode in listed("range_modes", "none,per_house,appliance"):
                            grid.append(
                                ParameterSet(
                                    alphabet_size=int(alphabet),
                                    motif_len=int(motif_len),
                                    variant=variant,
                                    normalization=normalization,
                                    compression=configparser.ConfigParser.BOOLEAN_STATES[
                                        compression.lower()
                                    ],
                                    range_mode=range_mode,
                                )
                            )
    return grid


def cmd_ingest(args) -> int:
    cfg = _load_config(args.config)
    tz = _pick(args.tz, cfg, "ingest", "tz", "UTC")
    max_gap_minutes = _pick(
        args.max_gap_minutes, cfg, "ingest", "max_gap_minutes", 30.0, float
    )
    label_csv = _pick(args.labels, cfg, "ingest", "labels", None)
    with open(args.input, encoding="utf-8") as handle:
        parsed = ingest.parse_readings(handle, delimiter=args.delimiter)
    for error in parsed.errors[:5]:
        print(f"warning: {args.input}:{error.line_no}: {error.message}", file=sys.stderr)
    if len(parsed.errors) > 5:
        print(f"warning: {len(parsed.errors) - 5} further bad rows", file=sys.stderr)
    if not parsed.readings:
        print(f"error: no usable readings in {args.input}", file=sys.stderr)
        return 1

    holidays = ingest.read_holidays(args.holidays) if args.holidays else set()
    data, discarded = ingest.align_readings(
        parsed.readings, max_gap=dt.timedelta(minutes=max_gap_minutes), tz=tz
    )
    labels = None
    if label_csv:
        labels = [v.strip() for v in label_csv.split(",") if v.strip()]
        data = ingest.filter_days(data, set(labels), holidays)

    config = {
        "tz": tz,
        "max_gap_minutes": max_gap_minutes,
        "labels": labels or [],
        "holiday_count": len(holidays),
    }
    ingest.write_cache(data, args.out, config=config)
    print(
        f"{len(data.households())} household(s), {len(data)} day(s) kept, "
        f"{discarded} discarded, {len(parsed.errors)} row(s) rejected -> {args.out}"
    )
    return 0


def cmd_mine(args) -> int:
    cfg = _load_config(args.config)
    try:
        params = _params_from(args, cfg)
        filters = _filters_from(args, cfg)
        scheme = _scheme_from(params, cfg)
    except ValueError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return 2
    data = ingest.read_cache(args.cache)
    catalog = mine.mine_dataset(
        data, params, filters, scheme, threads=args.threads or 1
    )
    mine.write_catalog(catalog, args.out)
    motifs = sum(len(keys) for keys in catalog.entries.values())
    print(
        f"{params.label}: {len(catalog.entries)} household(s) with motifs, "
        f"{motifs} motif(s), {catalog.total_occurrences()} occurrence(s) -> {args.out}"
    )
    return 0


def cmd_sweep(args) -> int:
    cfg = _load_config(args.config)
    try:
        measures = (
            [m.strip() for m in args.measures.split(",")] if args.measures else None
        )
        regions = _regions_from(args, cfg, measures)
        grid = _grid_from(args, cfg)
        filters = _filters_from(args, cfg)
        threads = _pick(args.threads, cfg, "sweep", "threads", 1, int)
        extend_to = _pick(args.extend_to, cfg, "sweep", "extend_to", evaluate.PLOT_EXTEND_TO, int)
    except ValueError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return 2
    data = ingest.read_cache(args.cache)
    report = evaluate.run_sweep(
        data, grid, regions, filters=filters, threads=threads, extend_to=extend_to
    )
    config = {
        "points": len(grid),
        "extend_to": extend_to,
        "filters": filters.as_dict(),
        "regions": {r.measure: [r.x, r.y, r.z] for r in regions},
    }
    with open(args.out_summary, "w", encoding="utf-8") as out:
        evaluate.write_summary(report, out, config=config)
    if args.out_plot:
        with open(args.out_plot, "w", encoding="utf-8") as out:
            evaluate.emit_plot_data(report, out, config=config)
    evaluate.print_summary(report)
    if all(entry.error is not None for entry in report.entries):
        print("error: every grid point failed", file=sys.stderr)
        return 1
    return 0


def cmd_synth(args) -> int:
    cfg = _load_config(args.config)
    if args.fixture != "desk":
        print(f"usage error: unknown fixture {args.fixture!r}", file=sys.stderr)
        return 2
    households = _pick(args.households, cfg, "synth", "households", 20, int)
    days = _pick(args.days, cfg, "synth", "days", synth.DESK_DAYS, int)
    seed = _pick(args.seed, cfg, "synth", "seed", synth.DESK_SEED, int)
    noise_sd = _pick(args.noise_sd, cfg, "synth", "noise_sd", synth.DESK_NOISE_SD, float)
    data, truth = synth.generate_desk_fixture(
        households=households, days=days, seed=seed, noise_sd=noise_sd
    )
    config = {
        "fixture": args.fixture,
        "households": households,
        "days": days,
        "seed": seed,
        "noise_sd": noise_sd,
    }
    synth.write_meter_csv(data, args.out_readings, config=config)
    synth.write_truth(truth, args.out_truth, config=config)
    print(
        f"fixture {args.fixture}: {len(data.households())} household(s) x {days} day(s), "
        f"{len(truth)} planted instance(s) -> {args.out_readings}, {args.out_truth}"
    )
    return 0


def cmd_score(args) -> int:
    catalog = mine.read_catalog(args.catalog)
    truth = synth.read_truth(args.truth)
    report = synth.recovery_report(catalog, truth, slack=args.slack, top_z=args.top)
    config = {"slack": args.slack, "top": args.top}
    if args.out:
        with open(args.out, "w", encoding="utf-8") as out:
            synth.write_recovery(report, out, config=config)
    for a in report.activities:
        print(f"{a.activity}: {a.recovered}/{a.total} recovered, recall {a.recall:.3f}")
    print(f"overall recall {report.overall_recall:.3f}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="metermotifs",
        description="Motif mining over 5-minute electricity meter readings.",
    )
    parser.add_argument("--version", action="version", version=f"metermotifs {VERSION}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("ingest", help="align raw readings onto the 5-minute day grid")
    p.add_argument("--input", required=True, help="CSV of household_id,timestamp,watts")
    p.add_argument("--out", required=True, help="day-cache file to write")
    p.add_argument("--holidays", help="holiday calendar: one ISO date per line")
    p.add_argument(
        "--labels",
        help="keep only days with these labels (comma list of working-day, weekend, holiday)",
    )
    p.add_argument("--tz", help="time zone for day boundaries (default UTC)")
    p.add_argument(
        "--max-gap-minutes",
        type=float,
        dest="max_gap_minutes",
        help="void days touched by a reading gap longer than this (default 30)",
    )
    p.add_argument("--delimiter", default=",", help="input field delimiter (default ,)")
    p.add_argument("--config", help="INI config file")
    p.set_defaults(func=cmd_ingest)

    p = sub.add_parser("mine", help="mine a motif catalog from a day cache")
    p.add_argument("--cache", required=True, help="day cache from ingest")
    p.add_argument("--out", required=True, help="catalog JSONL to write")
    p.add_argument("--alphabet", type=int, help="odd alphabet size (default 5)")
    p.add_argument("--motif-len", type=int, dest="motif_len", help="window length in slots (default 6)")
    p.add_argument("--variant", choices=("raw", "difference"), help="series treatment (default difference)")
    p.add_argument(
        "--normalization",
        choices=("within_window", "within_household"),
        help="normalization scope (default within_window)",
    )
    p.add_argument(
        "--compress",
        action=argparse.BooleanOptionalAction,
        default=None,
        help="collapse adjacent repeated letters (default on)",
    )
    p.add_argument(
        "--range-mode",
        choices=("none", "per_house", "appliance"),
        dest="range_mode",
        help="range banding scheme (default appliance)",
    )
    p.add_argument("--min-range", type=float, dest="min_range", help="minimum window range in watts (default 100)")
    p.add_argument(
        "--middle-prefix",
        type=int,
        dest="middle_prefix",
        help="reject words opening with this many middle letters (default 2)",
    )
    p.add_argument("--threads", type=int, help="worker threads across households (default 1)")
    p.add_argument("--config", help="INI config file")
    p.set_defaults(func=cmd_mine)

    p = sub.add_parser("sweep", help="score a grid of parameter sets")
    p.add_argument("--cache", required=True, help="day cache from ingest")
    p.add_argument("--out-summary", required=True, dest="out_summary", help="ranking CSV to write")
    p.add_argument("--out-plot", dest="out_plot", help="rank-curve plot data CSV to write")
    p.add_argument("--grid", choices=("standard", "config"), help="grid source (default standard: 72 points)")
    p.add_argument("--measures", help="comma subset of per_day,unique_days,pct_days")
    p.add_argument(
        "--region",
        action="append",
        help="override one region as measure:x:y:z (repeatable)",
    )
    p.add_argument("--min-range", type=float, dest="min_range", help="minimum window range in watts (default 100)")
    p.add_argument(
        "--middle-prefix",
        type=int,
        dest="middle_prefix",
        help="reject words opening with this many middle letters (default 2)",
    )
    p.add_argument("--threads", type=int, help="parallel grid points (default 1)")
    p.add_argument("--extend-to", type=int, dest="extend_to", help="plot curves to this rank (default 10)")
    p.add_argument("--config", help="INI config file")
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("synth", help="generate synthetic readings with ground truth")
    p.add_argument("--fixture", default="desk", help="fixture name (desk)")
    p.add_argument("--out-readings", required=True, dest="out_readings", help="readings CSV to write")
    p.add_argument("--out-truth", required=True, dest="out_truth", help="truth JSONL to write")
    p.add_argument("--households", type=int, help="household count (default 20)")
    p.add_argument("--days", type=int, help="working days to generate (default 65)")
    p.add_argument("--seed", type=int, help="master seed (default 2011)")
    p.add_argument("--noise-sd", type=float, dest="noise_sd", help="noise standard deviation in watts (default 5)")
    p.add_argument("--config", help="INI config file")
    p.set_defaults(func=cmd_synth)

    p = sub.add_parser("score", help="score a catalog against a synth truth log")
    p.add_argument("--catalog", required=True, help="catalog JSONL from mine")
    p.add_argument("--truth", required=True, help="truth JSONL from synth")
    p.add_argument("--slack", type=int, default=2, help="slot tolerance for a match (default 2)")
    p.add_argument("--top", type=int, default=3, help="top motifs per household to match against (default 3)")
    p.add_argument("--out", help="recovery report CSV to write")
    p.set_defaults(func=cmd_score)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except FileNotFoundError as exc:
        name = exc.filename or exc
        print(f"error: missing file: {name}", file=sys.stderr)
        return 2
    except (IsADirectoryError, PermissionError) as exc:
        print(f"error: cannot open: {exc}", file=sys.stderr)
        return 2
    except mine.MeterDataError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except (ValueError, json.JSONDecodeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


def entrypoint() -> None:
    sys.exit(main())


if __name__ == "__main__":
    entrypoint()

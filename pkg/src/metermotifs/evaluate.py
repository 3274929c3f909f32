"""Frequency measures, rank curves, interest-region scoring, and the sweep.

Each household's motifs are ranked by occurrence count. Three measures
describe how often a motif recurs: occurrences per day, distinct days, and
percentage of days. A parameter set is scored by how many of its top-Z mean
curve points fall inside a configured [y, x] interest region; sets are then
ranked by the mean score across measures.
"""

from __future__ import annotations

import json
import sys
from dataclasses import dataclass, field
from time import perf_counter

from .ingest import Dataset
from .mine import MeterDataError, MotifCatalog, MotifKey, Occurrence, mine_dataset
from .params import (
    DEFAULT_REGIONS,
    MEASURES,
    VERSION,
    FilterConfig,
    ParameterSet,
    RegionConfig,
)

PLOT_EXTEND_TO = 10


@dataclass
class RankCurve:
    """Mean measure value at each rank, averaged over households that have a
    motif at that rank; None marks ranks no household reaches."""

    param_id: str
    measure: str
    values: "list[float | None]"
    household_counts: list[int]


@dataclass
class SweepEntry:
    params: ParameterSet
    label: str
    curves: dict[str, RankCurve] = field(default_factory=dict)
    scores: dict[str, float] = field(default_factory=dict)
    mean_score: "float | None" = None
    error: "str | None" = None
    wall_time: float = 0.0


@dataclass
class SweepReport:
    entries: list[SweepEntry]
    regions: list[RegionConfig]
    extend_to: int

    def ranked(self) -> list[SweepEntry]:
        """Successful entries best-first; ties favour smaller alphabets, then
        shorter motifs. Failed entries trail in grid order."""
        ok = [e for e in self.entries if e.error is None]
        failed = [e for e in self.entries if e.error is not None]
        ok.sort(
            key=lambda e: (
                -e.mean_score,
                e.params.alphabet_size,
                e.params.motif_len,
                e.label,
            )
        )
        return ok + failed


def top_motifs(
    household_entries: dict[MotifKey, list[Occurrence]], z: int
) -> list[tuple[MotifKey, int]]:
    """Top-z motifs of one household by occurrence count.

    Ties break by band ascending (bandless first), then word lexicographic,
    so rankings are reproducible. Returns fewer than z when the household has
    fewer distinct motifs.
    """
    ranked = sorted(
        ((key, len(occs)) for key, occs in household_entries.items()),
        key=lambda item: (-item[1], item[0].band_sort(), item[0].word),
    )
    return ranked[:z]


def measure_value(occurrences: list[Occurrence], day_count: int, measure: str) -> float:
    if day_count < 1:
        raise ValueError(f"day count must be at least 1, got {day_count}")
    if measure == "per_day":
        return len(occurrences) / day_count
    unique = len({occ.date for occ in occurrences})
    if measure == "unique_days":
        return float(unique)
    if measure == "pct_days":
        return 100.0 * unique / day_count
    raise ValueError(f"measure must be one of {MEASURES}, got {measure!r}")


def rank_curve(
    catalog: MotifCatalog, measure: str, z: int, extend_to: "int | None" = None
) -> RankCurve:
    """Mean measure value per rank across households.

    A household contributes at rank r only if it has r distinct motifs;
    households with no motifs at all contribute nowhere.
    """
    n_ranks = max(z, extend_to or 0)
    sums = [0.0] * n_ranks
    counts = [0] * n_ranks
    for household_id in sorted(catalog.entries):
        entries = catalog.entries[household_id]
        day_count = catalog.day_counts[household_id]
        for rank0, (key, _count) in enumerate(top_motifs(entries, n_ranks)):
            sums[rank0] += measure_value(entries[key], day_count, measure)
            counts[rank0] += 1
    values = [
        (sums[r] / counts[r]) if counts[r] else None for r in range(n_ranks)
    ]
    return RankCurve(catalog.params.label, measure, values, counts)


def region_score(curve: RankCurve, region: RegionConfig) -> float:
    """Fraction of ranks 1..z whose curve value lies inside [y, x].

    Ranks with no value (no household that deep) count as outside.
    """
    hits = 0
    for r in range(region.z):
        value = curve.values[r] if r < len(curve.values) else None
        if value is not None and region.y <= value <= region.x:
            hits += 1
    return hits / region.z


def run_sweep(
    data: Dataset,
    grid: list[ParameterSet],
    regions: "list[RegionConfig] | tuple[RegionConfig, ...] | None" = None,
    *,
    filters: "FilterConfig | None" = None,
    threads: int = 1,
    extend_to: int = PLOT_EXTEND_TO,
) -> SweepReport:
    """Mine and score every grid point; failures are recorded, not fatal.

    Grid points are independent, so they run in parallel; entries always come
    back in grid order, keeping reports identical for any thread count.
    """
    regions = list(regions) if regions is not None else list(DEFAULT_REGIONS)
    filters = filters or FilterConfig()

    def judge(params: ParameterSet) -> SweepEntry:
        started = perf_counter()
        try:
            catalog = mine_dataset(data, params, filters)
            curves: dict[str, RankCurve] = {}
            scores: dict[str, float] = {}
            for region in regions:
                curve = rank_curve(catalog, region.measure, region.z, extend_to)
                curves[region.measure] = curve
                scores[region.measure] = region_score(curve, region)
            mean_score = sum(scores[r.measure] for r in regions) / len(regions)
            return SweepEntry(
                params, params.label, curves, scores, mean_score,
                wall_time=perf_counter() - started,
            )
        except MeterDataError as exc:
            return SweepEntry(
                params, params.label, error=str(exc),
                wall_time=perf_counter() - started,
            )

    if threads > 1 and len(grid) > 1:
        from concurrent.futures import ThreadPoolExecutor

        with ThreadPoolExecutor(max_workers=threads) as pool:
            entries = list(pool.map(judge, grid))
    else:
        entries = [judge(p) for p in grid]
    return SweepReport(entries, regions, extend_to)


def _fmt_num(value: float) -> str:
    """Render bounds compactly: integral floats lose the trailing .0."""
    value = float(value)
    if value.is_integer():
        return str(int(value))
    return repr(value)


def _header_line(kind: str, config: dict) -> str:
    return f"# metermotifs {VERSION} {kind} {json.dumps(config, separators=(',', ':'), sort_keys=True)}"


def emit_plot_data(report: SweepReport, out, *, config: "dict | None" = None) -> None:
    """Write per-rank curve rows plus the region definitions.

    Data rows are `param_set_id,measure,rank,mean_value,in_region` (mean_value
    empty when no household reaches the rank); region rows are
    `measure,X,Y,Z`. Any plotting tool can redraw the curves and shade the
    interest area from this file alone.
    """
    out.write(_header_line("plot-data", config or {}) + "\n")
    out.write("param_set_id,measure,rank,mean_value,in_region\n")
    region_by_measure = {r.measure: r for r in report.regions}
    for entry in report.entries:
        if entry.error is not None:
            continue
        for region in report.regions:
            curve = entry.curves[region.measure]
            for r0, value in enumerate(curve.values):
                rank = r0 + 1
                in_region = (
                    rank <= region.z
                    and value is not None
                    and region.y <= value <= region.x
                )
                rendered = "" if value is None else repr(value)
                out.write(
                    f"{entry.label},{region.measure},{rank},{rendered},{int(in_region)}\n"
                )
    out.write("# regions\n")
    out.write("measure,x,y,z\n")
    for measure in sorted(region_by_measure):
        region = region_by_measure[measure]
        out.write(
            f"{region.measure},{_fmt_num(region.x)},{_fmt_num(region.y)},{region.z}\n"
        )


def parse_plot_data(lines):
    """Inverse of emit_plot_data: returns (curve points, region rows).

    Curve points come back as {(param_set_id, measure): [(rank, value, in_region), ...]};
    regions as {measure: (x, y, z)}.
    """
    curves: dict[tuple[str, str], list] = {}
    regions: dict[str, tuple[float, float, int]] = {}
    section = "curves"
    for line in lines:
        line = line.strip()
        if not line:
            continue
        if line.startswith("#"):
            if line == "# regions":
                section = "regions"
            continue
        cells = line.split(",")
        if cells[0] in ("param_set_id", "measure"):
            continue
        if section == "curves":
            param_id, measure, rank, value, in_region = cells
            curves.setdefault((param_id, measure), []).append(
                (int(rank), float(value) if value else None, bool(int(in_region)))
            )
        else:
            measure, x, y, z = cells
            regions[measure] = (float(x), float(y), int(z))
    return curves, regions


def write_summary(report: SweepReport, out, *, config: "dict | None" = None) -> None:
    """Parameter sets best-first with their per-measure and mean scores."""
    out.write(_header_line("sweep-summary", config or {}) + "\n")
    measures = [r.measure for r in report.regions]
    out.write("param_set_id,mean_region_score," + ",".join(f"score_{m}" for m in measures) + "\n")
    ranked = report.ranked()
    for entry in ranked:
        if entry.error is not None:
            continue
        scores = ",".join(repr(entry.scores[m]) for m in measures)
        out.write(f"{entry.label},{repr(entry.mean_score)},{scores}\n")
    for entry in ranked:
        if entry.error is not None:
            out.write(f"# failed,{entry.label},{entry.error}\n")


def print_summary(report: SweepReport, stream=None, limit: int = 10) -> None:
    """Console-friendly top of the ranking."""
    stream = stream or sys.stdout
    ranked = [e for e in report.ranked() if e.error is None]
    failed = [e for e in report.entries if e.error is not None]
    stream.write(f"{len(ranked)} parameter sets scored, {len(failed)} failed\n")
    for entry in ranked[:limit]:
        parts = " ".join(f"{m}={entry.scores[m]:.3f}" for m in entry.scores)
        stream.write(f"  {entry.label}: mean={entry.mean_score:.3f} ({parts})\n")
    for entry in failed:
        stream.write(f"  {entry.label}: FAILED ({entry.error})\n")

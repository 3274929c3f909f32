"""Read raw meter exports and align them onto the 5-minute day grid.

Raw rows are (household, timestamp, watts). Each reading is taken as the
average power held since the previous reading (a backwards zero-order hold),
so aligning onto the grid is an exact energy integration: the mean power of
every 5-minute cell is the integral of that step function over the cell.
Total energy over any span of whole cells therefore equals the raw energy
over the same span.
"""

from __future__ import annotations

import csv
import datetime as dt
import json
import math
from dataclasses import dataclass
from zoneinfo import ZoneInfo

import numpy as np

from .params import SLOTS_PER_DAY, SLOT_SECONDS, VERSION

UTC = dt.timezone.utc
DEFAULT_MAX_GAP = dt.timedelta(minutes=30)
_DAY_SECONDS = SLOTS_PER_DAY * SLOT_SECONDS

CACHE_FORMAT = "metermotifs-cache"
CACHE_VERSION = 1


@dataclass(frozen=True)
class RawReading:
    household_id: str
    timestamp: dt.datetime
    power: float


@dataclass(frozen=True)
class RowError:
    line_no: int
    message: str


@dataclass
class ParseResult:
    readings: list[RawReading]
    errors: list[RowError]


@dataclass(eq=False)
class DaySeries:
    """One household-day: 288 mean powers on the 5-minute grid."""

    household_id: str
    date: dt.date
    readings: np.ndarray
    labels: frozenset[str] = frozenset()

    def __post_init__(self) -> None:
        self.readings = np.asarray(self.readings, dtype=np.float64)
        if self.readings.shape != (SLOTS_PER_DAY,):
            raise ValueError(
                f"a day series needs exactly {SLOTS_PER_DAY} readings, "
                f"got shape {self.readings.shape}"
            )

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, DaySeries):
            return NotImplemented
        return (
            self.household_id == other.household_id
            and self.date == other.date
            and self.labels == other.labels
            and np.array_equal(self.readings, other.readings)
        )


class Dataset:
    """Aligned household-day series, grouped by household.

    Iteration and lookup orders are always sorted (household, date) so that
    downstream processing is deterministic regardless of insertion order.
    """

    def __init__(self, series: "list[DaySeries] | tuple[DaySeries, ...]" = ()):
        self._days: dict[str, list[DaySeries]] = {}
        self._dates: dict[str, set[dt.date]] = {}
        self._dirty: set[str] = set()
        for day in series:
            self.add(day)

    def add(self, day: DaySeries) -> None:
        dates = self._dates.setdefault(day.household_id, set())
        if day.date in dates:
            raise ValueError(f"duplicate day {day.date} for household {day.household_id}")
        dates.add(day.date)
        self._days.setdefault(day.household_id, []).append(day)
        self._dirty.add(day.household_id)

    def households(self) -> list[str]:
        return sorted(self._days)

    def days(self, household_id: str) -> list[DaySeries]:
        if household_id in self._dirty:
            self._days[household_id].sort(key=lambda d: d.date)
            self._dirty.discard(household_id)
        return self._days[household_id]

    def day_count(self, household_id: str) -> int:
        return len(self._days.get(household_id, ()))

    def __len__(self) -> int:
        return sum(len(days) for days in self._days.values())

    def __iter__(self):
        for household_id in self.households():
            yield from self.days(household_id)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Dataset):
            return NotImplemented
        if self.households() != other.households():
            return False
        return all(
            self.days(h) == other.days(h) for h in self.households()
        )


@dataclass
class AlignResult:
    series: list[DaySeries]
    discarded_days: int


def _parse_timestamp(text: str) -> dt.datetime:
    """ISO-8601 timestamp (a trailing Z is accepted); epoch seconds also accepted."""
    text = text.strip()
    if text and (text.isdigit() or (text[0] in "+-" and text[1:].isdigit())):
        return dt.datetime.fromtimestamp(int(text), UTC)
    if text.endswith(("Z", "z")):
        text = text[:-1] + "+00:00"
    stamp = dt.datetime.fromisoformat(text)
    if stamp.tzinfo is None:
        stamp = stamp.replace(tzinfo=UTC)
    return stamp.astimezone(UTC)


def parse_readings(lines, *, delimiter: str = ",", has_header: bool = False) -> ParseResult:
    """Parse delimited rows of household_id, timestamp, watts.

    Malformed rows are collected as RowError entries rather than silently
    dropped; lines starting with '#' are treated as comments. Readings come
    back sorted by (household, timestamp).
    """
    readings: list[RawReading] = []
    errors: list[RowError] = []
    reader = csv.reader(lines, delimiter=delimiter)
    for line_no, row in enumerate(reader, start=1):
        if has_header and line_no == 1:
            continue
        if not row or (len(row) == 1 and not row[0].strip()):
            continue
        if row[0].lstrip().startswith("#"):
            continue
        if len(row) != 3:
            errors.append(RowError(line_no, f"expected 3 columns, got {len(row)}"))
            continue
        household_id = row[0].strip()
        if not household_id:
            errors.append(RowError(line_no, "empty household id"))
            continue
        try:
            stamp = _parse_timestamp(row[1])
        except ValueError:
            errors.append(RowError(line_no, f"unparseable timestamp {row[1].strip()!r}"))
            continue
        try:
            power = float(row[2])
        except ValueError:
            errors.append(RowError(line_no, f"unparseable power {row[2].strip()!r}"))
            continue
        if not math.isfinite(power):
            errors.append(RowError(line_no, f"non-finite power {row[2].strip()!r}"))
            continue
        if power < 0:
            errors.append(RowError(line_no, f"negative power {power}"))
            continue
        readings.append(RawReading(household_id, stamp, power))
    readings.sort(key=lambda r: (r.household_id, r.timestamp))
    return ParseResult(readings, errors)


def _resolve_zone(tz: "str | dt.tzinfo") -> dt.tzinfo:
    if isinstance(tz, str):
        return UTC if tz.upper() == "UTC" else ZoneInfo(tz)
    return tz


def align_to_grid(
    readings: list[RawReading],
    *,
    max_gap: dt.timedelta = DEFAULT_MAX_GAP,
    tz: "str | dt.tzinfo" = "UTC",
) -> AlignResult:
    """Align one household's raw readings onto 288 five-minute cells per day.

    A day is emitted only when every cell lies inside the covered span and no
    pair of consecutive raw readings more than ``max_gap`` apart touches it;
    partially covered or gapped days are counted in ``discarded_days``. Days
    start at local midnight of ``tz`` and always span 288 fixed slots.
    """
    if not readings:
        return AlignResult([], 0)
    household_ids = {r.household_id for r in readings}
    if len(household_ids) > 1:
        raise ValueError(f"align_to_grid works on one household, got {sorted(household_ids)}")
    household_id = readings[0].household_id

    ts = np.array([r.timestamp.timestamp() for r in readings], dtype=np.float64)
    power = np.array([r.power for r in readings], dtype=np.float64)
    steps = np.diff(ts)
    if np.any(steps <= 0):
        raise ValueError(f"timestamps for household {household_id} must be strictly increasing")

    max_gap_s = max_gap.total_seconds()
    gap_idx = np.nonzero(steps > max_gap_s)[0]
    gap_starts = ts[gap_idx]
    gap_ends = ts[gap_idx + 1]

    zone = _resolve_zone(tz)
    first_date = dt.datetime.fromtimestamp(ts[0], zone).date()
    last_date = dt.datetime.fromtimestamp(ts[-1], zone).date()

    series: list[DaySeries] = []
    discarded = 0
    cells = np.arange(SLOTS_PER_DAY)
    date = first_date
    while date <= last_date:
        day_start = int(dt.datetime.combine(date, dt.time.min, tzinfo=zone).timestamp())
        day_end = day_start + _DAY_SECONDS
        date += dt.timedelta(days=1)
        if day_end <= ts[0] or day_start >= ts[-1]:
            continue
        if day_start < ts[0] or day_end > ts[-1]:
            discarded += 1
            continue
        if np.any((gap_starts < day_end) & (gap_ends > day_start)):
            discarded += 1
            continue
        # Split the day into elementary segments at every cell boundary and
        # every interior reading; each segment (u, v] then lies inside one
        # cell under one held power, so each cell's energy sums only its own
        # few terms.
        bounds = day_start + SLOT_SECONDS * np.arange(SLOTS_PER_DAY + 1, dtype=np.int64)
        inside = (ts > day_start) & (ts < day_end)
        pts = np.unique(np.concatenate([bounds, ts[inside]]))
        seg_end = pts[1:]
        seg_width = np.diff(pts)
        seg_power = power[np.searchsorted(ts, seg_end, side="left")]
        seg_energy = seg_power * seg_width
        cell = np.searchsorted(bounds, seg_end, side="left") - 1
        starts = np.searchsorted(cell, cells, side="left")
        energies = np.add.reduceat(seg_energy, starts)
        run_len = np.diff(np.append(starts, cell.size))
        # A cell covered end to end by a single reading interval takes that
        # power verbatim, so already-aligned input survives unchanged.
        single_full = (run_len == 1) & (seg_width[starts] == SLOT_SECONDS)
        values = np.where(single_full, seg_power[starts], energies / SLOT_SECONDS)
        series.append(DaySeries(household_id, date - dt.timedelta(days=1), values))
    return AlignResult(series, discarded)


def align_readings(
    readings: list[RawReading],
    *,
    max_gap: dt.timedelta = DEFAULT_MAX_GAP,
    tz: "str | dt.tzinfo" = "UTC",
) -> tuple[Dataset, int]:
    """Group a mixed-household reading list and align each household."""
    by_household: dict[str, list[RawReading]] = {}
    for reading in readings:
        by_household.setdefault(reading.household_id, []).append(reading)
    data = Dataset()
    discarded = 0
    for household_id in sorted(by_household):
        result = align_to_grid(by_household[household_id], max_gap=max_gap, tz=tz)
        discarded += result.discarded_days
        for day in result.series:
            data.add(day)
    return data, discarded


def day_series_to_readings(series: list[DaySeries]) -> list[RawReading]:
    """Rewrite aligned days as raw rows that align back to the same values.

    Each slot value becomes a reading stamped at the slot's end (the
    backwards-hold convention); an anchor row at midnight opens every run of
    consecutive days so the first cell is covered.
    """
    readings: list[RawReading] = []
    by_household: dict[str, list[DaySeries]] = {}
    for day in series:
        by_household.setdefault(day.household_id, []).append(day)
    for household_id in sorted(by_household):
        last_stamp: dt.datetime | None = None
        for day in sorted(by_household[household_id], key=lambda d: d.date):
            midnight = dt.datetime.combine(day.date, dt.time.min, tzinfo=UTC)
            if last_stamp != midnight:
                readings.append(RawReading(household_id, midnight, float(day.readings[0])))
            for slot in range(SLOTS_PER_DAY):
                stamp = midnight + dt.timedelta(seconds=(slot + 1) * SLOT_SECONDS)
                readings.append(RawReading(household_id, stamp, float(day.readings[slot])))
            last_stamp = midnight + dt.timedelta(seconds=_DAY_SECONDS)
    return readings


WORKING_DAY = "working-day"


def label_for(date: dt.date, holidays: "frozenset[dt.date] | set[dt.date]") -> frozenset[str]:
    if date in holidays:
        return frozenset({"holiday"})
    if date.weekday() >= 5:
        return frozenset({"weekend"})
    return frozenset({WORKING_DAY})


def filter_days(
    data: Dataset,
    wanted_labels: "set[str] | frozenset[str]",
    holidays: "set[dt.date] | frozenset[dt.date]" = frozenset(),
) -> Dataset:
    """Keep only days whose labels intersect wanted_labels.

    A working-day is any Monday to Friday not listed in the holiday calendar.
    """
    wanted = frozenset(wanted_labels)
    kept = Dataset()
    for day in data:
        labels = label_for(day.date, holidays)
        if labels & wanted:
            kept.add(DaySeries(day.household_id, day.date, day.readings, labels))
    return kept


def read_holidays(path) -> set[dt.date]:
    """One ISO date per line; blank lines and '#' comments are skipped."""
    holidays: set[dt.date] = set()
    with open(path, encoding="utf-8") as handle:
        for line in handle:
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            holidays.add(dt.date.fromisoformat(line))
    return holidays


def write_cache(data: Dataset, path, *, config: "dict | None" = None) -> None:
    header = {
        "format": CACHE_FORMAT,
        "version": CACHE_VERSION,
        "tool": f"metermotifs {VERSION}",
        "config": config or {},
    }
    with open(path, "w", encoding="utf-8") as out:
        out.write(json.dumps(header, separators=(",", ":")) + "\n")
        for day in data:
            record = {
                "household": day.household_id,
                "date": day.date.isoformat(),
                "labels": sorted(day.labels),
                "readings": [float(v) for v in day.readings],
            }
            out.write(json.dumps(record, separators=(",", ":")) + "\n")


def read_cache(path) -> Dataset:
    data = Dataset()
    with open(path, encoding="utf-8") as handle:
        header_line = handle.readline()
        if not header_line.strip():
            return data
        header = json.loads(header_line)
        if header.get("format") != CACHE_FORMAT:
            raise ValueError(f"{path}: not a {CACHE_FORMAT} file")
        if header.get("version") != CACHE_VERSION:
            raise ValueError(f"{path}: unsupported cache version {header.get('version')}")
        for line in handle:
            if not line.strip():
                continue
            record = json.loads(line)
            data.add(
                DaySeries(
                    record["household"],
                    dt.date.fromisoformat(record["date"]),
                    np.array(record["readings"], dtype=np.float64),
                    frozenset(record.get("labels", ())),
                )
            )
    return data

"""Synthetic household meter data with a planted, timestamped ground truth.

Real meter corpora cannot tell you whether a detected motif corresponds to
anything, because nobody logged what the occupants did. The generator builds
days from known parts: a flat base load, a square-wave fridge, activity
shapes planted at jittered times, and Gaussian noise, clamped at zero. Every
planted instance is logged, so detection claims become checkable.
"""

from __future__ import annotations

import datetime as dt
import json
from bisect import bisect_left
from dataclasses import dataclass

import numpy as np

from .ingest import Dataset, DaySeries, day_series_to_readings
from .mine import MotifCatalog
from .params import SLOTS_PER_DAY, VERSION

TRUTH_FORMAT = "metermotifs-truth"
TRUTH_VERSION = 1


@dataclass(frozen=True)
class ActivityTemplate:
    """A short power overlay: deltas added on top of whatever else is running."""

    name: str
    shape: tuple[float, ...]
    target_slot: int
    probability: float = 1.0
    time_jitter: int = 0
    amplitude_jitter: float = 0.0

    def __post_init__(self) -> None:
        if not 2 <= len(self.shape) <= 12:
            raise ValueError(f"activity shape must be 2..12 slots, got {len(self.shape)}")
        if max(self.shape) < 100.0:
            raise ValueError(
                "activity peak delta must be at least 100 W so the range filter "
                f"can pass it, got {max(self.shape):g}"
            )
        if not 0.0 <= self.probability <= 1.0:
            raise ValueError(f"probability must be in [0, 1], got {self.probability}")
        if self.time_jitter < 0:
            raise ValueError(f"time jitter must be non-negative, got {self.time_jitter}")
        if not 0.0 <= self.amplitude_jitter < 1.0:
            raise ValueError(
                f"amplitude jitter is a relative fraction in [0, 1), got {self.amplitude_jitter}"
            )
        if not 0 <= self.target_slot <= SLOTS_PER_DAY - len(self.shape):
            raise ValueError(f"target slot {self.target_slot} leaves no room for the shape")


@dataclass(frozen=True)
class FridgeSpec:
    """Always-on square wave: on_delta watts for duty*period slots per cycle."""

    period: int = 12
    on_delta: float = 100.0
    duty: float = 0.5
    phase: int = 0

    def __post_init__(self) -> None:
        if self.period < 2:
            raise ValueError(f"fridge period must be at least 2 slots, got {self.period}")
        if not 0.0 < self.duty < 1.0:
            raise ValueError(f"fridge duty must be in (0, 1), got {self.duty}")
        if self.on_delta < 0:
            raise ValueError(f"fridge on-delta must be non-negative, got {self.on_delta}")


@dataclass(frozen=True)
class HouseholdProfile:
    household_id: str
    seed: int
    base_load: float = 100.0
    noise_sd: float = 0.0
    fridge: "FridgeSpec | None" = None
    activities: tuple[ActivityTemplate, ...] = ()

    def __post_init__(self) -> None:
        if self.base_load < 0:
            raise ValueError(f"base load must be non-negative, got {self.base_load}")
        if self.noise_sd < 0:
            raise ValueError(f"noise sd must be non-negative, got {self.noise_sd}")


@dataclass(frozen=True)
class TruthInstance:
    household_id: str
    date: dt.date
    activity: str
    start_slot: int
    scale: float


def schedule_dates(days: int, start_date: dt.date, *, weekdays_only: bool = False) -> list[dt.date]:
    if days < 1:
        raise ValueError(f"need at least 1 day, got {days}")
    dates = []
    date = start_date
    while len(dates) < days:
        if not weekdays_only or date.weekday() < 5:
            dates.append(date)
        date += dt.timedelta(days=1)
    return dates


def _fridge_wave(fridge: FridgeSpec) -> np.ndarray:
    slots = np.arange(SLOTS_PER_DAY)
    on_slots = int(round(fridge.duty * fridge.period))
    return np.where((slots + fridge.phase) % fridge.period < on_slots, fridge.on_delta, 0.0)


def generate(
    profiles: list[HouseholdProfile],
    days: int,
    seed: int,
    *,
    start_date: dt.date = dt.date(2011, 1, 3),
    weekdays_only: bool = False,
) -> tuple[Dataset, list[TruthInstance]]:
    """Generate aligned days plus the log of every planted activity instance.

    Each household owns an independent generator seeded from (seed,
    profile.seed), so output does not depend on household order or on how
    generation is parallelized. Within a household, every scheduled activity
    consumes the same random draws whether or not it fires that day, so
    toggling one knob (say noise_sd) perturbs nothing else.
    """
    ids = [p.household_id for p in profiles]
    if len(set(ids)) != len(ids):
        raise ValueError("household ids must be unique")
    dates = schedule_dates(days, start_date, weekdays_only=weekdays_only)
    data = Dataset()
    truth: list[TruthInstance] = []
    for profile in profiles:
        rng = np.random.default_rng([seed, profile.seed])
        fridge = _fridge_wave(profile.fridge) if profile.fridge else 0.0
        for date in dates:
            values = np.full(SLOTS_PER_DAY, profile.base_load, dtype=np.float64) + fridge
            for activity in profile.activities:
                active = rng.random() < activity.probability
                offset = int(rng.integers(-activity.time_jitter, activity.time_jitter + 1))
                scale = 1.0 + activity.amplitude_jitter * (2.0 * rng.random() - 1.0)
                if active:
                    start = activity.target_slot + offset
                    start = max(0, min(start, SLOTS_PER_DAY - len(activity.shape)))
                    values[start : start + len(activity.shape)] += (
                        np.asarray(activity.shape, dtype=np.float64) * scale
                    )
                    truth.append(
                        TruthInstance(profile.household_id, date, activity.name, start, scale)
                    )
            values = values + rng.normal(0.0, profile.noise_sd, SLOTS_PER_DAY)
            np.maximum(values, 0.0, out=values)
            data.add(DaySeries(profile.household_id, date, values))
    truth.sort(key=lambda t: (t.household_id, t.date, t.start_slot, t.activity))
    return data, truth


# The standard test fixture: 20 varied households over one quarter of working
# days. Size and interval match the real-world corpus shape the pipeline
# targets (a 13-week block of weekdays, 5-minute readings).
DESK_SEED = 2011
DESK_DAYS = 65
DESK_START = dt.date(2011, 1, 3)
DESK_NOISE_SD = 5.0

MORNING = ActivityTemplate(
    "morning-pulse",
    shape=(1200.0, 1200.0, 1200.0),
    target_slot=85,
    probability=0.85,
    time_jitter=2,
    amplitude_jitter=0.10,
)
EVENING = ActivityTemplate(
    "evening-two-level",
    shape=(2000.0, 2000.0, 900.0, 900.0, 900.0, 900.0),
    target_slot=222,
    probability=0.8,
    time_jitter=2,
    amplitude_jitter=0.10,
)


def desk_profiles(count: int = 20, noise_sd: float = DESK_NOISE_SD) -> list[HouseholdProfile]:
    profiles = []
    for i in range(count):
        profiles.append(
            HouseholdProfile(
                household_id=f"h{i + 1:02d}",
                seed=i + 1,
                base_load=80.0 + 6.0 * i,
                noise_sd=noise_sd,
                fridge=FridgeSpec(period=12, on_delta=100.0, duty=0.5, phase=(5 * i) % 12),
                activities=(MORNING, EVENING),
            )
        )
    return profiles


def generate_desk_fixture(
    *, households: int = 20, days: int = DESK_DAYS, seed: int = DESK_SEED,
    noise_sd: float = DESK_NOISE_SD,
) -> tuple[Dataset, list[TruthInstance]]:
    return generate(
        desk_profiles(households, noise_sd),
        days,
        seed,
        start_date=DESK_START,
        weekdays_only=True,
    )


@dataclass
class ActivityRecovery:
    activity: str
    total: int
    recovered: int
    matched_words: list[str]

    @property
    def recall(self) -> float:
        return self.recovered / self.total if self.total else 0.0


@dataclass
class RecoveryReport:
    activities: list[ActivityRecovery]
    slack: int
    top_z: int

    @property
    def overall_recall(self) -> float:
        total = sum(a.total for a in self.activities)
        recovered = sum(a.recovered for a in self.activities)
        return recovered / total if total else 0.0


def recovery_report(
    catalog: MotifCatalog, truth: list[TruthInstance], slack: int = 2, top_z: int = 3
) -> RecoveryReport:
    """Score planted activities against each household's top motifs.

    An instance counts as recovered when any occurrence of one of that
    household's top_z motifs starts within ±slack slots of the instance
    start.
    """
    from .evaluate import top_motifs

    slots_by_day: dict[tuple[str, dt.date], list[tuple[int, str]]] = {}
    for household_id, entries in catalog.entries.items():
        for key, _count in top_motifs(entries, top_z):
            for occ in entries[key]:
                slots_by_day.setdefault((household_id, occ.date), []).append(
                    (occ.start_slot, key.word)
                )
    for hits in slots_by_day.values():
        hits.sort()

    order: list[str] = []
    stats: dict[str, ActivityRecovery] = {}
    matched: dict[str, set[str]] = {}
    for instance in truth:
        if instance.activity not in stats:
            order.append(instance.activity)
            stats[instance.activity] = ActivityRecovery(instance.activity, 0, 0, [])
            matched[instance.activity] = set()
        record = stats[instance.activity]
        record.total += 1
        hits = slots_by_day.get((instance.household_id, instance.date), ())
        lo = bisect_left(hits, (instance.start_slot - slack, ""))
        found = False
        for slot, word in hits[lo:]:
            if slot > instance.start_slot + slack:
                break
            found = True
            matched[instance.activity].add(word)
        if found:
            record.recovered += 1
    for name in order:
        stats[name].matched_words = sorted(matched[name])
    return RecoveryReport([stats[name] for name in order], slack, top_z)


def write_truth(truth: list[TruthInstance], path, *, config: "dict | None" = None) -> None:
    header = {
        "format": TRUTH_FORMAT,
        "version": TRUTH_VERSION,
        "tool": f"metermotifs {VERSION}",
        "config": config or {},
    }
    with open(path, "w", encoding="utf-8") as out:
        out.write(json.dumps(header, separators=(",", ":")) + "\n")
        for t in truth:
            record = {
                "household": t.household_id,
                "date": t.date.isoformat(),
                "activity": t.activity,
                "start_slot": t.start_slot,
                "scale": t.scale,
            }
            out.write(json.dumps(record, separators=(",", ":")) + "\n")


def read_truth(path) -> list[TruthInstance]:
    truth = []
    with open(path, encoding="utf-8") as handle:
        header = json.loads(handle.readline())
        if header.get("format") != TRUTH_FORMAT:
            raise ValueError(f"{path}: not a {TRUTH_FORMAT} file")
        for line in handle:
            if not line.strip():
                continue
            record = json.loads(line)
            truth.append(
                TruthInstance(
                    record["household"],
                    dt.date.fromisoformat(record["date"]),
                    record["activity"],
                    int(record["start_slot"]),
                    float(record["scale"]),
                )
            )
    return truth


def write_meter_csv(data: Dataset, path, *, config: "dict | None" = None) -> None:
    """Write aligned days in the raw input format ingest reads.

    Readings are stamped at slot ends (each reading covers the preceding 5
    minutes), with a midnight anchor opening every run of consecutive days,
    so re-ingesting reproduces the same aligned values.
    """
    cfg = json.dumps(config or {}, separators=(",", ":"), sort_keys=True)
    with open(path, "w", encoding="utf-8") as out:
        out.write(f"# metermotifs {VERSION} meter-readings {cfg}\n")
        for reading in day_series_to_readings(list(data)):
            stamp = reading.timestamp.isoformat()
            out.write(f"{reading.household_id},{stamp},{reading.power!r}\n")


def write_recovery(report: RecoveryReport, out, *, config: "dict | None" = None) -> None:
    cfg = json.dumps(config or {}, separators=(",", ":"), sort_keys=True)
    out.write(f"# metermotifs {VERSION} recovery {cfg}\n")
    out.write("activity,total,recovered,recall,matched_words\n")
    for a in report.activities:
        words = "|".join(a.matched_words)
        out.write(f"{a.activity},{a.total},{a.recovered},{a.recall!r},{words}\n")
    out.write(f"# overall recall {report.overall_recall!r}\n")

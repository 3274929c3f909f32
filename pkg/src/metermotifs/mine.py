"""Slide windows over household-days, filter, band, and build a motif catalog.

A window of motif_len consecutive readings becomes a symbolic word (see
symbolize). Windows survive three filters: a minimum watt range, a reject of
words opening on runs of middle letters, and a reject of words that move in
only one direction. Survivors are grouped by (word, range band) per
household, with every occurrence timestamped by date and start slot.

Windows never span midnight: extraction is per day, so day boundaries are a
structural exclusion rather than a filter.

The per-day core is vectorized with numpy but computes exactly the same
subtractions, divisions, and floors as the scalar helpers in symbolize, so a
straight-line reimplementation of the pipeline produces identical output.
"""

from __future__ import annotations

import bisect
import datetime as dt
import json
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view

from .ingest import Dataset, DaySeries
from .params import (
    PER_HOUSE_BAND_COUNT,
    VERSION,
    BandScheme,
    FilterConfig,
    ParameterSet,
)
from .symbolize import (
    compress,
    household_bounds,
    household_diff_scale,
    indices_to_word,
    letter_indices,
    middle_letter,
    scale_symmetric,
    scale_values,
)

CATALOG_FORMAT = "metermotifs-catalog"
CATALOG_VERSION = 1

REASON_MIN_RANGE = "below-min-range"
REASON_MIDDLE_PREFIX = "middle-prefix"
REASON_MONOTONE_UP = "monotone-increasing"
REASON_MONOTONE_DOWN = "monotone-decreasing"


class MeterDataError(ValueError):
    """Physically implausible meter data (e.g. a window range above 60 kW)."""


@dataclass(frozen=True)
class WindowView:
    household_id: str
    date: "dt.date | None"
    start_slot: int
    readings: np.ndarray


class MotifKey(NamedTuple):
    word: str
    band: "int | None" = None

    def band_sort(self) -> int:
        return -1 if self.band is None else self.band


class Occurrence(NamedTuple):
    date: dt.date
    start_slot: int
    window_range: float
    diff_range: float


def extract_windows(day, motif_len: int) -> list[WindowView]:
    """All stride-1 windows of one day: len(readings) - motif_len + 1 views."""
    if isinstance(day, DaySeries):
        household_id, date, values = day.household_id, day.date, day.readings
    else:
        household_id, date = "", None
        values = np.asarray(day, dtype=np.float64)
    if motif_len < 2 or motif_len > values.shape[0]:
        raise ValueError(f"motif_len {motif_len} outside [2, {values.shape[0]}]")
    views = sliding_window_view(values, motif_len)
    return [WindowView(household_id, date, s, views[s]) for s in range(views.shape[0])]


def window_ranges(window) -> tuple[float, float]:
    """(max - min of readings, max - min of adjacent deltas) for one window."""
    values = window.readings if isinstance(window, WindowView) else window
    values = np.asarray(values, dtype=np.float64)
    window_range = float(values.max() - values.min())
    if values.shape[0] < 2:
        return window_range, 0.0
    deltas = np.diff(values)
    return window_range, float(deltas.max() - deltas.min())


def band_for(
    window_range: float,
    scheme: BandScheme,
    house_stats: "tuple[float, float] | None" = None,
    *,
    context: str = "",
) -> "int | None":
    """Range band index under the given scheme, or None when banding is off.

    Appliance mode returns the index of the first cutoff >= range and treats
    anything above the top cutoff as a data error. Per-house mode cuts 5
    equal-width bands between that house's min and max surviving window
    range; internal boundary values go up and the top value lands in the last
    band.
    """
    if scheme.mode == "none":
        return None
    if scheme.mode == "appliance":
        idx = bisect.bisect_left(scheme.cutoffs, window_range)
        if idx >= len(scheme.cutoffs):
            raise MeterDataError(
                f"window range {window_range:g} W exceeds the top band cutoff "
                f"{scheme.cutoffs[-1]:g} W{context}"
            )
        return idx
    if house_stats is None:
        raise ValueError("per_house banding needs (min, max) house range stats")
    low, high = house_stats
    span = high - low
    if span == 0.0:
        return 0
    scaled = (window_range - low) / span * PER_HOUSE_BAND_COUNT
    return min(int(scaled), PER_HOUSE_BAND_COUNT - 1)


def _word_rejection(word: str, alphabet_size: int, variant: str, filters: FilterConfig) -> "str | None":
    mid = middle_letter(alphabet_size)
    k = filters.middle_prefix_len
    if len(word) >= k and all(c == mid for c in word[:k]):
        return REASON_MIDDLE_PREFIX
    if variant == "difference":
        # Letters are signed changes here, so "only increases" means every
        # letter at or above the middle with at least one above it.
        if all(c >= mid for c in word) and any(c > mid for c in word):
            return REASON_MONOTONE_UP
        if all(c <= mid for c in word) and any(c < mid for c in word):
            return REASON_MONOTONE_DOWN
    else:
        pairs = list(zip(word, word[1:]))
        if all(x <= y for x, y in pairs) and any(x < y for x, y in pairs):
            return REASON_MONOTONE_UP
        if all(x >= y for x, y in pairs) and any(x > y for x, y in pairs):
            return REASON_MONOTONE_DOWN
    return None


def is_interesting(
    word: str,
    window_range: float,
    filters: FilterConfig,
    alphabet_size: int,
    variant: str = "raw",
) -> tuple[bool, "str | None"]:
    """Apply the interest filters to one pre-compression word.

    Returns (keep, rejection_reason). Reasons are checked in a fixed order:
    below-min-range, middle-prefix, then the two monotonicity rejections.
    """
    if window_range < filters.min_range:
        return False, REASON_MIN_RANGE
    reason = _word_rejection(word, alphabet_size, variant, filters)
    return reason is None, reason


class MotifCatalog:
    """(household, word, band) -> occurrence lists, plus the run's settings."""

    def __init__(
        self,
        params: ParameterSet,
        filters: FilterConfig,
        scheme: BandScheme,
        day_counts: "dict[str, int] | None" = None,
    ):
        self.params = params
        self.filters = filters
        self.scheme = scheme
        self.day_counts: dict[str, int] = dict(day_counts or {})
        self.entries: dict[str, dict[MotifKey, list[Occurrence]]] = {}

    def households(self) -> list[str]:
        return sorted(self.day_counts)

    def household_entries(self, household_id: str) -> dict[MotifKey, list[Occurrence]]:
        return self.entries.get(household_id, {})

    def add(self, household_id: str, key: MotifKey, occurrence: Occurrence) -> None:
        self.entries.setdefault(household_id, {}).setdefault(key, []).append(occurrence)

    def total_occurrences(self) -> int:
        return sum(
            len(occs) for keys in self.entries.values() for occs in keys.values()
        )

    def flatten(self) -> list[tuple]:
        """Sorted (household, word, band, date, slot, ranges) rows, for tests
        and debugging."""
        rows = []
        for household_id, keys in self.entries.items():
            for key, occs in keys.items():
                for occ in occs:
                    rows.append(
                        (
                            household_id,
                            key.word,
                            key.band_sort(),
                            occ.date.isoformat(),
                            occ.start_slot,
                            occ.window_range,
                            occ.diff_range,
                        )
                    )
        rows.sort()
        return rows


def scheme_for(params: ParameterSet) -> BandScheme:
    return BandScheme(mode=params.range_mode)


def _house_scale(days: list[DaySeries], params: ParameterSet):
    if params.normalization != "within_household":
        return None
    arrays = [d.readings for d in days]
    if params.variant == "raw":
        return household_bounds(arrays)
    return household_diff_scale(arrays)


def _day_letters(values: np.ndarray, params: ParameterSet, house_scale):
    """Letters plus ranges for every window of one day.

    Returns (letters (n, L) int64, window_range (n,), diff_range (n,)).
    """
    w = params.motif_len
    windows = sliding_window_view(values, w)
    deltas = sliding_window_view(np.diff(values), w - 1)
    window_range = windows.max(axis=1) - windows.min(axis=1)
    diff_range = deltas.max(axis=1) - deltas.min(axis=1)
    a = params.alphabet_size
    if params.variant == "raw":
        if params.normalization == "within_household":
            norm = scale_values(windows, house_scale[0], house_scale[1])
        else:
            low = windows.min(axis=1, keepdims=True)
            span = windows.max(axis=1, keepdims=True) - low
            safe = np.where(span == 0.0, 1.0, span)
            norm = np.where(span == 0.0, 0.5, (windows - low) / safe)
        letters = letter_indices(norm, a)
    else:
        if params.normalization == "within_household":
            sym = scale_symmetric(deltas, house_scale)
        else:
            scale = np.abs(deltas).max(axis=1, keepdims=True)
            safe = np.where(scale == 0.0, 1.0, scale)
            sym = np.where(scale == 0.0, 0.0, deltas / safe)
        letters = letter_indices(sym, a, symmetric=True)
    return letters, window_range, diff_range


def day_words(values, params: ParameterSet, house_scale=None) -> list[str]:
    """Symbol word for every window of one day, in start-slot order.

    house_scale carries the within-household normalization constants:
    (low, high) watts for the raw variant, the max |delta| for the
    difference variant, None when normalizing within the window.
    """
    letters, _, _ = _day_letters(np.asarray(values, dtype=np.float64), params, house_scale)
    words = [indices_to_word(row) for row in letters]
    if params.compression:
        words = [compress(word) for word in words]
    return words


def _house_range_stats(days: list[DaySeries], motif_len: int, min_range: float):
    """(min, max) of window ranges at or above min_range, or None if none pass."""
    low = float("inf")
    high = float("-inf")
    for day in days:
        windows = sliding_window_view(day.readings, motif_len)
        ranges = windows.max(axis=1) - windows.min(axis=1)
        ranges = ranges[ranges >= min_range]
        if ranges.size:
            low = min(low, float(ranges.min()))
            high = max(high, float(ranges.max()))
    if low > high:
        return None
    return low, high


def _mine_household(
    days: list[DaySeries],
    params: ParameterSet,
    filters: FilterConfig,
    scheme: BandScheme,
) -> dict[MotifKey, list[Occurrence]]:
    house_scale = _house_scale(days, params)
    house_stats = None
    if scheme.mode == "per_house":
        house_stats = _house_range_stats(days, params.motif_len, filters.min_range)
    cutoffs = np.asarray(scheme.cutoffs, dtype=np.float64)
    verdicts: dict[bytes, tuple[str, bool]] = {}
    entries: dict[MotifKey, list[Occurrence]] = {}

    for day in days:
        letters, window_range, diff_range = _day_letters(day.readings, params, house_scale)
        word_len = letters.shape[1]
        # Pack each letter row into one int64 when it fits; uniquing scalars
        # is much cheaper than uniquing rows.
        if params.alphabet_size**word_len < 2**62:
            powers = params.alphabet_size ** np.arange(word_len - 1, -1, -1, dtype=np.int64)
            _, first_idx, inverse = np.unique(
                letters @ powers, return_index=True, return_inverse=True
            )
            uniq_rows = letters[first_idx]
        else:
            uniq_rows, inverse = np.unique(letters, axis=0, return_inverse=True)
        inverse = inverse.reshape(-1)
        stored_words: list[str] = []
        word_ok = np.empty(uniq_rows.shape[0], dtype=bool)
        for k in range(uniq_rows.shape[0]):
            cache_key = uniq_rows[k].tobytes()
            hit = verdicts.get(cache_key)
            if hit is None:
                word = indices_to_word(uniq_rows[k])
                ok = _word_rejection(word, params.alphabet_size, params.variant, filters) is None
                stored = compress(word) if params.compression else word
                hit = (stored, ok)
                verdicts[cache_key] = hit
            stored_words.append(hit[0])
            word_ok[k] = hit[1]

        kept = word_ok[inverse] & (window_range >= filters.min_range)
        kept_idx = np.nonzero(kept)[0]
        if kept_idx.size == 0:
            continue

        if scheme.mode == "none":
            bands = None
        elif scheme.mode == "appliance":
            bands = np.searchsorted(cutoffs, window_range[kept_idx], side="left")
            if bands.max() >= cutoffs.shape[0]:
                worst = kept_idx[int(np.argmax(bands))]
                raise MeterDataError(
                    f"household {day.household_id} {day.date} slot {int(worst)}: "
                    f"window range {window_range[worst]:g} W exceeds the top band "
                    f"cutoff {cutoffs[-1]:g} W"
                )
        else:
            low, high = house_stats
            span = high - low
            if span == 0.0:
                bands = np.zeros(kept_idx.size, dtype=np.int64)
            else:
                scaled = (window_range[kept_idx] - low) / span * PER_HOUSE_BAND_COUNT
                bands = np.minimum(scaled.astype(np.int64), PER_HOUSE_BAND_COUNT - 1)

        # Group kept windows into runs of equal (word, band); start slots stay
        # ascending within each run, so occurrence lists keep (date, slot) order.
        inv_kept = inverse[kept_idx]
        if bands is None:
            order = np.argsort(inv_kept, kind="stable")
        else:
            order = np.lexsort((kept_idx, bands, inv_kept))
        slots = kept_idx[order]
        inv_o = inv_kept[order]
        band_o = None if bands is None else bands[order]
        if bands is None:
            change = np.nonzero(np.diff(inv_o))[0] + 1
        else:
            change = np.nonzero((np.diff(inv_o) != 0) | (np.diff(band_o) != 0))[0] + 1
        bounds = [0, *change.tolist(), slots.size]
        slot_list = slots.tolist()
        wr_list = window_range[slots].tolist()
        dr_list = diff_range[slots].tolist()
        date = day.date
        for g0, g1 in zip(bounds, bounds[1:]):
            key = MotifKey(
                stored_words[inv_o[g0]],
                None if band_o is None else int(band_o[g0]),
            )
            entries.setdefault(key, []).extend(
                Occurrence(date, s, w, d)
                for s, w, d in zip(slot_list[g0:g1], wr_list[g0:g1], dr_list[g0:g1])
            )
    return entries


def mine_dataset(
    data: Dataset,
    params: ParameterSet,
    filters: "FilterConfig | None" = None,
    scheme: "BandScheme | None" = None,
    *,
    threads: int = 1,
) -> MotifCatalog:
    """Mine every household of an aligned dataset into one catalog.

    Households are independent, so the scan parallelizes across them; results
    merge in sorted household order, making output identical for any thread
    count.
    """
    filters = filters or FilterConfig()
    scheme = scheme or scheme_for(params)
    if scheme.mode != params.range_mode:
        raise ValueError(
            f"band scheme mode {scheme.mode!r} disagrees with params.range_mode "
            f"{params.range_mode!r}"
        )
    households = data.households()
    catalog = MotifCatalog(
        params, filters, scheme, {h: data.day_count(h) for h in households}
    )

    def work(household_id: str) -> dict[MotifKey, list[Occurrence]]:
        return _mine_household(data.days(household_id), params, filters, scheme)

    if threads > 1 and len(households) > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            results = list(pool.map(work, households))
    else:
        results = [work(h) for h in households]
    for household_id, entries in zip(households, results):
        if entries:
            catalog.entries[household_id] = entries
    return catalog


def write_catalog(catalog: MotifCatalog, path) -> None:
    header = {
        "format": CATALOG_FORMAT,
        "version": CATALOG_VERSION,
        "tool": f"metermotifs {VERSION}",
        "params": catalog.params.as_dict(),
        "filters": {
            "min_range": catalog.filters.min_range,
            "middle_prefix_len": catalog.filters.middle_prefix_len,
        },
        "band_scheme": {
            "mode": catalog.scheme.mode,
            "cutoffs": list(catalog.scheme.cutoffs),
        },
        "day_counts": {h: catalog.day_counts[h] for h in catalog.households()},
    }
    with open(path, "w", encoding="utf-8") as out:
        out.write(json.dumps(header, separators=(",", ":")) + "\n")
        for household_id in sorted(catalog.entries):
            keys = catalog.entries[household_id]
            for key in sorted(keys, key=lambda k: (k.word, k.band_sort())):
                occs = sorted(keys[key], key=lambda o: (o.date, o.start_slot))
                record = {
                    "household": household_id,
                    "word": key.word,
                    "band": key.band,
                    "occurrences": [
                        {
                            "date": o.date.isoformat(),
                            "start_slot": o.start_slot,
                            "window_range": o.window_range,
                            "diff_range": o.diff_range,
                        }
                        for o in occs
                    ],
                }
                out.write(json.dumps(record, separators=(",", ":")) + "\n")


def read_catalog(path) -> MotifCatalog:
    with open(path, encoding="utf-8") as handle:
        header = json.loads(handle.readline())
        if header.get("format") != CATALOG_FORMAT:
            raise ValueError(f"{path}: not a {CATALOG_FORMAT} file")
        if header.get("version") != CATALOG_VERSION:
            raise ValueError(f"{path}: unsupported catalog version {header.get('version')}")
        params = ParameterSet.from_dict(header["params"])
        filters = FilterConfig(
            min_range=float(header["filters"]["min_range"]),
            middle_prefix_len=int(header["filters"]["middle_prefix_len"]),
        )
        scheme = BandScheme(
            mode=header["band_scheme"]["mode"],
            cutoffs=tuple(header["band_scheme"]["cutoffs"]),
        )
        catalog = MotifCatalog(params, filters, scheme, header.get("day_counts", {}))
        for line in handle:
            if not line.strip():
                continue
            record = json.loads(line)
            band = record["band"]
            key = MotifKey(record["word"], None if band is None else int(band))
            for occ in record["occurrences"]:
                catalog.add(
                    record["household"],
                    key,
                    Occurrence(
                        dt.date.fromisoformat(occ["date"]),
                        int(occ["start_slot"]),
                        float(occ["window_range"]),
                        float(occ["diff_range"]),
                    ),
                )
    return catalog

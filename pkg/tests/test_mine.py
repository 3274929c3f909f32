"""Mining: window extraction, interest filters, banding, catalog assembly.

The heavy lifting here is a straight-line brute-force oracle, written from
scratch with pure-Python loops and none of the library's symbolization
helpers, which must agree with mine_dataset exactly.
"""

import datetime as dt

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from metermotifs import ingest, mine
from metermotifs.params import (
    APPLIANCE_CUTOFFS,
    SLOTS_PER_DAY,
    BandScheme,
    FilterConfig,
    ParameterSet,
)

LETTERS = "abcdefghijklmnopqrstuvwxy"
D1 = dt.date(2011, 3, 1)
D2 = dt.date(2011, 3, 2)


# ------------------------------------------------------- brute-force oracle


def oracle_word(window, alphabet_size, variant, normalization, house):
    """Symbolize one window with plain loops: variant, min-max scale, bins."""
    if variant == "raw":
        if normalization == "within_household":
            lo, hi = house
        else:
            lo, hi = min(window), max(window)
        span = hi - lo
        if span == 0.0:
            norm = [0.5] * len(window)
        else:
            norm = [(v - lo) / span for v in window]
    else:
        deltas = [window[i + 1] - window[i] for i in range(len(window) - 1)]
        if normalization == "within_household":
            scale = house
        else:
            scale = max(abs(d) for d in deltas)
        if scale == 0.0:
            norm = [0.5] * len(deltas)
        else:
            norm = [(d / scale + 1.0) / 2.0 for d in deltas]
    return "".join(LETTERS[min(int(v * alphabet_size), alphabet_size - 1)] for v in norm)


def oracle_rejection(word, alphabet_size, variant, min_range, window_range, prefix_len=2):
    """First-principles filter rules, in the documented precedence order."""
    if window_range < min_range:
        return "below-min-range"
    mid = LETTERS[(alphabet_size - 1) // 2]
    if len(word) >= prefix_len and set(word[:prefix_len]) == {mid}:
        return "middle-prefix"
    if variant == "difference":
        if min(word) >= mid and max(word) > mid:
            return "monotone-increasing"
        if max(word) <= mid and min(word) < mid:
            return "monotone-decreasing"
    else:
        nondecreasing = all(x <= y for x, y in zip(word, word[1:]))
        nonincreasing = all(x >= y for x, y in zip(word, word[1:]))
        if nondecreasing and word[0] != word[-1]:
            return "monotone-increasing"
        if nonincreasing and word[0] != word[-1]:
            return "monotone-decreasing"
    return None


def oracle_compress(word):
    out = ""
    for letter in word:
        if not out or letter != out[-1]:
            out += letter
    return out


def oracle_mine(days, p, min_range=100.0):
    """Nested-loop reimplementation of the whole mining pass for one household.

    Returns sorted rows shaped like MotifCatalog.flatten().
    """
    w = p.motif_len
    house = None
    if p.normalization == "within_household":
        if p.variant == "raw":
            house = (
                min(v for d in days for v in d.readings),
                max(v for d in days for v in d.readings),
            )
        else:
            house = max(
                abs(d.readings[i + 1] - d.readings[i])
                for d in days
                for i in range(len(d.readings) - 1)
            )
    if p.range_mode == "per_house":
        surviving = []
        for d in days:
            for s in range(len(d.readings) - w + 1):
                win = list(d.readings[s : s + w])
                rng = max(win) - min(win)
                if rng >= min_range:
                    surviving.append(rng)
        stats = (min(surviving), max(surviving)) if surviving else None

    rows = []
    for d in days:
        for s in range(len(d.readings) - w + 1):
            win = list(d.readings[s : s + w])
            rng = max(win) - min(win)
            deltas = [win[i + 1] - win[i] for i in range(w - 1)]
            drng = max(deltas) - min(deltas)
            word = oracle_word(win, p.alphabet_size, p.variant, p.normalization, house)
            if oracle_rejection(word, p.alphabet_size, p.variant, min_range, rng):
                continue
            if p.range_mode == "none":
                band = -1
            elif p.range_mode == "appliance":
                band = next(
                    i for i, cutoff in enumerate(APPLIANCE_CUTOFFS) if rng <= cutoff
                )
            else:
                lo, hi = stats
                band = 0 if hi == lo else min(int((rng - lo) / (hi - lo) * 5), 4)
            stored = oracle_compress(word) if p.compression else word
            rows.append(
                (d.household_id, stored, band, d.date.isoformat(), s, rng, drng)
            )
    rows.sort()
    return rows


GRID_CORNERS = [
    ParameterSet(),
    ParameterSet(alphabet_size=7, motif_len=4, variant="raw", range_mode="none"),
    ParameterSet(alphabet_size=9, motif_len=9, normalization="within_household", range_mode="per_house"),
    ParameterSet(alphabet_size=5, motif_len=12, variant="raw", normalization="within_household", compression=False, range_mode="per_house"),
    ParameterSet(alphabet_size=7, motif_len=6, variant="difference", normalization="within_household", range_mode="appliance"),
]


@pytest.mark.parametrize("p", GRID_CORNERS, ids=lambda p: p.label)
def test_mine_matches_brute_force_oracle(p):
    rng = np.random.default_rng(hash(p.label) % 2**32)
    days = [
        ingest.DaySeries("h1", D1, rng.uniform(0.0, 4000.0, SLOTS_PER_DAY)),
        ingest.DaySeries("h1", D2, rng.uniform(0.0, 4000.0, SLOTS_PER_DAY)),
    ]
    catalog = mine.mine_dataset(ingest.Dataset(days), p)
    assert catalog.flatten() == oracle_mine(days, p)


def test_mine_oracle_on_spiky_data():
    """Repeat the equivalence on data with long flat stretches and step edges,
    where degenerate windows and boundary-exact bin values actually occur."""
    rng = np.random.default_rng(41)
    steps = np.repeat(rng.choice([0.0, 100.0, 250.0, 1200.0, 2900.0], size=60), 5)[:SLOTS_PER_DAY]
    days = [ingest.DaySeries("h1", D1, steps)]
    for p in GRID_CORNERS:
        catalog = mine.mine_dataset(ingest.Dataset(days), p)
        assert catalog.flatten() == oracle_mine(days, p)


# ------------------------------------------------------------- windows


def test_window_counts():
    period = np.arange(48.0)
    assert len(mine.extract_windows(period, 6)) == 43
    day = np.arange(288.0)
    for w in (4, 6, 9, 12):
        views = mine.extract_windows(day, w)
        assert len(views) == SLOTS_PER_DAY - w + 1
        assert views[0].start_slot == 0
        assert views[-1].start_slot == SLOTS_PER_DAY - w


def test_extract_windows_content():
    day = ingest.DaySeries("h1", D1, np.arange(288.0))
    views = mine.extract_windows(day, 4)
    assert views[10].household_id == "h1"
    assert views[10].date == D1
    np.testing.assert_array_equal(views[10].readings, [10.0, 11.0, 12.0, 13.0])


def test_extract_windows_bad_length():
    with pytest.raises(ValueError):
        mine.extract_windows(np.arange(288.0), 289)
    with pytest.raises(ValueError):
        mine.extract_windows(np.arange(288.0), 1)


def test_window_ranges_examples():
    assert mine.window_ranges(np.array([100.0, 100.0, 100.0, 100.0])) == (0.0, 0.0)
    assert mine.window_ranges(np.array([0.0, 500.0, 200.0, 200.0])) == (500.0, 800.0)


@given(st.lists(st.floats(0, 1e5, allow_nan=False), min_size=2, max_size=12))
def test_window_ranges_match_scan(values):
    wr, dr = mine.window_ranges(np.array(values))
    deltas = [values[i + 1] - values[i] for i in range(len(values) - 1)]
    assert wr == max(values) - min(values)
    assert dr == max(deltas) - min(deltas)


# ------------------------------------------------------------- banding


def test_appliance_bands():
    scheme = BandScheme(mode="appliance")
    assert mine.band_for(250.0, scheme) == 0
    assert mine.band_for(300.0, scheme) == 0  # first cutoff >= 300 is 300 itself
    assert mine.band_for(2000.0, scheme) == 2
    assert mine.band_for(60000.0, scheme) == 4
    with pytest.raises(mine.MeterDataError, match="60000"):
        mine.band_for(60001.0, scheme)


def test_per_house_bands():
    scheme = BandScheme(mode="per_house")
    stats = (100.0, 1100.0)  # five 200 W wide bands: 100-300, 300-500, ...
    assert mine.band_for(350.0, scheme, stats) == 1
    assert mine.band_for(100.0, scheme, stats) == 0
    assert mine.band_for(300.0, scheme, stats) == 1  # internal boundary goes up
    assert mine.band_for(1100.0, scheme, stats) == 4  # top value into last band
    assert mine.band_for(500.0, scheme, (500.0, 500.0)) == 0  # degenerate span


def test_band_none():
    assert mine.band_for(1234.5, BandScheme(mode="none")) is None


def test_per_house_needs_stats():
    with pytest.raises(ValueError):
        mine.band_for(100.0, BandScheme(mode="per_house"))


# ------------------------------------------------------------- filters


def test_filter_examples():
    f = FilterConfig()
    assert mine.is_interesting("ccccca", 200.0, f, 5) == (False, "middle-prefix")
    assert mine.is_interesting("ccccac", 200.0, f, 5) == (False, "middle-prefix")
    assert mine.is_interesting("abcde", 500.0, f, 5) == (False, "monotone-increasing")
    assert mine.is_interesting("edcba", 500.0, f, 5) == (False, "monotone-decreasing")
    assert mine.is_interesting("acbca", 50.0, f, 5) == (False, "below-min-range")
    assert mine.is_interesting("cacbc", 500.0, f, 5) == (True, None)


def test_filter_difference_monotone():
    f = FilterConfig()
    # letters are signed changes: at-or-above middle with one above = all rises
    assert mine.is_interesting("cde", 500.0, f, 5, variant="difference") == (
        False,
        "monotone-increasing",
    )
    assert mine.is_interesting("bcc", 500.0, f, 5, variant="difference") == (
        False,
        "monotone-decreasing",
    )
    assert mine.is_interesting("dcb", 500.0, f, 5, variant="difference") == (True, None)


def test_filter_plateau_counts_as_monotone():
    f = FilterConfig()
    assert mine.is_interesting("abbcc", 500.0, f, 5) == (False, "monotone-increasing")


@settings(max_examples=200)
@given(st.text(alphabet="abcde", min_size=2, max_size=8), st.floats(0, 5000, allow_nan=False))
def test_filters_match_oracle(word, window_range):
    f = FilterConfig()
    for variant in ("raw", "difference"):
        keep, reason = mine.is_interesting(word, window_range, f, 5, variant=variant)
        expected = oracle_rejection(word, 5, variant, f.min_range, window_range)
        assert reason == expected
        assert keep == (expected is None)


def test_exhaustive_word_filter_check():
    """Every length-4 word over a 5-letter alphabet, against the oracle."""
    f = FilterConfig()
    for i in range(5**4):
        digits = [(i // 5**k) % 5 for k in (3, 2, 1, 0)]
        word = "".join("abcde"[d] for d in digits)
        for variant in ("raw", "difference"):
            got = mine.is_interesting(word, 500.0, f, 5, variant=variant)
            expected = oracle_rejection(word, 5, variant, f.min_range, 500.0)
            assert got == ((expected is None), expected), word


# ------------------------------------------------------------- mining


def base_day(date=D1, base=200.0):
    return np.full(SLOTS_PER_DAY, base)


def test_flat_household_yields_empty_catalog():
    data = ingest.Dataset([ingest.DaySeries("h1", D1, base_day())])
    catalog = mine.mine_dataset(data, ParameterSet())
    assert catalog.total_occurrences() == 0
    assert catalog.household_entries("h1") == {}
    assert catalog.households() == ["h1"]  # the household is still known


def test_rectangular_pulse_motif():
    vals = base_day()
    vals[84:87] = 1200.0  # 15 minutes at 1200 W starting 07:00
    data = ingest.Dataset([ingest.DaySeries("h1", D1, vals)])
    catalog = mine.mine_dataset(data, ParameterSet())
    entries = catalog.household_entries("h1")
    assert entries, "pulse must survive the filters"
    starts = {o.start_slot for occs in entries.values() for o in occs}
    assert starts and starts <= set(range(82, 86))
    assert all(key.band == 1 for key in entries)  # 1000 W range -> 300-1000 W band


def test_two_identical_days_double_counts():
    rng = np.random.default_rng(11)
    vals = rng.uniform(0, 2500, SLOTS_PER_DAY)
    one = mine.mine_dataset(
        ingest.Dataset([ingest.DaySeries("h1", D1, vals)]), ParameterSet()
    )
    two = mine.mine_dataset(
        ingest.Dataset(
            [ingest.DaySeries("h1", D1, vals), ingest.DaySeries("h1", D2, vals)]
        ),
        ParameterSet(),
    )
    ones = one.household_entries("h1")
    twos = two.household_entries("h1")
    assert set(ones) == set(twos)
    for key, occs in twos.items():
        assert len(occs) == 2 * len(ones[key])


def test_catalog_invariant_under_household_order_and_threads(desk_data, desk_catalog):
    reversed_data = ingest.Dataset(
        [day for hh in reversed(desk_data.households()) for day in desk_data.days(hh)]
    )
    permuted = mine.mine_dataset(reversed_data, ParameterSet())
    assert permuted.flatten() == desk_catalog.flatten()
    threaded = mine.mine_dataset(desk_data, ParameterSet(), threads=4)
    assert threaded.flatten() == desk_catalog.flatten()


def test_stored_occurrences_respect_filters(desk_catalog):
    w = desk_catalog.params.motif_len
    for hh in desk_catalog.households():
        for key, occs in desk_catalog.household_entries(hh).items():
            for o in occs:
                assert o.window_range >= desk_catalog.filters.min_range
                assert 0 <= o.start_slot <= SLOTS_PER_DAY - w


def test_range_above_top_cutoff_is_data_error():
    vals = base_day()
    vals[100:104] = 70000.0  # implausible 70 kW spike
    data = ingest.Dataset([ingest.DaySeries("h9", D1, vals)])
    with pytest.raises(mine.MeterDataError, match="h9") as err:
        mine.mine_dataset(data, ParameterSet())
    assert "2011-03-01" in str(err.value)


def test_scheme_must_match_params():
    data = ingest.Dataset([ingest.DaySeries("h1", D1, base_day())])
    with pytest.raises(ValueError, match="range_mode"):
        mine.mine_dataset(data, ParameterSet(), scheme=BandScheme(mode="none"))


def test_catalog_file_round_trip(tmp_path, desk_catalog):
    path = tmp_path / "catalog.jsonl"
    mine.write_catalog(desk_catalog, path)
    loaded = mine.read_catalog(path)
    assert loaded.params == desk_catalog.params
    assert loaded.filters == desk_catalog.filters
    assert loaded.scheme == desk_catalog.scheme
    assert loaded.day_counts == desk_catalog.day_counts
    assert loaded.flatten() == desk_catalog.flatten()


def test_catalog_header_is_first_line(tmp_path, desk_catalog):
    path = tmp_path / "catalog.jsonl"
    mine.write_catalog(desk_catalog, path)
    import json

    header = json.loads(path.read_text().splitlines()[0])
    assert header["format"] == mine.CATALOG_FORMAT
    assert header["params"]["alphabet_size"] == 5
    assert header["day_counts"]["h01"] == 65

"""Turn short windows of watt readings into symbolic words.

The pipeline is deliberately simple: optionally take adjacent differences,
normalize (per window or against household-level bounds), then map each
value to one letter of a small odd alphabet with equal-width bins. There is
no PAA step: one reading becomes one letter. Normalization is min-max, not
z-scoring, so bins are equal-width over the observed range rather than
Gaussian-equiprobable breakpoints.
"""

from __future__ import annotations

import numpy as np

from .params import check_alphabet_size

ALPHABET = "abcdefghijklmnopqrstuvwxy"


def middle_letter(alphabet_size: int) -> str:
    check_alphabet_size(alphabet_size)
    return ALPHABET[(alphabet_size - 1) // 2]


def difference_series(window) -> np.ndarray:
    """Adjacent deltas: out[i] = window[i+1] - window[i]."""
    window = np.asarray(window, dtype=np.float64)
    if window.shape[-1] < 2:
        raise ValueError("difference series needs at least 2 readings")
    return np.diff(window, axis=-1)


def normalize_values(values, mode: str) -> np.ndarray:
    """Normalize a window's values.

    minmax_unit maps onto [0, 1] with (v - min)/(max - min); a constant
    window maps to all 0.5. symmetric_unit (for difference series) maps onto
    [-1, 1] with v / max(|v|); an all-zero window maps to all 0.0, keeping
    "no change" at the centre.
    """
    values = np.asarray(values, dtype=np.float64)
    if values.size == 0:
        raise ValueError("cannot normalize an empty window")
    if mode == "minmax_unit":
        low = values.min()
        span = values.max() - low
        if span == 0.0:
            return np.full_like(values, 0.5)
        return (values - low) / span
    if mode == "symmetric_unit":
        scale = np.abs(values).max()
        if scale == 0.0:
            return np.zeros_like(values)
        return values / scale
    raise ValueError(f"unknown normalization mode {mode!r}")


def household_bounds(day_arrays) -> tuple[float, float]:
    """Global (min, max) watts over every reading of one household."""
    low = float("inf")
    high = float("-inf")
    for day in day_arrays:
        day = np.asarray(day, dtype=np.float64)
        low = min(low, float(day.min()))
        high = max(high, float(day.max()))
    if low > high:
        raise ValueError("household has no readings")
    return low, high


def household_diff_scale(day_arrays) -> float:
    """Largest |adjacent delta| within any single day of one household.

    Deltas are taken per day so that the jump between the last reading of one
    day and the first of the next (which no window ever sees) cannot set the
    scale.
    """
    scale = -1.0
    for day in day_arrays:
        day = np.asarray(day, dtype=np.float64)
        if day.size >= 2:
            scale = max(scale, float(np.abs(np.diff(day)).max()))
    if scale < 0.0:
        raise ValueError("household has no day with at least 2 readings")
    return scale


def scale_values(values, low: float, high: float) -> np.ndarray:
    """Min-max normalize against fixed bounds; degenerate bounds map to 0.5."""
    values = np.asarray(values, dtype=np.float64)
    span = high - low
    if span == 0.0:
        return np.full_like(values, 0.5)
    return (values - low) / span


def scale_symmetric(values, scale: float) -> np.ndarray:
    """Divide by a fixed |delta| scale; a zero scale maps everything to 0.0."""
    values = np.asarray(values, dtype=np.float64)
    if scale == 0.0:
        return np.zeros_like(values)
    return values / scale


def letter_indices(normalized, alphabet_size: int, *, symmetric: bool = False) -> np.ndarray:
    """Map normalized values to letter indices with equal-width bins.

    Values must lie in [0, 1] (or [-1, 1] with symmetric=True, remapped by
    (v + 1) / 2 first). A value exactly on a bin boundary goes to the higher
    bin; 1.0 goes to the last bin; 0.5 is always the middle letter.
    """
    check_alphabet_size(alphabet_size)
    values = np.asarray(normalized, dtype=np.float64)
    if symmetric:
        values = (values + 1.0) / 2.0
    if values.size and (values.min() < 0.0 or values.max() > 1.0):
        raise ValueError("normalized values must lie in [0, 1]")
    return np.minimum((values * alphabet_size).astype(np.int64), alphabet_size - 1)


def indices_to_word(indices) -> str:
    return "".join(ALPHABET[i] for i in indices)


def symbolize(normalized, alphabet_size: int, *, symmetric: bool = False) -> str:
    """One letter per value; see letter_indices for the binning rules."""
    return indices_to_word(letter_indices(normalized, alphabet_size, symmetric=symmetric))


def word_for_window(
    window,
    alphabet_size: int,
    variant: str,
    *,
    house_low: "float | None" = None,
    house_high: "float | None" = None,
    house_diff: "float | None" = None,
) -> str:
    """Full scalar pipeline for one window: variant, normalization, letters.

    Household bounds (house_low/house_high for raw, house_diff for the
    difference variant) switch normalization from within-window to
    within-household; the per-window normalization step is then skipped.
    """
    window = np.asarray(window, dtype=np.float64)
    if variant == "raw":
        if house_low is not None or house_high is not None:
            if house_low is None or house_high is None:
                raise ValueError("household bounds need both low and high")
            normalized = scale_values(window, house_low, house_high)
        else:
            normalized = normalize_values(window, "minmax_unit")
        return symbolize(normalized, alphabet_size)
    if variant == "difference":
        deltas = difference_series(window)
        if house_diff is not None:
            normalized = scale_symmetric(deltas, house_diff)
        else:
            normalized = normalize_values(deltas, "symmetric_unit")
        return symbolize(normalized, alphabet_size, symmetric=True)
    raise ValueError(f"unknown variant {variant!r}")


def compress(word: str) -> str:
    """Collapse runs of identical adjacent letters: abcccb -> abcb."""
    if not word:
        return word
    out = [word[0]]
    for letter in word[1:]:
        if letter != out[-1]:
            out.append(letter)
    return "".join(out)

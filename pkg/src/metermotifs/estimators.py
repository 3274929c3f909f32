"""Estimator-style wrappers over the functional pipeline.

WindowSymbolizer turns day series into per-window symbol words and follows
the fit/transform protocol, so it drops into sklearn-style compositions.
MotifMiner wraps the full mining pass behind fit() with the catalog exposed
as a fitted attribute. Both keep constructor arguments verbatim and validate
only in fit, so get_params/set_params/clone behave as sklearn expects.
"""

from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.utils.validation import check_is_fitted

from .ingest import Dataset
from .mine import MotifCatalog, day_words, mine_dataset
from .params import FilterConfig, ParameterSet
from .symbolize import household_bounds, household_diff_scale


def _as_day_arrays(X, motif_len: int) -> list[np.ndarray]:
    """Validate X into a list of 1-D float day arrays.

    Accepts a Dataset, a 2-D array (rows are days), or an iterable of 1-D
    sequences. Days may differ in length but each needs at least motif_len
    finite readings.
    """
    if isinstance(X, Dataset):
        days = [day.readings for day in X]
    elif isinstance(X, np.ndarray) and X.ndim == 2:
        days = list(X)
    else:
        days = list(X)
    arrays = []
    for i, day in enumerate(days):
        arr = np.asarray(day, dtype=np.float64)
        if arr.ndim != 1:
            raise ValueError(f"day {i} is not 1-dimensional (shape {arr.shape})")
        if arr.shape[0] < motif_len:
            raise ValueError(
                f"day {i} has {arr.shape[0]} readings, fewer than motif_len {motif_len}"
            )
        if not np.isfinite(arr).all():
            raise ValueError(f"day {i} contains non-finite readings")
        arrays.append(arr)
    if not arrays:
        raise ValueError("X contains no days")
    return arrays


class WindowSymbolizer(BaseEstimator, TransformerMixin):
    """Symbolize sliding windows of day series.

    fit learns the household-level normalization constants when
    normalization="within_household" (a no-op otherwise); transform maps each
    day to its list of window words.
    """

    def __init__(
        self,
        alphabet_size: int = 5,
        motif_len: int = 6,
        variant: str = "difference",
        normalization: str = "within_window",
        compression: bool = False,
    ):
        self.alphabet_size = alphabet_size
        self.motif_len = motif_len
        self.variant = variant
        self.normalization = normalization
        self.compression = compression

    def _params(self) -> ParameterSet:
        return ParameterSet(
            alphabet_size=self.alphabet_size,
            motif_len=self.motif_len,
            variant=self.variant,
            normalization=self.normalization,
            compression=self.compression,
            range_mode="none",
        )

    def fit(self, X, y=None):
        params = self._params()
        days = _as_day_arrays(X, params.motif_len)
        if params.normalization == "within_household":
            if params.variant == "raw":
                self.scale_ = household_bounds(days)
            else:
                self.scale_ = household_diff_scale(days)
        else:
            self.scale_ = None
        self.n_days_in_ = len(days)
        return self

    def transform(self, X) -> list[list[str]]:
        check_is_fitted(self, "scale_")
        params = self._params()
        days = _as_day_arrays(X, params.motif_len)
        return [day_words(day, params, self.scale_) for day in days]


class MotifMiner(BaseEstimator):
    """Mine a motif catalog from an aligned Dataset.

    fit runs the full pipeline; the result is available as catalog_ with
    per-household day counts and occurrence lists.
    """

    def __init__(
        self,
        alphabet_size: int = 5,
        motif_len: int = 6,
        variant: str = "difference",
        normalization: str = "within_window",
        compression: bool = True,
        range_mode: str = "appliance",
        min_range: float = 100.0,
        middle_prefix_len: int = 2,
        threads: int = 1,
    ):
        self.alphabet_size = alphabet_size
        self.motif_len = motif_len
        self.variant = variant
        self.normalization = normalization
        self.compression = compression
        self.range_mode = range_mode
        self.min_range = min_range
        self.middle_prefix_len = middle_prefix_len
        self.threads = threads

    def fit(self, X, y=None):
        if not isinstance(X, Dataset):
            raise TypeError(f"MotifMiner.fit expects a Dataset, got {type(X).__name__}")
        params = ParameterSet(
            alphabet_size=self.alphabet_size,
            motif_len=self.motif_len,
            variant=self.variant,
            normalization=self.normalization,
            compression=self.compression,
            range_mode=self.range_mode,
        )
        filters = FilterConfig(
            min_range=self.min_range, middle_prefix_len=self.middle_prefix_len
        )
        self.catalog_: MotifCatalog = mine_dataset(
            X, params, filters, threads=self.threads
        )
        self.params_ = params
        return self

    def top_motifs(self, household_id: str, z: int = 3):
        check_is_fitted(self, "catalog_")
        from .evaluate import top_motifs

        return top_motifs(self.catalog_.household_entries(household_id), z)

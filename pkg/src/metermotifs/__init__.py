"""Motif mining over 5-minute electricity meter readings.

Pipeline: ingest raw readings onto a fixed day grid, symbolize sliding
windows into short words, filter and band them into a per-household motif
catalog, then score parameter sets by how often their top motifs recur.
"""

from .params import (
    APPLIANCE_CUTOFFS,
    DEFAULT_REGIONS,
    SLOTS_PER_DAY,
    SLOT_SECONDS,
    VERSION,
    BandScheme,
    FilterConfig,
    ParameterSet,
    RegionConfig,
    standard_grid,
)
from .ingest import (
    Dataset,
    DaySeries,
    RawReading,
    align_readings,
    align_to_grid,
    filter_days,
    parse_readings,
    read_cache,
    write_cache,
)
# the symbolize() function itself stays on the submodule so the
# metermotifs.symbolize module name is not shadowed
from .symbolize import compress, difference_series, normalize_values
from .mine import (
    MeterDataError,
    MotifCatalog,
    MotifKey,
    Occurrence,
    band_for,
    extract_windows,
    is_interesting,
    mine_dataset,
    read_catalog,
    window_ranges,
    write_catalog,
)
from .evaluate import (
    RankCurve,
    SweepReport,
    emit_plot_data,
    measure_value,
    rank_curve,
    region_score,
    run_sweep,
    top_motifs,
    write_summary,
)
from .synth import (
    ActivityTemplate,
    FridgeSpec,
    HouseholdProfile,
    TruthInstance,
    generate,
    generate_desk_fixture,
    recovery_report,
)
from .estimators import MotifMiner, WindowSymbolizer

__version__ = VERSION

__all__ = [
    "APPLIANCE_CUTOFFS",
    "DEFAULT_REGIONS",
    "SLOTS_PER_DAY",
    "SLOT_SECONDS",
    "VERSION",
    "ActivityTemplate",
    "BandScheme",
    "Dataset",
    "DaySeries",
    "FilterConfig",
    "FridgeSpec",
    "HouseholdProfile",
    "MeterDataError",
    "MotifCatalog",
    "MotifKey",
    "MotifMiner",
    "Occurrence",
    "ParameterSet",
    "RankCurve",
    "RawReading",
    "RegionConfig",
    "SweepReport",
    "TruthInstance",
    "WindowSymbolizer",
    "align_readings",
    "align_to_grid",
    "band_for",
    "compress",
    "difference_series",
    "emit_plot_data",
    "extract_windows",
    "filter_days",
    "generate",
    "generate_desk_fixture",
    "is_interesting",
    "measure_value",
    "mine_dataset",
    "normalize_values",
    "parse_readings",
    "rank_curve",
    "read_cache",
    "read_catalog",
    "recovery_report",
    "region_score",
    "run_sweep",
    "standard_grid",
    "top_motifs",
    "window_ranges",
    "write_cache",
    "write_catalog",
    "write_summary",
]

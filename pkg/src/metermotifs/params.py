"""Parameter bundles shared across the pipeline, plus their validation rules."""

from __future__ import annotations

from dataclasses import dataclass, asdict

VERSION = "0.1.0"

SLOTS_PER_DAY = 288
SLOT_SECONDS = 300

VARIANTS = ("raw", "difference")
NORMALIZATIONS = ("within_window", "within_household")
RANGE_MODES = ("none", "per_house", "appliance")
MEASURES = ("per_day", "unique_days", "pct_days")

# Fixed watt cutoffs separating typical appliance classes; a window range above
# the last cutoff is treated as a data error rather than a legitimate band.
APPLIANCE_CUTOFFS = (300.0, 1000.0, 3000.0, 5000.0, 60000.0)
PER_HOUSE_BAND_COUNT = 5

_VARIANT_TAGS = {"raw": "raw", "difference": "diff"}
_NORMALIZATION_TAGS = {"within_window": "win", "within_household": "house"}


def check_alphabet_size(alphabet_size: int) -> None:
    """Reject alphabet sizes that cannot centre 'no change' on a middle letter."""
    if not isinstance(alphabet_size, int) or isinstance(alphabet_size, bool):
        raise ValueError(f"alphabet size must be an integer, got {alphabet_size!r}")
    if alphabet_size % 2 == 0 or alphabet_size < 3:
        raise ValueError(
            "alphabet size must be odd and at least 3 (an odd size keeps zero "
            f"change on the middle letter), got {alphabet_size}"
        )
    if alphabet_size > 25:
        raise ValueError(f"alphabet size must be at most 25, got {alphabet_size}")


def check_motif_len(motif_len: int) -> None:
    if not isinstance(motif_len, int) or isinstance(motif_len, bool):
        raise ValueError(f"motif length must be an integer, got {motif_len!r}")
    if not 2 <= motif_len <= SLOTS_PER_DAY:
        raise ValueError(
            f"motif length must be between 2 and {SLOTS_PER_DAY} slots, got {motif_len}"
        )


def check_choice(name: str, value: str, choices: tuple[str, ...]) -> None:
    if value not in choices:
        raise ValueError(f"{name} must be one of {choices}, got {value!r}")


@dataclass(frozen=True)
class ParameterSet:
    """One point of the mining configuration space.

    Defaults are the settings selected for ongoing analysis: difference
    series, compressed words, normalization within the window, appliance
    range bands, alphabet 5, motif length 6 (30 minutes).
    """

    alphabet_size: int = 5
    motif_len: int = 6
    variant: str = "difference"
    normalization: str = "within_window"
    compression: bool = True
    range_mode: str = "appliance"

    def __post_init__(self) -> None:
        check_alphabet_size(self.alphabet_size)
        check_motif_len(self.motif_len)
        check_choice("variant", self.variant, VARIANTS)
        check_choice("normalization", self.normalization, NORMALIZATIONS)
        check_choice("range_mode", self.range_mode, RANGE_MODES)

    @property
    def label(self) -> str:
        """Compact identifier used in report rows and file headers."""
        comp = "comp" if self.compression else "nocomp"
        return (
            f"a{self.alphabet_size}-l{self.motif_len}"
            f"-{_VARIANT_TAGS[self.variant]}-{_NORMALIZATION_TAGS[self.normalization]}"
            f"-{comp}-{self.range_mode}"
        )

    def as_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, data: dict) -> "ParameterSet":
        return cls(**data)


@dataclass(frozen=True)
class FilterConfig:
    """Interestingness thresholds applied to every candidate window."""

    min_range: float = 100.0
    middle_prefix_len: int = 2

    def __post_init__(self) -> None:
        if not self.min_range > 0:
            raise ValueError(f"min_range must be positive, got {self.min_range}")
        if self.middle_prefix_len < 1:
            raise ValueError(
                f"middle_prefix_len must be at least 1, got {self.middle_prefix_len}"
            )

    def as_dict(self) -> dict:
        return asdict(self)


@dataclass(frozen=True)
class BandScheme:
    """How window ranges are partitioned into bands."""

    mode: str = "appliance"
    cutoffs: tuple[float, ...] = APPLIANCE_CUTOFFS

    def __post_init__(self) -> None:
        check_choice("band mode", self.mode, RANGE_MODES)
        if len(self.cutoffs) < 1:
            raise ValueError("band cutoffs must be non-empty")
        if any(b <= a for a, b in zip(self.cutoffs, self.cutoffs[1:])):
            raise ValueError(f"band cutoffs must be strictly ascending, got {self.cutoffs}")
        object.__setattr__(self, "cutoffs", tuple(float(c) for c in self.cutoffs))

    def as_dict(self) -> dict:
        return {"mode": self.mode, "cutoffs": list(self.cutoffs)}


@dataclass(frozen=True)
class RegionConfig:
    """Interest region for one frequency measure: values in [y, x] over the top z ranks."""

    measure: str
    x: float
    y: float
    z: int = 3

    def __post_init__(self) -> None:
        check_choice("measure", self.measure, MEASURES)
        if not self.y < self.x:
            raise ValueError(f"region lower bound must be below upper, got y={self.y} x={self.x}")
        if self.z < 1:
            raise ValueError(f"region rank count must be at least 1, got {self.z}")


DEFAULT_REGIONS = (
    RegionConfig("per_day", x=2.0, y=0.3, z=3),
    RegionConfig("unique_days", x=65.0, y=10.0, z=3),
    RegionConfig("pct_days", x=90.0, y=20.0, z=3),
)

GRID_ALPHABET_SIZES = (5, 7, 9)
GRID_MOTIF_LENS = (4, 6, 9, 12)
# Each series treatment carries its own normalization: difference words are
# normalized within the window, while whole-household normalization replaces
# the per-window step on the raw series.
GRID_TREATMENTS = (("difference", "within_window"), ("raw", "within_household"))


def standard_grid() -> list[ParameterSet]:
    """The standard 72-point sweep grid (3 alphabets x 4 lengths x 2 treatments x 3 band modes)."""
    grid = []
    for alphabet_size in GRID_ALPHABET_SIZES:
        for motif_len in GRID_MOTIF_LENS:
            for variant, normalization in GRID_TREATMENTS:
                for range_mode in RANGE_MODES:
                    grid.append(
                        ParameterSet(
                            alphabet_size=alphabet_size,
                            motif_len=motif_len,
                            variant=variant,
                            normalization=normalization,
                            compression=True,
                            range_mode=range_mode,
                        )
                    )
    return grid

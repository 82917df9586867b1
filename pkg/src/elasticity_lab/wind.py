"""Wind-speed providers: empirical file, calibrated AR(2) surrogate,
synthetic AR(1), and shuffled versions of any of these."""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from datetime import datetime
from pathlib import Path
from typing import Optional

import numpy as np

from .errors import NonStationaryError, SeriesTooShortError
from .rng import Seed, spawn
from .series import ArModel, TimeSeries, read_series, shuffle, simulate_ar

# Synthetic series are stamped from this hour.
DEFAULT_START = datetime(2019, 1, 1, 0, 0)
DEFAULT_LENGTH = 9432
DEFAULT_AR1_ALPHA = 0.95

KINDS = ("empirical", "surrogate", "synthetic_ar1", "shuffled")


@dataclass(frozen=True)
class SurrogateCalibration:
    """Target moments and AR(2) structure of the surrogate wind, in m/s."""

    target_mean: float = 7.6
    target_std: float = 2.4
    ar_coefficients: tuple = (1.84, -0.85)
    clip_low: float = 2.2
    clip_high: float = 18.3

    def __post_init__(self):
        coeffs = tuple(float(c) for c in self.ar_coefficients)
        if len(coeffs) != 2:
            raise ValueError("surrogate wind needs exactly two AR coefficients")
        object.__setattr__(self, "ar_coefficients", coeffs)
        if not ArModel(0.0, coeffs).stationary:
            raise NonStationaryError(f"surrogate AR coefficients {coeffs} are not stationary")
        if not 0 < self.clip_low < self.target_mean < self.clip_high:
            raise ValueError("need 0 < clip_low < target_mean < clip_high")
        if self.target_std <= 0:
            raise ValueError("target_std must be positive")

    def model(self) -> ArModel:
        """Unclipped AR(2) whose stationary mean and std hit the targets."""
        unit = ArModel(0.0, self.ar_coefficients, 1.0).stationary_variance()
        return ArModel(
            self.target_mean * (1.0 - sum(self.ar_coefficients)),
            self.ar_coefficients,
            self.target_std**2 / unit,
        )


DEFAULT_CALIBRATION = SurrogateCalibration()


def load_wind(path) -> TimeSeries:
    """Read hourly wind speeds (m/s); negative or missing values are rejected."""
    return read_series(Path(path), label="wind", min_value=0.0)


def surrogate_wind(
    cal: SurrogateCalibration = DEFAULT_CALIBRATION,
    length: int = DEFAULT_LENGTH,
    seed: Seed = 0,
    clip: bool = True,
) -> TimeSeries:
    """AR(2) wind calibrated to ``cal`` and hard-clamped into its range.

    ``clip=False`` returns the same draw before clamping.
    """
    x = simulate_ar(cal.model(), length, seed).values
    if clip:
        x = np.clip(x, cal.clip_low, cal.clip_high)
    return TimeSeries(x, start=DEFAULT_START, label="wind")


def synthetic_ar1_wind(
    alpha: float = DEFAULT_AR1_ALPHA,
    mean: float = DEFAULT_CALIBRATION.target_mean,
    std: float = DEFAULT_CALIBRATION.target_std,
    length: int = DEFAULT_LENGTH,
    seed: Seed = 0,
) -> TimeSeries:
    if not abs(alpha) < 1:
        raise NonStationaryError(f"AR(1) coefficient must lie in (-1, 1), got {alpha}")
    if not std > 0:
        raise ValueError("std must be positive")
    model = ArModel(mean * (1.0 - alpha), (alpha,), std**2 * (1.0 - alpha**2))
    x = simulate_ar(model, length, seed).values
    return TimeSeries(x, start=DEFAULT_START, label="wind")


@dataclass(frozen=True)
class WindSpec:
    """Recipe for a wind series.

    ``kind`` selects the provider; ``base`` is the wrapped spec for
    ``shuffled``. ``length=None`` means "the whole file" for empirical wind.
    """

    kind: str = "surrogate"
    length: Optional[int] = DEFAULT_LENGTH
    seed: int = 0
    path: Optional[str] = None
    calibration: SurrogateCalibration = field(default=DEFAULT_CALIBRATION)
    alpha: float = DEFAULT_AR1_ALPHA
    mean: float = DEFAULT_CALIBRATION.target_mean
    std: float = DEFAULT_CALIBRATION.target_std
    base: Optional["WindSpec"] = None

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown wind kind {self.kind!r}; expected one of {KINDS}")
        if self.length is not None and self.length < 1:
            raise ValueError("length must be positive")
        if self.kind == "synthetic_ar1" and not abs(self.alpha) < 1:
            raise NonStationaryError(f"AR(1) coefficient must lie in (-1, 1), got {self.alpha}")
        if self.kind == "empirical" and not self.path:
            raise ValueError("empirical wind needs a file path")
        if self.kind == "shuffled" and self.base is None:
            raise ValueError("shuffled wind needs a base spec")

    def with_run(self, length: Optional[int], seed: int) -> "WindSpec":
        """Copy with a new length and seed, propagated into ``base``."""
        base = None if self.base is None else self.base.with_run(length, seed)
        return replace(self, length=length, seed=seed, base=base)

    def describe(self) -> str:
        if self.kind == "empirical":
            return f"empirical:{self.path}"
        if self.kind == "synthetic_ar1":
            return f"ar1:{self.alpha:g}"
        if self.kind == "shuffled":
            return f"shuffled:{self.base.describe()}"
        return "surrogate"

    @classmethod
    def parse(cls, text: str, length: Optional[int] = DEFAULT_LENGTH, seed: int = 0) -> "WindSpec":
        """Parse ``empirical:PATH``, ``surrogate``, ``ar1:ALPHA`` or ``shuffled:<spec>``."""
        text = text.strip()
        head, _, rest = text.partition(":")
        if head == "surrogate" and not rest:
            return cls("surrogate", length, seed)
        if head in ("ar1", "synthetic_ar1"):
            alpha = float(rest) if rest else DEFAULT_AR1_ALPHA
            return cls("synthetic_ar1", length, seed, alpha=alpha)
        if head == "empirical" and rest:
            return cls("empirical", length, seed, path=rest)
        if head == "shuffled" and rest:
            base = cls.parse(rest, length, seed)
            return cls("shuffled", base.length, seed, base=base)
        raise ValueError(f"cannot parse wind spec {text!r}")

    def autoregressive_coefficients(self) -> Optional[tuple]:
        """True AR coefficients of the generator, where they are known."""
        if self.kind == "synthetic_ar1":
            return (self.alpha,)
        if self.kind == "surrogate":
            return self.calibration.ar_coefficients
        if self.kind == "shuffled":
            return ()
        return None


def generate_wind(spec: WindSpec) -> TimeSeries:
    """Produce the series described by ``spec``; exactly ``spec.length`` values."""
    if spec.kind == "surrogate":
        return surrogate_wind(spec.calibration, spec.length, spec.seed)
    if spec.kind == "synthetic_ar1":
        return synthetic_ar1_wind(spec.alpha, spec.mean, spec.std, spec.length, spec.seed)
    if spec.kind == "empirical":
        series = load_wind(spec.path)
        if spec.length is None:
            return series
        if len(series) < spec.length:
            raise SeriesTooShortError(
                f"wind file has {len(series)} rows, {spec.length} requested"
            )
        return series.replace(series.values[: spec.length])
    base_seed, shuffle_seed = spawn(spec.seed, 2)
    base = spec.base.with_run(spec.length, int(base_seed.generate_state(1)[0]))
    return shuffle(generate_wind(base), shuffle_seed)


def clipped_fraction(cal: SurrogateCalibration, length: int, seed: Seed) -> float:
    """Share of surrogate samples altered by clamping."""
    raw = surrogate_wind(cal, length, seed, clip=False).values
    return float(np.mean((raw < cal.clip_low) | (raw > cal.clip_high)))


__all__ = [
    "DEFAULT_CALIBRATION",
    "SurrogateCalibration",
    "WindSpec",
    "clipped_fraction",
    "generate_wind",
    "load_wind",
    "surrogate_wind",
    "synthetic_ar1_wind",
]

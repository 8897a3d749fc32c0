"""
Load, validate and delay-embed scalar time series.

A series comes from a one- or two-column CSV (value, or time,value). The
reconstructed attractor is the usual delay embedding
(s[k], s[k+lag], ..., s[k+(dim-1)*lag]).
"""

import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import Tuple

import numpy as np
import pandas as pd
from sklearn.neighbors import NearestNeighbors

logger = logging.getLogger(__name__)

MAX_DIM = 16
MIN_DELAY_LENGTH = 32
FNN_RATIO = 10.0
IRREGULAR_STEP_RATIO = 1.01


class SeriesError(ValueError):
    """Input series is unreadable, malformed or unsuitable for the request."""


def _frozen(values) -> np.ndarray:
    arr = np.array(values, dtype=float)
    arr.flags.writeable = False
    return arr


@dataclass(frozen=True)
class ScalarSeries:
    samples: np.ndarray
    dt: float = 1.0
    label: str = ""

    def __post_init__(self):
        samples = _frozen(self.samples).ravel()
        if samples.size < 2:
            raise SeriesError(f"series needs at least 2 samples, got {samples.size}")
        if not np.all(np.isfinite(samples)):
            bad = int(np.flatnonzero(~np.isfinite(samples))[0])
            raise SeriesError(f"non-finite sample at index {bad}")
        if not self.dt > 0:
            raise SeriesError(f"dt must be positive, got {self.dt}")
        object.__setattr__(self, "samples", samples)
        object.__setattr__(self, "dt", float(self.dt))

    def __len__(self):
        return self.samples.size

    def shifted(self, offset: float = 0.0, scale: float = 1.0) -> "ScalarSeries":
        """Affine copy: scale * samples + offset."""
        return ScalarSeries(scale * self.samples + offset, self.dt, self.label)


@dataclass(frozen=True)
class EmbeddingConfig:
    lag: int
    dim: int

    def __post_init__(self):
        if int(self.lag) != self.lag or self.lag < 1:
            raise SeriesError(f"lag must be a positive integer, got {self.lag}")
        if int(self.dim) != self.dim or not 1 <= self.dim <= MAX_DIM:
            raise SeriesError(f"dim must be an integer in [1, {MAX_DIM}], got {self.dim}")

    @property
    def span(self) -> int:
        return (self.dim - 1) * self.lag

    def to_dict(self):
        return {"lag": int(self.lag), "dim": int(self.dim)}

    @classmethod
    def from_dict(cls, data):
        return cls(lag=int(data["lag"]), dim=int(data["dim"]))


@dataclass(frozen=True)
class EmbeddedAttractor:
    points: np.ndarray
    dim: int
    lag: int
    source_dt: float = 1.0

    def __post_init__(self):
        points = _frozen(self.points)
        if points.ndim != 2 or points.shape[1] != self.dim:
            raise SeriesError(f"points must have shape (N, {self.dim}), got {points.shape}")
        if not np.all(np.isfinite(points)):
            raise SeriesError("attractor contains non-finite coordinates")
        object.__setattr__(self, "points", points)

    def __len__(self):
        return self.points.shape[0]

    def coordinate(self, j: int) -> np.ndarray:
        return self.points[:, j]


@dataclass(frozen=True)
class DimensionEstimate:
    dim: int
    saturated: bool
    fnn_fractions: Tuple[float, ...] = field(default_factory=tuple)


def load_series(path, column: int = 0, has_header: bool = False) -> ScalarSeries:
    """
    Read one column of a CSV file as a ScalarSeries.

    For a two-column (time, value) file read on the value column, dt is the
    median time step; otherwise dt is 1.0.
    """
    path = Path(path)
    if not path.exists():
        raise FileNotFoundError(f"Series file not found: {path}")

    try:
        frame = pd.read_csv(
            path,
            sep=r"[,\s]",
            engine="python",
            header=0 if has_header else None,
            dtype=str,
            keep_default_na=False,
            skip_blank_lines=True,
            encoding="utf-8",
        )
    except (OSError, UnicodeDecodeError, pd.errors.ParserError, pd.errors.EmptyDataError) as e:
        raise SeriesError(f"cannot read {path}: {e}") from e

    if frame.shape[1] == 0 or column < 0 or column >= frame.shape[1]:
        raise SeriesError(f"{path} has {frame.shape[1]} column(s); column {column} requested")

    first_line = 2 if has_header else 1
    values = _parse_column(frame.iloc[:, column], first_line, path)
    if values.size < 2:
        raise SeriesError(f"{path} has {values.size} row(s); at least 2 are required")

    dt = 1.0
    if frame.shape[1] == 2 and column == 1:
        times = _parse_column(frame.iloc[:, 0], first_line, path)
        dt = _median_step(times, first_line, path)

    logger.info(f"Loaded {values.size} samples from {path.name} (column {column}, dt={dt})")
    return ScalarSeries(values, dt=dt, label=path.stem)


def _parse_column(raw: pd.Series, first_line: int, path: Path) -> np.ndarray:
    values = pd.to_numeric(raw.str.strip(), errors="coerce").to_numpy(dtype=float)
    bad = np.flatnonzero(~np.isfinite(values))
    if bad.size:
        row = int(bad[0])
        raise SeriesError(f"{path.name}: non-numeric value {raw.iloc[row]!r} at row {row + first_line}")
    return values


def _median_step(times: np.ndarray, first_line: int, path: Path) -> float:
    steps = np.diff(times)
    if np.any(steps <= 0):
        row = int(np.flatnonzero(steps <= 0)[0]) + 1
        raise SeriesError(f"{path.name}: time column is not increasing at row {row + first_line}")
    if steps.max() / steps.min() > IRREGULAR_STEP_RATIO:
        raise SeriesError(f"{path.name}: irregular sampling (max/min step {steps.max() / steps.min():.4f})")
    return float(np.median(steps))


def autocorrelation(samples: np.ndarray) -> np.ndarray:
    """Biased sample autocorrelation, normalized so that r(0) = 1."""
    x = np.asarray(samples, dtype=float)
    x = x - x.mean()
    n = x.size
    spectrum = np.fft.rfft(x, 2 * n)
    acov = np.fft.irfft(spectrum * np.conj(spectrum), 2 * n)[:n]
    return acov / acov[0]


def estimate_delay(series: ScalarSeries) -> int:
    """First zero crossing of the autocorrelation, else its first local minimum."""
    n = len(series)
    if n < MIN_DELAY_LENGTH:
        raise SeriesError(f"series too short for delay estimation ({n} < {MIN_DELAY_LENGTH})")
    if np.var(series.samples) == 0:
        raise SeriesError("zero variance: cannot estimate delay of a constant series")

    acf = autocorrelation(series.samples)
    max_lag = n // 4
    window = acf[: max_lag + 1]

    crossings = np.flatnonzero(window[1:] <= 0)
    if crossings.size:
        return int(crossings[0]) + 1

    for k in range(1, max_lag):
        if window[k] < window[k - 1] and window[k] <= window[k + 1]:
            logger.info(f"No autocorrelation zero within {max_lag} lags; using first minimum at {k}")
            return k

    lag = int(np.argmin(window[1:])) + 1
    logger.warning(f"Autocorrelation has no zero or local minimum within {max_lag} lags; using {lag}")
    return lag


def fnn_fraction(samples: np.ndarray, lag: int, dim: int, ratio: float = FNN_RATIO) -> float:
    """Fraction of false nearest neighbours when going from dim to dim + 1."""
    samples = np.asarray(samples, dtype=float)
    count = samples.size - dim * lag
    if count < 2:
        raise SeriesError(f"series too short for FNN at dim {dim}, lag {lag}")

    idx = np.arange(count)[:, None] + np.arange(dim + 1)[None, :] * lag
    extended = samples[idx]
    base = extended[:, :dim]

    nbrs = NearestNeighbors(n_neighbors=2).fit(base)
    distances, indices = nbrs.kneighbors(base)
    rows = np.arange(count)
    # duplicates can put another point ahead of the query point itself
    use_first = indices[:, 1] == rows
    nn = np.where(use_first, indices[:, 0], indices[:, 1])
    radius = np.where(use_first, distances[:, 0], distances[:, 1])

    gap = np.abs(extended[:, dim] - extended[nn, dim])
    floor = 1e-10 * np.std(samples)
    false = (gap > ratio * radius) & (gap > floor)
    return float(np.mean(false))


def estimate_dimension(
    series: ScalarSeries,
    lag: int,
    max_dim: int = 8,
    fnn_tol: float = 0.01,
    ratio: float = FNN_RATIO,
) -> DimensionEstimate:
    """Smallest dimension whose false-nearest-neighbour fraction drops below fnn_tol."""
    if lag < 1:
        raise SeriesError(f"lag must be >= 1, got {lag}")
    if max_dim < 2:
        raise SeriesError(f"max_dim must be >= 2, got {max_dim}")
    n = len(series)
    needed = (max_dim - 1) * lag + 16
    if n < needed:
        raise SeriesError(f"series too short for max_dim {max_dim}, lag {lag} ({n} < {needed})")

    fractions = []
    for dim in range(1, max_dim + 1):
        if n - dim * lag < 2:
            break
        fraction = fnn_fraction(series.samples, lag, dim, ratio)
        fractions.append(fraction)
        logger.debug(f"FNN fraction at dim {dim}: {fraction:.4f}")
        if fraction < fnn_tol:
            return DimensionEstimate(dim=dim, saturated=False, fnn_fractions=tuple(fractions))

    logger.warning(f"FNN fraction never dropped below {fnn_tol} up to dim {max_dim}")
    return DimensionEstimate(dim=max_dim, saturated=True, fnn_fractions=tuple(fractions))


def embed(series: ScalarSeries, config: EmbeddingConfig) -> EmbeddedAttractor:
    """Delay-embed the series; point k = (s[k], s[k+lag], ..., s[k+(dim-1)*lag])."""
    n = len(series)
    count = n - config.span
    if count < 1:
        raise SeriesError(
            f"series too short for lag {config.lag}, dim {config.dim}: "
            f"needs more than {config.span} samples, got {n}"
        )
    idx = np.arange(count)[:, None] + np.arange(config.dim)[None, :] * config.lag
    return EmbeddedAttractor(series.samples[idx], config.dim, config.lag, series.dt)

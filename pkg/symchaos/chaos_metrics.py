"""
Chaos quantifiers: largest Lyapunov exponent from an embedded series
(Rosenstein-style nearest-neighbour divergence) and from analytic 1-D map
families, Lyapunov-time forecast horizon, and periodicity detection.
"""

import logging
from dataclasses import dataclass, field
from typing import Optional, Sequence, Tuple

import numpy as np
from sklearn.metrics import r2_score
from sklearn.neighbors import NearestNeighbors

from symchaos.maps import MapFamily
from symchaos.series_io import EmbeddedAttractor

logger = logging.getLogger(__name__)

MIN_POINTS = 500
DEFAULT_HORIZON = 30
TINY = np.finfo(float).tiny
CHUNK = 4096


class LyapunovError(ValueError):
    """Estimator preconditions not met."""


class OrbitEscapeError(ArithmeticError):
    """Map orbit left the finite numbers."""


class NotChaoticError(ValueError):
    """Quantity undefined for non-positive Lyapunov exponents."""


@dataclass(frozen=True)
class LyapunovEstimate:
    exponent: float
    fit_range: Tuple[int, int]
    quality: float
    stderr: float = 0.0
    divergence: Tuple[float, ...] = field(default_factory=tuple)

    def __post_init__(self):
        lo, hi = self.fit_range
        if not 0 <= lo < hi:
            raise LyapunovError(f"empty fit range {self.fit_range}")
        if not 0.0 <= self.quality <= 1.0:
            raise LyapunovError(f"quality must lie in [0, 1], got {self.quality}")

    def to_dict(self):
        return {
            "lambda": self.exponent,
            "fit_range": list(self.fit_range),
            "quality": self.quality,
            "stderr": self.stderr,
            "divergence": [None if np.isnan(v) else v for v in self.divergence],
        }

    @classmethod
    def from_dict(cls, data):
        return cls(
            exponent=float(data["lambda"]),
            fit_range=tuple(int(v) for v in data["fit_range"]),
            quality=float(data["quality"]),
            stderr=float(data.get("stderr", 0.0)),
            divergence=tuple(np.nan if v is None else float(v) for v in data.get("divergence", [])),
        )


def _nearest_neighbours(points: np.ndarray, min_separation: int) -> Tuple[np.ndarray, np.ndarray]:
    """Nearest neighbour of each point at index distance >= min_separation; ties go to the lowest index."""
    count = points.shape[0]
    k = min(2 * min_separation + 1, count)
    distances, indices = NearestNeighbors(n_neighbors=k).fit(points).kneighbors(points)

    rows = np.arange(count)[:, None]
    masked = np.where(np.abs(indices - rows) >= min_separation, distances, np.inf)
    order = np.lexsort((indices, masked), axis=1)[:, 0]
    nn = indices[np.arange(count), order]
    d0 = masked[np.arange(count), order]
    return nn, d0


def largest_lyapunov(
    attractor: EmbeddedAttractor,
    min_separation: Optional[int] = None,
    horizon: int = DEFAULT_HORIZON,
    fit_range: Optional[Tuple[int, int]] = None,
) -> LyapunovEstimate:
    """
    Largest Lyapunov exponent by mean log divergence of nearest-neighbour pairs.

    The exponent is the slope of <ln d(j)> over fit_range, divided by the
    source sampling interval; quality is the R^2 of that linear fit.
    """
    n = len(attractor)
    if n < MIN_POINTS:
        raise LyapunovError(f"too few points: {n} < {MIN_POINTS}")
    if horizon < 2:
        raise LyapunovError(f"horizon must be >= 2, got {horizon}")
    if min_separation is None:
        min_separation = attractor.lag * attractor.dim
    if fit_range is None:
        fit_range = (1, max(2, horizon // 2))
    lo, hi = fit_range
    if not 0 <= lo < hi <= horizon:
        raise LyapunovError(f"fit range {fit_range} must lie within [0, {horizon}]")

    # nearest neighbours outside the temporal exclusion window
    usable = n - horizon
    points = attractor.points
    nn, d0 = _nearest_neighbours(points[:usable], min_separation)

    valid = np.isfinite(d0)
    if not np.any(d0[valid] > 0):
        raise LyapunovError("all neighbour distances are zero (duplicated data)")
    origin = np.arange(usable)[valid]
    partner = nn[valid]

    # mean log separation of each pair j steps later
    divergence = np.full(horizon + 1, np.nan)
    for j in range(horizon + 1):
        d = np.linalg.norm(points[origin + j] - points[partner + j], axis=1)
        d = d[d > 0]
        if d.size:
            divergence[j] = np.mean(np.log(d))

    # slope of the linear part of the curve
    steps = np.arange(lo, hi + 1)
    curve = divergence[lo:hi + 1]
    ok = np.isfinite(curve)
    if ok.sum() < 2:
        raise LyapunovError("divergence curve undefined over the fit range")
    slope, intercept = np.polyfit(steps[ok], curve[ok], 1)
    fitted = slope * steps[ok] + intercept
    quality = float(np.clip(r2_score(curve[ok], fitted), 0.0, 1.0))

    sxx = np.sum((steps[ok] - steps[ok].mean()) ** 2)
    dof = max(int(ok.sum()) - 2, 1)
    stderr = float(np.sqrt(np.sum((curve[ok] - fitted) ** 2) / dof / sxx))

    estimate = LyapunovEstimate(
        exponent=float(slope / attractor.source_dt),
        fit_range=(int(lo), int(hi)),
        quality=quality,
        stderr=stderr / attractor.source_dt,
        divergence=tuple(float(v) for v in divergence),
    )
    logger.info(f"Largest Lyapunov exponent {estimate.exponent:.4f} (R^2={quality:.3f}, {origin.size} pairs)")
    return estimate


def map_exponents(
    family: MapFamily,
    params: Sequence[float],
    x0,
    n_transient: int = 1000,
    n_iter: int = 10_000,
) -> np.ndarray:
    """
    Lyapunov exponents of a 1-D map family at several parameter values at once.

    Orbits that leave the finite numbers yield NaN at their position.
    """
    if family.derivative is None:
        raise LyapunovError(f"family '{family.name}' has no derivative rule")
    if n_iter < 1:
        raise LyapunovError(f"n_iter must be >= 1, got {n_iter}")

    params = np.atleast_1d(np.asarray(params, dtype=float))
    x = np.array(np.broadcast_to(np.asarray(x0, dtype=float), params.shape))
    total = np.zeros(params.shape)
    escaped = np.zeros(params.shape, dtype=bool)
    buf = np.empty((min(CHUNK, n_iter),) + params.shape)

    with np.errstate(all="ignore"):
        for _ in range(n_transient):
            x = family.iterate(x, params)
        done = 0
        while done < n_iter:
            m = min(CHUNK, n_iter - done)
            for k in range(m):
                buf[k] = x
                x = family.iterate(x, params)
            block = buf[:m]
            escaped |= ~np.all(np.isfinite(block), axis=0)
            slope = np.abs(family.derivative(block, params))
            total += np.log(np.maximum(slope, TINY)).sum(axis=0)
            done += m
        escaped |= ~np.isfinite(x)

    out = total / n_iter
    out[escaped] = np.nan
    return out


def lyapunov_map(
    family: MapFamily,
    param: float,
    x0: float,
    n_transient: int = 1000,
    n_iter: int = 10_000,
) -> float:
    """(1/n_iter) * sum of ln|f'(x_k)| along the orbit after a transient."""
    value = map_exponents(family, [param], x0, n_transient, n_iter)[0]
    if np.isnan(value):
        raise OrbitEscapeError(f"{family.name} orbit from x0={x0} escaped at {family.param_name}={param}")
    return float(value)


def forecast_horizon(lam: float, delta0: float, delta_tol: float) -> float:
    """Lyapunov time for an error to grow from delta0 to delta_tol."""
    if not delta_tol > delta0 > 0:
        raise ValueError(f"need delta_tol > delta0 > 0, got delta0={delta0}, delta_tol={delta_tol}")
    if lam <= 0:
        raise NotChaoticError(f"non-chaotic: horizon unbounded for lambda={lam}")
    return float(np.log(delta_tol / delta0) / lam)


def detect_periodicity(series: Sequence[float], max_period: int, rel_tol: float) -> Optional[int]:
    """
    Smallest period P <= max_period that repeats over the last 2*max_period samples
    to within rel_tol times the range of that tail.

    The tolerance is taken from the tail alone, not from the whole series, so an
    early transient does not widen it.
    """
    values = np.asarray(series, dtype=float)
    if max_period < 1:
        raise ValueError(f"max_period must be >= 1, got {max_period}")
    if values.size < 3 * max_period:
        raise ValueError(f"series too short: {values.size} < {3 * max_period}")

    tail = values[-2 * max_period:]
    tol = rel_tol * np.ptp(tail)
    for period in range(1, max_period + 1):
        if np.all(np.abs(tail[period:] - tail[:-period]) <= tol):
            return period
    return None

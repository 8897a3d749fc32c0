"""One-dimensional map families used for Lyapunov sweeps, plus orbit generators for test series."""

from dataclasses import dataclass
from enum import Enum
from typing import Callable, Optional, Tuple

import numpy as np

Rule = Callable[[np.ndarray, float], np.ndarray]


class MapKind(str, Enum):
    LOGISTIC = "logistic"
    TENT = "tent"
    SKEW_TENT = "skew-tent"
    CUSTOM = "custom-affine-forced"


@dataclass(frozen=True)
class MapFamily:
    kind: MapKind
    param_name: str
    iterate: Rule
    derivative: Optional[Rule] = None
    domain: Tuple[float, float] = (0.0, 1.0)

    @property
    def name(self) -> str:
        return self.kind.value


def _logistic(x, r):
    return r * x * (1.0 - x)


def _logistic_slope(x, r):
    return r * (1.0 - 2.0 * x)


def _tent(x, s):
    return s * np.minimum(x, 1.0 - x)


def _tent_slope(x, s):
    return np.where(x < 0.5, s, -s)


def _skew_tent(x, c):
    return np.where(x < c, x / c, (1.0 - x) / (1.0 - c))


def _skew_tent_slope(x, c):
    return np.where(x < c, 1.0 / c, -1.0 / (1.0 - c))


def logistic_family() -> MapFamily:
    return MapFamily(MapKind.LOGISTIC, "r", _logistic, _logistic_slope)


def tent_family() -> MapFamily:
    return MapFamily(MapKind.TENT, "s", _tent, _tent_slope)


def skew_tent_family() -> MapFamily:
    """Skew tent map on [0, 1]; chaotic with no periodic windows for every c in (0, 1)."""
    return MapFamily(MapKind.SKEW_TENT, "c", _skew_tent, _skew_tent_slope)


def custom_family(iterate: Rule, derivative: Optional[Rule] = None, param_name: str = "p",
                  domain: Tuple[float, float] = (0.0, 1.0)) -> MapFamily:
    return MapFamily(MapKind.CUSTOM, param_name, iterate, derivative, domain)


FAMILIES = {
    MapKind.LOGISTIC.value: logistic_family,
    MapKind.TENT.value: tent_family,
    MapKind.SKEW_TENT.value: skew_tent_family,
}


def family_by_name(name: str) -> MapFamily:
    try:
        return FAMILIES[name]()
    except KeyError:
        raise ValueError(f"unknown map family '{name}' (known: {', '.join(sorted(FAMILIES))})") from None


def skew_tent_exponent(c: float) -> float:
    return float(-c * np.log(c) - (1.0 - c) * np.log(1.0 - c))


def logistic_orbit(r: float, x0: float, n: int, n_transient: int = 0) -> np.ndarray:
    x = float(x0)
    for _ in range(n_transient):
        x = r * x * (1.0 - x)
    out = np.empty(n)
    for k in range(n):
        out[k] = x
        x = r * x * (1.0 - x)
    return out


def henon_orbit(n: int, a: float = 1.4, b: float = 0.3, x0: float = 0.1, y0: float = 0.1,
                n_transient: int = 1000) -> np.ndarray:
    """x-coordinate of a Hénon orbit."""
    x, y = float(x0), float(y0)
    for _ in range(n_transient):
        x, y = 1.0 - a * x * x + y, b * x
    out = np.empty(n)
    for k in range(n):
        out[k] = x
        x, y = 1.0 - a * x * x + y, b * x
    return out

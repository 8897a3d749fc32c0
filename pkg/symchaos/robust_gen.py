"""
Robust chaos generation and validation.

The forced model is modulated by a piecewise-linear factor u(t) = p*t + q_i
on segments [t_i, t_{i+1}); robustness of a map family is checked by sweeping
its Lyapunov exponent over a parameter grid and looking for periodic windows
(grid runs with a negative exponent) and for non-smooth exponent curves.
"""

import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import List, Optional, Tuple

import numpy as np
import pandas as pd
from joblib import Parallel, delayed
from tqdm import tqdm

from symchaos.chaos_metrics import map_exponents
from symchaos.maps import MapFamily
from symchaos.state_model import LinearForcedModel, _integrate

logger = logging.getLogger(__name__)

SWEEP_BLOCK = 64


@dataclass(frozen=True)
class PiecewiseLinearModulator:
    breakpoints: Tuple[int, ...]
    p: float
    q: Tuple[float, ...]

    def __post_init__(self):
        breakpoints = tuple(int(b) for b in self.breakpoints)
        q = tuple(float(v) for v in self.q)
        if not breakpoints or breakpoints[0] != 0:
            raise ValueError(f"breakpoints must start at 0, got {breakpoints}")
        if any(b >= c for b, c in zip(breakpoints, breakpoints[1:])):
            raise ValueError(f"breakpoints must be strictly increasing, got {breakpoints}")
        if len(q) != len(breakpoints):
            raise ValueError(f"{len(q)} intercepts for {len(breakpoints)} segments")
        if not np.all(np.isfinite(q + (self.p,))):
            raise ValueError("modulator coefficients must be finite")
        object.__setattr__(self, "breakpoints", breakpoints)
        object.__setattr__(self, "q", q)
        object.__setattr__(self, "p", float(self.p))

    @classmethod
    def constant(cls, value: float) -> "PiecewiseLinearModulator":
        return cls((0,), 0.0, (value,))

    def to_spec(self) -> str:
        breaks = ",".join(str(b) for b in self.breakpoints[1:])
        return f"p:{self.p!r};breaks:{breaks};q:{','.join(repr(v) for v in self.q)}"


def parse_modulator(text: str) -> Optional[PiecewiseLinearModulator]:
    """
    Parse "p:v;breaks:t1,t2,...;q:q0,q1,..." (t0 = 0 is implied), or "none".

    >>> parse_modulator("p:0.5;breaks:10;q:0,-5").q
    (0.0, -5.0)
    """
    text = text.strip()
    if text.lower() == "none":
        return None

    fields = {}
    for part in text.split(";"):
        key, sep, value = part.partition(":")
        key = key.strip().lower()
        if not sep or key not in ("p", "breaks", "q") or key in fields:
            raise ValueError(f"malformed modulator spec {text!r} (near {part!r})")
        fields[key] = value.strip()
    if "p" not in fields or "q" not in fields:
        raise ValueError(f"modulator spec {text!r} needs both 'p:' and 'q:'")

    try:
        p = float(fields["p"])
        breaks = [int(v) for v in fields.get("breaks", "").split(",") if v.strip()]
        q = [float(v) for v in fields["q"].split(",") if v.strip()]
    except ValueError as e:
        raise ValueError(f"malformed modulator spec {text!r}: {e}") from None
    return PiecewiseLinearModulator(tuple([0] + breaks), p, tuple(q))


def modulator_values(mod: PiecewiseLinearModulator, steps: int) -> np.ndarray:
    t = np.arange(steps)
    segment = np.searchsorted(mod.breakpoints, t, side="right") - 1
    return mod.p * t + np.asarray(mod.q)[segment]


def modulator_value(mod: PiecewiseLinearModulator, t: int) -> float:
    if t < 0:
        raise ValueError(f"t must be >= 0, got {t}")
    return float(modulator_values(mod, t + 1)[t])


def simulate_robust(m: LinearForcedModel, mod: PiecewiseLinearModulator, steps: int):
    """simulate() with the forcing term multiplied by u(t)."""
    return _integrate(m, steps, modulator_values(mod, steps))


@dataclass(frozen=True)
class SweepResult:
    params: np.ndarray
    lambdas: np.ndarray
    windows: List[Tuple[float, float]] = field(default_factory=list)

    def __post_init__(self):
        params = np.asarray(self.params, dtype=float)
        lambdas = np.asarray(self.lambdas, dtype=float)
        if params.shape != lambdas.shape or params.ndim != 1:
            raise ValueError("params and lambdas must be 1-D arrays of equal length")
        if np.any(np.diff(params) <= 0):
            raise ValueError("params must be strictly increasing")
        for lo, hi in self.windows:
            if not params[0] <= lo <= hi <= params[-1]:
                raise ValueError(f"window [{lo}, {hi}] outside the swept range")
        object.__setattr__(self, "params", params)
        object.__setattr__(self, "lambdas", lambdas)

    def to_frame(self) -> pd.DataFrame:
        return pd.DataFrame({"param": self.params, "lambda": self.lambdas})

    def to_csv(self, path):
        # escaped orbits are NaN and land as empty cells
        self.to_frame().to_csv(Path(path), index=False, na_rep="", float_format="%.17g")
        logger.info(f"Wrote {self.params.size} sweep points to {path}")


def _negative_runs(params: np.ndarray, lambdas: np.ndarray) -> List[Tuple[float, float]]:
    negative = np.concatenate([[False], lambdas < 0, [False]])
    edges = np.flatnonzero(np.diff(negative.astype(int)))
    return [(float(params[s]), float(params[e - 1])) for s, e in zip(edges[::2], edges[1::2])]


def sweep_lyapunov(
    family: MapFamily,
    lo: float,
    hi: float,
    steps: int,
    n_iter: int = 10_000,
    x0: Optional[float] = None,
    seed: int = 0,
    n_transient: int = 1000,
    n_jobs: int = 1,
    progress: bool = False,
) -> SweepResult:
    """
    Lyapunov exponent at `steps` equally spaced parameters in [lo, hi].

    With x0 None, point i starts from a value drawn inside the family's domain
    by the stream default_rng([seed, i]).
    """
    if not lo < hi:
        raise ValueError(f"need lo < hi, got [{lo}, {hi}]")
    if steps < 2:
        raise ValueError(f"steps must be >= 2, got {steps}")

    params = np.linspace(lo, hi, steps)
    if x0 is None:
        a, b = family.domain
        starts = np.array([np.random.default_rng([seed, i]).uniform(a, b) for i in range(steps)])
    else:
        starts = np.full(steps, float(x0))

    # blocks of SWEEP_BLOCK parameters; results do not depend on n_jobs
    blocks = np.array_split(np.arange(steps), -(-steps // SWEEP_BLOCK))
    parts = Parallel(n_jobs=n_jobs)(
        delayed(map_exponents)(family, params[idx], starts[idx], n_transient, n_iter)
        for idx in tqdm(blocks, desc=f"{family.name} sweep", disable=not progress)
    )
    lambdas = np.concatenate(parts)

    gaps = int(np.isnan(lambdas).sum())
    if gaps:
        logger.warning(f"{gaps} of {steps} sweep orbits escaped; recorded as gaps")
    windows = _negative_runs(params, lambdas)
    logger.info(f"Swept {family.name} over [{lo}, {hi}]: {len(windows)} periodic window(s)")
    return SweepResult(params, lambdas, windows)


def detect_windows(result: SweepResult, smooth_tol: float = 0.5):
    """Window list, max |second difference| of lambda, and the robust / not robust verdict."""
    second = np.abs(np.diff(result.lambdas, 2))
    finite = second[np.isfinite(second)]
    score = float(finite.max()) if finite.size else 0.0
    windows = _negative_runs(result.params, result.lambdas)
    robust = not windows and score <= smooth_tol
    return {
        "windows": [[lo, hi] for lo, hi in windows],
        "smoothness": score,
        "smooth_tol": smooth_tol,
        "gaps": int(np.isnan(result.lambdas).sum()),
        "verdict": "robust" if robust else "not robust",
    }

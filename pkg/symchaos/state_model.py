"""
Linear forced difference-equation model

    x(t+1) = A x(t) + psi_amp * g(t),      y(t) = C x(t)
    g(t)   = exp(t**alpha) * sin(t**gamma)

with simulation, least-squares identification of (A, psi_amp) and C from
trajectories, and a comparison of two series' dynamics.
"""

import json
import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional, Tuple

import numpy as np
from scipy.linalg import lstsq

from symchaos.chaos_metrics import largest_lyapunov
from symchaos.descriptors import SpectralWeights, normalize_all, symmetry_distance
from symchaos.marking import mark_fragments
from symchaos.series_io import EmbeddingConfig, ScalarSeries, embed

logger = logging.getLogger(__name__)

DIVERGENCE_LIMIT = 1e12
MISMATCH_LAMBDA = 0.01
MISMATCH_FRACTION = 0.25


class IdentificationError(ValueError):
    """Least-squares problem is underdetermined or rank deficient."""

    def __init__(self, message: str, condition: Optional[float] = None):
        super().__init__(message)
        self.condition = condition


class DivergenceError(ArithmeticError):
    """State norm exceeded the divergence guard."""

    def __init__(self, step: int, norm: float):
        super().__init__(f"state diverged at step {step} (|x| = {norm:.3g} > {DIVERGENCE_LIMIT:g})")
        self.step = step
        self.norm = norm


@dataclass(frozen=True)
class ForcingSpec:
    alpha: float = 0.0001
    gamma: float = 0.4

    def __post_init__(self):
        if not self.alpha >= 0:
            raise ValueError(f"alpha must be >= 0, got {self.alpha}")
        if not self.gamma > 0:
            raise ValueError(f"gamma must be > 0, got {self.gamma}")

    def to_dict(self):
        return {"alpha": self.alpha, "gamma": self.gamma}


def forcing_values(f: ForcingSpec, steps: int) -> np.ndarray:
    """g(0), ..., g(steps-1), with g(0) = 0."""
    t = np.arange(steps, dtype=float)
    g = np.zeros(steps)
    pos = t > 0
    g[pos] = np.exp(t[pos] ** f.alpha) * np.sin(t[pos] ** f.gamma)
    return g


def forcing_value(f: ForcingSpec, t: int) -> float:
    if t < 0:
        raise ValueError(f"t must be >= 0, got {t}")
    return float(forcing_values(f, t + 1)[t])


@dataclass(frozen=True)
class LinearForcedModel:
    A: np.ndarray
    psi_amp: np.ndarray
    forcing: ForcingSpec = field(default_factory=ForcingSpec)
    C: Optional[np.ndarray] = None
    x0: Optional[np.ndarray] = None

    def __post_init__(self):
        A = np.array(self.A, dtype=float)
        if A.ndim != 2 or A.shape[0] != A.shape[1] or A.shape[0] < 1:
            raise ValueError(f"A must be a non-empty square matrix, got shape {A.shape}")
        n = A.shape[0]
        psi = np.array(self.psi_amp, dtype=float).ravel()
        C = np.zeros(n) if self.C is None else np.array(self.C, dtype=float).ravel()
        x0 = np.zeros(n) if self.x0 is None else np.array(self.x0, dtype=float).ravel()
        for name, vec in (("psi_amp", psi), ("C", C), ("x0", x0)):
            if vec.size != n:
                raise ValueError(f"{name} has {vec.size} entries, expected {n}")
        for name, arr in (("A", A), ("psi_amp", psi), ("C", C), ("x0", x0)):
            if not np.all(np.isfinite(arr)):
                raise ValueError(f"{name} contains non-finite entries")
            arr.flags.writeable = False
        object.__setattr__(self, "A", A)
        object.__setattr__(self, "psi_amp", psi)
        object.__setattr__(self, "C", C)
        object.__setattr__(self, "x0", x0)

    @property
    def n(self) -> int:
        return self.A.shape[0]

    @property
    def spectral_radius(self) -> float:
        return float(np.max(np.abs(np.linalg.eigvals(self.A))))

    def to_dict(self):
        return {
            "n": self.n,
            "A": self.A.tolist(),
            "psi_amp": self.psi_amp.tolist(),
            "forcing": self.forcing.to_dict(),
            "C": self.C.tolist(),
            "x0": self.x0.tolist(),
        }

    @classmethod
    def from_dict(cls, data):
        model = cls(
            A=np.array(data["A"], dtype=float),
            psi_amp=np.array(data["psi_amp"], dtype=float),
            forcing=ForcingSpec(**data.get("forcing", {})),
            C=np.array(data["C"], dtype=float),
            x0=np.array(data["x0"], dtype=float),
        )
        if model.n != int(data["n"]):
            raise ValueError(f"model header says n={data['n']} but A is {model.n}x{model.n}")
        return model

    def save(self, path):
        path = Path(path)
        with open(path, "w", encoding="utf-8") as f:
            json.dump(self.to_dict(), f, indent=2)
        logger.info(f"Saved model (n={self.n}) to {path}")

    @classmethod
    def load(cls, path) -> "LinearForcedModel":
        path = Path(path)
        if not path.exists():
            raise FileNotFoundError(f"Model file not found: {path}")
        with open(path, "r", encoding="utf-8") as f:
            return cls.from_dict(json.load(f))


REFERENCE_A = (
    (0.9413, -0.1805, 0.1164, -0.0295),
    (-0.0545, 0.8226, 0.1622, 0.1056),
    (0.0014, -0.0105, -0.4455, 0.8471),
    (-0.0062, 0.0341, -0.8860, -0.5404),
)
REFERENCE_PSI = (0.0399, 0.0463, -0.4848, -0.1851)
REFERENCE_C = (21037.0, -124.0, 1202.0, -302.0)


def reference_model() -> LinearForcedModel:
    """The four-state example model; x0 is not published, 1e-3 per state is used."""
    return LinearForcedModel(
        A=np.array(REFERENCE_A),
        psi_amp=np.array(REFERENCE_PSI),
        forcing=ForcingSpec(0.0001, 0.4),
        C=np.array(REFERENCE_C),
        x0=np.full(4, 1e-3),
    )


def _integrate(m: LinearForcedModel, steps: int, modulation: Optional[np.ndarray] = None):
    if steps < 1:
        raise ValueError(f"steps must be >= 1, got {steps}")
    g = forcing_values(m.forcing, steps)
    states = np.empty((steps + 1, m.n))
    states[0] = m.x0
    x = states[0]
    for t in range(steps):
        drive = m.psi_amp if modulation is None else m.psi_amp * modulation[t]
        x = m.A @ x + drive * g[t]
        norm = float(np.linalg.norm(x))
        if not norm <= DIVERGENCE_LIMIT:
            logger.error(f"Divergence guard tripped at step {t + 1}")
            raise DivergenceError(t + 1, norm)
        states[t + 1] = x
    return states, states @ m.C


def simulate(m: LinearForcedModel, steps: int) -> Tuple[np.ndarray, np.ndarray]:
    """States x(0..steps) as rows and outputs y(0..steps)."""
    return _integrate(m, steps)


def _as_states(states) -> np.ndarray:
    states = np.asarray(states, dtype=float)
    if states.ndim == 1:
        states = states[:, None]
    if states.ndim != 2 or not np.all(np.isfinite(states)):
        raise IdentificationError("states must be a finite (T, n) array")
    return states


def _solve(X: np.ndarray, Y: np.ndarray, what: str):
    rank = np.linalg.matrix_rank(X)
    if rank < X.shape[1]:
        cond = float(np.linalg.cond(X))
        raise IdentificationError(
            f"rank-deficient {what} regressors: rank {rank} < {X.shape[1]} (condition estimate {cond:.3g})",
            condition=cond,
        )
    theta, _, _, _ = lstsq(X, Y)
    resid = Y - X @ theta
    rms = float(np.sqrt(np.sum(resid ** 2) / X.shape[0]))
    return theta, rms


def identify(
    states,
    forcing: ForcingSpec = ForcingSpec(),
    modulation: Optional[np.ndarray] = None,
) -> Tuple[np.ndarray, np.ndarray, float]:
    """
    Joint least-squares estimate of (A, psi_amp) from consecutive states.

    Each transition x(t) -> x(t+1) contributes one row with regressors
    [x(t), g(t)], or [x(t), g(t) * u(t)] for a modulated run; residual is
    the RMS of the minimized objective.
    """
    states = _as_states(states)
    transitions, n = states.shape[0] - 1, states.shape[1]
    if transitions < n + 2:
        raise IdentificationError(f"too few transitions: {transitions} < {n + 2} for n={n}")

    g = forcing_values(forcing, transitions)
    if modulation is not None:
        g = g * np.asarray(modulation, dtype=float)[:transitions]
    X = np.column_stack([states[:-1], g])
    theta, residual = _solve(X, states[1:], "state")
    A = theta[:n].T
    psi_amp = theta[n]
    logger.info(f"Identified A ({n}x{n}) from {transitions} transitions, residual {residual:.3g}")
    return A, psi_amp, residual


def identify_output(states, observed) -> Tuple[np.ndarray, float]:
    """Least-squares output row C for y(t) = C x(t)."""
    states = _as_states(states)
    observed = np.asarray(observed, dtype=float).ravel()
    if observed.size != states.shape[0]:
        raise IdentificationError(f"{observed.size} outputs for {states.shape[0]} states")
    C, residual = _solve(states, observed, "output")
    logger.info(f"Identified C, residual {residual:.3g}")
    return C, residual


def _fragment_descriptors(series: ScalarSeries, embed_cfg: EmbeddingConfig, coord, min_len, prominence, M, q):
    attractor = embed(series, embed_cfg)
    fragments, warning = mark_fragments(attractor, coord, min_len, prominence)
    return attractor, normalize_all(attractor, fragments, M, q), warning


def compare_dynamics(
    original: ScalarSeries,
    generated: ScalarSeries,
    embed_cfg: EmbeddingConfig,
    K: int = 5,
    coord: int = 0,
    min_len: int = 8,
    prominence: float = 0.01,
    M: int = 64,
    q: int = 8,
    w: Optional[SpectralWeights] = None,
):
    """Largest-exponent difference and mean distance of the K closest cross-attractor fragment pairs."""
    w = w or SpectralWeights.uniform(q)
    warnings = []

    att_a, desc_a, warn_a = _fragment_descriptors(original, embed_cfg, coord, min_len, prominence, M, q)
    att_b, desc_b, warn_b = _fragment_descriptors(generated, embed_cfg, coord, min_len, prominence, M, q)
    warnings += [f"original: {warn_a}"] if warn_a else []
    warnings += [f"generated: {warn_b}"] if warn_b else []

    lam_a = largest_lyapunov(att_a).exponent
    lam_b = largest_lyapunov(att_b).exponent
    difference = abs(lam_a - lam_b)

    mean_distance = None
    if desc_a and desc_b:
        cross = np.array([[symmetry_distance(a, b, w) for b in desc_b] for a in desc_a]).ravel()
        closest = np.sort(cross)[:K]
        mean_distance = float(np.mean(closest))
    else:
        warnings.append("no fragments on one side: descriptor distance undefined")

    chaotic = (lam_a > MISMATCH_LAMBDA, lam_b > MISMATCH_LAMBDA)
    mismatch = bool(chaotic[0] != chaotic[1] or difference > MISMATCH_FRACTION * max(abs(lam_a), abs(lam_b)))
    if mismatch:
        logger.warning(f"Lyapunov mismatch: {lam_a:.4f} vs {lam_b:.4f}")

    return {
        "lambda_original": lam_a,
        "lambda_generated": lam_b,
        "lambda_difference": difference,
        "lyapunov_mismatch": mismatch,
        "mean_descriptor_distance": mean_distance,
        "pairs_compared": 0 if mean_distance is None else int(min(K, len(desc_a) * len(desc_b))),
        "embedding": embed_cfg.to_dict(),
        "warnings": warnings,
    }

"""
Fourier descriptors of attractor fragments.

A fragment is resampled uniformly in arc length, moved to its centroid,
rotated onto its principal axes (each axis oriented by the sign of its third
central moment) and scaled to unit RMS radius. The DFT harmonics 1..q of every
canonical coordinate form the spectrum. The symmetry-violation distance
between two descriptors is

    D(A, B) = sum_i beta_i * (I_i + R_i)
    I_i = || Im S_B[i, :] - Im S_A[i, :] ||,   R_i = || Re S_B[i, :] - Re S_A[i, :] ||
"""

import logging
from dataclasses import dataclass
from typing import List, Sequence

import numpy as np
from joblib import Parallel, delayed

from symchaos.marking import Fragment
from symchaos.series_io import EmbeddedAttractor

logger = logging.getLogger(__name__)

DEFAULT_M = 64
DEFAULT_Q = 8
SKEW_EPS = 1e-12
TIE_EPS = 1e-9


class DescriptorError(ValueError):
    """Fragment cannot be normalized, or descriptors cannot be compared."""


def _orthogonal(matrix: np.ndarray, tol: float = 1e-9) -> bool:
    n = matrix.shape[0]
    return np.allclose(matrix.T @ matrix, np.eye(n), atol=tol * max(n, 1))


@dataclass(frozen=True)
class PoseParams:
    """Maps canonical points back to the original frame: x = scale * rotation @ c + translation."""
    translation: np.ndarray
    rotation: np.ndarray
    scale: float

    def __post_init__(self):
        translation = np.asarray(self.translation, dtype=float).ravel()
        rotation = np.asarray(self.rotation, dtype=float)
        if rotation.shape != (translation.size, translation.size):
            raise DescriptorError(f"rotation shape {rotation.shape} does not match dimension {translation.size}")
        if not _orthogonal(rotation):
            raise DescriptorError("rotation is not orthogonal")
        if not self.scale > 0:
            raise DescriptorError(f"scale must be positive, got {self.scale}")
        object.__setattr__(self, "translation", translation)
        object.__setattr__(self, "rotation", rotation)
        object.__setattr__(self, "scale", float(self.scale))

    def apply(self, canonical: np.ndarray) -> np.ndarray:
        return self.scale * canonical @ self.rotation.T + self.translation

    def to_dict(self):
        return {
            "translation": self.translation.tolist(),
            "rotation": self.rotation.tolist(),
            "scale": self.scale,
        }

    @classmethod
    def from_dict(cls, data):
        return cls(np.array(data["translation"]), np.array(data["rotation"]), float(data["scale"]))


@dataclass(frozen=True)
class SpectralWeights:
    betas: tuple

    def __post_init__(self):
        betas = tuple(float(b) for b in self.betas)
        if len(betas) < 1:
            raise DescriptorError("at least one spectral weight is required")
        if any(b < 0 for b in betas):
            raise DescriptorError(f"spectral weights must be non-negative, got {betas}")
        object.__setattr__(self, "betas", betas)

    @property
    def q(self) -> int:
        return len(self.betas)

    @classmethod
    def uniform(cls, q: int = DEFAULT_Q) -> "SpectralWeights":
        return cls((1.0,) * q)

    @classmethod
    def parse(cls, text: str) -> "SpectralWeights":
        return cls(tuple(float(v) for v in text.split(",") if v.strip()))


@dataclass(frozen=True)
class Descriptor:
    canonical_points: np.ndarray
    spectrum: np.ndarray
    pose: PoseParams
    degenerate: bool = False

    def __post_init__(self):
        points = np.asarray(self.canonical_points, dtype=float)
        spectrum = np.asarray(self.spectrum, dtype=complex)
        if points.ndim != 2 or spectrum.ndim != 2 or spectrum.shape[1] != points.shape[1]:
            raise DescriptorError(f"inconsistent shapes: points {points.shape}, spectrum {spectrum.shape}")
        if spectrum.shape[0] < 1:
            raise DescriptorError("spectrum needs at least one harmonic")
        if np.max(np.abs(points.mean(axis=0))) >= 1e-9:
            raise DescriptorError("canonical points are not centered")
        rms = np.sqrt(np.mean(np.sum(points ** 2, axis=1)))
        if abs(rms - 1.0) > 1e-9:
            raise DescriptorError(f"canonical RMS radius is {rms}, expected 1")
        points.flags.writeable = False
        spectrum.flags.writeable = False
        object.__setattr__(self, "canonical_points", points)
        object.__setattr__(self, "spectrum", spectrum)

    @property
    def M(self) -> int:
        return self.canonical_points.shape[0]

    @property
    def n(self) -> int:
        return self.canonical_points.shape[1]

    @property
    def q(self) -> int:
        return self.spectrum.shape[0]

    def to_dict(self):
        return {
            "M": self.M,
            "q": self.q,
            "n": self.n,
            "degenerate": self.degenerate,
            "pose": self.pose.to_dict(),
            "spectrum": [[[c.real, c.imag] for c in row] for row in self.spectrum],
            "canonical_points": self.canonical_points.tolist(),
        }

    @classmethod
    def from_dict(cls, data):
        spectrum = np.array([[complex(re, im) for re, im in row] for row in data["spectrum"]])
        descriptor = cls(
            canonical_points=np.array(data["canonical_points"]),
            spectrum=spectrum,
            pose=PoseParams.from_dict(data["pose"]),
            degenerate=bool(data.get("degenerate", False)),
        )
        if descriptor.M != data["M"] or descriptor.q != data["q"] or descriptor.n != data["n"]:
            raise DescriptorError("descriptor header does not match its arrays")
        return descriptor


def resample_arclength(points: np.ndarray, M: int) -> np.ndarray:
    """M points spaced uniformly in cumulative chord length along the polyline."""
    seg = np.linalg.norm(np.diff(points, axis=0), axis=1)
    keep = np.concatenate([[True], seg > 0])
    points = points[keep]
    cum = np.concatenate([[0.0], np.cumsum(seg[seg > 0])])
    if cum[-1] == 0:
        raise DescriptorError("zero-length polyline: all fragment points coincide")
    targets = np.linspace(0.0, cum[-1], M)
    return np.column_stack([np.interp(targets, cum, points[:, j]) for j in range(points.shape[1])])


def _principal_axes(centered: np.ndarray):
    cov = centered.T @ centered / centered.shape[0]
    eigvals, eigvecs = np.linalg.eigh(cov)
    order = np.argsort(eigvals)[::-1]
    eigvals, eigvecs = eigvals[order], eigvecs[:, order]

    degenerate = False
    if eigvals.size >= 2 and abs(eigvals[0] - eigvals[1]) <= TIE_EPS * max(eigvals[0], 1.0):
        degenerate = True
        tied = np.flatnonzero(np.abs(eigvals - eigvals[0]) <= TIE_EPS * max(eigvals[0], 1.0))
        # ambiguous axes: take them in lexicographic order of their (sign-fixed) components
        block = eigvecs[:, tied]
        signs = np.sign(block[np.argmax(np.abs(block) > TIE_EPS, axis=0), np.arange(tied.size)])
        block = block * np.where(signs == 0, 1.0, signs)
        lex = sorted(range(tied.size), key=lambda k: tuple(-block[:, k]))
        eigvecs[:, tied] = block[:, lex]
    return eigvals, eigvecs, degenerate


def normalize_points(points: np.ndarray, M: int = DEFAULT_M, q: int = DEFAULT_Q) -> Descriptor:
    """Descriptor of a raw polyline (rows are points)."""
    points = np.asarray(points, dtype=float)
    if points.ndim != 2:
        raise DescriptorError(f"points must be 2-D, got shape {points.shape}")
    if points.shape[0] < 4:
        raise DescriptorError(f"fragment needs at least 4 points, got {points.shape[0]}")
    if q < 1 or M < 2 * q + 2 or M & (M - 1):
        raise DescriptorError(f"need q >= 1 and M a power of two with M >= 2q+2 (M={M}, q={q})")

    resampled = resample_arclength(points, M)
    translation = resampled.mean(axis=0)
    centered = resampled - translation
    scale = float(np.sqrt(np.mean(np.sum(centered ** 2, axis=1))))
    if scale == 0:
        raise DescriptorError("zero-length polyline: all fragment points coincide")

    _, axes, degenerate = _principal_axes(centered)
    canonical = centered @ axes / scale
    for k in range(axes.shape[1]):
        skew = np.mean(canonical[:, k] ** 3)
        if abs(skew) >= SKEW_EPS:
            flip = skew < 0
        else:
            flip = canonical[0, k] < 0
        if flip:
            axes[:, k] = -axes[:, k]
            canonical[:, k] = -canonical[:, k]

    spectrum = np.fft.fft(canonical, axis=0)[1:q + 1] / M

    if degenerate:
        logger.debug("Degenerate fragment: leading principal axes are tied")
    return Descriptor(canonical, spectrum, PoseParams(translation, axes, scale), degenerate)


def normalize(
    attractor: EmbeddedAttractor,
    fragment: Fragment,
    M: int = DEFAULT_M,
    q: int = DEFAULT_Q,
) -> Descriptor:
    if fragment.end >= len(attractor):
        raise DescriptorError(f"fragment [{fragment.start}, {fragment.end}] exceeds {len(attractor)} points")
    return normalize_points(attractor.points[fragment.start:fragment.end + 1], M, q)


def normalize_all(
    attractor: EmbeddedAttractor,
    fragments: Sequence[Fragment],
    M: int = DEFAULT_M,
    q: int = DEFAULT_Q,
    n_jobs: int = 1,
) -> List[Descriptor]:
    """Descriptors for every fragment, in fragment order."""
    descriptors = Parallel(n_jobs=n_jobs)(delayed(normalize)(attractor, f, M, q) for f in fragments)
    degenerate = sum(d.degenerate for d in descriptors)
    if degenerate:
        logger.warning(f"{degenerate} of {len(descriptors)} fragments have tied principal axes")
    return list(descriptors)


def reconstruct(descriptor: Descriptor) -> np.ndarray:
    """Canonical points mapped back to the original frame."""
    return descriptor.pose.apply(descriptor.canonical_points)


def relative_pose(a: Descriptor, b: Descriptor) -> PoseParams:
    """Similarity taking fragment A's resampled points onto fragment B's: b = c * R @ a + v."""
    rotation = b.pose.rotation @ a.pose.rotation.T
    scale = b.pose.scale / a.pose.scale
    translation = b.pose.translation - scale * rotation @ a.pose.translation
    return PoseParams(translation, rotation, scale)


def symmetry_distance(a: Descriptor, b: Descriptor, w: SpectralWeights) -> float:
    """Weighted sum over harmonics of the imaginary and real spectral differences."""
    if a.n != b.n:
        raise DescriptorError(f"dimension mismatch: {a.n} vs {b.n}")
    if a.M != b.M:
        raise DescriptorError(f"resolution mismatch: M={a.M} vs M={b.M}")
    if w.q > min(a.q, b.q):
        raise DescriptorError(f"{w.q} weights but only {min(a.q, b.q)} harmonics available")

    diff = b.spectrum[:w.q] - a.spectrum[:w.q]
    imag = np.sqrt(np.sum(diff.imag ** 2, axis=1))
    real = np.sqrt(np.sum(diff.real ** 2, axis=1))
    return float(np.sum(np.asarray(w.betas) * (imag + real)))

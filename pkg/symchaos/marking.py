"""
Marking: split an attractor trajectory into monotone fragments.

Extrema of one coordinate are found with a prominence filter relative to the
coordinate range; consecutive extrema (and the two trajectory ends) delimit
fragments.
"""

import logging
from dataclasses import dataclass
from enum import Enum
from typing import List, Optional, Tuple

import numpy as np
from scipy.signal import find_peaks

from symchaos.series_io import EmbeddedAttractor

logger = logging.getLogger(__name__)

DEFAULT_MIN_LEN = 8
DEFAULT_PROMINENCE = 0.01


class Direction(str, Enum):
    INCREASING = "increasing"
    DECREASING = "decreasing"

    def flipped(self) -> "Direction":
        return Direction.DECREASING if self is Direction.INCREASING else Direction.INCREASING


@dataclass(frozen=True)
class Fragment:
    start: int
    end: int
    coord: int
    direction: Direction

    def __post_init__(self):
        if self.start < 0 or self.end <= self.start:
            raise ValueError(f"fragment needs 0 <= start < end, got [{self.start}, {self.end}]")
        object.__setattr__(self, "direction", Direction(self.direction))

    @property
    def length(self) -> int:
        return self.end - self.start + 1

    def to_dict(self):
        return {"start": self.start, "end": self.end, "coord": self.coord, "direction": self.direction.value}

    @classmethod
    def from_dict(cls, data):
        return cls(int(data["start"]), int(data["end"]), int(data["coord"]), Direction(data["direction"]))


def _extrema(x: np.ndarray, threshold: float) -> List[Tuple[int, int]]:
    """(index, +1 peak / -1 trough) pairs; plateau extrema sit at the plateau's first index."""
    found = []
    for sign in (1, -1):
        _, props = find_peaks(sign * x, prominence=threshold, plateau_size=1)
        found.extend((int(i), sign) for i in props["left_edges"])
    found.sort()

    chain = []
    for idx, sign in found:
        if chain and chain[-1][1] == sign:
            # two peaks (or troughs) in a row: keep the more extreme, earlier on ties
            if sign * x[idx] > sign * x[chain[-1][0]]:
                chain[-1] = (idx, sign)
            continue
        chain.append((idx, sign))
    return chain


def mark_fragments(
    attractor: EmbeddedAttractor,
    coord: int = 0,
    min_len: int = DEFAULT_MIN_LEN,
    prominence: float = DEFAULT_PROMINENCE,
) -> Tuple[List[Fragment], Optional[str]]:
    """
    Monotone fragments of the coord-projection, ordered by start.

    Returns the fragments and a warning message (None when marking succeeded).
    """
    if not 0 <= coord < attractor.dim:
        raise ValueError(f"coord {coord} outside [0, {attractor.dim})")
    if min_len < 2:
        raise ValueError(f"min_len must be >= 2, got {min_len}")
    if prominence < 0:
        raise ValueError(f"prominence must be >= 0, got {prominence}")

    x = attractor.coordinate(coord)
    span = float(np.ptp(x))
    if span == 0:
        warning = f"coordinate {coord} is constant: no extrema, no monotone fragments"
        logger.warning(warning)
        return [], warning

    chain = _extrema(x, prominence * span)
    bounds = [0] + [idx for idx, _ in chain if 0 < idx < len(x) - 1] + [len(x) - 1]

    fragments = []
    for start, end in zip(bounds[:-1], bounds[1:]):
        if end - start + 1 < min_len or x[end] == x[start]:
            continue
        direction = Direction.INCREASING if x[end] > x[start] else Direction.DECREASING
        fragments.append(Fragment(start, end, coord, direction))

    warning = None
    if not fragments:
        warning = f"no fragment of length >= {min_len} on coordinate {coord}"
        logger.warning(warning)
    logger.info(f"Marked {len(fragments)} fragments from {len(chain)} extrema")
    return fragments, warning

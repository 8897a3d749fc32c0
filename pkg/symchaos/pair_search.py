"""
Search for the most nearly symmetric fragment pairs.

exhaustive_search scores every pair and serves as the oracle; ga_search runs a
genetic algorithm over index-pair chromosomes (idx_a < idx_b) with tournament
selection, one-gene crossover, single-gene mutation and elitism. Crossover and
mutation fire only at their configured rates; a child that already sits in the
current generation is replaced by a random immigrant pair. Every random
choice comes from a stream seeded by (seed, generation, slot), so results do
not depend on how fitness evaluation is parallelized.
"""

import logging
from dataclasses import dataclass
from typing import Dict, List, Sequence, Tuple

import numpy as np
from joblib import Parallel, delayed
from tqdm import tqdm

from symchaos.descriptors import Descriptor, SpectralWeights, symmetry_distance

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class SymmetryPair:
    idx_a: int
    idx_b: int
    distance: float

    def __post_init__(self):
        if not 0 <= self.idx_a < self.idx_b:
            raise ValueError(f"pair needs 0 <= idx_a < idx_b, got ({self.idx_a}, {self.idx_b})")
        if not self.distance >= 0:
            raise ValueError(f"distance must be non-negative, got {self.distance}")

    @property
    def sort_key(self):
        return (self.distance, self.idx_a, self.idx_b)

    def to_dict(self):
        return {"idx_a": self.idx_a, "idx_b": self.idx_b, "distance": self.distance}

    @classmethod
    def from_dict(cls, data):
        return cls(int(data["idx_a"]), int(data["idx_b"]), float(data["distance"]))


@dataclass(frozen=True)
class GaConfig:
    population: int = 64
    generations: int = 100
    crossover_rate: float = 0.8
    mutation_rate: float = 0.1
    elite: int = 2
    tournament_k: int = 3
    seed: int = 0

    def __post_init__(self):
        if self.population < 4:
            raise ValueError(f"population must be >= 4, got {self.population}")
        if not 0 <= self.elite < self.population:
            raise ValueError(f"elite must lie in [0, population), got {self.elite}")
        if self.tournament_k < 2:
            raise ValueError(f"tournament_k must be >= 2, got {self.tournament_k}")
        if self.generations < 0:
            raise ValueError(f"generations must be >= 0, got {self.generations}")
        for name in ("crossover_rate", "mutation_rate"):
            if not 0.0 <= getattr(self, name) <= 1.0:
                raise ValueError(f"{name} must lie in [0, 1], got {getattr(self, name)}")
        if self.seed < 0:
            raise ValueError(f"seed must be unsigned, got {self.seed}")

    def to_dict(self):
        return dict(self.__dict__)


def _check(descriptors: Sequence[Descriptor]):
    if len(descriptors) < 2:
        raise ValueError(f"need at least 2 descriptors, got {len(descriptors)}")


def _ranked(scored: Dict[Tuple[int, int], float], top_k: int) -> List[SymmetryPair]:
    pairs = [SymmetryPair(a, b, d) for (a, b), d in scored.items()]
    pairs.sort(key=lambda p: p.sort_key)
    return pairs[:top_k]


def exhaustive_search(
    descriptors: Sequence[Descriptor],
    w: SpectralWeights,
    top_k: int = 5,
) -> List[SymmetryPair]:
    """All C(N, 2) pairs scored; the top_k smallest distances, ties by (idx_a, idx_b)."""
    _check(descriptors)
    n = len(descriptors)
    scored = {
        (a, b): symmetry_distance(descriptors[a], descriptors[b], w)
        for a in range(n) for b in range(a + 1, n)
    }
    return _ranked(scored, top_k)


class GeneticPairSearch:
    def __init__(self, descriptors: Sequence[Descriptor], w: SpectralWeights, cfg: GaConfig,
                 n_jobs: int = 1, progress: bool = False):
        _check(descriptors)
        self.descriptors = list(descriptors)
        self.w = w
        self.cfg = cfg
        self.n_jobs = n_jobs
        self.progress = progress
        self.n = len(self.descriptors)
        rows, cols = np.triu_indices(self.n, 1)
        # row-major upper triangle: (0,1), (0,2), ..., (1,2), ...
        self.pairs = [(int(a), int(b)) for a, b in zip(rows, cols)]
        self.total = len(self.pairs)
        self.cache: Dict[Tuple[int, int], float] = {}
        self.history: List[float] = []

    def _rng(self, generation: int, slot: int) -> np.random.Generator:
        return np.random.default_rng([self.cfg.seed, generation, slot])

    def _evaluate(self, population: List[Tuple[int, int]]):
        fresh = list(dict.fromkeys(p for p in population if p not in self.cache))
        if not fresh:
            return
        values = Parallel(n_jobs=self.n_jobs)(
            delayed(symmetry_distance)(self.descriptors[a], self.descriptors[b], self.w) for a, b in fresh
        )
        self.cache.update(zip(fresh, values))

    def _initial(self) -> List[Tuple[int, int]]:
        rng = self._rng(0, self.cfg.population)
        if self.cfg.population >= self.total:
            keys = list(range(self.total))
            keys += rng.integers(0, self.total, size=self.cfg.population - self.total).tolist()
        else:
            keys = rng.choice(self.total, size=self.cfg.population, replace=False).tolist()
        return [self.pairs[k] for k in keys]

    def _tournament(self, population, rng) -> Tuple[int, int]:
        slots = rng.integers(0, len(population), size=self.cfg.tournament_k)
        return min((population[s] for s in slots), key=lambda p: (self.cache[p], p))

    def _mutate(self, chromosome: Tuple[int, int], rng) -> Tuple[int, int]:
        genes = list(chromosome)
        slot = int(rng.integers(0, 2))
        other = genes[1 - slot]
        value = int(rng.integers(0, self.n - 1))
        genes[slot] = value if value < other else value + 1
        return (min(genes), max(genes))

    def _ordered(self, child: Tuple[int, int], rng) -> Tuple[int, int]:
        a, b = child
        if a == b:
            return self._mutate(child, rng)
        return (min(a, b), max(a, b))

    def _immigrant(self, child: Tuple[int, int], rng, taken) -> Tuple[int, int]:
        """A uniformly drawn pair not yet in this generation, unevaluated ones first."""
        pool = [p for p in self.pairs if p not in taken and p not in self.cache]
        if not pool:
            pool = [p for p in self.pairs if p not in taken]
        if not pool:
            return child
        return pool[int(rng.integers(0, len(pool)))]

    def _breed(self, population, generation: int) -> List[Tuple[int, int]]:
        # elites carry over unchanged
        ranked = sorted(dict.fromkeys(population), key=lambda p: (self.cache[p], p))
        children = ranked[:self.cfg.elite]
        taken = set(children)
        for slot in range(len(children), self.cfg.population):
            rng = self._rng(generation, slot)
            first = self._tournament(population, rng)
            second = self._tournament(population, rng)

            # one-gene crossover: idx_a from the first parent, idx_b from the second
            if rng.random() < self.cfg.crossover_rate:
                child = self._ordered((first[0], second[1]), rng)
            else:
                child = first
            if rng.random() < self.cfg.mutation_rate:
                child = self._mutate(child, rng)

            # no chromosome twice in one generation; repeats of earlier generations hit the cache
            if child in taken:
                child = self._immigrant(child, rng, taken)
            taken.add(child)
            children.append(child)
        return children

    def run(self, top_k: int = 5) -> List[SymmetryPair]:
        if self.total == 1:
            self._evaluate([(0, 1)])
            self.history = [self.cache[(0, 1)]]
            return _ranked(self.cache, top_k)

        population = self._initial()
        self._evaluate(population)
        self.history = [min(self.cache.values())]

        for generation in tqdm(range(1, self.cfg.generations + 1), desc="GA generations",
                               disable=not self.progress):
            if len(self.cache) == self.total:
                logger.debug(f"Every pair evaluated after {generation - 1} generations")
                break
            population = self._breed(population, generation)
            self._evaluate(population)
            self.history.append(min(self.cache.values()))

        logger.info(f"GA evaluated {len(self.cache)} of {self.total} pairs; best distance {self.history[-1]:.6g}")
        return _ranked(self.cache, top_k)


def ga_search(
    descriptors: Sequence[Descriptor],
    w: SpectralWeights,
    cfg: GaConfig = GaConfig(),
    top_k: int = 5,
    n_jobs: int = 1,
) -> List[SymmetryPair]:
    return GeneticPairSearch(descriptors, w, cfg, n_jobs=n_jobs).run(top_k)

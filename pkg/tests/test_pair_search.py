import numpy as np
import pytest

from conftest import random_polyline, random_rotation
from symchaos.descriptors import SpectralWeights, normalize_points, symmetry_distance
from symchaos.pair_search import GaConfig, GeneticPairSearch, SymmetryPair, exhaustive_search, ga_search

W = SpectralWeights.uniform(8)


def planted_set(seed, count, planted=(3, 11)):
    """Random fragments where fragment planted[1] is a noisy similarity copy of planted[0]."""
    rng = np.random.default_rng(seed)
    polylines = [random_polyline(rng, 30, 2) for _ in range(count)]
    a, b = planted
    copy = 2.5 * polylines[a] @ random_rotation(rng, 2).T + np.array([4.0, -7.0])
    polylines[b] = copy + 1e-4 * rng.standard_normal(copy.shape)
    return [normalize_points(p) for p in polylines]


def test_two_descriptors_give_the_only_pair(rng):
    descriptors = [normalize_points(random_polyline(rng)) for _ in range(2)]
    pairs = exhaustive_search(descriptors, W, top_k=5)
    assert [(p.idx_a, p.idx_b) for p in pairs] == [(0, 1)]
    assert ga_search(descriptors, W, top_k=5) == pairs


def test_identical_descriptors_tie_break(rng):
    one = normalize_points(random_polyline(rng))
    pairs = exhaustive_search([one, one, one], W, top_k=3)
    assert [(p.idx_a, p.idx_b) for p in pairs] == [(0, 1), (0, 2), (1, 2)]
    assert all(p.distance == 0 for p in pairs)


def test_exhaustive_finds_planted_pair():
    descriptors = planted_set(7, 20)
    best = exhaustive_search(descriptors, W, top_k=5)
    assert (best[0].idx_a, best[0].idx_b) == (3, 11)
    assert best[0].distance == pytest.approx(symmetry_distance(descriptors[3], descriptors[11], W))
    assert [p.distance for p in best] == sorted(p.distance for p in best)


def test_exhaustive_needs_two_descriptors(rng):
    with pytest.raises(ValueError):
        exhaustive_search([normalize_points(random_polyline(rng))], W)


def test_ga_matches_oracle_across_seeds():
    descriptors = planted_set(11, 40)
    oracle = exhaustive_search(descriptors, W, top_k=1)[0]
    hits = 0
    for seed in range(10):
        best = ga_search(descriptors, W, GaConfig(population=40, generations=50, seed=seed), top_k=1)[0]
        assert best.distance >= oracle.distance
        hits += (best.idx_a, best.idx_b) == (oracle.idx_a, oracle.idx_b)
    assert hits >= 9


def test_ga_is_deterministic():
    descriptors = planted_set(5, 25)
    cfg = GaConfig(population=16, generations=10, seed=3)
    assert ga_search(descriptors, W, cfg, top_k=5) == ga_search(descriptors, W, cfg, top_k=5)


def test_ga_independent_of_worker_count():
    descriptors = planted_set(5, 25)
    cfg = GaConfig(population=16, generations=5, seed=1)
    serial = ga_search(descriptors, W, cfg, top_k=5, n_jobs=1)
    parallel = ga_search(descriptors, W, cfg, top_k=5, n_jobs=2)
    assert serial == parallel


def test_ga_history_never_worsens():
    descriptors = planted_set(2, 30)
    search = GeneticPairSearch(descriptors, W, GaConfig(population=12, generations=20, seed=4))
    search.run()
    assert len(search.history) >= 2
    assert all(b <= a for a, b in zip(search.history, search.history[1:]))


def test_ga_pairs_are_distinct_and_sorted():
    descriptors = planted_set(9, 30)
    pairs = ga_search(descriptors, W, GaConfig(population=16, generations=10, seed=0), top_k=8)
    keys = [(p.idx_a, p.idx_b) for p in pairs]
    assert len(set(keys)) == len(keys) == 8
    assert all(a < b for a, b in keys)
    assert [p.sort_key for p in pairs] == sorted(p.sort_key for p in pairs)


def test_generation_without_variation_only_copies_or_immigrates():
    descriptors = planted_set(4, 30)
    cfg = GaConfig(population=10, generations=1, elite=2, crossover_rate=0.0, mutation_rate=0.0, seed=0)
    search = GeneticPairSearch(descriptors, W, cfg)
    population = search._initial()
    search._evaluate(population)
    seen = set(search.cache)

    children = search._breed(population, 1)
    assert len(children) == 10
    assert len(set(children)) == len(children)
    for child in children:
        assert child in population or child not in seen


def test_ga_without_variation_does_not_enumerate():
    descriptors = planted_set(4, 40)
    cfg = GaConfig(population=10, generations=3, elite=2, crossover_rate=0.0, mutation_rate=0.0, seed=0)
    search = GeneticPairSearch(descriptors, W, cfg)
    search.run()
    assert len(search.cache) < 10 + 3 * 8


def test_full_mutation_changes_exactly_one_index():
    descriptors = planted_set(4, 30)
    search = GeneticPairSearch(descriptors, W, GaConfig(population=10, seed=0))
    rng = np.random.default_rng(0)
    for parent in [(0, 1), (3, 11), (5, 29)]:
        child = search._mutate(parent, rng)
        assert child[0] < child[1]
        assert len(set(child) & set(parent)) == 1


def test_crossover_with_equal_genes_is_repaired():
    search = GeneticPairSearch(planted_set(4, 30), W, GaConfig(population=10, seed=0))
    child = search._ordered((7, 7), np.random.default_rng(1))
    assert child[0] < child[1] and 7 in child
    assert search._ordered((9, 2), np.random.default_rng(1)) == (2, 9)


def test_large_population_matches_exhaustive():
    descriptors = planted_set(6, 8, planted=(1, 5))
    pairs = ga_search(descriptors, W, GaConfig(population=28, generations=5, elite=2, seed=2), top_k=10)
    assert pairs == exhaustive_search(descriptors, W, top_k=10)


@pytest.mark.parametrize("kwargs", [
    {"population": 3},
    {"elite": 64},
    {"tournament_k": 1},
    {"crossover_rate": 1.5},
    {"mutation_rate": -0.1},
])
def test_ga_config_validation(kwargs):
    with pytest.raises(ValueError):
        GaConfig(**kwargs)


def test_symmetry_pair_invariants():
    with pytest.raises(ValueError):
        SymmetryPair(2, 1, 0.5)
    with pytest.raises(ValueError):
        SymmetryPair(0, 1, -1.0)
    pair = SymmetryPair(0, 4, 0.25)
    assert SymmetryPair.from_dict(pair.to_dict()) == pair

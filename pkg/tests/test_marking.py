import numpy as np
import pytest

from symchaos.marking import Direction, Fragment, mark_fragments
from symchaos.series_io import EmbeddedAttractor, EmbeddingConfig, ScalarSeries, embed


def attractor_from(x, extra=None):
    extra = np.zeros_like(x) if extra is None else extra
    return EmbeddedAttractor(np.column_stack([x, extra]), dim=2, lag=1)


def test_sine_fragments_alternate():
    t = np.arange(400)
    fragments, warning = mark_fragments(attractor_from(np.sin(2 * np.pi * t / 100)))
    assert warning is None
    assert len(fragments) == 9
    assert (fragments[0].start, fragments[0].end) == (0, 25)
    assert (fragments[1].start, fragments[1].end) == (25, 75)
    assert fragments[-1].end == 399
    directions = [f.direction for f in fragments]
    assert directions[0] is Direction.INCREASING
    assert all(a is b.flipped() for a, b in zip(directions, directions[1:]))


def test_fragments_are_monotone(henon_series):
    x = henon_series.samples[:2000]
    attractor = attractor_from(x, np.roll(x, -1))
    fragments, _ = mark_fragments(attractor, min_len=3, prominence=0.0)
    assert fragments
    for f in fragments:
        piece = x[f.start:f.end + 1]
        steps = np.diff(piece)
        if f.direction is Direction.INCREASING:
            assert np.all(steps >= 0)
        else:
            assert np.all(steps <= 0)


def test_ramp_is_one_fragment():
    fragments, warning = mark_fragments(attractor_from(np.linspace(0, 1, 50)))
    assert warning is None
    assert fragments == [Fragment(0, 49, 0, Direction.INCREASING)]


def test_constant_coordinate_warns():
    fragments, warning = mark_fragments(attractor_from(np.full(50, 2.0)))
    assert fragments == []
    assert "constant" in warning


def test_short_pieces_are_dropped():
    t = np.arange(400)
    x = np.sin(2 * np.pi * t / 100)
    fragments, warning = mark_fragments(attractor_from(x), min_len=60)
    assert fragments == []
    assert "no fragment" in warning


def test_prominence_filters_wiggles():
    t = np.linspace(0, 1, 500)
    x = t + 0.01 * np.sin(2 * np.pi * 40 * t)
    fragments, _ = mark_fragments(attractor_from(x), prominence=0.05)
    assert len(fragments) == 1
    assert fragments[0].direction is Direction.INCREASING


def test_plateau_extremum_starts_at_first_index():
    x = np.concatenate([np.linspace(0, 1, 20), np.ones(5), np.linspace(1, 0, 20)[1:]])
    fragments, _ = mark_fragments(attractor_from(x), min_len=4)
    assert fragments[0].end == 19


def test_argument_validation():
    attractor = attractor_from(np.linspace(0, 1, 20))
    with pytest.raises(ValueError):
        mark_fragments(attractor, coord=2)
    with pytest.raises(ValueError):
        mark_fragments(attractor, min_len=1)


def test_fragment_round_trip():
    fragment = Fragment(3, 17, 1, Direction.DECREASING)
    assert Fragment.from_dict(fragment.to_dict()) == fragment
    assert fragment.length == 15


def test_four_sine_periods_give_eight_fragments():
    x = np.cos(2 * np.pi * np.arange(256) / 64)
    fragments, warning = mark_fragments(attractor_from(x), prominence=0.01)
    assert warning is None
    assert len(fragments) == 8
    assert [(f.start, f.end) for f in fragments[:2]] == [(0, 32), (32, 64)]
    assert fragments[0].direction is Direction.DECREASING
    assert all(a.direction is b.direction.flipped() for a, b in zip(fragments, fragments[1:]))


def test_sub_prominence_ripple_keeps_fragments():
    t = np.arange(256)
    x = np.cos(2 * np.pi * t / 64)
    rippled = x + 0.001 * np.sin(2 * np.pi * t / 5)
    clean, _ = mark_fragments(attractor_from(x), prominence=0.01)
    noisy, _ = mark_fragments(attractor_from(rippled), prominence=0.01)
    assert len(noisy) == len(clean) == 8
    assert [f.direction for f in noisy] == [f.direction for f in clean]
    for a, b in zip(clean, noisy):
        assert abs(a.start - b.start) <= 2 and abs(a.end - b.end) <= 2


def henon_attractor(samples):
    return embed(ScalarSeries(samples), EmbeddingConfig(lag=1, dim=2))


def test_positive_affine_map_keeps_boundaries(henon_series):
    x = henon_series.samples
    base, _ = mark_fragments(henon_attractor(x), min_len=4)
    moved, _ = mark_fragments(henon_attractor(2.5 * x - 4.0), min_len=4)
    assert base
    assert moved == base


def test_negative_scale_flips_every_direction(henon_series):
    x = henon_series.samples
    base, _ = mark_fragments(henon_attractor(x), min_len=4)
    mirrored, _ = mark_fragments(henon_attractor(-3.0 * x + 1.0), min_len=4)
    assert [(f.start, f.end) for f in mirrored] == [(f.start, f.end) for f in base]
    assert all(m.direction is b.direction.flipped() for m, b in zip(mirrored, base))

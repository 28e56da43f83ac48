import numpy as np
import pytest

from cherlb import _streams


def test_chunk_bounds_cover_range():
    b = list(_streams.chunk_bounds(10, 4))
    assert b == [(0, 0, 4), (1, 4, 8), (2, 8, 10)]
    assert list(_streams.chunk_bounds(0, 4)) == []


def test_chunk_rng_independent_streams():
    a = _streams.chunk_rng(1, 1, 0).standard_normal(5)
    assert np.array_equal(a, _streams.chunk_rng(1, 1, 0).standard_normal(5))
    assert not np.array_equal(a, _streams.chunk_rng(1, 2, 0).standard_normal(5))
    assert not np.array_equal(a, _streams.chunk_rng(1, 1, 1).standard_normal(5))
    assert not np.array_equal(a, _streams.chunk_rng(2, 1, 0).standard_normal(5))


def test_map_chunks_order_independent_of_workers():
    fn = lambda c, a, b: _streams.chunk_rng(3, 1, c).random(b - a)
    one = np.concatenate(_streams.map_chunks(fn, 1000, 64, workers=1))
    many = np.concatenate(_streams.map_chunks(fn, 1000, 64, workers=4))
    assert np.array_equal(one, many)


def test_fold_chunks():
    fn = lambda c, a, b: b - a
    assert _streams.fold_chunks(fn, 1000, 64, lambda s, r: s + r, 0, workers=3) == 1000


def test_workers_env(monkeypatch):
    monkeypatch.setenv(_streams.WORKERS_ENV, "3")
    assert _streams.default_workers() == 3
    monkeypatch.setenv(_streams.WORKERS_ENV, "junk")
    assert _streams.default_workers() == 1


def test_lower_tail():
    rng = np.random.default_rng(0)
    x = rng.random(10_000)
    tail = _streams.LowerTail(25)
    for part in np.array_split(x, 37):
        tail.update(part)
    assert tail.order_statistic() == np.sort(x)[24]
    with pytest.raises(ValueError):
        _streams.LowerTail(5).order_statistic()

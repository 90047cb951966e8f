import numpy as np
import pytest

from rayq.errors import DimensionTooSmall
from rayq.linalg import OperatorPair, b_norm
from rayq.sampling import (
    RngStream,
    sample_initial,
    sample_tangent_direction,
    sample_tangent_directions,
)


def _pair(seed=0, d=8):
    rng = np.random.default_rng(seed)
    a = rng.normal(size=(d, d))
    g = rng.normal(size=(d, d))
    return OperatorPair.from_dense(a, g.T @ g + d * np.eye(d))


def test_same_seed_same_stream_reproduces():
    pair = _pair()
    v = sample_initial(pair, RngStream(7))
    x1 = sample_tangent_direction(pair, v, RngStream(7, stream_id=3))
    x2 = sample_tangent_direction(pair, v, RngStream(7, stream_id=3))
    assert np.array_equal(x1, x2)


def test_distinct_streams_are_independent_draws():
    pair = _pair()
    v = sample_initial(pair, RngStream(7))
    x1 = sample_tangent_direction(pair, v, RngStream(7, stream_id=0))
    x2 = sample_tangent_direction(pair, v, RngStream(7, stream_id=1))
    assert not np.allclose(x1, x2)


def test_batched_draws_match_sequential_stream_consumption():
    pair = _pair(1)
    v = sample_initial(pair, RngStream(11))
    batch = sample_tangent_directions(pair, v, RngStream(11, stream_id=2), 5)
    seq_rng = RngStream(11, stream_id=2)
    for i in range(5):
        raw = seq_rng.standard_normal(pair.dim)
        # the batched path draws one (n, d) block, which Philox consumes
        # in the same order as n successive length-d draws
        assert np.allclose(batch[i] * np.linalg.norm(_proj(pair, v, raw)), _proj(pair, v, raw), atol=1e-12)


def _proj(pair, v, y):
    bv = pair.apply_b(v)
    return y - (y @ bv) / (bv @ bv) * bv


def test_initial_iterate_unit_b_norm():
    pair = _pair(2)
    v = sample_initial(pair, RngStream(0))
    assert b_norm(pair, v) == pytest.approx(1.0, abs=1e-12)


def test_directions_are_tangent_and_unit_length():
    pair = _pair(3)
    v = sample_initial(pair, RngStream(5))
    xs = sample_tangent_directions(pair, v, RngStream(5, stream_id=1), 64)
    bv = pair.dense_b @ v
    assert np.max(np.abs(xs @ bv)) <= 1e-10
    assert np.allclose(np.linalg.norm(xs, axis=1), 1.0, atol=1e-12)


def test_dimension_one_rejected():
    pair = OperatorPair.from_dense(np.array([[2.0]]), np.array([[1.0]]))
    v = np.array([1.0])
    with pytest.raises(DimensionTooSmall):
        sample_tangent_direction(pair, v, RngStream(0))


def test_second_moment_close_to_projector():
    d, n = 6, 40_000
    pair = _pair(4, d=d)
    v = sample_initial(pair, RngStream(1))
    xs = sample_tangent_directions(pair, v, RngStream(1, stream_id=1), n)
    emp = xs.T @ xs / n
    bv = pair.dense_b @ v
    proj = np.eye(d) - np.outer(bv, bv) / float(bv @ bv)
    assert np.linalg.norm(emp - proj / (d - 1)) <= 5.0 * np.sqrt(d / n)

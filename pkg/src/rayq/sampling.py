"""Seeded random draws on the B-sphere and its tangent spheres.

Streams are built on the counter-based Philox generator keyed by
(seed, stream_id), so every trial owns an independent stream and the draw
sequence is bit-for-bit reproducible regardless of thread scheduling.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import DegenerateSample, DimensionTooSmall
from .linalg import OperatorPair, b_norm

__all__ = [
    "RngStream",
    "sample_initial",
    "sample_tangent_direction",
    "sample_tangent_directions",
]

_NULL_TOL = 1e-150
_MAX_ATTEMPTS = 100


@dataclass
class RngStream:
    """A single-owner random stream identified by (seed, stream_id)."""

    seed: int
    stream_id: int = 0
    _gen: np.random.Generator = field(init=False, repr=False)

    def __post_init__(self):
        key = np.array([self.seed, self.stream_id], dtype=np.uint64)
        self._gen = np.random.Generator(np.random.Philox(key=key))

    def standard_normal(self, shape) -> np.ndarray:
        return self._gen.standard_normal(shape)


def sample_initial(pair: OperatorPair, rng: RngStream) -> np.ndarray:
    """Draw a standard normal vector and normalize it to unit B-norm."""
    for _ in range(_MAX_ATTEMPTS):
        v = rng.standard_normal(pair.dim)
        nb = b_norm(pair, v)
        if nb >= _NULL_TOL:
            return v / nb
    raise DegenerateSample("initial draws were numerically null")


def sample_tangent_direction(pair: OperatorPair, v, rng: RngStream) -> np.ndarray:
    """One uniform direction on the tangent sphere at v."""
    return sample_tangent_directions(pair, v, rng, 1)[0]


def sample_tangent_directions(pair: OperatorPair, v, rng: RngStream, n: int) -> np.ndarray:
    """n i.i.d. uniform directions on {x : <x, Bv> = 0, |x| = 1}, as rows.

    Each direction is a projected-and-normalized standard normal draw; the
    batched draw consumes the stream in the same order as n single draws.
    """
    if pair.dim < 2:
        raise DimensionTooSmall("tangent sphere is empty for dim < 2")
    v = np.asarray(v, dtype=np.float64)
    bv = pair.apply_b(v)
    n2 = float(bv @ bv)
    xs = rng.standard_normal((n, pair.dim))
    xs -= np.outer(xs @ bv / n2, bv)
    norms = np.linalg.norm(xs, axis=1)
    for i in np.flatnonzero(norms < _NULL_TOL):
        for _ in range(_MAX_ATTEMPTS):
            x = rng.standard_normal(pair.dim)
            x -= (float(x @ bv) / n2) * bv
            norms[i] = np.linalg.norm(x)
            if norms[i] >= _NULL_TOL:
                xs[i] = x
                break
        else:
            raise DegenerateSample("projected draws were numerically null")
    return xs / norms[:, None]

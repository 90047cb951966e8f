import numpy as np
import pytest

from rayq.complexify import (
    derealify_vector,
    realify_matrix,
    realify_vector,
    solve_complex,
)
from rayq.errors import NotHermitianPD, NotSquare
from rayq.sampling import RngStream
from rayq.solvers import SolverConfig


def _complex_pair(seed, d=6):
    rng = np.random.default_rng(seed)
    a = rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))
    g = rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))
    b = g.conj().T @ g + d * np.eye(d)
    return a, b


def test_vector_roundtrip():
    rng = np.random.default_rng(0)
    v = rng.normal(size=5) + 1j * rng.normal(size=5)
    assert np.array_equal(derealify_vector(realify_vector(v)), v)


def test_realify_is_a_ring_homomorphism():
    a, b = _complex_pair(1)
    lhs = realify_matrix(a) @ realify_matrix(b)
    rhs = realify_matrix(a @ b)
    assert np.allclose(lhs, rhs, atol=1e-12 * np.linalg.norm(rhs))
    s = realify_matrix(a + b)
    assert np.allclose(realify_matrix(a) + realify_matrix(b), s, atol=0)


def test_realify_commutes_with_matvec():
    a, _ = _complex_pair(2)
    rng = np.random.default_rng(3)
    v = rng.normal(size=6) + 1j * rng.normal(size=6)
    assert np.allclose(realify_matrix(a) @ realify_vector(v), realify_vector(a @ v), atol=1e-12)


def test_realified_spectrum_doubles():
    a, b = _complex_pair(4)
    ah = 0.5 * (a + a.conj().T)
    import scipy.linalg as sla

    w = sla.eigh(ah, b, eigvals_only=True)
    wr = sla.eigh(0.5 * (realify_matrix(a) + realify_matrix(a).T), realify_matrix(b),
                  eigvals_only=True)
    assert np.allclose(np.repeat(w, 2), wr, atol=1e-10 * max(1.0, np.abs(w).max()))


def test_solve_complex_matches_hermitian_oracle():
    import scipy.linalg as sla

    a, b = _complex_pair(5)
    v, value, result = solve_complex(a, b, SolverConfig(m=10, max_iters=1500), RngStream(0))
    w = sla.eigh(0.5 * (a + a.conj().T), b, eigvals_only=True)
    assert value == pytest.approx(w[-1], rel=1e-8)
    assert v.dtype.kind == "c" and v.shape == (6,)


def test_solve_complex_rejects_non_hermitian_b():
    a, b = _complex_pair(6)
    bad = b.copy()
    bad[0, 1] += 0.5
    with pytest.raises(NotHermitianPD):
        solve_complex(a, bad, SolverConfig(m=1, max_iters=10), RngStream(0))


def test_realify_rejects_non_square():
    with pytest.raises(NotSquare):
        realify_matrix(np.ones((2, 3), dtype=complex))

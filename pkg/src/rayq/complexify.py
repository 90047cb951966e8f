"""Real embedding of complex problems.

A complex vector v maps to (Re v, Im v) and a complex matrix M to the
block matrix [[Re M, -Im M], [Im M, Re M]]; the embedding intertwines
application and preserves real inner products, so the real solver
maximizes the real generalized Rayleigh quotient of a complex pair.
"""

from __future__ import annotations

import numpy as np

from .errors import NotHermitianPD, NotSquare
from .linalg import OperatorPair
from .sampling import RngStream
from .solvers import RunResult, SolverConfig, szo_run

__all__ = [
    "realify_vector",
    "derealify_vector",
    "realify_matrix",
    "solve_complex",
]


def realify_vector(v) -> np.ndarray:
    """Stack (Re v, Im v); preserves the Euclidean norm."""
    v = np.asarray(v, dtype=np.complex128)
    return np.concatenate([v.real, v.imag])


def derealify_vector(w) -> np.ndarray:
    """Inverse of realify_vector."""
    w = np.asarray(w, dtype=np.float64)
    if w.size % 2 != 0:
        raise ValueError("realified vector must have even length")
    d = w.size // 2
    return w[:d] + 1j * w[d:]


def realify_matrix(m) -> np.ndarray:
    """Block embedding [[Re M, -Im M], [Im M, Re M]] of a square complex matrix.

    Satisfies realify_matrix(M) @ realify_vector(v) == realify_vector(M @ v)
    and maps Hermitian positive definite matrices to SPD matrices.
    """
    m = np.asarray(m, dtype=np.complex128)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise NotSquare(f"expected a square matrix, got shape {m.shape}")
    return np.block([[m.real, -m.imag], [m.imag, m.real]])


def _probe_hermitian_pd(b: np.ndarray, n_probes: int = 20) -> None:
    rng = np.random.Generator(np.random.Philox(key=0xC0413))
    d = b.shape[0]
    scale = max(1.0, float(np.abs(b).max()))
    for _ in range(n_probes):
        u = rng.standard_normal(d) + 1j * rng.standard_normal(d)
        v = rng.standard_normal(d) + 1j * rng.standard_normal(d)
        lhs = np.vdot(u, b @ v)
        rhs = np.conj(np.vdot(v, b @ u))
        if abs(lhs - rhs) > 1e-10 * scale * np.linalg.norm(u) * np.linalg.norm(v):
            raise NotHermitianPD("B failed the Hermitian symmetry probe")
        quad = np.vdot(v, b @ v)
        if quad.real <= 0.0:
            raise NotHermitianPD("B failed the positivity probe")


def solve_complex(
    a,
    b,
    cfg: SolverConfig,
    rng: RngStream,
) -> tuple[np.ndarray, float, RunResult]:
    """Maximize Re<v, Av> / <v, Bv> over complex v via the real embedding.

    Returns the complex iterate, the attained quotient value, and the
    underlying real run result.
    """
    a = np.asarray(a, dtype=np.complex128)
    b = np.asarray(b, dtype=np.complex128)
    if a.shape != b.shape or a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise NotSquare("A and B must be square with equal shape")
    _probe_hermitian_pd(b)
    pair = OperatorPair.from_dense(realify_matrix(a), realify_matrix(b))
    result = szo_run(pair, cfg, rng)
    v = derealify_vector(result.state.v)
    value = float(np.vdot(v, a @ v).real / np.vdot(v, b @ v).real)
    return v, value, result

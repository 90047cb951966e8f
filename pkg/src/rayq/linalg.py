"""Dense kernels and the B-geometry of the unit sphere {v : <v, Bv> = 1}.

Everything the solver touches goes through :class:`OperatorPair`, which
exposes the problem (A, B) strictly via forward matrix-vector products.
The transpose of A and the inverse of B are structurally unreachable from
the solver; dense-only diagnostics take explicit matrices instead.
"""

from __future__ import annotations

from typing import Callable

import numpy as np

from .errors import (
    DegenerateNormal,
    DenseRequired,
    NonPositiveDenominator,
    NotHermitianPD,
    NotSquare,
    ZeroVector,
)

__all__ = [
    "OperatorPair",
    "rayleigh",
    "b_norm",
    "project_tangent",
    "retract",
    "b_coefficient",
    "riemannian_grad",
]

# <v, Bv> in [-SPD_SLACK * |v|^2, 0] is treated as round-off and clamped.
SPD_SLACK = 1e-14
UNIT_B_TOL = 1e-10


def _as_vector(v, dim: int) -> np.ndarray:
    v = np.asarray(v, dtype=np.float64)
    if v.shape != (dim,):
        raise ValueError(f"expected vector of shape ({dim},), got {v.shape}")
    return v


class OperatorPair:
    """The problem (A, B), reachable only through forward application.

    The constructor verifies on random probes that apply_b behaves like a
    symmetric positive definite matrix. Pairs built from dense matrices
    additionally batch block applications through a single GEMM and keep
    the dense arrays available for diagnostics.
    """

    def __init__(
        self,
        dim: int,
        apply_a: Callable[[np.ndarray], np.ndarray],
        apply_b: Callable[[np.ndarray], np.ndarray],
        check_spd: bool = True,
    ):
        if dim < 1:
            raise ValueError("dim must be >= 1")
        self.dim = int(dim)
        self._apply_a = apply_a
        self._apply_b = apply_b
        self._dense_a: np.ndarray | None = None
        self._dense_b: np.ndarray | None = None
        self.n_a_applies = 0
        self.n_b_applies = 0
        if check_spd:
            self._probe_spd()

    @classmethod
    def from_dense(cls, a, b, check_spd: bool = True) -> "OperatorPair":
        a = np.asarray(a, dtype=np.float64)
        b = np.asarray(b, dtype=np.float64)
        if a.ndim != 2 or a.shape[0] != a.shape[1]:
            raise NotSquare(f"A must be square, got shape {a.shape}")
        if b.shape != a.shape:
            raise ValueError(f"A and B must have equal shape, got {a.shape} vs {b.shape}")
        if not (np.all(np.isfinite(a)) and np.all(np.isfinite(b))):
            raise ValueError("matrix entries must be finite")
        pair = cls(a.shape[0], lambda v: a @ v, lambda v: b @ v, check_spd=check_spd)
        pair._dense_a = a
        pair._dense_b = b
        return pair

    @property
    def is_dense(self) -> bool:
        return self._dense_a is not None

    @property
    def dense_a(self) -> np.ndarray:
        if self._dense_a is None:
            raise DenseRequired("operator-only pair has no dense A")
        return self._dense_a

    @property
    def dense_b(self) -> np.ndarray:
        if self._dense_b is None:
            raise DenseRequired("operator-only pair has no dense B")
        return self._dense_b

    def apply_a(self, v: np.ndarray) -> np.ndarray:
        self.n_a_applies += 1
        return self._apply_a(v)

    def apply_b(self, v: np.ndarray) -> np.ndarray:
        self.n_b_applies += 1
        return self._apply_b(v)

    def apply_a_block(self, x: np.ndarray) -> np.ndarray:
        """Apply A to the rows of x; counts one A-apply per row."""
        self.n_a_applies += x.shape[0]
        if self._dense_a is not None:
            return x @ self._dense_a.T
        return np.stack([self._apply_a(row) for row in x])

    def _probe_spd(self, n_probes: int = 8) -> None:
        # Fixed-seed probes keep construction deterministic.
        rng = np.random.Generator(np.random.Philox(key=0xB5D0))
        for _ in range(n_probes):
            u = rng.standard_normal(self.dim)
            v = rng.standard_normal(self.dim)
            bu = self._apply_b(u)
            bv = self._apply_b(v)
            vbv = float(v @ bv)
            if vbv <= 0.0:
                raise NotHermitianPD("apply_b failed the positivity probe")
            sym = abs(float(u @ bv) - float(v @ bu))
            scale = np.linalg.norm(u) * np.linalg.norm(bv) + np.linalg.norm(v) * np.linalg.norm(bu)
            if sym > 1e-12 * max(scale, 1.0):
                raise NotHermitianPD("apply_b failed the symmetry probe")


def rayleigh(pair: OperatorPair, v) -> float:
    """Generalized Rayleigh quotient <v, Av> / <v, Bv>."""
    v = _as_vector(v, pair.dim)
    if not np.any(v):
        raise ZeroVector("rayleigh requires v != 0")
    vbv = float(v @ pair.apply_b(v))
    if vbv <= 0.0:
        raise NonPositiveDenominator(f"<v, Bv> = {vbv} <= 0")
    return float(v @ pair.apply_a(v)) / vbv


def b_norm(pair: OperatorPair, v) -> float:
    """The B-norm sqrt(<v, Bv>), clamping tiny negative round-off to 0."""
    v = _as_vector(v, pair.dim)
    s = float(v @ pair.apply_b(v))
    if s < 0.0:
        slack = SPD_SLACK * float(v @ v)
        if s < -slack:
            raise NonPositiveDenominator(f"<v, Bv> = {s} < -{slack}")
        s = 0.0
    return float(np.sqrt(s))


def project_tangent(pair: OperatorPair, v, y) -> np.ndarray:
    """Orthogonal projection of y onto the tangent space {x : <x, Bv> = 0}."""
    v = _as_vector(v, pair.dim)
    y = _as_vector(y, pair.dim)
    bv = pair.apply_b(v)
    n2 = float(bv @ bv)
    if n2 < 1e-300:
        raise DegenerateNormal("Bv is numerically zero")
    return y - (float(y @ bv) / n2) * bv


def retract(pair: OperatorPair, v, x) -> np.ndarray:
    """Map a tangent vector back to the B-sphere: (v + x) / |v + x|_B."""
    v = _as_vector(v, pair.dim)
    x = _as_vector(x, pair.dim)
    w = v + x
    nb = b_norm(pair, w)
    if nb < 1e-300:
        raise ZeroVector("v + x has numerically zero B-norm")
    return w / nb


def b_coefficient(pair: OperatorPair, v, x) -> float:
    """Directional coefficient b = <x, Av> + <v, Ax> = 2 <x, sym(A) v>.

    Uses exactly two forward applications of A; no transpose is involved.
    Vanishes exactly when v is a generalized eigenvector of (sym(A), B).
    """
    v = _as_vector(v, pair.dim)
    x = _as_vector(x, pair.dim)
    av = pair.apply_a(v)
    ax = pair.apply_a(x)
    return float(x @ av) + float(v @ ax)


def riemannian_grad(a, b, v) -> np.ndarray:
    """Riemannian gradient of v -> <v, Av> on the B-sphere (dense only).

    grad f(v) = 2 (sym(A) v - <Bv, sym(A) v> / |Bv|^2 * Bv), which lies in
    the tangent space at v. Needs the transpose of A, so it is reserved for
    diagnostics and the dense baselines.
    """
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    if a.ndim != 2:
        raise DenseRequired("riemannian_grad requires dense matrices")
    v = np.asarray(v, dtype=np.float64)
    ahv = 0.5 * (a @ v + a.T @ v)
    bv = b @ v
    n2 = float(bv @ bv)
    if n2 < 1e-300:
        raise DegenerateNormal("Bv is numerically zero")
    return 2.0 * (ahv - (float(bv @ ahv) / n2) * bv)

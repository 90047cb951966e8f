"""Seeded generators for the four experiment families.

Every generator is a pure function of its arguments; the same seed always
reproduces the same pair bit-for-bit.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

__all__ = [
    "ProblemSpec",
    "FAMILIES",
    "OperatorNormProblem",
    "gaussian_pair",
    "ill_conditioned_pair",
    "operator_norm_pair",
    "karhunen_loeve",
    "generate",
]

FAMILIES = ("gaussian", "ill_conditioned", "operator_norm", "karhunen_loeve")

# Generator stream ids are disjoint from trial streams in the harness.
_GEN_STREAM = 0x9E0


@dataclass(frozen=True)
class ProblemSpec:
    family: str
    dim: int
    q: int | None = None
    seed: int = 0
    rbf_length_scale: float = 0.3

    def __post_init__(self):
        if self.family not in FAMILIES:
            raise ValueError(f"unknown family {self.family!r}")
        if self.dim < 2:
            raise ValueError("dim must be >= 2")
        if self.family == "ill_conditioned" and self.q not in (1, 2, 3):
            raise ValueError("ill_conditioned requires q in {1, 2, 3}")


class OperatorNormProblem(NamedTuple):
    a: np.ndarray
    b: np.ndarray
    a_factor: np.ndarray
    b_factor: np.ndarray


def _rng(seed: int) -> np.random.Generator:
    key = np.array([seed, _GEN_STREAM], dtype=np.uint64)
    return np.random.Generator(np.random.Philox(key=key))


def gaussian_pair(d: int, seed: int) -> tuple[np.ndarray, np.ndarray]:
    """A Gaussian; B = (G + d I)^T (G + d I) with Gaussian G, SPD by construction."""
    if d < 2:
        raise ValueError("d must be >= 2")
    rng = _rng(seed)
    a = rng.standard_normal((d, d))
    g = rng.standard_normal((d, d)) + d * np.eye(d)
    b = g.T @ g
    return a, 0.5 * (b + b.T)


def ill_conditioned_pair(d: int, q: int, seed: int) -> tuple[np.ndarray, np.ndarray]:
    """B = Q diag(10^p) Q^T with p uniform on (0, q); kappa(B) <= 10^q."""
    if d < 2:
        raise ValueError("d must be >= 2")
    if q < 1:
        raise ValueError("q must be >= 1")
    rng = _rng(seed)
    a = rng.standard_normal((d, d))
    p = rng.uniform(0.0, float(q), d)
    g = rng.standard_normal((d, d))
    q_mat, r = np.linalg.qr(g)
    # Nonnegative-diagonal convention makes Q deterministic per seed.
    signs = np.where(np.diag(r) < 0.0, -1.0, 1.0)
    q_mat = q_mat * signs
    b = (q_mat * 10.0 ** p) @ q_mat.T
    return a, 0.5 * (b + b.T)


def operator_norm_pair(d: int, seed: int) -> OperatorNormProblem:
    """Gram pair A = F^T F, B = G^T G with F (d x d) and G (2d x d) Gaussian."""
    if d < 2:
        raise ValueError("d must be >= 2")
    rng = _rng(seed)
    f = rng.standard_normal((d, d))
    g = rng.standard_normal((2 * d, d))
    a = f.T @ f
    b = g.T @ g
    return OperatorNormProblem(0.5 * (a + a.T), 0.5 * (b + b.T), f, g)


def karhunen_loeve(
    d: int = 300,
    length_scale: float = 0.3,
    interval: tuple[float, float] = (0.0, 1.0),
) -> tuple[np.ndarray, np.ndarray]:
    """RBF covariance on a uniform grid against a trapezoidal mass matrix.

    A_ij = exp(-(t_i - t_j)^2 / (2 l^2)) on a d-point grid over the interval;
    B is diagonal with trapezoidal quadrature weights, so its entries sum to
    the interval length.
    """
    if d < 3:
        raise ValueError("d must be >= 3")
    lo, hi = interval
    t = np.linspace(lo, hi, d)
    a = np.exp(-((t[:, None] - t[None, :]) ** 2) / (2.0 * length_scale ** 2))
    h = (hi - lo) / (d - 1)
    w = np.full(d, h)
    w[0] = w[-1] = h / 2.0
    return a, np.diag(w)


def generate(spec: ProblemSpec) -> tuple[np.ndarray, np.ndarray]:
    """Dense (A, B) for a problem spec."""
    if spec.family == "gaussian":
        return gaussian_pair(spec.dim, spec.seed)
    if spec.family == "ill_conditioned":
        return ill_conditioned_pair(spec.dim, spec.q, spec.seed)
    if spec.family == "operator_norm":
        prob = operator_norm_pair(spec.dim, spec.seed)
        return prob.a, prob.b
    return karhunen_loeve(spec.dim, spec.rbf_length_scale)

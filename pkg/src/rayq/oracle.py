"""Dense ground truth and error metrics.

Everything here may use transposes, inverses and full eigendecompositions;
it exists to check the adjoint-free solver, never to power it.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import CholeskyFailure, EigensolverFailure, ZeroMaxValue, ZeroVector
from .linalg import OperatorPair

__all__ = [
    "ReferenceSolution",
    "BoundReport",
    "reference_solve",
    "rqe",
    "quotient_error",
    "eigen_residual_sq",
    "msqr_series",
    "msqr",
    "sin_b2",
    "spectral_constants",
    "min_bsq_bound",
    "check_min_bsq_bound",
]

_MULTIPLICITY_RTOL = 1e-8


@dataclass(frozen=True)
class ReferenceSolution:
    """Ground truth for one problem: top value, a maximizer, gap, multiplicity."""

    max_value: float
    max_vector: np.ndarray
    eigengap: float
    max_space_dim: int


def _sym(m: np.ndarray) -> np.ndarray:
    return 0.5 * (m + m.T)


def reference_solve(a, b) -> ReferenceSolution:
    """Solve the generalized symmetric eigenproblem sym(A) v = lambda B v.

    Whitens with the Cholesky factor of B and diagonalizes the resulting
    symmetric matrix. Returns the largest eigenvalue, a B-unit eigenvector,
    the gap to the second eigenvalue, and the multiplicity of the top
    eigenvalue at relative tolerance 1e-8.
    """
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    try:
        chol = np.linalg.cholesky(_sym(b))
    except np.linalg.LinAlgError as exc:
        raise CholeskyFailure("B is not positive definite") from exc
    ah = _sym(a)
    # M = L^-1 sym(A) L^-T, symmetric with the generalized spectrum.
    y = np.linalg.solve(chol, ah)
    m = _sym(np.linalg.solve(chol, y.T).T)
    try:
        vals, vecs = np.linalg.eigh(m)
    except np.linalg.LinAlgError as exc:
        raise EigensolverFailure("symmetric eigensolver did not converge") from exc
    top = float(vals[-1])
    u = vecs[:, -1]
    v = np.linalg.solve(chol.T, u)
    v = v / math.sqrt(float(v @ (b @ v)))
    gap = float(vals[-1] - vals[-2]) if vals.size >= 2 else math.inf
    tol = _MULTIPLICITY_RTOL * max(1.0, abs(top))
    mult = int(np.sum(vals >= top - tol))
    return ReferenceSolution(max_value=top, max_vector=v, eigengap=gap, max_space_dim=mult)


def rqe(ref: ReferenceSolution, pair: OperatorPair, v) -> float:
    """Relative quotient error (R - r(v)) / R."""
    from .linalg import rayleigh

    if ref.max_value == 0.0:
        raise ZeroMaxValue("R(A, B) = 0; use quotient_error for the absolute gap")
    return (ref.max_value - rayleigh(pair, v)) / ref.max_value


def quotient_error(ref: ReferenceSolution, pair: OperatorPair, v) -> tuple[float, bool]:
    """(error, is_relative); falls back to the absolute gap when R = 0."""
    from .linalg import rayleigh

    r = rayleigh(pair, v)
    if ref.max_value == 0.0:
        return ref.max_value - r, False
    return (ref.max_value - r) / ref.max_value, True


def eigen_residual_sq(a, b, v) -> float:
    """Squared residual |sym(A) v - <v, sym(A) v> B v|^2 (dense diagnostic)."""
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    v = np.asarray(v, dtype=np.float64)
    ahv = 0.5 * (a @ v + a.T @ v)
    res = ahv - float(v @ ahv) * (b @ v)
    return float(res @ res)


def msqr_series(a, b, iterates) -> np.ndarray:
    """Running minimum of the squared eigen-residual along a trace prefix."""
    resid = np.array([eigen_residual_sq(a, b, v) for v in iterates])
    return np.minimum.accumulate(resid)


def msqr(a, b, iterates) -> float:
    """Minimal squared eigen-residual over the given iterates."""
    return float(msqr_series(a, b, iterates)[-1])


def sin_b2(b, v, v_true, signed: bool = False) -> float:
    """B-angle error 1 - <v, B v_true> / (|v|_B |v_true|_B).

    Eigenvectors are sign-ambiguous, so by default the error is minimized
    over the sign of v_true; pass signed=True for the raw value.
    """
    b = np.asarray(b, dtype=np.float64)
    v = np.asarray(v, dtype=np.float64)
    v_true = np.asarray(v_true, dtype=np.float64)
    if not np.any(v) or not np.any(v_true):
        raise ZeroVector("sin_b2 requires nonzero vectors")
    bt = b @ v_true
    cos = float(v @ bt) / (math.sqrt(float(v @ (b @ v))) * math.sqrt(float(v_true @ bt)))
    if signed:
        return 1.0 - cos
    return max(1.0 - abs(cos), 0.0)


def spectral_constants(a, b) -> dict[str, float]:
    """Spectral norms and conditioning of (A, B) from dense decompositions.

    kappa(B) = lambda_max(B) / lambda_min(B) and ||B^-1|| = 1 / lambda_min(B),
    the standard conventions used by all bound checks.
    """
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    eig_b = np.linalg.eigvalsh(_sym(b))
    lam_min, lam_max = float(eig_b[0]), float(eig_b[-1])
    if lam_min <= 0.0:
        raise CholeskyFailure("B is not positive definite")
    return {
        "norm_a": float(np.linalg.norm(a, 2)),
        "norm_ah": float(np.linalg.norm(_sym(a), 2)),
        "norm_b": lam_max,
        "norm_b_inv": 1.0 / lam_min,
        "kappa_b": lam_max / lam_min,
    }


def min_bsq_bound(a, b, n: int) -> float:
    """Sublinear bound 8 ||A||^2 ||B^-1|| (1 + 3 kappa(B)) / (n + 1) on min b_k^2."""
    c = spectral_constants(a, b)
    return 8.0 * c["norm_a"] ** 2 * c["norm_b_inv"] * (1.0 + 3.0 * c["kappa_b"]) / (n + 1)


@dataclass(frozen=True)
class BoundReport:
    passed: bool
    worst_margin: float
    first_violation: int | None


def check_min_bsq_bound(b_values, a, b) -> BoundReport:
    """Check min_{k<=n} b_k^2 against its sublinear bound at every prefix n.

    worst_margin is the smallest bound - prefix-min gap over all prefixes;
    a negative margin means a violation, located by first_violation.
    """
    bsq = np.asarray(b_values, dtype=np.float64) ** 2
    if bsq.size == 0:
        return BoundReport(passed=True, worst_margin=math.inf, first_violation=None)
    c = spectral_constants(a, b)
    const = 8.0 * c["norm_a"] ** 2 * c["norm_b_inv"] * (1.0 + 3.0 * c["kappa_b"])
    prefix_min = np.minimum.accumulate(bsq)
    bounds = const / (np.arange(bsq.size) + 1.0)
    margins = bounds - prefix_min
    worst = int(np.argmin(margins))
    if margins[worst] < 0.0:
        first = int(np.flatnonzero(margins < 0.0)[0])
        return BoundReport(passed=False, worst_margin=float(margins[worst]), first_violation=first)
    return BoundReport(passed=True, worst_margin=float(margins[worst]), first_violation=None)

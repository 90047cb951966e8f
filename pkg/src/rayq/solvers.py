"""Solvers: the stochastic line-search method and the two dense baselines.

The main solver maximizes the generalized Rayleigh quotient over the
B-sphere by repeatedly maximizing along a random tangent direction; the
restriction to a line is a rational function of the step, so the optimal
step has a closed form. Only forward products with A and B are used.

The baselines (Riemannian gradient ascent and zeroth-order Riemannian
gradient ascent) need dense matrices for their Lipschitz constants and are
kept for comparison experiments only.
"""

from __future__ import annotations

import math
import time
from collections import deque
from dataclasses import dataclass, field, replace
from enum import Enum

import numpy as np

from .errors import DegenerateSample, NonPositiveD, ZeroB
from .linalg import OperatorPair, rayleigh, retract, riemannian_grad
from .sampling import RngStream, sample_initial, sample_tangent_directions
from .trace import RunTrace

__all__ = [
    "SolverConfig",
    "StopReason",
    "IterateState",
    "RunResult",
    "optimal_step_size",
    "initial_state",
    "szo_step",
    "szo_run",
    "zo_gradient_estimate",
    "rga_run",
    "zorga_run",
]

_NULL_TOL = 1e-150


class StopReason(Enum):
    EXACT_TERMINATION = "exact_termination"
    B_WINDOW_BELOW_TOL = "b_window_below_tol"
    MAX_ITERS = "max_iters"
    TARGET_REACHED = "target_reached"


@dataclass
class SolverConfig:
    m: int = 1
    max_iters: int = 1000
    b_tol_sq: float = 1e-24
    b_window: int = 50
    target_rqe: float | None = None
    record_every: int = 1
    # ZO-RGA scaling schedule mu_k = mu0 / (k + 1); square-summable.
    mu0: float = 1e-4
    armijo_slope: float = 1e-4
    armijo_contraction: float = 0.5
    armijo_max_backtracks: int = 30

    def __post_init__(self):
        if self.m < 1:
            raise ValueError("m must be >= 1")
        if self.max_iters < 1:
            raise ValueError("max_iters must be >= 1")
        if self.b_tol_sq < 0:
            raise ValueError("b_tol_sq must be >= 0")
        if self.b_window < 1:
            raise ValueError("b_window must be >= 1")
        if self.record_every < 1:
            raise ValueError("record_every must be >= 1")


@dataclass
class IterateState:
    """Current iterate plus the scalars of the most recent accepted step."""

    v: np.ndarray
    k: int
    a: float
    last_b: float = math.nan
    last_c: float = math.nan
    last_d: float = math.nan
    last_tau: float = math.nan
    # Cached A v for the current iterate, reused by the next step.
    av: np.ndarray | None = field(default=None, repr=False)
    # Search direction of the last accepted step (unit Euclidean norm).
    direction: np.ndarray | None = field(default=None, repr=False)


@dataclass
class RunResult:
    state: IterateState
    trace: RunTrace
    stop: StopReason
    a_hist: np.ndarray
    b_hist: np.ndarray
    c_hist: np.ndarray
    d_hist: np.ndarray
    tau_hist: np.ndarray
    iterates: list[np.ndarray] | None = None
    directions: list[np.ndarray] | None = None


def optimal_step_size(a: float, b: float, c: float, d: float) -> float:
    """Closed-form maximizer of tau -> (a + tau b + tau^2 c) / (1 + tau^2 d).

    Requires d > 0 and b != 0; the result is nonzero and has the sign of b.
    """
    if d <= 0.0:
        raise NonPositiveD(f"d = {d} <= 0")
    if b == 0.0:
        raise ZeroB("b = 0 must be routed to termination")
    q = (c - a * d) / (abs(b) * d)
    root = math.sqrt(q * q + 1.0 / d)
    # q + root cancels catastrophically when q is large and negative; the
    # conjugate form keeps full precision on that branch.
    if q >= 0.0:
        tau = q + root
    else:
        tau = (1.0 / d) / (root - q)
    return math.copysign(1.0, b) * tau


def initial_state(pair: OperatorPair, v0: np.ndarray) -> IterateState:
    av = pair.apply_a(v0)
    return IterateState(v=v0, k=0, a=float(v0 @ av), av=av)


def szo_step(
    pair: OperatorPair,
    state: IterateState,
    rng: RngStream,
    m: int = 1,
) -> tuple[IterateState, StopReason | None]:
    """One iteration of the stochastic zeroth-order ascent.

    For m = 1 the sampled direction is used as is; for m > 1 the directions
    are aggregated with weights b_i = <x_i, Av> + <v, A x_i> (reusing a
    single Av), renormalized, and b is recomputed for the aggregate before
    the step. Returns the advanced state, or the unchanged state together
    with EXACT_TERMINATION when b is exactly zero.
    """
    v = state.v
    av = state.av if state.av is not None else pair.apply_a(v)
    a = float(v @ av)

    xs = sample_tangent_directions(pair, v, rng, m)
    axs = pair.apply_a_block(xs)
    bs = xs @ av + axs @ v
    if m == 1:
        x, ax = xs[0], axs[0]
        b = float(bs[0])
    else:
        xbar = (bs @ xs) / m
        nrm = np.linalg.norm(xbar)
        if nrm < _NULL_TOL:
            # Probability-zero aggregate collapse: resample the batch once.
            xs = sample_tangent_directions(pair, v, rng, m)
            axs = pair.apply_a_block(xs)
            bs = xs @ av + axs @ v
            xbar = (bs @ xs) / m
            nrm = np.linalg.norm(xbar)
            if nrm < _NULL_TOL:
                return replace(state, last_b=0.0, last_tau=0.0), StopReason.EXACT_TERMINATION
        x = xbar / nrm
        ax = pair.apply_a(x)
        b = float(x @ av + ax @ v)

    if b == 0.0:
        return replace(state, last_b=0.0, last_tau=0.0), StopReason.EXACT_TERMINATION

    c = float(x @ ax)
    d = float(x @ pair.apply_b(x))
    tau = optimal_step_size(a, b, c, d)
    v_new = retract(pair, v, tau * x)
    av_new = pair.apply_a(v_new)
    new_state = IterateState(
        v=v_new,
        k=state.k + 1,
        a=float(v_new @ av_new),
        last_b=b,
        last_c=c,
        last_d=d,
        last_tau=tau,
        av=av_new,
        direction=x,
    )
    return new_state, None


def szo_run(
    pair: OperatorPair,
    cfg: SolverConfig,
    rng: RngStream,
    ref_max_value: float | None = None,
    keep_iterates: bool = False,
    keep_directions: bool = False,
    time_budget: float | None = None,
    v0: np.ndarray | None = None,
) -> RunResult:
    """Iterate szo_step until termination.

    Stops on exact b = 0, on the running mean of b^2 over the last
    cfg.b_window steps falling below cfg.b_tol_sq, on reaching
    cfg.target_rqe (requires ref_max_value from the oracle), or after
    cfg.max_iters steps. Row k of the trace carries the objective at
    iterate k together with the b and tau of the step leaving it.
    """
    if cfg.target_rqe is not None and ref_max_value is None:
        raise ValueError("target_rqe stopping needs ref_max_value")
    if v0 is None:
        v0 = sample_initial(pair, rng)
    state = initial_state(pair, v0)
    trace = RunTrace()
    a_hist, b_hist, c_hist, d_hist, tau_hist = [state.a], [], [], [], []
    iterates = [v0.copy()] if keep_iterates else None
    directions = [] if keep_directions else None
    window: deque[float] = deque(maxlen=cfg.b_window)
    t0 = time.perf_counter()

    def rqe_of(a: float) -> float:
        if ref_max_value is None or ref_max_value == 0.0:
            return math.nan
        return (ref_max_value - a) / ref_max_value

    stop = StopReason.MAX_ITERS
    k = 0
    while k < cfg.max_iters:
        prev = state
        state, signal = szo_step(pair, state, rng, cfg.m)
        if signal is not None:
            stop = signal
            break
        b_hist.append(state.last_b)
        c_hist.append(state.last_c)
        d_hist.append(state.last_d)
        tau_hist.append(state.last_tau)
        a_hist.append(state.a)
        if keep_iterates:
            iterates.append(state.v.copy())
        if keep_directions:
            directions.append(state.direction.copy())
        if k % cfg.record_every == 0:
            trace.record(k, time.perf_counter() - t0, prev.a,
                         abs_b=abs(state.last_b), tau=state.last_tau,
                         rqe=rqe_of(prev.a))
        window.append(state.last_b ** 2)
        k += 1
        if cfg.target_rqe is not None and rqe_of(state.a) <= cfg.target_rqe:
            stop = StopReason.TARGET_REACHED
            break
        if len(window) == cfg.b_window and sum(window) / cfg.b_window < cfg.b_tol_sq:
            stop = StopReason.B_WINDOW_BELOW_TOL
            break
        if time_budget is not None and time.perf_counter() - t0 > time_budget:
            stop = StopReason.MAX_ITERS
            break
    trace.record(state.k, time.perf_counter() - t0, state.a, rqe=rqe_of(state.a))
    return RunResult(
        state=state,
        trace=trace,
        stop=stop,
        a_hist=np.asarray(a_hist),
        b_hist=np.asarray(b_hist),
        c_hist=np.asarray(c_hist),
        d_hist=np.asarray(d_hist),
        tau_hist=np.asarray(tau_hist),
        iterates=iterates,
        directions=directions,
    )


def zo_gradient_estimate(
    pair: OperatorPair,
    v: np.ndarray,
    mu: float,
    m: int,
    rng: RngStream,
) -> np.ndarray:
    """Finite-difference estimate of the Riemannian gradient.

    (1/m) sum_i [f(R_v(mu P_v x_i)) - f(v)] / mu * x_i with raw standard
    normal x_i; f is the quotient itself, so only forward products appear.
    """
    if mu <= 0.0:
        raise ValueError("mu must be positive")
    v = np.asarray(v, dtype=np.float64)
    fv = rayleigh(pair, v)
    xs = rng.standard_normal((m, pair.dim))
    bv = pair.apply_b(v)
    n2 = float(bv @ bv)
    pxs = xs - np.outer(xs @ bv / n2, bv)
    ws = v[None, :] + mu * pxs
    aws = pair.apply_a_block(ws)
    bws = np.stack([pair.apply_b(w) for w in ws]) if not pair.is_dense else ws @ pair.dense_b.T
    num = np.einsum("ij,ij->i", ws, aws)
    den = np.einsum("ij,ij->i", ws, bws)
    fws = num / den
    return ((fws - fv) / mu) @ xs / m


def _dense_constants(a: np.ndarray, b: np.ndarray) -> tuple[float, float, float]:
    """(||A||, ||sym(A)||, kappa(B)) with kappa = lambda_max / lambda_min."""
    norm_a = float(np.linalg.norm(a, 2))
    norm_ah = float(np.linalg.norm(0.5 * (a + a.T), 2))
    eig_b = np.linalg.eigvalsh(0.5 * (b + b.T))
    kappa = float(eig_b[-1] / eig_b[0])
    return norm_a, norm_ah, kappa


def rga_run(
    a,
    b,
    cfg: SolverConfig,
    rng: RngStream,
    ref_max_value: float | None = None,
    v0: np.ndarray | None = None,
) -> RunResult:
    """Riemannian gradient ascent with the 1/L step, L = 2||sym(A)||(1 + kappa(B))."""
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    pair = OperatorPair.from_dense(a, b)
    _, norm_ah, kappa = _dense_constants(a, b)
    lip = 2.0 * norm_ah * (1.0 + kappa)
    tau = 1.0 / lip if lip > 0 else 0.0
    return _gradient_ascent_loop(pair, a, b, cfg, rng, ref_max_value, v0,
                                 lambda k, v, fv: (riemannian_grad(a, b, v), tau))


def zorga_run(
    a,
    b,
    cfg: SolverConfig,
    rng: RngStream,
    variant: str = "constant",
    ref_max_value: float | None = None,
    v0: np.ndarray | None = None,
) -> RunResult:
    """Zeroth-order Riemannian gradient ascent, constant-step or Armijo.

    Both variants start from tau0 = 1/L with L = ||A||(1 + kappa(B)); the
    Armijo variant backtracks with the standard sufficient-increase rule
    and never accepts a step that decreases the objective.
    """
    if variant not in ("constant", "armijo"):
        raise ValueError(f"unknown variant {variant!r}")
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    pair = OperatorPair.from_dense(a, b)
    norm_a, _, kappa = _dense_constants(a, b)
    lip = norm_a * (1.0 + kappa)
    tau0 = 1.0 / lip if lip > 0 else 0.0

    if variant == "constant":
        def direction(k, v, fv):
            mu = cfg.mu0 / (k + 1)
            return zo_gradient_estimate(pair, v, mu, cfg.m, rng), tau0
        return _gradient_ascent_loop(pair, a, b, cfg, rng, ref_max_value, v0, direction)

    def direction(k, v, fv):
        mu = cfg.mu0 / (k + 1)
        g = zo_gradient_estimate(pair, v, mu, cfg.m, rng)
        gn2 = float(g @ g)
        if gn2 == 0.0:
            return g, 0.0
        tau = tau0
        for _ in range(cfg.armijo_max_backtracks):
            w = retract(pair, v, tau * g)
            if rayleigh(pair, w) >= fv + cfg.armijo_slope * tau * gn2:
                return g, tau
            tau *= cfg.armijo_contraction
        return g, 0.0
    return _gradient_ascent_loop(pair, a, b, cfg, rng, ref_max_value, v0, direction)


def _gradient_ascent_loop(pair, a, b, cfg, rng, ref_max_value, v0, direction_fn) -> RunResult:
    """Shared outer loop of the two dense baselines.

    direction_fn(k, v, f(v)) returns an ascent direction and a step size;
    a zero step leaves the iterate unchanged for that iteration.
    """
    if v0 is None:
        v0 = sample_initial(pair, rng)
    v = v0
    fv = rayleigh(pair, v)
    trace = RunTrace()
    a_hist = [fv]
    t0 = time.perf_counter()

    def rqe_of(val: float) -> float:
        if ref_max_value is None or ref_max_value == 0.0:
            return math.nan
        return (ref_max_value - val) / ref_max_value

    stop = StopReason.MAX_ITERS
    for k in range(cfg.max_iters):
        g, tau = direction_fn(k, v, fv)
        gn = float(np.linalg.norm(riemannian_grad(a, b, v)))
        if k % cfg.record_every == 0:
            trace.record(k, time.perf_counter() - t0, fv, tau=tau,
                         rqe=rqe_of(fv), grad_norm=gn)
        if gn == 0.0:
            stop = StopReason.EXACT_TERMINATION
            break
        if tau != 0.0 and np.any(g):
            v = retract(pair, v, tau * g)
            fv = rayleigh(pair, v)
        a_hist.append(fv)
        if cfg.target_rqe is not None and rqe_of(fv) <= cfg.target_rqe:
            stop = StopReason.TARGET_REACHED
            break
    k_final = len(a_hist) - 1
    trace.record(k_final, time.perf_counter() - t0, fv, rqe=rqe_of(fv),
                 grad_norm=float(np.linalg.norm(riemannian_grad(a, b, v))))
    state = IterateState(v=v, k=k_final, a=fv)
    empty = np.zeros(0)
    return RunResult(state=state, trace=trace, stop=stop,
                     a_hist=np.asarray(a_hist), b_hist=empty, c_hist=empty,
                     d_hist=empty, tau_hist=empty)

"""End-to-end acceptance checks for the solver, oracle, and harness.

Each test is one pinned criterion: exact per-step identities, almost-sure
envelope bounds, statistical moment checks, qualitative orderings, and
reproducibility of harness outputs. Run with -v to get one line per
criterion.
"""

import csv
import math
import os

import numpy as np
import pytest

from rayq.complexify import realify_matrix, realify_vector, solve_complex
from rayq.harness import ExperimentConfig, SolverSpec, bench_to_target, run_experiment
from rayq.linalg import OperatorPair, rayleigh, retract, riemannian_grad
from rayq.oracle import check_min_bsq_bound, reference_solve, sin_b2, spectral_constants
from rayq.problems import ProblemSpec, generate
from rayq.sampling import RngStream, sample_initial, sample_tangent_directions
from rayq.solvers import SolverConfig, rga_run, szo_run, zorga_run


@pytest.fixture(scope="module")
def gaussian_d50_runs():
    runs = []
    for seed in range(10):
        a, b = generate(ProblemSpec("gaussian", 50, seed=seed))
        pair = OperatorPair.from_dense(a, b)
        res = szo_run(pair, SolverConfig(m=1, max_iters=500), RngStream(seed))
        runs.append(res)
    return runs


def test_01_step_objective_identity(gaussian_d50_runs):
    for res in gaussian_d50_runs:
        ah, bh, th = res.a_hist, res.b_hist, res.tau_hist
        err = np.abs(ah[1:] - ah[:-1] - th * bh / 2.0)
        assert np.all(err <= 1e-10 * np.maximum(1.0, np.abs(ah[:-1])))


def test_02_step_size_stationarity(gaussian_d50_runs):
    for res in gaussian_d50_runs:
        a, b = res.a_hist[:-1], res.b_hist
        c, d, tau = res.c_hist, res.d_hist, res.tau_hist
        e = c - a * d
        num = b + 2.0 * tau * e - tau * tau * b * d
        scale = np.maximum.reduce([np.ones_like(b), np.abs(b),
                                   2.0 * np.abs(tau * e), np.abs(tau * tau * b * d)])
        assert np.all(np.abs(num) / scale <= 1e-8)


def test_03_min_bsq_envelope_bound():
    cases = [
        ProblemSpec("gaussian", 50),
        ProblemSpec("ill_conditioned", 50, q=2),
        ProblemSpec("operator_norm", 50),
        ProblemSpec("karhunen_loeve", 300),
    ]
    for base in cases:
        for seed in range(10):
            spec = ProblemSpec(base.family, base.dim, q=base.q, seed=seed)
            a, b = generate(spec)
            pair = OperatorPair.from_dense(a, b)
            res = szo_run(pair, SolverConfig(m=1, max_iters=1000), RngStream(seed))
            report = check_min_bsq_bound(res.b_hist, a, b)
            assert report.passed, (
                f"{spec.family} seed {seed}: bound violated at n={report.first_violation}"
            )


def test_04_sampler_second_moment():
    d, n = 10, 100_000
    a, b = generate(ProblemSpec("gaussian", d, seed=0))
    pair = OperatorPair.from_dense(a, b)
    v = sample_initial(pair, RngStream(0))
    xs = sample_tangent_directions(pair, v, RngStream(0, stream_id=1), n)
    emp = xs.T @ xs / n
    bv = b @ v
    proj = np.eye(d) - np.outer(bv, bv) / float(bv @ bv)
    assert np.linalg.norm(emp - proj / (d - 1)) <= 5.0 * math.sqrt(d / n)


def test_05_single_sample_gradient_identity():
    a, b = generate(ProblemSpec("gaussian", 30, seed=0))
    pair = OperatorPair.from_dense(a, b)
    res = szo_run(pair, SolverConfig(m=1, max_iters=1000), RngStream(0),
                  keep_iterates=True, keep_directions=True)
    steps = len(res.b_hist)
    assert steps == 1000
    for k in range(steps):
        v, x = res.iterates[k], res.directions[k]
        tau, bk = res.tau_hist[k], res.b_hist[k]
        fv = rayleigh(pair, v)
        fw = rayleigh(pair, retract(pair, v, tau * x))
        est = 2.0 * (fw - fv) / tau
        lhs, rhs = bk * x, est * x
        # recomputing f twice leaves a cancellation floor of roughly
        # eps * |f| / tau, so the scale is the objective, not the entry
        assert np.all(np.abs(lhs - rhs) <= 1e-10 * max(1.0, abs(fv)))


def test_06_conditional_second_moment():
    d, n = 20, 100_000
    rng = np.random.default_rng(123)
    for _ in range(20):
        a = rng.normal(size=(d, d))
        g = rng.normal(size=(d, d))
        b = g.T @ g + d * np.eye(d)
        pair = OperatorPair.from_dense(a, b)
        v = sample_initial(pair, RngStream(int(rng.integers(1 << 31))))
        xs = sample_tangent_directions(pair, v, RngStream(int(rng.integers(1 << 31))), n)
        bs = xs @ ((a + a.T) @ v)
        bsq = bs * bs
        grad = riemannian_grad(a, b, v)
        target = float(grad @ grad) / (d - 1)
        se = bsq.std(ddof=1) / math.sqrt(n)
        assert abs(bsq.mean() - target) <= 5.0 * se


def test_07_small_problem_convergence():
    hit = 0
    for seed in range(10):
        a, b = generate(ProblemSpec("gaussian", 10, seed=seed))
        ref = reference_solve(a, b)
        pair = OperatorPair.from_dense(a, b)
        res = szo_run(pair, SolverConfig(m=10, max_iters=2000, record_every=2000),
                      RngStream(seed))
        hit += (ref.max_value - res.state.a) / ref.max_value < 1e-6
    assert hit >= 9


def test_08_sample_count_ordering():
    finals = {m: [] for m in (1, 10, 100)}
    for seed in range(10):
        a, b = generate(ProblemSpec("gaussian", 100, seed=seed))
        ref = reference_solve(a, b)
        pair = OperatorPair.from_dense(a, b)
        for m in finals:
            res = szo_run(pair, SolverConfig(m=m, max_iters=1000, record_every=1000),
                          RngStream(seed, stream_id=m))
            finals[m].append((ref.max_value - res.state.a) / ref.max_value)
    med = {m: float(np.median(errs)) for m, errs in finals.items()}
    assert med[100] < med[10] < med[1], med


def test_09_baseline_ordering():
    wins = 0
    for seed in range(10):
        a, b = generate(ProblemSpec("operator_norm", 100, seed=seed))
        ref = reference_solve(a, b)
        pair = OperatorPair.from_dense(a, b)
        cfg = SolverConfig(m=100, max_iters=1000, record_every=1000)

        def final_rqe(res):
            return (ref.max_value - res.state.a) / ref.max_value

        e_szo = final_rqe(szo_run(pair, cfg, RngStream(seed)))
        e_const = final_rqe(zorga_run(a, b, cfg, RngStream(seed), variant="constant"))
        e_armijo = final_rqe(zorga_run(a, b, cfg, RngStream(seed), variant="armijo"))
        wins += (e_szo < e_const) and (e_szo < e_armijo)
    assert wins >= 9


def test_10_gradient_ascent_residual_bound():
    for seed in range(10):
        a, b = generate(ProblemSpec("gaussian", 50, seed=seed))
        ref = reference_solve(a, b)
        c = spectral_constants(a, b)
        lip = 2.0 * c["norm_ah"] * (1.0 + c["kappa_b"])
        res = rga_run(a, b, SolverConfig(max_iters=500), RngStream(seed))
        gn = np.asarray(res.trace.grad_norm, dtype=np.float64)
        gn = gn[np.isfinite(gn)]
        gap = ref.max_value - res.a_hist[0]
        running_min = np.minimum.accumulate(gn * gn)
        ns = np.arange(len(running_min))
        bound = 2.0 * lip * gap / (ns + 1.0)
        assert np.all(running_min <= bound * (1.0 + 1e-12))


def test_11_complex_embedding():
    rng = np.random.default_rng(7)
    close = 0
    for i in range(100):
        d = int(rng.integers(2, 9))
        a = rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))
        g = rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))
        b = g.conj().T @ g + d * np.eye(d)

        prod = realify_matrix(a) @ realify_matrix(b)
        target = realify_matrix(a @ b)
        assert np.linalg.norm(prod - target) <= 1e-12 * np.linalg.norm(target)
        v = rng.normal(size=d) + 1j * rng.normal(size=d)
        mv = realify_matrix(a) @ realify_vector(v)
        assert np.linalg.norm(mv - realify_vector(a @ v)) <= 1e-12 * np.linalg.norm(mv)

        _, value, _ = solve_complex(a, b, SolverConfig(m=10, max_iters=2000),
                                    RngStream(i))
        ah = 0.5 * (a + a.conj().T)
        ref = np.linalg.eigvalsh(np.linalg.solve(np.linalg.cholesky(b),
                                                 np.linalg.solve(np.linalg.cholesky(b), ah).conj().T))[-1]
        close += abs(value - ref) <= 1e-6 * max(1.0, abs(ref))
    assert close >= 95


def test_12_kernel_eigenfunction_recovery():
    a, b = generate(ProblemSpec("karhunen_loeve", 300))
    ref = reference_solve(a, b)
    pair = OperatorPair.from_dense(a, b)
    good = 0
    for seed in range(5):
        res = szo_run(pair, SolverConfig(m=100, max_iters=500, record_every=500),
                      RngStream(seed), keep_iterates=True)
        errs = np.array([sin_b2(b, v, ref.max_vector) for v in res.iterates])
        running = np.minimum.accumulate(errs)
        assert running[-1] < errs[0]
        good += running[-1] < 1e-2
    assert good >= 4


def test_13_time_scaling_exponent():
    rows = bench_to_target("ill_conditioned", [50, 100, 200], [100],
                           target_rqe=0.01, trials=10, q=1, base_seed=0)
    ds = np.log([r["d"] for r in rows])
    ts = np.log([r["median_s"] for r in rows])
    slope = float(np.polyfit(ds, ts, 1)[0])
    assert 1.6 <= slope <= 2.6, slope


def _trace_rows_no_walltime(path):
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    idx = rows[0].index("t_wall_s")
    return [[c for j, c in enumerate(r) if j != idx] for r in rows]


def test_14_trace_determinism(tmp_path):
    def cfg(out_dir):
        return ExperimentConfig(
            problem=ProblemSpec("ill_conditioned", 25, q=2, seed=0),
            solvers=[SolverSpec("szo", m=5), SolverSpec("rga"),
                     SolverSpec("zorga", m=5, variant="armijo")],
            trials=3,
            max_iters=60,
            base_seed=17,
            out_dir=out_dir,
        )

    run_experiment(cfg(tmp_path / "r1"))
    run_experiment(cfg(tmp_path / "r2"))
    names = sorted(n for n in os.listdir(tmp_path / "r1") if n.startswith("trace_"))
    assert len(names) == 9
    for name in names:
        assert _trace_rows_no_walltime(tmp_path / "r1" / name) == \
            _trace_rows_no_walltime(tmp_path / "r2" / name), name

"""Experiment orchestration: seeded parallel trials, aggregation, artifacts.

A trial owns problem seed base_seed + trial_index, its own RNG stream per
solver, and its own trace buffer; aggregation is a single-threaded
reduction after all trials complete, so reruns with the same config are
byte-identical except for wall-time fields.
"""

from __future__ import annotations

import json
import math
import os
import shutil
import time
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np

from .errors import UnknownFigure
from .linalg import OperatorPair, riemannian_grad
from .oracle import msqr_series, reference_solve, sin_b2
from .problems import ProblemSpec, generate
from .sampling import RngStream
from .solvers import RunResult, SolverConfig, rga_run, szo_run, zorga_run
from .svgplot import plot_series_svg
from .trace import RunTrace, ingest_trace, write_traces_csv

__all__ = [
    "SolverSpec",
    "ExperimentConfig",
    "AggregateReport",
    "parse_solver",
    "run_experiment",
    "bench_to_target",
    "reproduce_figure",
    "ingest_external_trace",
    "worker_count",
]

FIGURES = ("fig2", "fig3", "fig4", "fig5", "fig6", "fig7")

_METRICS = ("a", "abs_b", "tau", "rqe", "msqr", "grad_norm")


@dataclass(frozen=True)
class SolverSpec:
    kind: str  # szo | rga | zorga
    m: int = 1
    variant: str = "constant"

    def __post_init__(self):
        if self.kind not in ("szo", "rga", "zorga"):
            raise ValueError(f"unknown solver kind {self.kind!r}")
        if self.variant not in ("constant", "armijo"):
            raise ValueError(f"unknown variant {self.variant!r}")

    @property
    def name(self) -> str:
        if self.kind == "szo":
            return f"szo_m{self.m}"
        if self.kind == "rga":
            return "rga"
        return f"zorga_{self.variant}_m{self.m}"


def parse_solver(text: str) -> SolverSpec:
    """Parse a CLI solver spec like `szo:m=100` or `zorga:variant=armijo,m=10`."""
    head, _, rest = text.partition(":")
    kwargs: dict[str, object] = {}
    if rest:
        for item in rest.split(","):
            key, _, value = item.partition("=")
            key = key.strip()
            if key == "m":
                kwargs["m"] = int(value)
            elif key == "variant":
                kwargs["variant"] = value.strip()
            else:
                raise ValueError(f"unknown solver option {key!r}")
    return SolverSpec(kind=head.strip(), **kwargs)


@dataclass
class ExperimentConfig:
    problem: ProblemSpec
    solvers: list[SolverSpec]
    trials: int = 50
    max_iters: int = 1000
    base_seed: int = 0
    out_dir: str | os.PathLike = "out"
    time_budget: float | None = None
    record_every: int = 1
    target_rqe: float | None = None
    keep_msqr: bool = False

    def __post_init__(self):
        if self.trials < 1:
            raise ValueError("trials must be >= 1")
        if not self.solvers:
            raise ValueError("solver list must be nonempty")

    def to_json(self) -> str:
        doc = {
            "problem": {
                "family": self.problem.family,
                "dim": self.problem.dim,
                "q": self.problem.q,
                "seed": self.problem.seed,
                "rbf_length_scale": self.problem.rbf_length_scale,
            },
            "solvers": [{"kind": s.kind, "m": s.m, "variant": s.variant} for s in self.solvers],
            "trials": self.trials,
            "max_iters": self.max_iters,
            "base_seed": self.base_seed,
            "out_dir": str(self.out_dir),
            "time_budget": self.time_budget,
            "record_every": self.record_every,
            "target_rqe": self.target_rqe,
            "keep_msqr": self.keep_msqr,
        }
        return json.dumps(doc, indent=2)

    @classmethod
    def from_json(cls, text: str) -> "ExperimentConfig":
        doc = json.loads(text)
        problem = ProblemSpec(**doc["problem"])
        solvers = [SolverSpec(**s) for s in doc["solvers"]]
        rest = {k: v for k, v in doc.items() if k not in ("problem", "solvers")}
        return cls(problem=problem, solvers=solvers, **rest)


@dataclass
class AggregateReport:
    """Per-iteration cross-trial statistics, keyed by solver name and metric."""

    per_solver: dict[str, dict[str, dict[str, np.ndarray]]] = field(default_factory=dict)
    mean_wall: dict[str, np.ndarray] = field(default_factory=dict)
    ks: dict[str, np.ndarray] = field(default_factory=dict)
    final_values: dict[str, dict[int, float]] = field(default_factory=dict)


def worker_count() -> int:
    env = os.environ.get("RAYQ_THREADS")
    if env:
        return max(1, int(env))
    return max(1, os.cpu_count() or 1)


def _run_one(spec: SolverSpec, a, b, cfg: ExperimentConfig, trial: int,
             ref_max_value: float, stream_id: int) -> RunResult:
    rng = RngStream(seed=cfg.base_seed + trial, stream_id=stream_id)
    solver_cfg = SolverConfig(m=spec.m, max_iters=cfg.max_iters,
                              record_every=cfg.record_every,
                              target_rqe=cfg.target_rqe)
    if spec.kind == "szo":
        pair = OperatorPair.from_dense(a, b)
        return szo_run(pair, solver_cfg, rng, ref_max_value=ref_max_value,
                       keep_iterates=cfg.keep_msqr, time_budget=cfg.time_budget)
    if spec.kind == "rga":
        return rga_run(a, b, solver_cfg, rng, ref_max_value=ref_max_value)
    return zorga_run(a, b, solver_cfg, rng, variant=spec.variant,
                     ref_max_value=ref_max_value)


def _run_trial(cfg: ExperimentConfig, trial: int) -> dict[str, RunResult]:
    spec = replace(cfg.problem, seed=cfg.base_seed + trial)
    a, b = generate(spec)
    ref = reference_solve(a, b)
    out: dict[str, RunResult] = {}
    for idx, solver in enumerate(cfg.solvers):
        result = _run_one(solver, a, b, cfg, trial, ref.max_value, stream_id=idx)
        if cfg.keep_msqr and result.iterates is not None:
            series = msqr_series(a, b, result.iterates)
            for i, k in enumerate(result.trace.k):
                result.trace.msqr[i] = float(series[min(k, len(series) - 1)])
            result.iterates = None
        out[solver.name] = result
    return out


def _aggregate(traces: dict[int, RunTrace]) -> tuple[np.ndarray, dict[str, dict[str, np.ndarray]], np.ndarray]:
    ks = sorted({k for tr in traces.values() for k in tr.k})
    k_index = {k: i for i, k in enumerate(ks)}
    n_k, n_t = len(ks), len(traces)
    grids = {m: np.full((n_t, n_k), np.nan) for m in _METRICS}
    wall = np.full((n_t, n_k), np.nan)
    for row, trial in enumerate(sorted(traces)):
        tr = traces[trial]
        cols = [k_index[k] for k in tr.k]
        for metric in _METRICS:
            grids[metric][row, cols] = getattr(tr, metric)
        wall[row, cols] = tr.t_wall_s
    stats: dict[str, dict[str, np.ndarray]] = {}
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", RuntimeWarning)
        for metric, grid in grids.items():
            if np.all(np.isnan(grid)):
                continue
            stats[metric] = {
                "mean": np.nanmean(grid, axis=0),
                "median": np.nanmedian(grid, axis=0),
                "q25": np.nanquantile(grid, 0.25, axis=0),
                "q75": np.nanquantile(grid, 0.75, axis=0),
            }
        mean_wall = np.nanmean(wall, axis=0)
    return np.asarray(ks), stats, mean_wall


def _write_aggregate_csv(path, ks, stats, mean_wall) -> None:
    cols = ["k", "mean_t_wall_s"]
    for metric in stats:
        for stat in ("mean", "median", "q25", "q75"):
            cols.append(f"{metric}_{stat}")
    lines = [",".join(cols)]
    for i, k in enumerate(ks):
        row = [str(int(k)), format(mean_wall[i], ".17g")]
        for metric in stats:
            for stat in ("mean", "median", "q25", "q75"):
                value = stats[metric][stat][i]
                row.append("" if math.isnan(value) else format(value, ".17g"))
        lines.append(",".join(row))
    Path(path).write_text("\n".join(lines) + "\n")


def run_experiment(cfg: ExperimentConfig) -> AggregateReport:
    """Execute all trials, write per-trial CSVs, aggregates, and SVG plots.

    Trials run in a thread pool capped by RAYQ_THREADS; outputs are removed
    if any trial fails.
    """
    out_dir = Path(cfg.out_dir)
    created = not out_dir.exists()
    out_dir.mkdir(parents=True, exist_ok=True)
    written: list[Path] = []
    try:
        with ThreadPoolExecutor(max_workers=worker_count()) as pool:
            results = list(pool.map(lambda t: _run_trial(cfg, t), range(cfg.trials)))
        (out_dir / "config.json").write_text(cfg.to_json())
        written.append(out_dir / "config.json")
        report = AggregateReport()
        for solver in cfg.solvers:
            traces = {t: results[t][solver.name].trace for t in range(cfg.trials)}
            for trial, tr in traces.items():
                path = out_dir / f"trace_{solver.name}_{trial:03d}.csv"
                write_traces_csv(path, {trial: tr})
                written.append(path)
            ks, stats, mean_wall = _aggregate(traces)
            agg_path = out_dir / f"aggregate_{solver.name}.csv"
            _write_aggregate_csv(agg_path, ks, stats, mean_wall)
            written.append(agg_path)
            report.per_solver[solver.name] = stats
            report.ks[solver.name] = ks
            report.mean_wall[solver.name] = mean_wall
            report.final_values[solver.name] = {
                t: results[t][solver.name].state.a for t in range(cfg.trials)
            }
        for metric in ("rqe", "abs_b", "a", "msqr", "grad_norm"):
            series = {}
            for solver in cfg.solvers:
                stats = report.per_solver[solver.name]
                if metric in stats:
                    ks = report.ks[solver.name]
                    series[solver.name] = (list(map(float, ks)),
                                           list(map(float, stats[metric]["mean"])))
            if series:
                svg = out_dir / f"{metric}.svg"
                plot_series_svg(svg, series, title=f"{cfg.problem.family} d={cfg.problem.dim}",
                                ylabel=metric, log_y=metric != "a")
                written.append(svg)
        return report
    except Exception:
        for path in written:
            path.unlink(missing_ok=True)
        if created:
            shutil.rmtree(out_dir, ignore_errors=True)
        raise


def bench_to_target(
    family: str,
    dims: list[int],
    ms: list[int],
    target_rqe: float,
    trials: int = 10,
    q: int | None = None,
    base_seed: int = 0,
    out_path=None,
) -> list[dict[str, float]]:
    """Median wall time to reach the target RQE, capped at 100 d iterations.

    Returns one row per (d, m) with the number of capped trials; a target
    already met at the initial iterate records time 0.
    """
    rows = []
    for d in dims:
        for m in ms:
            times, capped = [], 0
            for trial in range(trials):
                spec = ProblemSpec(family=family, dim=d, q=q, seed=base_seed + trial)
                a, b = generate(spec)
                ref = reference_solve(a, b)
                pair = OperatorPair.from_dense(a, b)
                cfg = SolverConfig(m=m, max_iters=100 * d, target_rqe=target_rqe,
                                   record_every=max(1, 10 * d))
                rng = RngStream(seed=base_seed + trial, stream_id=0)
                t0 = time.perf_counter()
                result = szo_run(pair, cfg, rng, ref_max_value=ref.max_value)
                elapsed = time.perf_counter() - t0
                if ref.max_value != 0.0 and (ref.max_value - result.a_hist[0]) / ref.max_value <= target_rqe:
                    elapsed = 0.0
                if result.stop.name != "TARGET_REACHED" and elapsed > 0.0:
                    capped += 1
                times.append(elapsed)
            rows.append({"d": d, "m": m, "q": q if q is not None else "",
                         "median_s": float(np.median(times)),
                         "iters_capped_count": capped})
    if out_path is not None:
        lines = ["d,m,q,median_s,iters_capped_count"]
        for r in rows:
            lines.append(f"{r['d']},{r['m']},{r['q']},{r['median_s']:.17g},{r['iters_capped_count']}")
        Path(out_path).write_text("\n".join(lines) + "\n")
    return rows


def ingest_external_trace(path) -> dict[int, RunTrace]:
    """Validate and load an externally produced trace CSV."""
    return ingest_trace(path)


# --------------------------------------------------------------------------
# Figure reproduction


def _figure_experiment(out_dir, problem, solvers, trials, max_iters, base_seed,
                       record_every=1, keep_msqr=False) -> AggregateReport:
    cfg = ExperimentConfig(problem=problem, solvers=solvers, trials=trials,
                           max_iters=max_iters, base_seed=base_seed,
                           out_dir=out_dir, record_every=record_every,
                           keep_msqr=keep_msqr)
    return run_experiment(cfg)


def reproduce_figure(fig_id: str, scale: str = "desk", out_dir="figures", base_seed: int = 0) -> Path:
    """Reproduce one of the benchmark figures as CSV + SVG artifacts.

    Desk scale shrinks trials to 10 and caps dimensions at 100 (the fixed
    grid problem keeps its native 300); full scale uses the original
    experiment parameters.
    """
    if fig_id not in FIGURES:
        raise UnknownFigure(f"unknown figure {fig_id!r}; expected one of {FIGURES}")
    if scale not in ("desk", "full"):
        raise ValueError("scale must be 'desk' or 'full'")
    desk = scale == "desk"
    out = Path(out_dir) / f"{fig_id}_{scale}"
    out.mkdir(parents=True, exist_ok=True)
    trials = 10 if desk else 50
    ms = [1, 10, 100]

    if fig_id == "fig2":
        dims = [10, 50, 100] if desk else [10, 50, 100, 500]
        iters = 1000 if desk else 2000
        for d in dims:
            solvers = [SolverSpec("szo", m=m) for m in ms]
            _figure_experiment(out / f"d{d}", ProblemSpec("gaussian", d),
                               solvers, trials, iters, base_seed,
                               record_every=max(1, iters // 500), keep_msqr=True)
    elif fig_id == "fig3":
        d = 100
        iters = 300 if desk else 1000
        _fig3_gradient_alignment(out, d, ms, trials, iters, base_seed)
    elif fig_id == "fig4":
        d = 100
        for q in (1, 2, 3):
            iters = (2 * q - 1) * (300 if desk else 1000)
            solvers = [SolverSpec("szo", m=m) for m in ms]
            report = _figure_experiment(out / f"q{q}", ProblemSpec("ill_conditioned", d, q=q),
                                        solvers, trials, iters, base_seed,
                                        record_every=max(1, iters // 500))
            _plot_time_axis(out / f"q{q}", report, f"ill-conditioned q={q}")
    elif fig_id == "fig5":
        dims = [50, 100, 200] if desk else [50, 100, 200, 500]
        qs = (1,) if desk else (1, 2, 3)
        for q in qs:
            bench_to_target("ill_conditioned", dims, [1, 100], target_rqe=0.01,
                            trials=trials, q=q, base_seed=base_seed,
                            out_path=out / f"bench_q{q}.csv")
    elif fig_id == "fig6":
        dims = [10, 50, 100] if desk else [10, 50, 100, 500]
        iters = 500 if desk else 1000
        m = 100
        solvers = [SolverSpec("szo", m=m),
                   SolverSpec("zorga", m=m, variant="constant"),
                   SolverSpec("zorga", m=m, variant="armijo")]
        for d in dims:
            _figure_experiment(out / f"d{d}", ProblemSpec("operator_norm", d),
                               solvers, trials, iters, base_seed,
                               record_every=max(1, iters // 500))
    else:  # fig7
        _fig7_karhunen_loeve(out, ms, trials=5 if desk else trials,
                             iters=500, base_seed=base_seed)
    return out


def _fig3_gradient_alignment(out: Path, d: int, ms, trials: int, iters: int, base_seed: int) -> None:
    """Median |b_k|^2 against |grad f(v^k)|^2 / (d - 1) per sample count."""
    series: dict[str, tuple[list[float], list[float]]] = {}
    lines = ["m,k,median_bsq,median_gradsq_scaled,median_direction_err"]
    for m in ms:
        bsq = np.full((trials, iters), np.nan)
        gsq = np.full((trials, iters), np.nan)
        derr = np.full((trials, iters), np.nan)
        for trial in range(trials):
            spec = ProblemSpec("gaussian", d, seed=base_seed + trial)
            a, b = generate(spec)
            pair = OperatorPair.from_dense(a, b)
            cfg = SolverConfig(m=m, max_iters=iters)
            rng = RngStream(seed=base_seed + trial, stream_id=m)
            result = szo_run(pair, cfg, rng, keep_iterates=True, keep_directions=True)
            n = len(result.b_hist)
            bsq[trial, :n] = result.b_hist ** 2
            grads = [riemannian_grad(a, b, v) for v in result.iterates[:n]]
            gsq[trial, :n] = [float(g @ g) / (d - 1) for g in grads]
            derr[trial, :n] = [float(np.linalg.norm((d - 1) * result.b_hist[i] * result.directions[i] / 2.0 - grads[i]))
                               for i in range(n)]
        med_b = np.nanmedian(bsq, axis=0)
        med_g = np.nanmedian(gsq, axis=0)
        med_e = np.nanmedian(derr, axis=0)
        ks = list(range(iters))
        series[f"|b|^2 m={m}"] = (ks, list(med_b))
        series[f"|grad|^2/(d-1) m={m}"] = (ks, list(med_g))
        for k in range(iters):
            lines.append(f"{m},{k},{med_b[k]:.17g},{med_g[k]:.17g},{med_e[k]:.17g}")
    (out / "gradient_alignment.csv").write_text("\n".join(lines) + "\n")
    plot_series_svg(out / "gradient_alignment.svg", series,
                    title=f"gradient estimate alignment d={d}", ylabel="value")


def _fig7_karhunen_loeve(out: Path, ms, trials: int, iters: int, base_seed: int) -> None:
    a, b = generate(ProblemSpec("karhunen_loeve", 300))
    ref = reference_solve(a, b)
    pair = OperatorPair.from_dense(a, b)
    series: dict[str, tuple[list[float], list[float]]] = {}
    final_vectors: dict[int, np.ndarray] = {}
    lines = ["m,k,median_sinb2"]
    for m in ms:
        errs = np.full((trials, iters + 1), np.nan)
        for trial in range(trials):
            cfg = SolverConfig(m=m, max_iters=iters)
            rng = RngStream(seed=base_seed + trial, stream_id=m)
            result = szo_run(pair, cfg, rng, keep_iterates=True)
            for i, v in enumerate(result.iterates):
                errs[trial, i] = sin_b2(b, v, ref.max_vector)
            if trial == 0:
                final_vectors[m] = result.state.v
        med = np.nanmedian(errs, axis=0)
        series[f"m={m}"] = (list(range(iters + 1)), list(med))
        for k in range(iters + 1):
            lines.append(f"{m},{k},{med[k]:.17g}")
    (out / "sinb2.csv").write_text("\n".join(lines) + "\n")
    plot_series_svg(out / "sinb2.svg", series, title="Karhunen-Loeve d=300",
                    ylabel="sin_B^2 error")
    grid = np.linspace(0.0, 1.0, 300)
    cols = ["t", "true"] + [f"m{m}" for m in ms]
    rows = ["," .join(cols)]
    sign = np.sign(ref.max_vector[np.argmax(np.abs(ref.max_vector))])
    for i in range(300):
        row = [f"{grid[i]:.17g}", f"{sign * ref.max_vector[i]:.17g}"]
        for m in ms:
            v = final_vectors[m]
            s = 1.0 if float(v @ (b @ ref.max_vector)) >= 0 else -1.0
            row.append(f"{sign * s * v[i]:.17g}")
        rows.append(",".join(row))
    (out / "eigenfunction.csv").write_text("\n".join(rows) + "\n")
    plot_series_svg(out / "eigenfunction.svg",
                    {"true": (list(grid), list(sign * ref.max_vector)),
                     **{f"m={m}": (list(grid),
                                   list(sign * (1.0 if float(final_vectors[m] @ (b @ ref.max_vector)) >= 0 else -1.0)
                                        * final_vectors[m]))
                        for m in ms}},
                    title="leading eigenfunction", xlabel="t", ylabel="v(t)", log_y=False)


def _plot_time_axis(out: Path, report: AggregateReport, title: str) -> None:
    series = {}
    for name, stats in report.per_solver.items():
        if "rqe" in stats:
            wall = report.mean_wall[name]
            series[name] = (list(map(float, wall)), list(map(float, stats["rqe"]["mean"])))
    if series:
        plot_series_svg(out / "rqe_vs_time.svg", series, title=title,
                        xlabel="mean time (s)", ylabel="RQE")

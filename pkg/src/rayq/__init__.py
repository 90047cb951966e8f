"""Adjoint-free stochastic maximization of generalized Rayleigh quotients.

Everything is built around forward products v -> Av and v -> Bv; the
solvers never form transposes or inverses. Dense matrices are accepted as
a convenience and wrapped in the same operator interface.
"""

from .complexify import derealify_vector, realify_matrix, realify_vector, solve_complex
from .harness import (
    ExperimentConfig,
    SolverSpec,
    bench_to_target,
    parse_solver,
    reproduce_figure,
    run_experiment,
)
from .linalg import OperatorPair, b_coefficient, b_norm, project_tangent, rayleigh, retract, riemannian_grad
from .matio import read_matrices_binary, read_matrix_text, write_matrices_binary, write_matrix_text
from .oracle import (
    ReferenceSolution,
    check_min_bsq_bound,
    min_bsq_bound,
    msqr,
    msqr_series,
    quotient_error,
    reference_solve,
    rqe,
    sin_b2,
    spectral_constants,
)
from .problems import FAMILIES, ProblemSpec, generate, karhunen_loeve
from .sampling import RngStream, sample_initial, sample_tangent_direction, sample_tangent_directions
from .solvers import (
    RunResult,
    SolverConfig,
    StopReason,
    optimal_step_size,
    rga_run,
    szo_run,
    szo_step,
    zo_gradient_estimate,
    zorga_run,
)
from .trace import RunTrace, ingest_trace, write_traces_csv

__version__ = "0.1.0"

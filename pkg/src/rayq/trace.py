"""Per-iteration run traces and their CSV schema.

The on-disk schema is fixed: `trial,k,t_wall_s,a,abs_b,tau,rqe,msqr,grad_norm`
with empty fields where a metric is unavailable. Wall-time is the only
non-deterministic column.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from pathlib import Path

from .errors import SchemaMismatch

__all__ = ["TRACE_COLUMNS", "RunTrace", "write_traces_csv", "ingest_trace"]

TRACE_COLUMNS = ["trial", "k", "t_wall_s", "a", "abs_b", "tau", "rqe", "msqr", "grad_norm"]


@dataclass
class RunTrace:
    """Recorded iterations of one run; optional metrics stay NaN."""

    k: list[int] = field(default_factory=list)
    t_wall_s: list[float] = field(default_factory=list)
    a: list[float] = field(default_factory=list)
    abs_b: list[float] = field(default_factory=list)
    tau: list[float] = field(default_factory=list)
    rqe: list[float] = field(default_factory=list)
    msqr: list[float] = field(default_factory=list)
    grad_norm: list[float] = field(default_factory=list)

    def record(self, k, t_wall_s, a, abs_b=math.nan, tau=math.nan,
               rqe=math.nan, msqr=math.nan, grad_norm=math.nan):
        self.k.append(int(k))
        self.t_wall_s.append(float(t_wall_s))
        self.a.append(float(a))
        self.abs_b.append(float(abs_b))
        self.tau.append(float(tau))
        self.rqe.append(float(rqe))
        self.msqr.append(float(msqr))
        self.grad_norm.append(float(grad_norm))

    def __len__(self) -> int:
        return len(self.k)


def _fmt(x: float) -> str:
    if math.isnan(x):
        return ""
    return format(x, ".17g")


def write_traces_csv(path, traces: dict[int, RunTrace]) -> None:
    """Write traces keyed by trial index to one CSV file."""
    path = Path(path)
    with path.open("w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(TRACE_COLUMNS)
        for trial in sorted(traces):
            tr = traces[trial]
            for i in range(len(tr)):
                writer.writerow([
                    trial, tr.k[i], _fmt(tr.t_wall_s[i]), _fmt(tr.a[i]),
                    _fmt(tr.abs_b[i]), _fmt(tr.tau[i]), _fmt(tr.rqe[i]),
                    _fmt(tr.msqr[i]), _fmt(tr.grad_norm[i]),
                ])


def _parse(field_name: str, text: str, row_no: int) -> float:
    text = text.strip()
    if not text:
        return math.nan
    try:
        return float(text)
    except ValueError as exc:
        raise SchemaMismatch(f"row {row_no}: column '{field_name}' is not numeric: {text!r}") from exc


def ingest_trace(path) -> dict[int, RunTrace]:
    """Parse a trace CSV back into per-trial RunTrace objects.

    Trailing whitespace is tolerated; missing or misnamed columns raise
    SchemaMismatch naming the offending column.
    """
    path = Path(path)
    with path.open(newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise SchemaMismatch("empty file") from None
        header = [h.strip() for h in header]
        for col in TRACE_COLUMNS:
            if col not in header:
                raise SchemaMismatch(f"missing column '{col}'")
        idx = {col: header.index(col) for col in TRACE_COLUMNS}
        traces: dict[int, RunTrace] = {}
        for row_no, row in enumerate(reader, start=2):
            if not row or all(not c.strip() for c in row):
                continue
            if len(row) < len(header):
                raise SchemaMismatch(f"row {row_no}: expected {len(header)} fields, got {len(row)}")
            try:
                trial = int(row[idx["trial"]].strip())
                k = int(row[idx["k"]].strip())
            except ValueError as exc:
                raise SchemaMismatch(f"row {row_no}: non-integer trial/k") from exc
            tr = traces.setdefault(trial, RunTrace())
            tr.record(
                k,
                _parse("t_wall_s", row[idx["t_wall_s"]], row_no),
                _parse("a", row[idx["a"]], row_no),
                _parse("abs_b", row[idx["abs_b"]], row_no),
                _parse("tau", row[idx["tau"]], row_no),
                _parse("rqe", row[idx["rqe"]], row_no),
                _parse("msqr", row[idx["msqr"]], row_no),
                _parse("grad_norm", row[idx["grad_norm"]], row_no),
            )
    return traces

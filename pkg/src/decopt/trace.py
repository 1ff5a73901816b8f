"""Per-iteration metrics and their CSV serialization."""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

TRACE_COLUMNS = ("t", "f_gap", "consensus_err", "dist_to_opt_sq", "V_t", "grad_evals", "comm_rounds")


@dataclass(frozen=True, eq=False)
class Reference:
    """Certified centralized solution used to measure optimality gaps."""

    x_star: np.ndarray
    f_star: float
    grad_norm: float
    iterations: int


@dataclass(frozen=True)
class TraceRecord:
    t: int
    f_gap: float
    consensus_err: float
    dist_to_opt_sq: float
    V_t: float | None
    grad_evals: int
    comm_rounds: int


def _fmt(value) -> str:
    if value is None:
        return ""
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    return repr(float(value))


def trace_to_csv(trace) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(TRACE_COLUMNS)
    for rec in trace:
        writer.writerow([_fmt(getattr(rec, c)) for c in TRACE_COLUMNS])
    return buf.getvalue()


def write_trace_csv(trace, path) -> Path:
    path = Path(path)
    path.write_text(trace_to_csv(trace))
    return path


def read_trace_csv(path) -> list[TraceRecord]:
    text = Path(path).read_text()
    if not text.strip():
        raise ValueError(f"{path}: empty trace file")
    reader = csv.DictReader(io.StringIO(text))
    if tuple(reader.fieldnames or ()) != TRACE_COLUMNS:
        raise ValueError(f"{path}: unexpected columns {reader.fieldnames}")
    out = []
    for row in reader:
        out.append(
            TraceRecord(
                t=int(row["t"]),
                f_gap=float(row["f_gap"]),
                consensus_err=float(row["consensus_err"]),
                dist_to_opt_sq=float(row["dist_to_opt_sq"]),
                V_t=float(row["V_t"]) if row["V_t"] else None,
                grad_evals=int(row["grad_evals"]),
                comm_rounds=int(row["comm_rounds"]),
            )
        )
    if not out:
        raise ValueError(f"{path}: trace has a header but no records")
    return out


def first_reaching(trace, threshold: float) -> TraceRecord | None:
    """First record whose ``f_gap`` is at or below ``threshold``."""
    for rec in trace:
        if math.isfinite(rec.f_gap) and rec.f_gap <= threshold:
            return rec
    return None


DIVERGENCE_FACTOR = 1e6


def block_record(problem, X, t, reference, grad_evals, comm_rounds, V_t=None) -> TraceRecord:
    """Metrics of an ``(m, d)`` iterate block measured at its row average."""
    X = np.asarray(X, dtype=np.float64)
    xbar = X.mean(axis=0)
    cons = float(np.linalg.norm(X - xbar))
    if reference is None:
        f_gap = dist = math.nan
    else:
        f_gap = problem.value(xbar) - reference.f_star
        dist = float(np.sum((X - reference.x_star) ** 2))
    return TraceRecord(t, float(f_gap), cons, dist, V_t, int(grad_evals), int(comm_rounds))


def diverged(rec: TraceRecord, initial_gap: float) -> bool:
    """Non-finite metrics, or an optimality gap beyond ``1e6`` times the initial one."""
    values = [rec.consensus_err]
    if not math.isnan(rec.f_gap):
        values.append(rec.f_gap)
    if not all(math.isfinite(v) for v in values):
        return True
    return initial_gap > 0.0 and rec.f_gap > DIVERGENCE_FACTOR * initial_gap

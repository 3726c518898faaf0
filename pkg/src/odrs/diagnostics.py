"""Convergence and regret diagnostics, plus trace recording.

The accuracy measure ``eps_g(x, lam) = x - prox_{lam h}(x - lam grad g(x))``
vanishes exactly at minimizers of ``g + h`` and is the residual every trace
reports. Regret follows the usual online convention: the learner commits to
``x_t`` before seeing round ``t``'s loss.
"""

import csv
import io
import math
import os
from dataclasses import astuple, dataclass, fields

import numpy as np

from .exceptions import DimensionMismatch, NonFiniteTrace

__all__ = [
    "CSV_COLUMNS",
    "TraceRecord",
    "accuracy_measure",
    "RegretAccumulator",
    "regret",
    "running_regret",
    "rate_fit",
    "ListSink",
    "CsvSink",
    "record",
    "format_float",
    "write_trace_csv",
    "read_trace_csv",
]

CSV_COLUMNS = ("t", "objective", "eps_norm", "avg_regret", "elapsed_s")


@dataclass(frozen=True)
class TraceRecord:
    t: int
    objective: float
    eps_norm: float
    avg_regret: float
    elapsed: float = 0.0

    def is_finite(self):
        return all(math.isfinite(v) for v in astuple(self))


def accuracy_measure(x, lam, grad_full, prox_h):
    """Return ``x - prox_{lam h}(x - lam * grad_full(x))``.

    Parameters
    ----------
    x : (n,) array_like
    lam : float
        Positive step.
    grad_full : callable or array_like
        Gradient of the smooth part, either as a function of `x` or already
        evaluated at `x`.
    prox_h : callable
        ``prox_h(v, step)`` returning the prox of ``step * h`` at `v`.
    """
    if not lam > 0:
        raise ValueError(f"lambda must be positive, got {lam}")
    x = np.asarray(x, dtype=float)
    g = grad_full(x) if callable(grad_full) else np.asarray(grad_full, dtype=float)
    return x - prox_h(x - lam * g, lam)


class RegretAccumulator:
    """Running average regret against a fixed comparator.

    ``round_loss(index, x)`` must return the composite round loss
    ``g_t(x) + h(x)``; ``index=None`` stands for the full averaged loss, which
    is what batch solvers are charged every round.
    """

    def __init__(self, round_loss, x_star):
        self._round_loss = round_loss
        self._x_star = np.asarray(x_star, dtype=float)
        self._star_cache = {}
        self.rounds = 0
        self.total = 0.0

    def _star_loss(self, index):
        if index not in self._star_cache:
            self._star_cache[index] = float(self._round_loss(index, self._x_star))
        return self._star_cache[index]

    def add(self, index, x):
        self.total += float(self._round_loss(index, x)) - self._star_loss(index)
        self.rounds += 1
        return self.value

    @property
    def value(self):
        return self.total / self.rounds if self.rounds else 0.0


def running_regret(iterates, problem, x_star, indices=None):
    """Prefix averages ``R(tau, x*)`` for ``tau = 1..T``.

    Round ``t`` (1-based) is charged ``g_{i_t}(x_t) + h(x_t)``, with sample
    index ``i_t = (t - 1) mod N`` unless `indices` is given. Pass
    ``indices=[None] * T`` to charge the full objective every round.
    """
    iterates = [np.asarray(x, dtype=float) for x in iterates]
    T = len(iterates)
    if T < 1:
        raise ValueError("need at least one iterate")
    if indices is None:
        indices = [t % problem.n_samples for t in range(T)]
    elif len(indices) != T:
        raise DimensionMismatch(f"{len(indices)} indices for {T} iterates")
    acc = RegretAccumulator(problem.round_loss, x_star)
    return np.array([acc.add(i, x) for i, x in zip(indices, iterates)])


def regret(iterates, problem, x_star, indices=None):
    """Average regret ``R(T, x*)`` of the iterate stream ``x_1..x_T``."""
    return float(running_regret(iterates, problem, x_star, indices)[-1])


def rate_fit(series):
    """Fit ``||eps_t||^2 <= C / t`` over a series of ``(t, ||eps_t||^2)``.

    Returns
    -------
    C_hat : float
        ``max_t t * ||eps_t||^2``.
    max_violation : float
        ``C_hat`` divided by ``t * ||eps_t||^2`` at the first point of the
        series; 1 means the first point already attains the max.
    """
    pts = [(float(t), float(e2)) for t, e2 in series]
    if not pts:
        raise ValueError("empty series")
    if any(t < 1 for t, _ in pts):
        raise ValueError("t must be >= 1")
    scaled = [t * e2 for t, e2 in pts]
    C_hat = max(scaled)
    first = scaled[0]
    if first == 0.0:
        return C_hat, 1.0 if C_hat == 0.0 else math.inf
    return C_hat, C_hat / first


class ListSink:
    """In-memory trace sink."""

    def __init__(self):
        self.records = []

    def append(self, rec):
        self.records.append(rec)

    def close(self):
        pass


def format_float(v):
    # repr gives the shortest string that round-trips
    return repr(float(v))


class CsvSink:
    """Streams records to a CSV file with the fixed column schema.

    Also keeps the records in memory (``records``) so a caller can inspect a
    partial trace after a failure.
    """

    def __init__(self, target):
        if isinstance(target, (str, os.PathLike)):
            self._fh = open(target, "w", newline="")
            self._owns = True
        else:
            self._fh = target
            self._owns = False
        self._writer = csv.writer(self._fh, lineterminator="\n")
        self._writer.writerow(CSV_COLUMNS)
        self.records = []

    def append(self, rec):
        self.records.append(rec)
        self._writer.writerow([
            str(int(rec.t)),
            format_float(rec.objective),
            format_float(rec.eps_norm),
            format_float(rec.avg_regret),
            format_float(rec.elapsed),
        ])

    def close(self):
        self._fh.flush()
        if self._owns:
            self._fh.close()

    def __enter__(self):
        return self

    def __exit__(self, *exc):
        self.close()


def record(trace_sink, rec):
    """Validate `rec` and append it to `trace_sink`."""
    if not rec.is_finite():
        raise NonFiniteTrace(f"non-finite trace record {rec}")
    trace_sink.append(rec)


def write_trace_csv(records, target):
    sink = CsvSink(target)
    try:
        for rec in records:
            record(sink, rec)
    finally:
        sink.close()


def read_trace_csv(source):
    """Parse a trace CSV written by `CsvSink`; the header must match exactly."""
    if isinstance(source, (str, os.PathLike)):
        with open(source, newline="") as fh:
            text = fh.read()
    else:
        text = source.read()
    reader = csv.reader(io.StringIO(text))
    header = next(reader)
    if tuple(header) != CSV_COLUMNS:
        raise ValueError(f"unexpected CSV header {header}")
    names = [f.name for f in fields(TraceRecord)]
    out = []
    for row in reader:
        vals = [int(row[0])] + [float(v) for v in row[1:]]
        out.append(TraceRecord(**dict(zip(names, vals))))
    return out

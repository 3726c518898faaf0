"""Douglas-Rachford splitting drivers.

Three variants share the same x- and u-updates and differ only in the
z-update:

* ``drs``   -- prox of the full averaged loss (batch),
* ``odrs``  -- prox of the current round's loss only (online),
* ``iodrs`` -- the current round's loss linearized at the previous ``z``.

Online proximal gradient (``opg``) is included as a comparison stepper.
"""

import math
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from . import diagnostics
from .diagnostics import RegretAccumulator, TraceRecord
from .exceptions import InvalidSpec, NonFiniteIterate, NonPositiveStep, StreamExhausted
from .prox import linearized_prox

__all__ = [
    "SOLVER_KINDS",
    "ONLINE_KINDS",
    "DIVERGENCE_BOUND",
    "SolverConfig",
    "SolverState",
    "StepCallbacks",
    "initial_state",
    "drs_step",
    "odrs_step",
    "iodrs_step",
    "opg_step",
    "default_iterations",
    "trace_stride",
    "run",
]

SOLVER_KINDS = ("drs", "odrs", "iodrs", "opg")
ONLINE_KINDS = ("odrs", "iodrs", "opg")
DIVERGENCE_BOUND = 1e12
RELAX_MIN = 1e-3
RELAX_MAX = 2.0 - 1e-3
DEFAULT_BATCH_ITERATIONS = 2000


def _check_relax(r):
    if not RELAX_MIN <= r <= RELAX_MAX:
        raise InvalidSpec(f"relaxation {r} outside [{RELAX_MIN}, {RELAX_MAX}]")
    return float(r)


@dataclass(frozen=True)
class SolverConfig:
    """Parameters shared by all drivers.

    ``lam`` is the proximal step used in both prox evaluations; ``relax`` is
    the relaxation of the u-update, given as a constant, a sequence indexed
    by iteration, or a callable ``t -> float``. ``iterations=None`` picks the
    per-solver default (see `default_iterations`).
    """

    lam: float = 1.0
    relax: object = 1.0
    iterations: Optional[int] = None
    seed: int = 0

    def __post_init__(self):
        if not (isinstance(self.lam, (int, float)) and self.lam > 0 and math.isfinite(self.lam)):
            raise InvalidSpec(f"lambda must be a positive finite number, got {self.lam!r}")
        if self.iterations is not None and self.iterations < 0:
            raise InvalidSpec(f"iterations must be >= 0, got {self.iterations}")
        if isinstance(self.relax, (int, float)):
            _check_relax(self.relax)
        elif not callable(self.relax):
            for r in self.relax:
                _check_relax(r)

    def relax_at(self, t):
        if isinstance(self.relax, (int, float)):
            return float(self.relax)
        if callable(self.relax):
            return _check_relax(self.relax(t))
        seq = self.relax
        # a finite schedule keeps its last value once exhausted
        return float(seq[t]) if t < len(seq) else float(seq[-1])


@dataclass(frozen=True)
class SolverState:
    u: np.ndarray
    x: np.ndarray
    z: np.ndarray
    t: int = 0


@dataclass
class StepCallbacks:
    """Problem hooks with the proximal step already bound.

    prox_h(anchor)
        prox of ``lam * h``.
    prox_g(index, anchor)
        prox of ``lam * g_index``; ``index=None`` means the full average loss.
    grad_g(index, point)
        gradient of ``g_index`` at `point`.
    """

    prox_h: Callable
    prox_g: Callable
    grad_g: Callable
    n_samples: int
    inner_iterations: list = field(default_factory=list)


def initial_state(dim):
    zero = np.zeros(dim)
    return SolverState(u=zero, x=zero.copy(), z=zero.copy(), t=0)


def _relaxed(state, x, z, cfg):
    u = state.u + cfg.relax_at(state.t) * (z - x)
    return SolverState(u=u, x=x, z=z, t=state.t + 1)


def drs_step(state, cb, cfg):
    x = cb.prox_h(state.u)
    z = cb.prox_g(None, 2.0 * x - state.u)
    return _relaxed(state, x, z, cfg)


def _check_index(cb, sample_index):
    if not 0 <= sample_index < cb.n_samples:
        raise StreamExhausted(
            f"sample index {sample_index} outside stream of length {cb.n_samples}")


def odrs_step(state, cb, cfg, sample_index):
    """One online step: the z-update uses only the round's loss."""
    _check_index(cb, sample_index)
    x = cb.prox_h(state.u)
    z = cb.prox_g(sample_index, 2.0 * x - state.u)
    return _relaxed(state, x, z, cfg)


def iodrs_step(state, cb, cfg, sample_index):
    """One inexact online step.

    The round's loss is linearized at the previous ``z`` (not at the new x),
    so the z-update is an explicit gradient step from the anchor.
    """
    _check_index(cb, sample_index)
    x = cb.prox_h(state.u)
    z = linearized_prox(cb.grad_g(sample_index, state.z), 2.0 * x - state.u, cfg.lam)
    return _relaxed(state, x, z, cfg)


def opg_step(x, grad_at_x, step, prox_h):
    """Online proximal gradient: ``prox_{step h}(x - step * grad)``."""
    if not step > 0:
        raise NonPositiveStep(f"step must be positive, got {step}")
    x = np.asarray(x, dtype=float)
    return prox_h(x - step * np.asarray(grad_at_x, dtype=float), step)


def default_iterations(kind, n_samples):
    return n_samples if kind in ONLINE_KINDS else DEFAULT_BATCH_ITERATIONS


def trace_stride(iterations):
    return max(1, math.ceil(iterations / 10_000))


def _diverged(v):
    return not np.all(np.isfinite(v)) or np.max(np.abs(v), initial=0.0) > DIVERGENCE_BOUND


def run(problem, solver_kind, cfg, trace_sink=None, x_star=None, clock=None, eps_mode="full",
        callbacks=None):
    """Drive one solver for ``cfg.iterations`` rounds.

    Parameters
    ----------
    problem : LassoProblem or LogisticProblem
    solver_kind : {'drs', 'odrs', 'iodrs', 'opg'}
    cfg : SolverConfig
    trace_sink : object with ``append(record)``, optional
        Receives one `TraceRecord` per traced round; a `ListSink` is used
        when omitted.
    x_star : array_like, optional
        Comparator for the regret column; defaults to the problem's
        reference solution at tol 1e-10.
    clock : callable, optional
        Time source for the elapsed column (e.g. ``time.perf_counter``).
        Left unset, elapsed is recorded as 0 so traces are reproducible
        byte for byte.
    eps_mode : {'full', 'round'}
        Gradient used in the accuracy measure: the full averaged loss
        (comparable across solvers) or the current round's loss.
    callbacks : StepCallbacks, optional
        Prebuilt ``problem.callbacks(cfg.lam)``; pass one to inspect its
        inner-solve log afterwards.

    Returns
    -------
    x : ndarray
        ``prox_h(u_T)`` for the splitting solvers, the last iterate for opg.
    trace : list of TraceRecord

    Raises
    ------
    NonFiniteIterate
        If an iterate becomes non-finite or exceeds the divergence bound;
        the exception's ``trace`` holds the records written so far.

    Notes
    -----
    Round ``t`` (1-based) evaluates the point the learner committed to before
    seeing that round's loss: ``x_t = prox_h(u_{t-1})`` for the splitting
    solvers. Online solvers visit samples ``0, 1, ..., N-1`` in order and
    wrap around when ``iterations > N``. Batch DRs is charged the full
    objective every round in the regret column.
    """
    if solver_kind not in SOLVER_KINDS:
        raise InvalidSpec(f"unknown solver {solver_kind!r}; expected one of {SOLVER_KINDS}")
    if eps_mode not in ("full", "round"):
        raise InvalidSpec(f"unknown eps_mode {eps_mode!r}")
    sink = trace_sink if trace_sink is not None else diagnostics.ListSink()
    trace = []
    N = problem.n_samples
    T = cfg.iterations if cfg.iterations is not None else default_iterations(solver_kind, N)
    lam = cfg.lam
    cb = callbacks if callbacks is not None else problem.callbacks(lam)
    if x_star is None:
        x_star = problem.reference(1e-10)
    acc = RegretAccumulator(problem.round_loss, x_star)
    stride = trace_stride(T)
    t0 = clock() if clock is not None else None

    def emit(t, point, index):
        if eps_mode == "round" and index is not None:
            grad = problem.sample_loss_grad(index, point)[1]
        else:
            grad = problem.gradient(point)
        eps = diagnostics.accuracy_measure(point, lam, grad, problem.prox_h)
        rec = TraceRecord(
            t=t,
            objective=problem.objective(point),
            eps_norm=float(np.linalg.norm(eps)),
            avg_regret=acc.value,
            elapsed=(clock() - t0) if clock is not None else 0.0,
        )
        diagnostics.record(sink, rec)
        trace.append(rec)

    def fail(t, what):
        raise NonFiniteIterate(
            f"{solver_kind}: {what} left the finite range at iteration {t} "
            f"(bound {DIVERGENCE_BOUND:g})", trace)

    if solver_kind == "opg":
        x = np.zeros(problem.dim)
        for t in range(T):
            index = t % N
            point = x
            acc.add(index, point)
            x = opg_step(x, cb.grad_g(index, x), lam, problem.prox_h)
            if _diverged(x):
                fail(t + 1, "x")
            if (t + 1) % stride == 0 or t + 1 == T:
                emit(t + 1, point, index)
        return x, trace

    state = initial_state(problem.dim)
    for t in range(T):
        if solver_kind == "drs":
            index = None
            state = drs_step(state, cb, cfg)
        elif solver_kind == "odrs":
            index = t % N
            state = odrs_step(state, cb, cfg, index)
        else:
            index = t % N
            state = iodrs_step(state, cb, cfg, index)
        if _diverged(state.u) or _diverged(state.z):
            fail(t + 1, "u")
        acc.add(index, state.x)
        if (t + 1) % stride == 0 or t + 1 == T:
            emit(t + 1, state.x, index)
    return cb.prox_h(state.u), trace


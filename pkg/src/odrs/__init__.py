"""Batch, online and inexact online Douglas-Rachford splitting.

Solves composite problems ``(1/N) sum_t g_t(x) + h(x)`` with a smooth loss
``g_t`` and a nonsmooth regularizer ``h``, with ready-made lasso and sparse
logistic regression instances.
"""

from .diagnostics import (
    CsvSink,
    ListSink,
    TraceRecord,
    accuracy_measure,
    rate_fit,
    read_trace_csv,
    regret,
    running_regret,
)
from .exceptions import NonFiniteIterate, OdrsError
from .problems import (
    LassoProblem,
    LogisticProblem,
    generate_lasso,
    generate_logistic,
    objective,
    read_problem,
    reference_solution,
    sample_loss_grad,
    write_problem,
)
from .solvers import (
    SolverConfig,
    SolverState,
    StepCallbacks,
    drs_step,
    iodrs_step,
    odrs_step,
    opg_step,
    run,
)

__version__ = "0.1.0"

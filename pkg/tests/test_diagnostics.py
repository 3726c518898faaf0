import io
import math

import numpy as np
import pytest

from odrs import diagnostics, problems, solvers
from odrs.diagnostics import TraceRecord
from odrs.exceptions import DimensionMismatch, NonFiniteTrace
from odrs.problems import LassoProblem


@pytest.fixture
def one_dim():
    return LassoProblem(A=[[1.0]], b=[1.0], mu=0.4)


def test_accuracy_measure_zero_at_solution(one_dim):
    eps = diagnostics.accuracy_measure(np.array([0.8]), 1.0, one_dim.gradient, one_dim.prox_h)
    np.testing.assert_allclose(eps, [0.0], atol=1e-12)


def test_accuracy_measure_without_regularizer(rng):
    grad = rng.standard_normal(4)
    x = rng.standard_normal(4)
    eps = diagnostics.accuracy_measure(x, 0.3, grad, lambda v, step: v)
    np.testing.assert_allclose(eps, 0.3 * grad, rtol=1e-14)


def test_accuracy_measure_rederived(rng):
    p = problems.generate_lasso(2, N=30, n=7, k=2)
    x = rng.standard_normal(7) * 0.01
    lam = 0.7
    v = x - lam * (2.0 / 30) * p.A.T @ (p.A @ x - p.b)
    manual = x - np.sign(v) * np.maximum(np.abs(v) - p.mu * lam, 0.0)
    np.testing.assert_allclose(diagnostics.accuracy_measure(x, lam, p.gradient, p.prox_h),
                               manual, rtol=0, atol=1e-12)


@pytest.mark.parametrize("lam", [0.1, 1.0, 10.0])
def test_accuracy_measure_vanishes_at_certified_solution(lam):
    for p in (problems.generate_lasso(0, N=80, n=12, k=3),
              problems.generate_logistic(0, N=80, n=6, k=2)):
        x = p.reference(1e-10)
        assert np.linalg.norm(diagnostics.accuracy_measure(x, lam, p.gradient, p.prox_h)) <= 1e-8


def test_regret_zero_when_playing_comparator(one_dim):
    xs = [np.array([0.8])] * 5
    assert diagnostics.regret(xs, one_dim, np.array([0.8])) == 0.0


def test_regret_one_round_by_hand(one_dim):
    # f_1(0) - f_1(0.8) = 1 - (0.04 + 0.32)
    r = diagnostics.regret([np.array([0.0])], one_dim, np.array([0.8]))
    assert r == pytest.approx(0.64, abs=1e-15)


def test_regret_length_mismatch(one_dim):
    with pytest.raises(DimensionMismatch):
        diagnostics.regret([np.zeros(1)] * 3, one_dim, np.zeros(1), indices=[0, 0])


def naive_regret(xs, A, b, mu, x_star):
    N = A.shape[0]
    T = len(xs)
    total = 0.0
    for t in range(T):
        a, bt = A[t % N], b[t % N]
        total += (a @ xs[t] - bt) ** 2 + mu * np.abs(xs[t]).sum()
        total -= (a @ x_star - bt) ** 2 + mu * np.abs(x_star).sum()
    return total / T


def test_regret_of_odrs_run_matches_naive_double_loop():
    p = problems.generate_lasso(1, N=40, n=6, k=2)
    x_star = p.reference(1e-10)
    cb = p.callbacks(1.0)
    cfg = solvers.SolverConfig(lam=1.0)
    state = solvers.initial_state(p.dim)
    xs = []
    for t in range(60):
        state = solvers.odrs_step(state, cb, cfg, t % p.n_samples)
        xs.append(state.x)
    r = diagnostics.regret(xs, p, x_star)
    assert r == pytest.approx(naive_regret(xs, p.A, p.b, p.mu, x_star), abs=1e-12)
    _, trace = solvers.run(p, "odrs", solvers.SolverConfig(lam=1.0, iterations=60), x_star=x_star)
    assert trace[-1].avg_regret == pytest.approx(r, abs=1e-12)


def test_regret_with_identical_rounds_equals_average_gap():
    # every round sees the full objective: regret is the mean suboptimality
    p = problems.generate_lasso(6, N=30, n=5, k=2)
    x_star = p.reference(1e-10)
    _, trace = solvers.run(p, "drs", solvers.SolverConfig(lam=0.5, iterations=40), x_star=x_star)
    cb = p.callbacks(0.5)
    cfg = solvers.SolverConfig(lam=0.5)
    state = solvers.initial_state(p.dim)
    gaps = []
    for _ in range(40):
        state = solvers.drs_step(state, cb, cfg)
        gaps.append(p.objective(state.x) - p.objective(x_star))
    assert trace[-1].avg_regret == pytest.approx(np.mean(gaps), abs=1e-12)
    same = diagnostics.regret([state.x] * 3, p, x_star, indices=[None] * 3)
    assert same == pytest.approx(p.objective(state.x) - p.objective(x_star), abs=1e-15)


def test_rate_fit_exact_inverse_series():
    series = [(t, 1.0 / t) for t in range(1, 50)]
    C_hat, ratio = diagnostics.rate_fit(series)
    assert C_hat == pytest.approx(1.0, rel=1e-15)
    assert ratio == pytest.approx(1.0, rel=1e-15)


def test_rate_fit_single_point():
    assert diagnostics.rate_fit([(5, 0.2)]) == (1.0, 1.0)


def test_rate_fit_detects_slow_decay():
    series = [(t, 1.0 / math.sqrt(t)) for t in range(10, 1000)]
    _, ratio = diagnostics.rate_fit(series)
    assert ratio > 9


def test_rate_fit_of_batch_drs_run():
    p = problems.generate_lasso(8, N=50, n=10, k=3)
    _, trace = solvers.run(p, "drs", solvers.SolverConfig(lam=1.0, iterations=500))
    _, ratio = diagnostics.rate_fit([(r.t, r.eps_norm ** 2) for r in trace if r.t >= 10])
    assert ratio <= 10


def test_rate_fit_rejects_bad_input():
    with pytest.raises(ValueError):
        diagnostics.rate_fit([])
    with pytest.raises(ValueError):
        diagnostics.rate_fit([(0, 1.0)])


def test_record_keeps_order():
    sink = diagnostics.ListSink()
    diagnostics.record(sink, TraceRecord(1, 1.0, 0.5, 0.1))
    diagnostics.record(sink, TraceRecord(2, 0.9, 0.4, 0.1))
    assert [r.t for r in sink.records] == [1, 2]


def test_record_rejects_nan():
    with pytest.raises(NonFiniteTrace):
        diagnostics.record(diagnostics.ListSink(), TraceRecord(1, math.nan, 0.0, 0.0))


def test_csv_sink_many_rows(tmp_path):
    path = tmp_path / "big.csv"
    with diagnostics.CsvSink(path) as sink:
        for t in range(1, 10**5 + 1):
            diagnostics.record(sink, TraceRecord(t, 1.0 / t, 0.0, 0.0))
    lines = path.read_text().splitlines()
    assert lines[0] == "t,objective,eps_norm,avg_regret,elapsed_s"
    assert len(lines) == 10**5 + 1


def test_csv_round_trip():
    recs = [TraceRecord(1, 0.1, 1e-17, -3.5e-9, 0.0), TraceRecord(2, 1 / 3, 2.0, 0.0, 1.25)]
    buf = io.StringIO()
    diagnostics.write_trace_csv(recs, buf)
    text = buf.getvalue()
    assert text.endswith("\n")
    assert diagnostics.read_trace_csv(io.StringIO(text)) == recs


def test_read_trace_rejects_wrong_header():
    with pytest.raises(ValueError):
        diagnostics.read_trace_csv(io.StringIO("t,obj\n1,2\n"))

import io
import math

import numpy as np
import pytest

from odrs import problems
from odrs.exceptions import IndexOutOfRange, InvalidSparsity, MuNotPositive
from odrs.problems import LassoProblem, LogisticProblem

from oracles import central_difference, ista, naive_lasso_objective, naive_logistic


@pytest.fixture
def small_lasso():
    return problems.generate_lasso(3, N=40, n=8, k=3)


@pytest.fixture
def small_logistic():
    return problems.generate_logistic(4, N=60, n=6, k=2)


def test_generate_lasso_zero_signal_rejected():
    with pytest.raises(MuNotPositive):
        problems.generate_lasso(0, N=4, n=4, k=0, noise_sigma=0.0)


def test_generate_lasso_columns_normalized():
    p = problems.generate_lasso(1, N=200, n=30, k=5)
    np.testing.assert_allclose(np.linalg.norm(p.A, axis=0), 1.0, rtol=0, atol=1e-12)


def test_generate_lasso_defaults():
    p = problems.generate_lasso(0)
    assert p.A.shape == (1000, 100)
    assert p.b.shape == (1000,)
    assert np.count_nonzero(p.ground_truth) == 10
    assert p.mu == pytest.approx(0.1 * np.max(np.abs(p.A.T @ p.b / 1000)), rel=1e-15)


def test_generate_lasso_paper_scaling_divides_signal_by_N():
    paper = problems.generate_lasso(5, N=30, n=6, k=2, noise_sigma=0.0)
    classic = problems.generate_lasso(5, N=30, n=6, k=2, noise_sigma=0.0, scaling="classic")
    np.testing.assert_allclose(paper.b * 30, classic.b, rtol=1e-14)
    np.testing.assert_allclose(classic.b, classic.A @ classic.ground_truth, rtol=1e-14)


def test_generate_lasso_invalid_sparsity():
    with pytest.raises(InvalidSparsity):
        problems.generate_lasso(0, N=10, n=5, k=6)


def test_generators_deterministic():
    a = problems.dumps_problem(problems.generate_lasso(9, N=20, n=5, k=2))
    b = problems.dumps_problem(problems.generate_lasso(9, N=20, n=5, k=2))
    c = problems.dumps_problem(problems.generate_lasso(10, N=20, n=5, k=2))
    assert a == b and a != c
    la = problems.generate_logistic(9, N=30, n=5, k=2)
    lb = problems.generate_logistic(9, N=30, n=5, k=2)
    np.testing.assert_array_equal(la.labels, lb.labels)
    np.testing.assert_array_equal(la.samples, lb.samples)


def test_generate_logistic_labels_signed():
    p = problems.generate_logistic(2, N=100, n=10, k=3)
    assert set(np.unique(p.labels)) <= {-1.0, 1.0}
    with pytest.raises(InvalidSparsity):
        problems.generate_logistic(0, N=10, n=3, k=4)


def test_generate_logistic_recovers_planted_signs():
    p = problems.generate_logistic(0, N=500, n=20, k=5)
    w = problems.reference_solution(p, 1e-10)
    agreement = np.mean(np.sign(w) == np.sign(p.ground_truth))
    assert agreement >= 0.8


def test_logistic_accepts_zero_one_labels():
    p = LogisticProblem(samples=[[1.0], [2.0]], labels=[0, 1], mu=0.1)
    np.testing.assert_array_equal(p.labels, [-1.0, 1.0])


def test_lasso_objective_at_zero(small_lasso):
    p = small_lasso
    assert problems.objective(p, np.zeros(p.dim)) == pytest.approx(
        np.sum(p.b ** 2) / p.n_samples, rel=1e-14)


def test_logistic_objective_at_zero(small_logistic):
    assert problems.objective(small_logistic, np.zeros(small_logistic.dim)) == pytest.approx(
        math.log(2), rel=1e-15)


def test_objective_matches_naive_loop(small_lasso, small_logistic, rng):
    p = small_lasso
    x = rng.standard_normal(p.dim)
    assert problems.objective(p, x) == pytest.approx(
        naive_lasso_objective(p.A, p.b, p.mu, x), abs=1e-12)
    q = small_logistic
    w = rng.standard_normal(q.dim)
    expected = naive_logistic(q.samples, q.labels, w)[0] + q.mu * np.abs(w).sum()
    assert problems.objective(q, w) == pytest.approx(expected, abs=1e-12)


def test_sample_loss_on_hyperplane_is_zero(rng):
    A = rng.standard_normal((3, 4))
    x = rng.standard_normal(4)
    p = LassoProblem(A=A, b=A @ x, mu=0.1)
    loss, grad = problems.sample_loss_grad(p, 1, x)
    assert loss == pytest.approx(0.0, abs=1e-28)
    np.testing.assert_allclose(grad, 0.0, atol=1e-14)


def test_sample_loss_index_checked(small_lasso):
    with pytest.raises(IndexOutOfRange):
        small_lasso.sample_loss_grad(small_lasso.n_samples, np.zeros(small_lasso.dim))
    with pytest.raises(IndexOutOfRange):
        small_lasso.sample_loss_grad(-1, np.zeros(small_lasso.dim))


@pytest.mark.parametrize("which", ["lasso", "logistic"])
def test_sample_gradients_finite_differences(which, small_lasso, small_logistic, rng):
    p = small_lasso if which == "lasso" else small_logistic
    for t in range(0, p.n_samples, 7):
        x = rng.standard_normal(p.dim)
        grad = p.sample_loss_grad(t, x)[1]
        fd = central_difference(lambda v: p.sample_loss_grad(t, v)[0], x)
        assert np.linalg.norm(fd - grad) <= 1e-5 * max(np.linalg.norm(grad), 1e-12)


@pytest.mark.parametrize("which", ["lasso", "logistic"])
def test_full_gradient_is_average_of_sample_gradients(which, small_lasso, small_logistic, rng):
    p = small_lasso if which == "lasso" else small_logistic
    x = rng.standard_normal(p.dim)
    avg = sum(p.sample_loss_grad(t, x)[1] for t in range(p.n_samples)) / p.n_samples
    np.testing.assert_allclose(p.gradient(x), avg, rtol=0, atol=1e-12)


def test_reference_solution_one_dimensional():
    p = LassoProblem(A=[[1.0]], b=[1.0], mu=0.4)
    x = problems.reference_solution(p, 1e-12)
    np.testing.assert_allclose(x, [0.8], rtol=0, atol=1e-12)


def test_reference_solution_huge_mu_gives_zero(small_lasso):
    p = small_lasso
    big = LassoProblem(A=p.A, b=p.b, mu=2 * np.max(np.abs(p.A.T @ p.b)) / p.n_samples)
    np.testing.assert_array_equal(problems.reference_solution(big, 1e-10), np.zeros(p.dim))


def test_reference_solution_self_certifies():
    p = problems.generate_lasso(0)
    x = problems.reference_solution(p, 1e-10)
    step = 1 / p.lipschitz()
    eps = x - p.prox_h(x - step * p.gradient(x), step)
    assert np.linalg.norm(eps) <= 1e-10


def test_reference_solution_agrees_with_ista(small_lasso):
    p = small_lasso
    np.testing.assert_allclose(problems.reference_solution(p, 1e-12), ista(p.A, p.b, p.mu),
                               rtol=0, atol=1e-9)


@pytest.mark.parametrize("which", ["lasso", "logistic"])
def test_reference_solution_is_global_minimum(which, small_lasso, small_logistic):
    p = small_lasso if which == "lasso" else small_logistic
    x_star = problems.reference_solution(p, 1e-10)
    f_star = p.objective(x_star)
    r = np.random.default_rng(99)
    for _ in range(100):
        x = x_star + r.standard_normal(p.dim) * 10 ** r.uniform(-6, 0)
        assert f_star <= p.objective(x) + 1e-8


def test_problem_file_round_trip(small_lasso, small_logistic):
    for p in (small_lasso, small_logistic):
        text = problems.dumps_problem(p)
        q = problems.loads_problem(text)
        assert type(q) is type(p)
        assert q.mu == p.mu
        if p.kind == "lasso":
            np.testing.assert_array_equal(q.A, p.A)
            np.testing.assert_array_equal(q.b, p.b)
        else:
            np.testing.assert_array_equal(q.samples, p.samples)
            np.testing.assert_array_equal(q.labels, p.labels)
        np.testing.assert_array_equal(q.ground_truth, p.ground_truth)
        assert problems.dumps_problem(q) == text


def test_problem_file_header_and_layout(tmp_path):
    p = LassoProblem(A=[[1.0, 2.0], [3.0, 4.0], [5.0, 6.0]], b=[0.1, 0.2, 0.3], mu=0.25)
    path = tmp_path / "p.txt"
    problems.write_problem(p, path)
    lines = path.read_text().splitlines()
    assert lines[0] == "lasso 3 2 0.25"
    assert len(lines) == 1 + 3 + 1
    assert lines[4].split() == [format(v, ".17g") for v in (0.1, 0.2, 0.3)]
    assert problems.read_problem(path).b.tolist() == [0.1, 0.2, 0.3]
    buf = io.StringIO()
    problems.write_problem(p, buf)
    assert buf.getvalue() == path.read_text()


def test_problem_file_rejects_garbage():
    with pytest.raises(ValueError):
        problems.loads_problem("ridge 1 1 0.1\n1\n1\n")
    with pytest.raises(ValueError):
        problems.loads_problem("lasso 2 1 0.1\n1\n1\n")

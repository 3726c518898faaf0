"""Lasso and l1-regularized logistic regression problems.

Both problems have the composite form ``(1/N) sum_t g_t(x) + mu ||x||_1``.
They expose the hooks the solvers need (per-sample losses and gradients,
proximal maps with a bound step) plus synthetic data generators and a
proximal-gradient reference solver that serves as the independent oracle.
"""

import io
import os
from dataclasses import dataclass, field
from typing import Optional

import numpy as np
from scipy.special import expit

from . import numerics, prox
from .diagnostics import accuracy_measure
from .exceptions import (
    DimensionMismatch,
    IndexOutOfRange,
    InvalidSparsity,
    InvalidSpec,
    MaxIterations,
    MuNotPositive,
)
from .solvers import StepCallbacks

__all__ = [
    "LassoProblem",
    "LogisticProblem",
    "generate_lasso",
    "generate_logistic",
    "objective",
    "sample_loss_grad",
    "reference_solution",
    "write_problem",
    "read_problem",
    "dumps_problem",
    "loads_problem",
]


class _L1Composite:
    """Shared behaviour of problems regularized by ``mu ||x||_1``."""

    @property
    def dim(self):
        return self._data.shape[1]

    @property
    def n_samples(self):
        return self._data.shape[0]

    def h_value(self, x):
        return self.mu * numerics.norm1(x)

    def prox_h(self, v, step):
        return prox.prox_l1(v, self.mu * step)

    def objective(self, x):
        return self.smooth_value(x) + self.h_value(x)

    def round_loss(self, index, x):
        """Composite loss of one round; ``index=None`` gives the full objective."""
        if index is None:
            return self.objective(x)
        return self.sample_loss_grad(index, x)[0] + self.h_value(x)

    def _check_index(self, t):
        if not 0 <= t < self.n_samples:
            raise IndexOutOfRange(f"sample index {t} outside [0, {self.n_samples})")

    def reference(self, tol=1e-10):
        """Cached `reference_solution` at `tol`."""
        cache = self._cache.setdefault("reference", {})
        if tol not in cache:
            cache[tol] = reference_solution(self, tol)
        return cache[tol]


@dataclass(eq=False)
class LassoProblem(_L1Composite):
    r"""Least squares with an l1 penalty.

    .. math:: \min_x \frac{1}{N} \sum_{t=1}^N (a_t^T x - b_t)^2 + \mu \|x\|_1

    with ``a_t`` the rows of `A`.
    """

    A: np.ndarray
    b: np.ndarray
    mu: float
    ground_truth: Optional[np.ndarray] = None
    _cache: dict = field(default_factory=dict, init=False, repr=False)

    def __post_init__(self):
        self.A = numerics.as_matrix(self.A, "A")
        self.b = numerics.as_vector(self.b, "b")
        if self.A.shape[0] != self.b.shape[0]:
            raise DimensionMismatch(f"A has {self.A.shape[0]} rows, b has length {self.b.shape[0]}")
        if not self.mu > 0:
            raise MuNotPositive(f"mu must be positive, got {self.mu}")
        self.mu = float(self.mu)
        if self.ground_truth is not None:
            self.ground_truth = numerics.as_vector(self.ground_truth, "ground_truth")
            if self.ground_truth.shape[0] != self.A.shape[1]:
                raise DimensionMismatch("ground_truth length differs from A's column count")

    kind = "lasso"

    @property
    def _data(self):
        return self.A

    def smooth_value(self, x):
        r = self.A @ x - self.b
        return float(r @ r) / self.n_samples

    def gradient(self, x):
        return 2.0 * (self.A.T @ (self.A @ x - self.b)) / self.n_samples

    def sample_loss_grad(self, t, x):
        self._check_index(t)
        a = self.A[t]
        r = float(a @ x) - float(self.b[t])
        return r * r, 2.0 * r * a

    def lipschitz(self):
        return 2.0 * np.linalg.norm(self.A, 2) ** 2 / self.n_samples

    def gram(self):
        if "gram" not in self._cache:
            self._cache["gram"] = numerics.gram(self.A)
        return self._cache["gram"]

    def batch_factor(self, lam):
        factors = self._cache.setdefault("factor", {})
        if lam not in factors:
            factors[lam] = prox.ls_batch_factor(self.A, lam, G=self.gram())
        return factors[lam]

    def callbacks(self, lam):
        factor = self.batch_factor(lam)
        A, b = self.A, self.b
        mu_lam = self.mu * lam

        def prox_g(index, anchor):
            # with one sample the full loss is the round loss; use one code path
            if index is None and self.n_samples == 1:
                index = 0
            if index is None:
                return prox.prox_ls_batch(A, b, anchor, lam, factor=factor)
            return prox.prox_ls_rank1(A[index], b[index], anchor, lam)

        return StepCallbacks(
            prox_h=lambda anchor: prox.prox_l1(anchor, mu_lam),
            prox_g=prox_g,
            grad_g=lambda index, point: self.sample_loss_grad(index, point)[1],
            n_samples=self.n_samples,
        )


@dataclass(eq=False)
class LogisticProblem(_L1Composite):
    r"""l1-regularized logistic regression.

    .. math:: \min_w \frac{1}{T} \sum_{i=1}^T \log(1 + e^{-y_i w^T x_i}) + \mu \|w\|_1

    Labels may be given as {0, 1} or {-1, +1}; they are stored as {-1, +1}.
    """

    samples: np.ndarray
    labels: np.ndarray
    mu: float
    inner_tol: float = 1e-10
    max_inner: int = 50
    ground_truth: Optional[np.ndarray] = None
    _cache: dict = field(default_factory=dict, init=False, repr=False)

    kind = "logistic"

    def __post_init__(self):
        self.samples = numerics.as_matrix(self.samples, "samples")
        self.labels = prox.as_signed_labels(self.labels)
        if self.samples.shape[0] != self.labels.shape[0]:
            raise DimensionMismatch(
                f"{self.samples.shape[0]} samples but {self.labels.shape[0]} labels")
        if not self.mu > 0:
            raise MuNotPositive(f"mu must be positive, got {self.mu}")
        self.mu = float(self.mu)
        if self.ground_truth is not None:
            self.ground_truth = numerics.as_vector(self.ground_truth, "ground_truth")

    @property
    def _data(self):
        return self.samples

    def smooth_value(self, w):
        return prox.logistic_value_grad(self.samples, self.labels, w)[0]

    def gradient(self, w):
        return prox.logistic_value_grad(self.samples, self.labels, w)[1]

    def sample_loss_grad(self, t, w):
        self._check_index(t)
        x = self.samples[t]
        m = float(self.labels[t]) * float(x @ w)
        loss = float(prox.log1pexp_neg(np.array([m]))[0])
        return loss, -self.labels[t] * expit(-m) * x

    def lipschitz(self):
        return 0.25 * np.linalg.norm(self.samples, 2) ** 2 / self.n_samples

    def callbacks(self, lam):
        X, y = self.samples, self.labels
        mu_lam = self.mu * lam
        log = []

        def prox_g(index, anchor):
            if index is None:
                rows = slice(None)
            else:
                rows = slice(index, index + 1)
            out = prox.prox_logistic(X[rows], y[rows], anchor, lam,
                                     tol=self.inner_tol, max_inner=self.max_inner)
            log.append(out.inner_iterations)
            return out.point

        return StepCallbacks(
            prox_h=lambda anchor: prox.prox_l1(anchor, mu_lam),
            prox_g=prox_g,
            grad_g=lambda index, point: self.sample_loss_grad(index, point)[1],
            n_samples=self.n_samples,
            inner_iterations=log,
        )


def objective(problem, x):
    """Full composite objective ``g(x) + h(x)``."""
    x = np.asarray(x, dtype=float)
    if x.shape != (problem.dim,):
        raise DimensionMismatch(f"x has shape {x.shape}, problem dimension is {problem.dim}")
    return problem.objective(x)


def sample_loss_grad(problem, t, x):
    return problem.sample_loss_grad(t, np.asarray(x, dtype=float))


def reference_solution(problem, tol=1e-10, max_iter=10**6):
    """High-accuracy minimizer by proximal gradient with backtracking.

    Starts from the step ``1/L`` (``L`` the gradient Lipschitz constant of
    the smooth part) and halves it whenever the quadratic upper bound fails.
    Stops once ``||eps_g(x, step)|| <= tol``; that residual is exactly the
    length of the next proximal gradient step, so the output certifies
    itself.

    Raises
    ------
    MaxIterations
        If `max_iter` steps do not reach `tol`.
    """
    if not tol > 0:
        raise ValueError(f"tol must be positive, got {tol}")
    L = problem.lipschitz()
    step = 1.0 / L if L > 0 else 1.0
    x = np.zeros(problem.dim)
    fx = problem.smooth_value(x)
    gx = problem.gradient(x)
    for _ in range(max_iter):
        while True:
            x_new = problem.prox_h(x - step * gx, step)
            d = x_new - x
            f_new = problem.smooth_value(x_new)
            if f_new <= fx + gx @ d + (d @ d) / (2.0 * step) + 1e-15 * abs(fx):
                break
            step *= 0.5
        if np.linalg.norm(accuracy_measure(x, step, gx, problem.prox_h)) <= tol:
            return x
        x, fx, gx = x_new, f_new, problem.gradient(x_new)
    raise MaxIterations(f"reference solver did not reach tol {tol:g} in {max_iter} iterations")


def _sparse_vector(rng, n, k):
    truth = np.zeros(n)
    if k:
        support = np.sort(rng.choice(n, size=k, replace=False))
        truth[support] = numerics.gauss_sample(rng, k)
    return truth


def _normalized_gaussian(rng, N, n):
    M = numerics.gauss_sample(rng, N * n).reshape(N, n)
    return M / np.linalg.norm(M, axis=0)


def generate_lasso(seed, N=1000, n=100, k=10, noise_sigma=1e-3, scaling="paper"):
    """Synthetic sparse regression instance.

    ``A`` is Gaussian with unit-norm columns, ``x0`` has exactly `k` nonzero
    standard-normal entries on a uniformly drawn support, and
    ``b = A x0 / N + noise_sigma * noise`` (``scaling='paper'``) or
    ``b = A x0 + noise_sigma * noise`` (``scaling='classic'``). The penalty is
    ``mu = 0.1 * ||A^T b / N||_inf``.
    """
    if not 0 <= k <= n:
        raise InvalidSparsity(f"need 0 <= k <= n, got k={k}, n={n}")
    if N < 1 or n < 1:
        raise InvalidSpec(f"need N, n >= 1, got N={N}, n={n}")
    if not noise_sigma >= 0:
        raise InvalidSpec(f"noise_sigma must be >= 0, got {noise_sigma}")
    if scaling not in ("paper", "classic"):
        raise InvalidSpec(f"unknown scaling {scaling!r}")
    rng = numerics.make_rng(seed)
    A = _normalized_gaussian(rng, N, n)
    truth = _sparse_vector(rng, n, k)
    signal = A @ truth
    if scaling == "paper":
        signal = signal / N
    b = signal + noise_sigma * numerics.gauss_sample(rng, N)
    mu = 0.1 * numerics.norm_inf(A.T @ b / N)
    if not mu > 0:
        raise MuNotPositive("generated data give mu = 0 (no signal and no noise)")
    return LassoProblem(A=A, b=b, mu=mu, ground_truth=truth)


def generate_logistic(seed, N=500, n=20, k=5, noise_sigma=1e-2):
    """Synthetic sparse logistic instance.

    Samples are Gaussian with unit-norm columns; labels are
    ``sign(X w* + noise_sigma * noise)`` for a planted `k`-sparse ``w*``
    (ties go to +1). ``mu = 0.1 * ||(1/N) sum_i y_i x_i||_inf``. The planted
    vector is returned in ``problem.ground_truth``.
    """
    if not 0 <= k <= n:
        raise InvalidSparsity(f"need 0 <= k <= n, got k={k}, n={n}")
    if N < 1 or n < 1:
        raise InvalidSpec(f"need N, n >= 1, got N={N}, n={n}")
    rng = numerics.make_rng(seed)
    X = _normalized_gaussian(rng, N, n)
    truth = _sparse_vector(rng, n, k)
    scores = X @ truth + noise_sigma * numerics.gauss_sample(rng, N)
    y = np.where(scores >= 0, 1.0, -1.0)
    mu = 0.1 * numerics.norm_inf(X.T @ y / N)
    if not mu > 0:
        raise MuNotPositive("generated data give mu = 0")
    return LogisticProblem(samples=X, labels=y, mu=mu, ground_truth=truth)


def _fmt(v):
    return format(float(v), ".17g")


def _row(values):
    return " ".join(_fmt(v) for v in values)


def dumps_problem(problem):
    """Serialize to the flat text format.

    Header ``<kind> N n mu``; then N rows of the data matrix; then one row
    holding b (or the labels); then, if present, one row with the ground
    truth. Numbers carry 17 significant digits so they round-trip exactly.
    """
    if problem.kind == "lasso":
        data, target = problem.A, problem.b
    else:
        data, target = problem.samples, problem.labels
    N, n = data.shape
    lines = [f"{problem.kind} {N} {n} {_fmt(problem.mu)}"]
    lines.extend(_row(r) for r in data)
    lines.append(_row(target))
    truth = problem.ground_truth
    if truth is not None:
        lines.append(_row(truth))
    return "\n".join(lines) + "\n"


def loads_problem(text):
    lines = [ln for ln in text.splitlines() if ln.strip()]
    if not lines:
        raise ValueError("empty problem file")
    head = lines[0].split()
    if len(head) != 4 or head[0] not in ("lasso", "logistic"):
        raise ValueError(f"bad header line {lines[0]!r}")
    kind, N, n, mu = head[0], int(head[1]), int(head[2]), float(head[3])
    if len(lines) not in (N + 2, N + 3):
        raise ValueError(f"expected {N + 2} or {N + 3} lines, found {len(lines)}")
    data = np.array([[float(v) for v in ln.split()] for ln in lines[1:N + 1]]).reshape(N, n)
    target = np.array([float(v) for v in lines[N + 1].split()])
    truth = None
    if len(lines) == N + 3:
        truth = np.array([float(v) for v in lines[N + 2].split()])
    if kind == "lasso":
        return LassoProblem(A=data, b=target, mu=mu, ground_truth=truth)
    return LogisticProblem(samples=data, labels=target, mu=mu, ground_truth=truth)


def write_problem(problem, target):
    text = dumps_problem(problem)
    if isinstance(target, (str, os.PathLike)):
        with open(target, "w") as fh:
            fh.write(text)
    else:
        target.write(text)


def read_problem(source):
    if isinstance(source, (str, os.PathLike)):
        with open(source) as fh:
            return loads_problem(fh.read())
    if isinstance(source, io.TextIOBase) or hasattr(source, "read"):
        return loads_problem(source.read())
    raise TypeError(f"cannot read a problem from {type(source).__name__}")

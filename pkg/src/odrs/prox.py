"""Proximal operators used by the splitting updates.

Every operator returns the minimizer of ``f(y) + ||y - anchor||^2 / (2 lam)``
for its particular ``f``. The l1 and least-squares cases are closed form; the
logistic case runs a damped Newton method on the (strongly convex) subproblem.
"""

from dataclasses import dataclass

import numpy as np
from scipy.special import expit

from . import numerics
from .exceptions import (
    DimensionMismatch,
    InnerSolveFailed,
    NegativeThreshold,
    NonPositiveLambda,
)

__all__ = [
    "ProxOutcome",
    "prox_l1",
    "ls_batch_factor",
    "prox_ls_batch",
    "prox_ls_rank1",
    "linearized_prox",
    "as_signed_labels",
    "log1pexp_neg",
    "logistic_value_grad",
    "prox_logistic",
]


@dataclass(frozen=True)
class ProxOutcome:
    """Result of a prox evaluation that may need an inner solve."""

    point: np.ndarray
    inner_iterations: int = 0
    inner_residual: float = 0.0


def _check_lambda(lam):
    if not lam > 0:
        raise NonPositiveLambda(f"lambda must be positive, got {lam}")


def prox_l1(v, threshold):
    """Soft-thresholding, the prox of ``threshold * ||.||_1``."""
    if not threshold >= 0:
        raise NegativeThreshold(f"threshold must be >= 0, got {threshold}")
    v = np.asarray(v, dtype=float)
    return np.sign(v) * np.maximum(np.abs(v) - threshold, 0.0)


def ls_batch_factor(A, lam, N=None, G=None):
    """Cholesky factor of ``A^T A + (N / 2 lam) I``.

    Pass a precomputed Gram matrix `G` to skip forming ``A^T A`` again.
    """
    _check_lambda(lam)
    A = numerics.as_matrix(A, "A")
    if N is None:
        N = A.shape[0]
    if G is None:
        G = numerics.gram(A)
    return numerics.cholesky(G + (N / (2.0 * lam)) * np.eye(A.shape[1]))


def prox_ls_batch(A, b, anchor, lam, N=None, factor=None):
    r"""Prox of the averaged least-squares loss.

    Minimizes ``(1/N) ||A z - b||^2 + ||z - anchor||^2 / (2 lam)``, whose
    solution is

    .. math:: (A^T A + \tfrac{N}{2\lambda} I)^{-1}
              (A^T b + \tfrac{N}{2\lambda}\,\mathrm{anchor}).

    Parameters
    ----------
    A : (N, n) array_like
    b : (N,) array_like
    anchor : (n,) array_like
    lam : float
        Proximal step, must be positive.
    N : int, optional
        Averaging count; defaults to the number of rows of `A`.
    factor : tuple, optional
        Output of :func:`ls_batch_factor` for the same `A`, `lam`, `N`.
    """
    _check_lambda(lam)
    A = np.asarray(A, dtype=float)
    b = np.asarray(b, dtype=float)
    anchor = np.asarray(anchor, dtype=float)
    if A.ndim != 2 or A.shape[0] != b.shape[0] or A.shape[1] != anchor.shape[0]:
        raise DimensionMismatch(
            f"A {A.shape}, b {b.shape}, anchor {anchor.shape} are inconsistent")
    if N is None:
        N = A.shape[0]
    if factor is None:
        factor = ls_batch_factor(A, lam, N)
    c = N / (2.0 * lam)
    return numerics.solve_spd(None, A.T @ b + c * anchor, factor=factor)


def prox_ls_rank1(a, b, anchor, lam):
    """Prox of the single-sample loss ``(a^T z - b)^2``.

    Solves ``(a a^T + I / (2 lam)) z = a b + anchor / (2 lam)`` in O(n).
    """
    _check_lambda(lam)
    c = 1.0 / (2.0 * lam)
    a = np.asarray(a, dtype=float)
    return numerics.rank_one_solve(a, c, a * float(b) + c * np.asarray(anchor, dtype=float))


def linearized_prox(grad_at_z, anchor, lam):
    """Minimizer of ``grad^T (z - z_t) + ||z - anchor||^2 / (2 lam)``."""
    _check_lambda(lam)
    return np.asarray(anchor, dtype=float) - lam * np.asarray(grad_at_z, dtype=float)


def as_signed_labels(labels):
    """Map labels in {0, 1} or {-1, +1} to {-1, +1}."""
    y = np.asarray(labels, dtype=float).ravel()
    if not np.all(np.isin(y, (-1.0, 0.0, 1.0))):
        raise ValueError("labels must lie in {0, 1} or {-1, +1}")
    return np.where(y == 0.0, -1.0, y)


def log1pexp_neg(m):
    """``log(1 + exp(-m))`` without overflow, split at ``m = 0``."""
    m = np.asarray(m, dtype=float)
    out = np.empty_like(m)
    pos = m >= 0
    out[pos] = np.log1p(np.exp(-m[pos]))
    neg = ~pos
    out[neg] = -m[neg] + np.log1p(np.exp(m[neg]))
    return out


def logistic_value_grad(samples, labels, w):
    """Average logistic loss and its gradient.

    Parameters
    ----------
    samples : (T, n) array_like
    labels : (T,) array_like
        Signed labels in {-1, +1}.
    w : (n,) array_like

    Returns
    -------
    value : float
        ``(1/T) sum_i log(1 + exp(-y_i w^T x_i))``.
    grad : (n,) ndarray
    """
    X = np.asarray(samples, dtype=float)
    y = np.asarray(labels, dtype=float)
    w = np.asarray(w, dtype=float)
    if X.ndim != 2 or X.shape[0] != y.shape[0] or X.shape[1] != w.shape[0]:
        raise DimensionMismatch(
            f"samples {X.shape}, labels {y.shape}, w {w.shape} are inconsistent")
    T = X.shape[0]
    if T == 0:
        return 0.0, np.zeros_like(w)
    margins = y * (X @ w)
    value = float(np.sum(log1pexp_neg(margins)) / T)
    # sigma(-m) = expit(-m) saturates cleanly for large |m|
    coef = -y * expit(-margins)
    return value, X.T @ coef / T


def prox_logistic(samples, labels, anchor, lam, tol=1e-10, max_inner=50):
    """Prox of the average logistic loss by damped Newton.

    The subproblem ``L(z) + ||z - anchor||^2 / (2 lam)`` is (1/lam)-strongly
    convex. Newton steps are halved until the subproblem value satisfies an
    Armijo decrease. Close to the solution, where value differences drown in
    roundoff, a step that halves the gradient norm is accepted instead, as
    long as the value does not rise beyond roundoff.

    Returns
    -------
    ProxOutcome
        `inner_residual` is the final gradient norm of the subproblem.

    Raises
    ------
    InnerSolveFailed
        If `max_inner` Newton steps do not bring the gradient norm below `tol`.
    """
    _check_lambda(lam)
    if not tol > 0:
        raise ValueError(f"tol must be positive, got {tol}")
    X = np.asarray(samples, dtype=float)
    y = np.asarray(labels, dtype=float)
    anchor = np.asarray(anchor, dtype=float)
    if X.ndim != 2 or X.shape[1] != anchor.shape[0] or X.shape[0] != y.shape[0]:
        raise DimensionMismatch(
            f"samples {X.shape}, labels {y.shape}, anchor {anchor.shape} are inconsistent")
    T, n = X.shape
    inv_lam = 1.0 / lam
    roundoff = 64 * np.finfo(float).eps

    def value_grad(z):
        val, g = logistic_value_grad(X, y, z)
        d = z - anchor
        return val + 0.5 * inv_lam * (d @ d), g + inv_lam * d

    z = anchor.copy()
    phi, grad = value_grad(z)
    gnorm = numerics.norm2(grad)
    it = 0
    while gnorm > tol:
        if it >= max_inner:
            raise InnerSolveFailed(
                f"logistic prox: gradient norm {gnorm:.3e} > tol {tol:.1e} "
                f"after {max_inner} Newton steps")
        s = expit(y * (X @ z))
        H = (X.T * (s * (1.0 - s))) @ X / max(T, 1)
        H[np.diag_indices(n)] += inv_lam
        direction = -numerics.solve_spd(H, grad)
        slope = grad @ direction
        step = 1.0
        while True:
            z_new = z + step * direction
            phi_new, grad_new = value_grad(z_new)
            gnorm_new = numerics.norm2(grad_new)
            if phi_new <= phi + 1e-4 * step * slope:
                break
            # near the solution value changes are pure roundoff; rely on the gradient
            if gnorm_new <= 0.5 * gnorm and phi_new <= phi + roundoff * max(1.0, abs(phi)):
                break
            step *= 0.5
            if step < 1e-12:
                break
        z, phi, grad, gnorm = z_new, phi_new, grad_new, gnorm_new
        it += 1
    return ProxOutcome(point=z, inner_iterations=it, inner_residual=gnorm)

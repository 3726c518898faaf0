"""Dense linear-algebra kernel.

Vectors and matrices are plain float64 numpy arrays. The helpers here add the
dimension checks and the two structured solves the splitting updates need:
a Cholesky solve for ``A^T A + c I`` and a Sherman-Morrison solve for
``a a^T + c I``.
"""

import numpy as np
import scipy.linalg

from .exceptions import DimensionMismatch, NonPositiveScale, NonSPD

__all__ = [
    "as_vector",
    "as_matrix",
    "matvec",
    "gram",
    "cholesky",
    "solve_spd",
    "rank_one_solve",
    "norm1",
    "norm2",
    "norm_inf",
    "make_rng",
    "gauss_sample",
]


def as_vector(v, name="vector"):
    """Return ``v`` as a finite 1-d float64 array."""
    arr = np.asarray(v, dtype=float)
    if arr.ndim == 0:
        arr = arr.reshape(1)
    if arr.ndim != 1:
        raise DimensionMismatch(f"{name} must be 1-d, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise ValueError(f"{name} has non-finite entries")
    return arr


def as_matrix(M, name="matrix"):
    """Return ``M`` as a finite 2-d float64 array."""
    arr = np.asarray(M, dtype=float)
    if arr.ndim != 2:
        raise DimensionMismatch(f"{name} must be 2-d, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise ValueError(f"{name} has non-finite entries")
    return arr


def matvec(M, v):
    M = as_matrix(M)
    v = as_vector(v)
    if M.shape[1] != v.shape[0]:
        raise DimensionMismatch(
            f"cannot multiply {M.shape[0]}x{M.shape[1]} matrix by length-{v.shape[0]} vector")
    return M @ v


def gram(A):
    """Return ``A^T A``, exactly symmetric.

    The upper triangle is mirrored onto the lower one so entry ``[i, j]`` and
    ``[j, i]`` are the same float.
    """
    A = as_matrix(A)
    if A.size == 0:
        raise DimensionMismatch("gram of an empty matrix")
    G = A.T @ A
    upper = np.triu(G)
    return upper + np.triu(upper, 1).T


def cholesky(M):
    """Lower Cholesky factor of an SPD matrix, raising `NonSPD` on failure."""
    M = as_matrix(M)
    if M.shape[0] != M.shape[1]:
        raise DimensionMismatch(f"matrix must be square, got {M.shape}")
    try:
        return scipy.linalg.cho_factor(M, lower=True, check_finite=False)
    except np.linalg.LinAlgError as exc:
        raise NonSPD(str(exc)) from exc


def solve_spd(M, rhs, factor=None):
    """Solve ``M y = rhs`` for symmetric positive definite ``M``.

    Parameters
    ----------
    M : (n, n) array_like
        SPD system matrix. Ignored when `factor` is given.
    rhs : (n,) array_like
        Right-hand side.
    factor : tuple, optional
        A factorization previously returned by :func:`cholesky`; lets callers
        reuse one factorization across many solves.

    Returns
    -------
    y : (n,) ndarray
    """
    rhs = as_vector(rhs, "rhs")
    if factor is None:
        factor = cholesky(M)
    n = factor[0].shape[0]
    if rhs.shape[0] != n:
        raise DimensionMismatch(f"rhs has length {rhs.shape[0]}, system has size {n}")
    return scipy.linalg.cho_solve(factor, rhs, check_finite=False)


def rank_one_solve(a, c, v):
    """Return ``(a a^T + c I)^{-1} v`` via Sherman-Morrison."""
    if not c > 0:
        raise NonPositiveScale(f"c must be positive, got {c}")
    a = as_vector(a, "a")
    v = as_vector(v, "v")
    if a.shape != v.shape:
        raise DimensionMismatch(f"a has length {a.shape[0]}, v has length {v.shape[0]}")
    return (v - (a @ v) / (c + a @ a) * a) / c


def norm2(v):
    return float(np.linalg.norm(np.asarray(v, dtype=float).ravel(), 2))


def norm1(v):
    return float(np.sum(np.abs(v)))


def norm_inf(v):
    v = np.asarray(v, dtype=float)
    return float(np.max(np.abs(v))) if v.size else 0.0


def make_rng(seed):
    """Seeded generator; identical seeds give identical streams."""
    return np.random.Generator(np.random.PCG64(seed))


def gauss_sample(rng, length):
    """Draw ``length`` i.i.d. standard normals (ziggurat) from `rng`."""
    if length < 1:
        raise ValueError(f"length must be >= 1, got {length}")
    return rng.standard_normal(int(length))

"""Least-squares solve, Gram/exactness reporting, condition numbers, moments."""

from dataclasses import dataclass

import numpy as np
from scipy.linalg import solve_triangular


@dataclass(frozen=True)
class GramReport:
    """G = A^T A with its entrywise deviation from the identity.

    ``exactness_frontier[p, q]`` is True where |G_pq - delta_pq| < tol; the
    False entries are the internal aliasing errors of the underlying rule.
    """

    gram: np.ndarray
    max_offdiag_error: float
    exactness_frontier: np.ndarray
    tol: float

    def passed(self):
        return bool(self.exactness_frontier.all())

    def to_csv(self, basis=None):
        n = self.gram.shape[0]
        lines = ["p,q,value"]
        for p in range(n):
            for q in range(n):
                lines.append(f"{p},{q},{self.gram[p, q]:.17g}")
        return "\n".join(lines) + "\n"


def solve_least_squares(A, b):
    """Minimize ||A x - b|| by Householder QR; returns (x, residual_norm)."""
    entries = A.entries if hasattr(A, "entries") else np.asarray(A, float)
    rhs = np.asarray(b, float)
    m, n = entries.shape
    if rhs.shape != (m,):
        raise ValueError(f"b must have length {m}")
    Q, R = np.linalg.qr(entries)
    rdiag = np.abs(np.diag(R))
    if rdiag.min() <= 1e-13 * max(1.0, rdiag.max()):
        raise ValueError("rank-deficient design matrix")
    x = solve_triangular(R, Q.T @ rhs)
    residual = float(np.linalg.norm(entries @ x - rhs))
    return x, residual


def gram_report(A, tol=1e-10):
    """Gram matrix and exactness frontier of a design matrix."""
    entries = A.entries if hasattr(A, "entries") else np.asarray(A, float)
    gram = entries.T @ entries
    gram = 0.5 * (gram + gram.T)
    n = gram.shape[0]
    deviation = np.abs(gram - np.eye(n))
    off = deviation.copy()
    np.fill_diagonal(off, 0.0)
    return GramReport(gram, float(off.max()), deviation < tol, tol)


def condition_number(A):
    """2-norm condition number of A (ratio of extreme singular values).

    Note this is kappa(A); the condition number of the Gram matrix A^T A is
    its square.
    """
    entries = A.entries if hasattr(A, "entries") else np.asarray(A, float)
    svals = np.linalg.svd(entries, compute_uv=False)
    if svals[-1] == 0.0:
        return np.inf
    return float(svals[0] / svals[-1])


def moments(coefficients, basis):
    """Mean and variance from orthonormal-basis coefficients.

    mean = coefficient of the zero index; variance = sum of the squares of
    the remaining coefficients (Parseval).
    """
    x = np.asarray(coefficients, float)
    zero = np.flatnonzero(basis.total_orders() == 0)
    if zero.size != 1:
        raise ValueError("basis must include the zero multi-index exactly once")
    j0 = int(zero[0])
    mean = float(x[j0])
    variance = float(np.sum(x ** 2) - x[j0] ** 2)
    return mean, variance

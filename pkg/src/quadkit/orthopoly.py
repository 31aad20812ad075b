"""Orthonormal polynomial families, multi-index sets, and design matrices.

All densities follow the unit-mass convention: the measure integrates to 1,
so the degree-0 orthonormal polynomial is identically 1 and quadrature
weights sum to 1.  Supported families:

* ``legendre``   -- uniform density 1/2 on [-1, 1]
* ``hermite``    -- standard normal density on R
* ``chebyshev1`` -- arcsine density 1/(pi sqrt(1-x^2)) on [-1, 1]
* ``jacobi``     -- density proportional to (1-x)^a (1+x)^b on [-1, 1]
* ``custom``     -- coefficients supplied externally (e.g. from the
  discretized Stieltjes procedure in :mod:`quadkit.quadrature`)
"""

import math
from dataclasses import dataclass, field

import numpy as np

SYMMETRIC_FAMILIES = ("legendre", "hermite", "chebyshev1")
BOUNDED_FAMILIES = ("legendre", "chebyshev1", "jacobi", "custom")

# Guard against runaway tensor constructions; overridden by QUADKIT_CAP.
DEFAULT_SIZE_CAP = 10**7


@dataclass(frozen=True)
class RecurrenceTable:
    """Three-term recurrence coefficients of an orthonormal family.

    ``alpha[k]`` and ``beta[k]`` define the monic recurrence
    ``p_{k+1}(x) = (x - alpha[k]) p_k(x) - beta[k] p_{k-1}(x)`` with
    ``beta[0]`` the total mass of the density (1 under the unit-mass
    convention).
    """

    family: str
    alpha: np.ndarray
    beta: np.ndarray
    parameters: dict = field(default_factory=dict)

    def __post_init__(self):
        object.__setattr__(self, "alpha", np.atleast_1d(np.asarray(self.alpha, float)))
        object.__setattr__(self, "beta", np.atleast_1d(np.asarray(self.beta, float)))
        if self.alpha.shape != self.beta.shape:
            raise ValueError("alpha and beta must have equal length")
        if np.any(self.beta <= 0):
            k = int(np.argmax(self.beta <= 0))
            raise ValueError(f"beta[{k}] <= 0: measure is not positive definite")

    def __len__(self):
        return self.alpha.size

    @property
    def bounded_support(self):
        return self.family in BOUNDED_FAMILIES

    def support(self):
        """(lo, hi) for bounded families, (-inf, inf) for hermite."""
        if self.family == "hermite":
            return (-np.inf, np.inf)
        return (-1.0, 1.0)

    def to_json(self):
        return {
            "family": self.family,
            "alpha": self.alpha.tolist(),
            "beta": self.beta.tolist(),
            "parameters": dict(self.parameters),
        }

    @classmethod
    def from_json(cls, obj):
        return cls(obj["family"], np.asarray(obj["alpha"]), np.asarray(obj["beta"]),
                   dict(obj.get("parameters", {})))


def recurrence_coefficients(family, count, a=None, b=None):
    """Recurrence coefficients for the requested orthonormal family.

    Parameters
    ----------
    family : str
        One of legendre, hermite, chebyshev1, jacobi.
    count : int
        Number of coefficient pairs K; supports degrees 0..K-1.
    a, b : float, optional
        Jacobi exponents, both > -1.  Required iff family == "jacobi".

    Returns
    -------
    RecurrenceTable
    """
    if count < 1:
        raise ValueError("count must be >= 1")
    K = int(count)
    k = np.arange(K, dtype=float)
    if family == "legendre":
        beta = np.empty(K)
        beta[0] = 1.0
        if K > 1:
            kk = k[1:]
            beta[1:] = kk * kk / (4.0 * kk * kk - 1.0)
        return RecurrenceTable("legendre", np.zeros(K), beta)
    if family == "hermite":
        beta = np.maximum(k, 1.0)
        beta[0] = 1.0
        beta[1:] = k[1:]
        return RecurrenceTable("hermite", np.zeros(K), beta)
    if family == "chebyshev1":
        beta = np.full(K, 0.25)
        beta[0] = 1.0
        if K > 1:
            beta[1] = 0.5
        return RecurrenceTable("chebyshev1", np.zeros(K), beta)
    if family == "jacobi":
        if a is None or b is None:
            raise ValueError("jacobi family requires parameters a and b")
        if a <= -1 or b <= -1:
            raise ValueError("jacobi parameters must satisfy a, b > -1")
        alpha = np.zeros(K)
        beta = np.ones(K)
        apb = a + b
        alpha[0] = (b - a) / (apb + 2.0)
        beta[0] = 1.0  # unit-mass convention
        if K > 1:
            beta[1] = 4.0 * (a + 1) * (b + 1) / ((apb + 2.0) ** 2 * (apb + 3.0))
        for i in range(2, K):
            den = 2.0 * i + apb
            alpha[i - 1] = (b * b - a * a) / ((den - 2.0) * den)
            beta[i] = (4.0 * i * (i + a) * (i + b) * (i + apb)
                       / (den ** 2 * (den + 1.0) * (den - 1.0)))
        if K > 1:
            den = 2.0 * K + apb
            alpha[K - 1] = (b * b - a * a) / ((den - 2.0) * den)
        return RecurrenceTable("jacobi", alpha, beta, {"a": float(a), "b": float(b)})
    raise ValueError(f"unsupported family: {family!r}")


def evaluate_orthonormal(table, max_degree, points):
    """Evaluate orthonormal polynomials psi_0..psi_max_degree at points.

    Uses the stabilized three-term recurrence
    ``sqrt(beta[k+1]) psi_{k+1} = (x - alpha[k]) psi_k - sqrt(beta[k]) psi_{k-1}``
    with ``psi_0 = 1/sqrt(beta[0])``.

    Returns an ``len(points) x (max_degree+1)`` matrix whose column j holds
    psi_j.
    """
    if max_degree < 0:
        raise ValueError("max_degree must be >= 0")
    if max_degree >= len(table):
        raise ValueError(
            f"degree {max_degree} exceeds available recurrence coefficients ({len(table)})")
    x = np.atleast_1d(np.asarray(points, float))
    out = np.empty((x.size, max_degree + 1))
    out[:, 0] = 1.0 / math.sqrt(table.beta[0])
    if max_degree >= 1:
        out[:, 1] = (x - table.alpha[0]) * out[:, 0] / math.sqrt(table.beta[1])
    for k in range(1, max_degree):
        out[:, k + 1] = ((x - table.alpha[k]) * out[:, k]
                         - math.sqrt(table.beta[k]) * out[:, k - 1]
                         ) / math.sqrt(table.beta[k + 1])
    return out


@dataclass(frozen=True)
class MultiIndexSet:
    """Ordered set of d-dimensional polynomial degree tuples.

    Ordering is graded lexicographic (ascending total degree, then
    lexicographic), which fixes the column order of every design matrix.
    """

    kind: str
    d: int
    order: int
    indices: np.ndarray
    q: float = None

    def __post_init__(self):
        object.__setattr__(self, "indices",
                           np.ascontiguousarray(np.asarray(self.indices, dtype=np.int64)))

    def __len__(self):
        return self.indices.shape[0]

    @property
    def max_degrees(self):
        return self.indices.max(axis=0)

    def total_orders(self):
        return self.indices.sum(axis=1)

    def to_json(self):
        obj = {"kind": self.kind, "d": self.d, "order": self.order,
               "indices": self.indices.tolist()}
        if self.q is not None:
            obj["q"] = self.q
        return obj

    @classmethod
    def from_json(cls, obj):
        return cls(obj["kind"], obj["d"], obj["order"],
                   np.asarray(obj["indices"]), obj.get("q"))


def _graded_lex_sort(rows):
    keys = tuple(rows[:, dim] for dim in reversed(range(rows.shape[1])))
    order = np.lexsort(keys + (rows.sum(axis=1),))
    return rows[order]


def _tensor_box(d, k, cap):
    if (k + 1) ** d > cap:
        raise ValueError(f"enumeration box of size {(k+1)**d} exceeds cap {cap}")
    ranges = [np.arange(k + 1, dtype=np.int64)] * d
    mesh = np.meshgrid(*ranges, indexing="ij")
    return np.column_stack([g.ravel() for g in mesh])


def multi_index_set(kind, d, k, q=None, cap=DEFAULT_SIZE_CAP):
    """Build a multi-index set of the requested kind.

    kinds: ``total_order`` (sum of degrees <= k), ``tensor_order``
    (max degree <= k), ``hyperbolic_cross`` (prod(p_i + 1) <= k + 1) and
    ``hyperbolic_q`` ((sum p_i^q)^(1/q) <= k for q in (0, 1]).
    """
    if d < 1:
        raise ValueError("d must be >= 1")
    if k < 0:
        raise ValueError("k must be >= 0")
    if kind == "hyperbolic_q":
        if q is None or not (0.0 < q <= 1.0):
            raise ValueError("hyperbolic_q requires q in (0, 1]")
    elif q is not None:
        raise ValueError(f"q is only meaningful for hyperbolic_q, not {kind!r}")

    if kind == "total_order":
        if total_order_cardinality(d, k) > cap:
            raise ValueError(f"total_order set of size {total_order_cardinality(d, k)} "
                             f"exceeds cap {cap}")
        out = []

        def rec(prefix, remaining):
            if len(prefix) == d - 1:
                for last in range(remaining + 1):
                    out.append(prefix + (last,))
                return
            for v in range(remaining + 1):
                rec(prefix + (v,), remaining - v)

        rec((), k)
        rows = np.asarray(out, dtype=np.int64).reshape(-1, d)
    elif kind == "tensor_order":
        rows = _tensor_box(d, k, cap)
    elif kind == "hyperbolic_cross":
        box = _tensor_box(d, k, cap)
        rows = box[np.prod(box + 1, axis=1) <= k + 1]
    elif kind == "hyperbolic_q":
        box = _tensor_box(d, k, cap)
        rows = box[np.sum(box.astype(float) ** q, axis=1) ** (1.0 / q) <= k + 1e-12]
    else:
        raise ValueError(f"unsupported multi-index kind: {kind!r}")

    return MultiIndexSet(kind, d, k, _graded_lex_sort(rows), q)


def total_order_cardinality(d, k):
    return math.comb(d + k, d)


@dataclass(frozen=True)
class DesignMatrix:
    """Weighted Vandermonde-type matrix over a point set.

    ``entries[i, j] = Psi_j(points[i]) * sqrt(weights[i])`` with Psi_j the
    orthonormal product polynomial for the j-th multi-index.  Weights are
    stored normalized to unit sum; ``weights_renormalized`` records whether
    the caller's weights needed rescaling.
    """

    entries: np.ndarray
    points: np.ndarray
    weights: np.ndarray
    basis: MultiIndexSet
    recurrences: tuple
    weights_renormalized: bool = False

    @property
    def shape(self):
        return self.entries.shape

    def rows_weight_scaled(self):
        """Rows scaled by the full quadrature weight: row i is w_i Psi(x_i).

        These are the rows of the discrete quadrature operator; volume
        criteria on them reproduce Gauss-type nodes, unlike criteria on the
        sqrt-weighted least-squares rows.
        """
        return self.entries * np.sqrt(self.weights)[:, None]

    def to_json(self):
        return {
            "points": self.points.tolist(),
            "weights": self.weights.tolist(),
            "basis": self.basis.to_json(),
            "recurrences": [t.to_json() for t in self.recurrences],
            "weights_renormalized": self.weights_renormalized,
        }

    @classmethod
    def from_json(cls, obj):
        basis = MultiIndexSet.from_json(obj["basis"])
        recurrences = tuple(RecurrenceTable.from_json(t) for t in obj["recurrences"])
        return design_matrix(basis, recurrences,
                             np.asarray(obj["points"]), np.asarray(obj["weights"]))


def evaluate_basis(basis, recurrences, points):
    """Unweighted basis evaluations: (m x n) matrix of Psi_j(points[i])."""
    pts = np.atleast_2d(np.asarray(points, float))
    if pts.shape[1] != basis.d:
        if pts.shape[0] == basis.d and pts.shape[1] != basis.d:
            pts = pts.T
        else:
            raise ValueError(f"points have dimension {pts.shape[1]}, basis needs {basis.d}")
    if len(recurrences) == 1 and basis.d > 1:
        recurrences = tuple(recurrences) * basis.d
    if len(recurrences) != basis.d:
        raise ValueError("need one recurrence table per dimension")
    per_dim = []
    for dim in range(basis.d):
        deg = int(basis.indices[:, dim].max())
        per_dim.append(evaluate_orthonormal(recurrences[dim], deg, pts[:, dim]))
    out = np.ones((pts.shape[0], len(basis)))
    for j, idx in enumerate(basis.indices):
        for dim in range(basis.d):
            out[:, j] *= per_dim[dim][:, idx[dim]]
    return out


def design_matrix(basis, recurrences, points, weights):
    """Assemble the weighted design matrix A over the given points.

    Weights must be positive; they are renormalized to unit sum if needed
    (recorded in the result).
    """
    pts = np.atleast_2d(np.asarray(points, float))
    if pts.shape[1] != basis.d and pts.shape[0] == basis.d:
        pts = pts.T
    w = np.asarray(weights, float)
    if w.ndim != 1 or w.size != pts.shape[0]:
        raise ValueError("weights must be one per point")
    if np.any(w <= 0):
        raise ValueError("weights must be positive")
    total = w.sum()
    renorm = bool(abs(total - 1.0) > 1e-14)
    if renorm:
        w = w / total
    if not isinstance(recurrences, (tuple, list)):
        recurrences = (recurrences,)
    recurrences = tuple(recurrences)
    if len(recurrences) == 1 and basis.d > 1:
        recurrences = recurrences * basis.d
    psi = evaluate_basis(basis, recurrences, pts)
    entries = psi * np.sqrt(w)[:, None]
    return DesignMatrix(entries, pts, w, basis, recurrences, renorm)

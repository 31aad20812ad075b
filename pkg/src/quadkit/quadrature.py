"""Univariate quadrature construction, tensor/sparse grids, projections.

Rules store d-dimensional points with weights summing to 1.  Signed
combination weights can survive sparse-grid merging; such rules carry
``has_negative_weights`` and are exempt from the positivity invariant.
"""

import math
import os
from dataclasses import dataclass, field
from itertools import product

import numpy as np
from scipy.linalg import eigh_tridiagonal

from .orthopoly import RecurrenceTable, evaluate_basis

MERGE_DECIMALS = 12          # componentwise coincidence tolerance 1e-12
DROP_TOL = 1e-14             # merged weights below this are dropped
MASS_TOL = 1e-12


def size_cap():
    """Tensor-size safety cap; override with the QUADKIT_CAP env variable."""
    return int(float(os.environ.get("QUADKIT_CAP", 1e7)))


@dataclass(frozen=True)
class QuadratureRule:
    points: np.ndarray          # m x d
    weights: np.ndarray         # m
    provenance: str
    has_negative_weights: bool = False
    metadata: dict = field(default_factory=dict)

    def __post_init__(self):
        pts = np.atleast_2d(np.asarray(self.points, float))
        if pts.shape[0] == 1 and pts.shape[1] > 1 and np.asarray(self.weights).size == pts.shape[1]:
            pts = pts.T
        w = np.asarray(self.weights, float)
        object.__setattr__(self, "points", pts)
        object.__setattr__(self, "weights", w)
        if w.size != pts.shape[0]:
            raise ValueError("one weight per point required")
        if not self.has_negative_weights and np.any(w <= 0):
            raise ValueError("weights must be positive")
        if abs(w.sum() - 1.0) > MASS_TOL:
            raise ValueError(f"weights sum to {w.sum():.16g}, expected 1")

    @property
    def d(self):
        return self.points.shape[1]

    @property
    def m(self):
        return self.points.shape[0]

    def to_csv(self):
        lines = []
        for i in range(self.m):
            vals = [*self.points[i], self.weights[i]]
            lines.append(",".join(f"{v:.17g}" for v in vals))
        return "\n".join(lines) + "\n"

    def to_json(self):
        return {
            "points": self.points.tolist(),
            "weights": self.weights.tolist(),
            "provenance": self.provenance,
            "has_negative_weights": self.has_negative_weights,
            "metadata": dict(self.metadata),
        }

    @classmethod
    def from_json(cls, obj):
        return cls(np.asarray(obj["points"]), np.asarray(obj["weights"]),
                   obj["provenance"], obj.get("has_negative_weights", False),
                   dict(obj.get("metadata", {})))


@dataclass(frozen=True)
class SparseGridSpec:
    d: int
    level: int
    growth: str = "linear"      # linear | exponential
    merged: bool = True

    def __post_init__(self):
        if self.level < 0:
            raise ValueError("level must be >= 0")
        if self.growth not in ("linear", "exponential"):
            raise ValueError(f"unknown growth rule: {self.growth!r}")


def golub_welsch(table, m):
    """Gauss rule from the symmetric tridiagonal matrix of recurrence
    coefficients: points are its eigenvalues, weights are beta[0] times the
    squared first components of the normalized eigenvectors."""
    if m < 1:
        raise ValueError("m must be >= 1")
    if m > len(table):
        raise ValueError(f"table holds {len(table)} coefficient pairs, need {m}")
    diag = table.alpha[:m]
    off = np.sqrt(table.beta[1:m])
    try:
        if m == 1:
            points = diag.copy()
            vecs = np.ones((1, 1))
        else:
            points, vecs = eigh_tridiagonal(diag, off)
    except np.linalg.LinAlgError as exc:  # pragma: no cover - LAPACK iteration cap
        raise RuntimeError(f"tridiagonal eigensolve failed to converge: {exc}") from exc
    weights = table.beta[0] * vecs[0, :] ** 2
    order = np.argsort(points)
    points = points[order]
    weights = weights[order]
    weights = weights / weights.sum()
    return QuadratureRule(points[:, None], weights, "gauss",
                          metadata={"family": table.family, "m": int(m)})


def gauss_lobatto(table, m):
    """Gauss-Lobatto rule: the support endpoints -1, +1 are prescribed nodes.

    The last alpha and beta entries of the Jacobi matrix are adjusted by two
    tridiagonal solves so that +-1 become eigenvalues; degree of exactness is
    2m - 3.
    """
    if m < 2:
        raise ValueError("gauss_lobatto requires m >= 2")
    if not table.bounded_support:
        raise ValueError(f"{table.family} density has unbounded support")
    if m > len(table):
        raise ValueError(f"table holds {len(table)} coefficient pairs, need {m}")
    lo, hi = -1.0, 1.0
    alpha = table.alpha[:m].copy()
    beta = table.beta[:m].copy()
    if m == 2:
        g_lo = g_hi = 1.0
        # J_1 is the scalar alpha[0]
        g_lo = 1.0 / (alpha[0] - lo)
        g_hi = 1.0 / (alpha[0] - hi)
    else:
        J = (np.diag(alpha[:m - 1])
             + np.diag(np.sqrt(beta[1:m - 1]), 1)
             + np.diag(np.sqrt(beta[1:m - 1]), -1))
        e_last = np.zeros(m - 1)
        e_last[-1] = 1.0
        g_lo = np.linalg.solve(J - lo * np.eye(m - 1), e_last)[-1]
        g_hi = np.linalg.solve(J - hi * np.eye(m - 1), e_last)[-1]
    coeffs = np.linalg.solve(np.array([[1.0, -g_lo], [1.0, -g_hi]]),
                             np.array([lo, hi]))
    alpha[m - 1] = coeffs[0]
    beta[m - 1] = coeffs[1]
    if beta[m - 1] <= 0:
        raise RuntimeError("endpoint modification produced nonpositive beta")
    modified = RecurrenceTable(table.family, alpha, beta, dict(table.parameters))
    rule = golub_welsch(modified, m)
    pts = rule.points.copy()
    pts[0, 0], pts[-1, 0] = lo, hi  # exact by construction
    return QuadratureRule(pts, rule.weights, "lobatto",
                          metadata={"family": table.family, "m": int(m)})


def clenshaw_curtis(m):
    """Clenshaw-Curtis rule for the uniform density on [-1, 1].

    Nodes are cos(pi j / (m-1)); weights come from the closed cosine-sum
    formula and are normalized to total mass 1.
    """
    if m < 1:
        raise ValueError("m must be >= 1")
    if m == 1:
        return QuadratureRule(np.zeros((1, 1)), np.ones(1), "clenshaw_curtis",
                              metadata={"m": 1})
    n = m - 1
    j = np.arange(m)
    theta = np.pi * j / n
    x = np.cos(theta)
    w = np.zeros(m)
    for i in range(m):
        acc = 0.0
        for k in range(1, n // 2 + 1):
            b = 1.0 if 2 * k == n else 2.0
            acc += b * math.cos(2.0 * k * theta[i]) / (4.0 * k * k - 1.0)
        c = 1.0 if i in (0, n) else 2.0
        w[i] = (c / n) * (1.0 - acc)
    w = w / 2.0  # unit-mass uniform density
    order = np.argsort(x)
    return QuadratureRule(x[order][:, None], w[order], "clenshaw_curtis",
                          metadata={"m": int(m)})


def stieltjes_discretized(density_points, density_values, K):
    """Recurrence coefficients by the discrete Stieltjes recursion.

    ``density_values`` are nonnegative masses attached to the points (for a
    smooth density, quadrature weights times density values on the chosen
    grid).  Total mass is normalized to 1, so beta[0] = 1.
    """
    if K < 1:
        raise ValueError("K must be >= 1")
    t = np.asarray(density_points, float)
    v = np.asarray(density_values, float)
    if t.shape != v.shape or t.ndim != 1:
        raise ValueError("density_points and density_values must be equal-length vectors")
    if np.any(v < 0):
        raise ValueError("density_values must be nonnegative")
    total = v.sum()
    if not np.isfinite(total) or total <= 1e-300:
        raise ValueError("degenerate density: total mass is (near) zero")
    mass = v / total

    alpha = np.zeros(K)
    beta = np.zeros(K)
    beta[0] = 1.0
    p_prev = np.zeros_like(t)
    p_cur = np.ones_like(t)
    norm_prev = 1.0
    for k in range(K):
        norm_cur = np.sum(mass * p_cur ** 2)
        if norm_cur <= 1e-14 * max(1.0, np.max(np.abs(p_cur)) ** 2):
            raise ValueError(
                f"positivity lost at index {k}: discretization cannot support degree {k}")
        alpha[k] = np.sum(mass * t * p_cur ** 2) / norm_cur
        if k > 0:
            beta[k] = norm_cur / norm_prev
            if beta[k] <= 0:
                raise ValueError(f"positivity lost at index {k}")
        p_next = (t - alpha[k]) * p_cur - (beta[k] if k > 0 else 0.0) * p_prev
        p_prev, p_cur = p_cur, p_next
        norm_prev = norm_cur
    return RecurrenceTable("custom", alpha, beta)


def tensor_grid(rules):
    """Cartesian product of univariate rules; weights multiply."""
    rules = list(rules)
    if not rules:
        raise ValueError("need at least one rule")
    for r in rules:
        if r.d != 1:
            raise ValueError("tensor_grid factors must be univariate")
    if len(rules) == 1:
        return rules[0]
    total = math.prod(r.m for r in rules)
    if total > size_cap():
        raise ValueError(f"tensor grid of {total} points exceeds cap {size_cap()}")
    axes_pts = [r.points[:, 0] for r in rules]
    axes_wts = [r.weights for r in rules]
    mesh = np.meshgrid(*axes_pts, indexing="ij")
    pts = np.column_stack([g.ravel() for g in mesh])
    wmesh = np.meshgrid(*axes_wts, indexing="ij")
    wts = np.prod(np.column_stack([g.ravel() for g in wmesh]), axis=1)
    return QuadratureRule(pts, wts, "tensor",
                          metadata={"factor_sizes": [int(r.m) for r in rules]})


def _growth_points(growth, r):
    if growth == "linear":
        return r
    return 1 if r == 1 else 2 ** (r - 1) + 1


def combination_levels(d, level):
    """Index vectors r >= 1 with level+1 <= |r| <= level+d and their signed
    binomial combination coefficients."""
    out = []
    for r in product(range(1, level + d + 1), repeat=d):
        s = sum(r)
        if level + 1 <= s <= level + d:
            c = (-1) ** (level + d - s) * math.comb(d - 1, level + d - s)
            if c != 0:
                out.append((r, c))
    return out

def sparse_grid(spec, tables):
    """Smolyak sparse grid: signed combination of anisotropic tensor grids.

    Growth conventions: linear assigns r points in direction i at level
    component r; exponential assigns 1 point at component 1 and 2**(r-1) + 1
    points for r >= 2.  Coincident points (componentwise within 1e-12) are
    merged by summing weights; merged weights below 1e-14 are dropped.
    """
    if isinstance(tables, RecurrenceTable):
        tables = (tables,)
    tables = tuple(tables)
    if len(tables) == 1 and spec.d > 1:
        tables = tables * spec.d
    if len(tables) != spec.d:
        raise ValueError("need one recurrence table per dimension")

    terms = combination_levels(spec.d, spec.level)
    max_pts = max(_growth_points(spec.growth, r)
                  for term, _ in terms for r in term)
    for dim, table in enumerate(tables):
        if len(table) < max_pts:
            raise ValueError(
                f"dimension {dim}: table holds {len(table)} coefficient pairs, "
                f"level {spec.level} with {spec.growth} growth needs {max_pts}")
    cache = {}

    def univariate(dim, npts):
        key = (dim, npts)
        if key not in cache:
            cache[key] = golub_welsch(tables[dim], npts)
        return cache[key]

    cap = size_cap()
    merged = {}
    for r, coeff in terms:
        sizes = [_growth_points(spec.growth, ri) for ri in r]
        if math.prod(sizes) > cap:
            raise ValueError(f"sparse-grid term {r} with {math.prod(sizes)} points exceeds cap {cap}")
        factors = [univariate(dim, sizes[dim]) for dim in range(spec.d)]
        mesh = np.meshgrid(*[f.points[:, 0] for f in factors], indexing="ij")
        pts = np.column_stack([g.ravel() for g in mesh])
        wmesh = np.meshgrid(*[f.weights for f in factors], indexing="ij")
        wts = coeff * np.prod(np.column_stack([g.ravel() for g in wmesh]), axis=1)
        keys = np.round(pts, MERGE_DECIMALS)
        for key_row, p_row, w_val in zip(map(tuple, keys), pts, wts):
            if key_row in merged:
                merged[key_row][1] += w_val
            else:
                merged[key_row] = [p_row, w_val]

    kept = [(p, w) for p, w in merged.values() if abs(w) > DROP_TOL]
    if not kept:
        raise ValueError("all combination weights cancelled; degenerate sparse grid")
    kept.sort(key=lambda pw: tuple(pw[0]))
    pts = np.array([p for p, _ in kept])
    wts = np.array([w for _, w in kept])
    total = wts.sum()
    if abs(total - 1.0) > MASS_TOL:
        raise RuntimeError(f"combination weights sum to {total:.16g}, expected 1")
    negative = bool(np.any(wts <= 0))
    return QuadratureRule(pts, wts, "sparse", has_negative_weights=negative,
                          metadata={"level": int(spec.level), "growth": spec.growth,
                                    "unique_points": int(len(kept)),
                                    "term_count": len(terms)})


def pseudospectral_coefficients(f_values, rule, basis, recurrences):
    """Discrete projection x_j = sum_i f(z_i) Psi_j(z_i) w_i."""
    f = np.asarray(f_values, float)
    if f.ndim != 1 or f.size != rule.m:
        raise ValueError(f"f_values must have length {rule.m}, got {f.size}")
    psi = evaluate_basis(basis, recurrences, rule.points)
    return psi.T @ (f * rule.weights)

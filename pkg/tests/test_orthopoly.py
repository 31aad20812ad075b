import math

import numpy as np
import pytest

from quadkit import (design_matrix, evaluate_orthonormal, gram_report,
                     golub_welsch, multi_index_set, recurrence_coefficients)
from quadkit.orthopoly import total_order_cardinality
from quadkit.quadrature import clenshaw_curtis


def composite_uniform_discretization(n_points, panel=50):
    """Dense discretization of the uniform density on [-1, 1]: Gauss panels
    tiled over subintervals (machine-exact low-degree moments, O(n) cost)."""
    x0, w0 = np.polynomial.legendre.leggauss(panel)
    panels = n_points // panel
    edges = np.linspace(-1.0, 1.0, panels + 1)
    half = 0.5 * (edges[1] - edges[0])
    mids = 0.5 * (edges[:-1] + edges[1:])
    x = (mids[:, None] + half * x0[None, :]).ravel()
    w = np.tile(w0 * half / 2.0, panels)
    return x, w


def stieltjes_oracle(points, masses, K):
    """Brute-force discrete Stieltjes recursion, independent of the library."""
    t = np.asarray(points, float)
    m = np.asarray(masses, float)
    m = m / m.sum()
    alpha = np.zeros(K)
    beta = np.zeros(K)
    beta[0] = 1.0
    p_prev = np.zeros_like(t)
    p_cur = np.ones_like(t)
    norm_prev = 1.0
    for k in range(K):
        norm_cur = np.sum(m * p_cur ** 2)
        alpha[k] = np.sum(m * t * p_cur ** 2) / norm_cur
        if k > 0:
            beta[k] = norm_cur / norm_prev
        p_next = (t - alpha[k]) * p_cur - (beta[k] if k > 0 else 0.0) * p_prev
        p_prev, p_cur = p_cur, p_next
        norm_prev = norm_cur
    return alpha, beta


class TestRecurrenceCoefficients:
    def test_legendre_alpha_zero(self):
        table = recurrence_coefficients("legendre", 3)
        assert np.all(table.alpha == 0.0)

    def test_legendre_beta_closed_form(self):
        # beta_k = k^2 / (4k^2 - 1) against a 1e4-point Stieltjes oracle
        # (composite Gauss panels: dense like a flat 1e4-point rule, cheap)
        table = recurrence_coefficients("legendre", 3)
        np.testing.assert_allclose(table.beta, [1.0, 1.0 / 3.0, 4.0 / 15.0], rtol=1e-15)
        x, w = composite_uniform_discretization(10_000)
        _, beta = stieltjes_oracle(x, w, 3)
        np.testing.assert_allclose(table.beta, beta, atol=1e-12)

    def test_hermite_beta(self):
        table = recurrence_coefficients("hermite", 4)
        np.testing.assert_allclose(table.beta, [1.0, 1.0, 2.0, 3.0], rtol=1e-15)
        x, w = np.polynomial.hermite_e.hermegauss(80)
        _, beta = stieltjes_oracle(x, w, 4)
        np.testing.assert_allclose(table.beta, beta, atol=1e-10)

    def test_chebyshev_beta(self):
        table = recurrence_coefficients("chebyshev1", 5)
        np.testing.assert_allclose(table.beta, [1.0, 0.5, 0.25, 0.25, 0.25], rtol=1e-15)

    def test_jacobi_matches_stieltjes_oracle(self):
        # discretize the jacobi density by its own Gauss rule: the discrete
        # measure then carries the exact moments
        from scipy.special import roots_jacobi
        a, b = 0.5, 1.5
        table = recurrence_coefficients("jacobi", 6, a=a, b=b)
        x, w = roots_jacobi(200, a, b)
        alpha, beta = stieltjes_oracle(x, w, 6)
        np.testing.assert_allclose(table.alpha, alpha, atol=1e-12)
        np.testing.assert_allclose(table.beta, beta, atol=1e-12)

    def test_errors(self):
        with pytest.raises(ValueError):
            recurrence_coefficients("legendre", 0)
        with pytest.raises(ValueError):
            recurrence_coefficients("laguerre", 3)
        with pytest.raises(ValueError):
            recurrence_coefficients("jacobi", 3, a=-1.5, b=0.0)
        with pytest.raises(ValueError):
            recurrence_coefficients("jacobi", 3)


class TestEvaluateOrthonormal:
    def test_degree_zero_is_one(self):
        table = recurrence_coefficients("legendre", 2)
        vals = evaluate_orthonormal(table, 0, [-0.7, 0.0, 0.3])
        np.testing.assert_allclose(vals, 1.0)

    def test_degree_one_analytic(self):
        # orthonormalizing x against 1 under density 1/2 gives sqrt(3) x
        table = recurrence_coefficients("legendre", 3)
        vals = evaluate_orthonormal(table, 1, [0.5])
        assert vals[0, 1] == pytest.approx(math.sqrt(3.0) * 0.5, abs=1e-15)

    def test_discrete_gram_identity_at_gauss_nodes(self):
        table = recurrence_coefficients("legendre", 10)
        rule = golub_welsch(table, 5)
        psi = evaluate_orthonormal(table, 4, rule.points[:, 0])
        gram = (psi.T * rule.weights) @ psi
        np.testing.assert_allclose(gram, np.eye(5), atol=1e-12)

    @pytest.mark.parametrize("family,params", [
        ("legendre", {}), ("hermite", {}), ("chebyshev1", {}),
        ("jacobi", {"a": 0.5, "b": 1.5}),
    ])
    def test_matches_monomial_orthogonalization(self, family, params):
        # Gram-Schmidt on monomial columns under a fine discretization of the
        # density, compared pointwise at 100 of the discretization nodes
        table = recurrence_coefficients(family, 8, **params)
        if family == "legendre":
            x, w = np.polynomial.legendre.leggauss(400)
            w = w / 2.0
        elif family == "hermite":
            x, w = np.polynomial.hermite_e.hermegauss(200)
            w = w / w.sum()
        elif family == "chebyshev1":
            N = 400
            x = np.cos((2 * np.arange(1, N + 1) - 1) * np.pi / (2 * N))
            w = np.full(N, 1.0 / N)
        else:
            from scipy.special import roots_jacobi
            x, w = roots_jacobi(200, params["a"], params["b"])
            w = w / w.sum()
        V = np.vander(x, 7, increasing=True)
        Q = np.zeros_like(V)
        for j in range(7):
            v = V[:, j].copy()
            for i in range(j):
                v -= np.sum(w * v * Q[:, i]) * Q[:, i]
            Q[:, j] = v / math.sqrt(np.sum(w * v * v))
        rng = np.random.Generator(np.random.Philox(key=np.uint64(11)))
        idx = rng.choice(x.size, size=100, replace=False)
        got = evaluate_orthonormal(table, 6, x[idx])
        np.testing.assert_allclose(got, Q[idx], atol=1e-9)

    def test_degree_exceeds_table(self):
        table = recurrence_coefficients("legendre", 3)
        with pytest.raises(ValueError):
            evaluate_orthonormal(table, 3, [0.0])


class TestMultiIndexSet:
    def test_total_order_cardinality(self):
        assert len(multi_index_set("total_order", 2, 3)) == 10

    def test_tensor_order_cardinality(self):
        assert len(multi_index_set("tensor_order", 2, 3)) == 16

    @pytest.mark.parametrize("d", range(1, 7))
    @pytest.mark.parametrize("k", range(0, 11, 2))
    def test_cardinality_closed_forms(self, d, k):
        assert len(multi_index_set("total_order", d, k)) == total_order_cardinality(d, k)
        if (k + 1) ** d <= 10 ** 6:
            assert len(multi_index_set("tensor_order", d, k)) == (k + 1) ** d

    def test_hyperbolic_cross_matches_enumeration(self):
        d, k = 2, 3
        got = multi_index_set("hyperbolic_cross", d, k)
        brute = [(i, j) for i in range(k + 1) for j in range(k + 1)
                 if (i + 1) * (j + 1) <= k + 1]
        assert len(got) == len(brute)
        assert set(map(tuple, got.indices)) == set(brute)

    def test_hyperbolic_q_reduces_to_total_order_at_q_one(self):
        got = multi_index_set("hyperbolic_q", 3, 4, q=1.0)
        want = multi_index_set("total_order", 3, 4)
        assert np.array_equal(got.indices, want.indices)

    def test_graded_lex_ordering(self):
        got = multi_index_set("total_order", 2, 2)
        want = [(0, 0), (0, 1), (1, 0), (0, 2), (1, 1), (2, 0)]
        assert [tuple(t) for t in got.indices] == want

    def test_deterministic(self):
        a = multi_index_set("hyperbolic_cross", 3, 5)
        b = multi_index_set("hyperbolic_cross", 3, 5)
        assert np.array_equal(a.indices, b.indices)

    def test_errors(self):
        with pytest.raises(ValueError):
            multi_index_set("hyperbolic_q", 2, 3)           # missing q
        with pytest.raises(ValueError):
            multi_index_set("hyperbolic_q", 2, 3, q=1.5)
        with pytest.raises(ValueError):
            multi_index_set("total_order", 2, 3, q=0.5)     # stray q
        with pytest.raises(ValueError):
            multi_index_set("tensor_order", 8, 30)          # cap


class TestDesignMatrix:
    def test_constant_basis_single_point(self):
        table = recurrence_coefficients("legendre", 2)
        basis = multi_index_set("total_order", 1, 0)
        A = design_matrix(basis, (table,), [[0.3]], [1.0])
        np.testing.assert_allclose(A.entries, [[1.0]])

    def test_gauss_gram_is_identity(self):
        table = recurrence_coefficients("legendre", 10)
        rule = golub_welsch(table, 5)
        basis = multi_index_set("total_order", 1, 4)
        A = design_matrix(basis, (table,), rule.points, rule.weights)
        np.testing.assert_allclose(A.entries.T @ A.entries, np.eye(5), atol=1e-12)

    def test_clenshaw_curtis_gram_deviates_past_exactness(self):
        table = recurrence_coefficients("legendre", 10)
        rule = clenshaw_curtis(5)
        basis = multi_index_set("total_order", 1, 4)
        A = design_matrix(basis, (table,), rule.points, rule.weights)
        report = gram_report(A)
        degsum = np.add.outer(np.arange(5), np.arange(5))
        assert report.exactness_frontier[degsum <= 4].all()
        assert not report.exactness_frontier.all()

    def test_weight_renormalization_flagged(self):
        table = recurrence_coefficients("legendre", 3)
        basis = multi_index_set("total_order", 1, 1)
        A = design_matrix(basis, (table,), [[-0.5], [0.5]], [2.0, 2.0])
        assert A.weights_renormalized
        np.testing.assert_allclose(A.weights.sum(), 1.0, atol=1e-15)

    def test_pure_function_bit_identical(self):
        table = recurrence_coefficients("legendre", 6)
        basis = multi_index_set("total_order", 2, 3)
        rng = np.random.Generator(np.random.Philox(key=np.uint64(5)))
        pts = 2.0 * rng.random((20, 2)) - 1.0
        w = np.full(20, 1.0 / 20.0)
        A1 = design_matrix(basis, (table, table), pts, w)
        A2 = design_matrix(basis, (table, table), pts, w)
        assert np.array_equal(A1.entries, A2.entries)

    def test_errors(self):
        table = recurrence_coefficients("legendre", 4)
        basis = multi_index_set("total_order", 2, 1)
        with pytest.raises(ValueError):
            design_matrix(basis, (table, table), [[0.1, 0.2]], [-1.0])
        with pytest.raises(ValueError):
            design_matrix(basis, (table, table), [[0.1, 0.2, 0.3]], [1.0])


@pytest.mark.parametrize("family,params", [
    ("legendre", {}), ("hermite", {}), ("chebyshev1", {}),
    ("jacobi", {"a": 2.0, "b": 0.25}),
])
@pytest.mark.parametrize("n", [3, 6, 10])
def test_orthonormality_invariant(family, params, n):
    # Gram via an exact-enough Gauss rule equals the identity within 1e-10
    table = recurrence_coefficients(family, 2 * n + 2, **params)
    rule = golub_welsch(table, n + 1)
    basis = multi_index_set("total_order", 1, n)
    A = design_matrix(basis, (table,), rule.points, rule.weights)
    np.testing.assert_allclose(A.entries.T @ A.entries, np.eye(n + 1), atol=1e-10)

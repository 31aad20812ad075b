import numpy as np
import pytest

from quadkit import (christoffel_sample, condition_number, design_matrix,
                     golub_welsch, monte_carlo_sample, multi_index_set,
                     recurrence_coefficients, sample_weights)
from quadkit.sampling import kernel_diagonal

LEG = recurrence_coefficients("legendre", 40)


class TestMonteCarloSample:
    def test_uniform_mean_within_clt_bound(self):
        m = 10_000
        s = monte_carlo_sample(("legendre",), m, 123)
        # variance of uniform on [-1,1] is 1/3
        assert abs(s.points.mean()) < 3.0 * np.sqrt(1.0 / 3.0 / m)

    def test_determinism(self):
        a = monte_carlo_sample(("legendre", "hermite"), 500, 9)
        b = monte_carlo_sample(("legendre", "hermite"), 500, 9)
        assert np.array_equal(a.points, b.points)
        assert a.metadata["algorithm"] == "philox4x64"

    def test_distinct_seeds_differ(self):
        a = monte_carlo_sample(("legendre",), 100, 1)
        b = monte_carlo_sample(("legendre",), 100, 2)
        assert not np.array_equal(a.points, b.points)

    def test_normal_marginal(self):
        s = monte_carlo_sample(("hermite",), 20_000, 4)
        assert abs(s.points.mean()) < 3.0 / np.sqrt(20_000)
        assert abs(s.points.std() - 1.0) < 0.05

    def test_oversampled_conditioning_trend(self):
        # kappa decreases toward 1 as the sample budget grows to n^2
        basis = multi_index_set("total_order", 2, 4)
        n = len(basis)
        kappas = []
        for factor in (2, n):
            m = factor * n
            samp = monte_carlo_sample(("legendre",) * 2, m, 77)
            w = sample_weights(samp.points, basis, (LEG, LEG))
            A = design_matrix(basis, (LEG, LEG), samp.points, w)
            kappas.append(condition_number(A))
        assert kappas[-1] < kappas[0]

    def test_unsupported_family(self):
        with pytest.raises(ValueError):
            monte_carlo_sample(("jacobi",), 10, 0)


class TestChristoffelSample:
    def test_empirical_cdf_symmetry(self):
        s = christoffel_sample(1, 100_000, 5)
        assert abs(np.mean(s.points[:, 0] <= 0.0) - 0.5) < 0.01
        assert abs(s.points.mean()) < 0.01

    def test_determinism(self):
        a = christoffel_sample(2, 400, 11)
        b = christoffel_sample(2, 400, 11)
        assert np.array_equal(a.points, b.points)

    def test_support(self):
        s = christoffel_sample(3, 1000, 2)
        assert np.all(np.abs(s.points) <= 1.0)

    def test_rejects_other_densities(self):
        with pytest.raises(ValueError):
            christoffel_sample(1, 10, 0, density="hermite")

    def test_beats_monte_carlo_on_average(self):
        # mean condition number over the pinned seeds, d = 2, m = 2n
        seeds = range(1, 11)
        for order in (4, 10, 15):
            basis = multi_index_set("total_order", 2, order)
            n = len(basis)
            m = 2 * n
            kap = {"mc": [], "ch": []}
            for seed in seeds:
                for name, samp in (("mc", monte_carlo_sample(("legendre",) * 2, m, seed)),
                                   ("ch", christoffel_sample(2, m, seed))):
                    w = sample_weights(samp.points, basis, (LEG, LEG))
                    A = design_matrix(basis, (LEG, LEG), samp.points, w)
                    kap[name].append(condition_number(A))
            assert np.mean(kap["ch"]) <= np.mean(kap["mc"])


class TestSampleWeights:
    def test_single_point_single_basis(self):
        basis = multi_index_set("total_order", 1, 0)
        w = sample_weights([[0.3]], basis, (LEG,))
        np.testing.assert_allclose(w, [1.0])

    def test_constant_basis_gives_uniform_weights(self):
        basis = multi_index_set("total_order", 2, 0)
        pts = christoffel_sample(2, 50, 3).points
        w = sample_weights(pts, basis, (LEG, LEG))
        np.testing.assert_allclose(w, np.full(50, 0.02), atol=1e-15)

    def test_positive_and_normalized(self):
        basis = multi_index_set("total_order", 2, 5)
        pts = christoffel_sample(2, 300, 8).points
        w = sample_weights(pts, basis, (LEG, LEG))
        assert np.all(w > 0)
        assert w.sum() == pytest.approx(1.0, abs=1e-14)

    def test_kernel_integrates_to_cardinality(self):
        # trace identity: the diagonal kernel integrates to n under a rule
        # exact on products of the basis
        basis = multi_index_set("total_order", 1, 6)
        rule = golub_welsch(LEG, 7)
        k = kernel_diagonal(rule.points, basis, (LEG,))
        assert np.sum(rule.weights * k) == pytest.approx(len(basis), abs=1e-8)

    def test_low_conditioning_with_visible_aliasing(self):
        # d = 2, total order 3, m = 2n christoffel draw: gram is mildly
        # conditioned yet visibly off-identity
        basis = multi_index_set("total_order", 2, 3)
        n = len(basis)
        samp = christoffel_sample(2, 2 * n, 1)
        w = sample_weights(samp.points, basis, (LEG, LEG))
        A = design_matrix(basis, (LEG, LEG), samp.points, w)
        gram = A.entries.T @ A.entries
        kappa_gram = np.linalg.cond(gram)
        assert kappa_gram < 40.0
        off = gram - np.eye(n)
        np.fill_diagonal(off, 0.0)
        assert np.abs(off).max() > 1e-3

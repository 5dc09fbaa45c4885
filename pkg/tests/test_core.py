from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from oracles import naive_counts, naive_rho_sigma, textbook_spearman
from rankdep import kernels
from rankdep.core import (copula_from_permutation, copula_value, deviation_sums,
                          diagonal_sections, empirical_copula, independence_permutation_test,
                          measures, pearson_r, schweizer_wolff, spearman_rho)
from rankdep.errors import DataError
from rankdep.ingest import BivariateSample
from rankdep.ranks import pseudo_from_arrays, rank_transform

permutations = st.integers(2, 40).flatmap(lambda n: st.permutations(list(range(1, n + 1))))


def _copula(pairs):
    x, y = zip(*pairs)
    return empirical_copula(pseudo_from_arrays(x, y))


class TestGridValues:
    def test_comonotone_two(self):
        assert copula_value(_copula([(1, 1), (2, 2)]), 1, 1) == 0.5

    def test_countermonotone_two(self):
        assert copula_value(_copula([(1, 2), (2, 1)]), 1, 1) == 0.0

    def test_three_points(self):
        C = _copula([(1, 2), (2, 1), (3, 3)])
        assert copula_value(C, 2, 2) == pytest.approx(2 / 3, abs=0)
        assert copula_value(C, 1, 1) == 0.0

    def test_grounded(self):
        C = _copula([(1, 2), (2, 1), (3, 3)])
        assert all(copula_value(C, 0, j) == 0.0 for j in range(4))
        assert all(copula_value(C, i, 0) == 0.0 for i in range(4))

    def test_out_of_range(self):
        C = _copula([(1, 2), (2, 1), (3, 3)])
        with pytest.raises(IndexError):
            copula_value(C, 4, 1)
        with pytest.raises(IndexError):
            copula_value(C, -1, 1)

    def test_constant_axis_rejected(self):
        with pytest.raises(DataError):
            empirical_copula(pseudo_from_arrays([1, 1, 1], [1, 2, 3]))

    @settings(max_examples=60, deadline=None)
    @given(permutations)
    def test_counts_match_naive(self, perm):
        n = len(perm)
        C = copula_from_permutation(perm)
        naive = naive_counts(list(range(1, n + 1)), perm)
        i, j = np.meshgrid(np.arange(n + 1), np.arange(n + 1), indexing="ij")
        got = C.counts(i.ravel(), j.ravel()).reshape(n + 1, n + 1)
        assert got.tolist() == naive


class TestMeasures:
    def test_three_point_fixture(self):
        C = _copula([(1, 2), (2, 1), (3, 3)])
        assert spearman_rho(C) == 0.5
        assert schweizer_wolff(C) == 5 / 6
        assert naive_rho_sigma([1, 2, 3], [2, 1, 3]) == (Fraction(1, 2), Fraction(5, 6))

    @pytest.mark.parametrize("n", [2, 10, 100, 1000])
    def test_monotone_exact(self, n):
        up = copula_from_permutation(np.arange(1, n + 1))
        down = copula_from_permutation(np.arange(n, 0, -1))
        assert spearman_rho(up) == 1.0 and schweizer_wolff(up) == 1.0
        assert spearman_rho(down) == -1.0 and schweizer_wolff(down) == 1.0

    @settings(max_examples=100, deadline=None)
    @given(permutations)
    def test_oracle_equivalence(self, perm):
        rho, sigma = naive_rho_sigma(list(range(1, len(perm) + 1)), perm)
        C = copula_from_permutation(perm)
        assert abs(spearman_rho(C) - float(rho)) <= 1e-12
        assert abs(schweizer_wolff(C) - float(sigma)) <= 1e-12

    @settings(max_examples=200, deadline=None)
    @given(permutations)
    def test_b1_and_frechet_bounds(self, perm):
        n = len(perm)
        C = copula_from_permutation(perm)
        assert schweizer_wolff(C) >= abs(spearman_rho(C)) - 1e-12
        i, j = np.meshgrid(np.arange(n + 1), np.arange(n + 1), indexing="ij")
        i, j = i.ravel(), j.ravel()
        c = C.counts(i, j)
        assert np.all(np.maximum(i + j - n, 0) <= c)
        assert np.all(c <= np.minimum(i, j))

    @settings(max_examples=100, deadline=None)
    @given(permutations)
    def test_axis_swap(self, perm):
        C = copula_from_permutation(perm)
        assert deviation_sums(C) == deviation_sums(C.transpose())

    @settings(max_examples=100, deadline=None)
    @given(permutations)
    def test_textbook_crosscheck(self, perm):
        n = len(perm)
        C = copula_from_permutation(perm)
        assert abs(spearman_rho(C) - textbook_spearman(range(1, n + 1), perm)) <= 3 / n

    @settings(max_examples=50, deadline=None)
    @given(st.integers(0, 2**32 - 1), st.integers(5, 300))
    def test_monotone_transform_invariance(self, seed, n):
        rng = np.random.default_rng(seed)
        x, y = rng.normal(size=n), rng.normal(size=n)
        a = measures(empirical_copula(pseudo_from_arrays(x, y)))
        b = measures(empirical_copula(pseudo_from_arrays(np.exp(x), y ** 3)))
        assert (a.rho_n, a.sigma_n) == (b.rho_n, b.sigma_n)

    def test_tied_data_matches_order_statistic_definition(self):
        x = [1, 1, 2, 3, 3, 3]
        y = [2, 1, 1, 3, 2, 3]
        C = empirical_copula(pseudo_from_arrays(x, y))
        assert C.tie_adjusted
        xs, ys = sorted(x), sorted(y)
        for i in range(1, 7):
            for j in range(1, 7):
                want = sum(1 for a, b in zip(x, y) if a <= xs[i - 1] and b <= ys[j - 1])
                assert copula_value(C, i, j) == want / 6

    def test_pearson(self):
        x = np.linspace(0, 1, 20)
        assert pearson_r(BivariateSample(x, 2 * x + 1)) == pytest.approx(1.0, abs=1e-15)
        assert pearson_r(BivariateSample(x, np.ones(20))) is None


class TestBackends:
    @pytest.mark.parametrize("backend", kernels.available_backends())
    @pytest.mark.parametrize("threads", [1, 3, 8])
    def test_identical_sums(self, backend, threads):
        rng = np.random.default_rng(7)
        n = 700
        perm = rng.permutation(n) + 1
        rows = np.arange(1, n + 1, dtype=np.int64)
        ref = kernels.deviation_sums(rows, perm.astype(np.int64), n, backend="python")
        got = kernels.deviation_sums(rows, perm.astype(np.int64), n, threads=threads,
                                     backend=backend)
        assert got == ref

    @pytest.mark.parametrize("backend", kernels.available_backends())
    def test_grid_counts(self, backend):
        perm = np.array([3, 1, 4, 2, 5], dtype=np.int64)
        rows = np.arange(1, 6, dtype=np.int64)
        qi = np.array([0, 1, 2, 3, 5, 5])
        qj = np.array([3, 3, 1, 4, 5, 0])
        naive = naive_counts(rows.tolist(), perm.tolist())
        got = kernels.grid_counts(rows, perm, 5, qi, qj, backend=backend)
        assert got.tolist() == [naive[a][b] for a, b in zip(qi, qj)]

    def test_unknown_backend(self):
        with pytest.raises(ValueError):
            kernels.get_backend("fortran")


class TestDiagonals:
    def test_comonotone_delta(self):
        n = 200
        d = diagonal_sections(copula_from_permutation(np.arange(1, n + 1)))
        assert np.all(np.abs(d.delta - d.t) <= 1 / n + 1e-15)

    def test_countermonotone_lambda(self):
        n = 200
        d = diagonal_sections(copula_from_permutation(np.arange(n, 0, -1)))
        assert np.all(d.lam <= 1 / n + 1e-15)

    def test_three_point(self):
        d = diagonal_sections(_copula([(1, 2), (2, 1), (3, 3)]), m=3)
        k = 2
        assert d.t[k] == pytest.approx(2 / 3)
        assert d.delta[k] == pytest.approx(2 / 3)
        assert d.delta_pi[k] == pytest.approx(4 / 9)

    @settings(max_examples=50, deadline=None)
    @given(permutations)
    def test_frechet_envelope(self, perm):
        n = len(perm)
        d = diagonal_sections(copula_from_permutation(perm))
        slack = 2 / n + 1e-12
        assert np.all(d.delta <= d.delta_upper + slack)
        assert np.all(d.delta >= d.delta_lower - slack)
        assert np.all(d.lam <= d.lambda_upper + slack)
        assert np.all(d.lam >= d.lambda_lower - slack)

    def test_grid_size_default(self):
        n = 1000
        d = diagonal_sections(copula_from_permutation(np.arange(1, n + 1)))
        assert len(d.t) == 513


class TestPermutationTest:
    def test_comonotone(self):
        p = pseudo_from_arrays(np.arange(100), np.arange(100))
        assert independence_permutation_test(p, 199, seed=3) == 1 / 200

    def test_minimum_b_range(self):
        rng = np.random.default_rng(0)
        p = pseudo_from_arrays(rng.normal(size=60), rng.normal(size=60))
        val = independence_permutation_test(p, 19, seed=1)
        assert val * 20 == pytest.approx(round(val * 20)) and 1 / 20 <= val <= 1

    def test_b_too_small(self):
        p = pseudo_from_arrays(np.arange(10), np.arange(10))
        with pytest.raises(ValueError):
            independence_permutation_test(p, 10)

    def test_deterministic(self):
        rng = np.random.default_rng(5)
        p = pseudo_from_arrays(rng.normal(size=80), rng.normal(size=80))
        assert independence_permutation_test(p, 99, 4) == independence_permutation_test(p, 99, 4)

    @pytest.mark.slow
    def test_calibration(self):
        hits = 0
        for seed in range(100):
            rng = np.random.default_rng(seed)
            p = pseudo_from_arrays(rng.normal(size=200), rng.normal(size=200))
            hits += independence_permutation_test(p, 199, seed) > 0.05
        assert hits >= 88

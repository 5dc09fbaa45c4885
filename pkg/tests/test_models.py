import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy import stats

from oracles import bisect_inverse
from rankdep.core import empirical_copula, measures
from rankdep.errors import ModelSpecError
from rankdep.models import (ConvexCombo, Frank, Glued, Kumaraswamy, LowerBound, Mixture,
                            NoisyLineMixture, Normal, Pareto, Product, StudentT, Uniform,
                            UpperBound, copula_cdf, marginal_quantile, mixture_simulator,
                            parse_copula, parse_marginal, sample_copula, simulate_bivariate)
from rankdep.ranks import pseudo_from_arrays
from rankdep.rng import make_rng


def _measures(u, v):
    return measures(empirical_copula(pseudo_from_arrays(u, v)))


class TestCdf:
    def test_basic_copulas(self):
        assert copula_cdf(Product(), 0.3, 0.5) == pytest.approx(0.15)
        assert copula_cdf(UpperBound(), 0.3, 0.5) == pytest.approx(0.3)
        assert copula_cdf(LowerBound(), 0.3, 0.5) == 0.0

    def test_convex(self):
        assert copula_cdf(ConvexCombo(UpperBound(), LowerBound(), 0.5), 0.5, 0.5) == pytest.approx(0.25)

    def test_frank_value(self):
        # 40-digit reference value of the closed form at (0.5, 0.5)
        assert copula_cdf(Frank(30), 0.5, 0.5) == pytest.approx(0.47689510417807761, abs=1e-15)

    @pytest.mark.parametrize("t", [-30.0, -5.0, 2.0, 30.0])
    def test_frank_closed_form(self, t):
        mp = pytest.importorskip("mpmath")
        mp.mp.dps = 40
        g = np.linspace(0.05, 0.95, 7)
        for a in g:
            for b in g:
                want = -mp.log(1 + mp.expm1(-t * a) * mp.expm1(-t * b) / mp.expm1(-t)) / t
                assert copula_cdf(Frank(t), a, b) == pytest.approx(float(want), abs=1e-13)

    def test_glued_formula(self):
        c = Glued(Frank(-30), Frank(30), 0.5)
        u, v = 0.3, 0.4
        assert c.cdf(u, v) == pytest.approx(0.5 * Frank(-30).cdf(u / 0.5, v))
        u = 0.8
        assert c.cdf(u, v) == pytest.approx(0.5 * Frank(30).cdf((u - 0.5) / 0.5, v) + 0.5 * v)

    @pytest.mark.parametrize("c", [Product(), UpperBound(), LowerBound(), Frank(4.0),
                                   Glued(Frank(-30), Frank(30), 0.5),
                                   ConvexCombo(UpperBound(), Product(), 0.3)])
    def test_copula_axioms(self, c):
        g = np.linspace(0, 1, 11)
        assert np.allclose(c.cdf(g, np.ones_like(g)), g, atol=1e-12)
        assert np.allclose(c.cdf(np.ones_like(g), g), g, atol=1e-12)
        assert np.allclose(c.cdf(np.zeros_like(g), g), 0, atol=1e-12)
        u, v = np.meshgrid(g, g)
        val = c.cdf(u, v)
        assert np.all(val >= np.maximum(u + v - 1, 0) - 1e-12)
        assert np.all(val <= np.minimum(u, v) + 1e-12)

    def test_outside_square(self):
        with pytest.raises(ValueError):
            copula_cdf(Product(), 1.2, 0.5)

    def test_bad_parameters(self):
        with pytest.raises(ValueError):
            Frank(0.0)
        with pytest.raises(ValueError):
            Glued(Product(), Product(), 1.0)


class TestSamplers:
    def test_upper_bound_exact(self):
        p = sample_copula(UpperBound(), 500, 1)
        assert np.array_equal(p.u, p.v)

    def test_glued_bounds_exact(self):
        p = sample_copula(Glued(UpperBound(), LowerBound(), 0.5), 2000, 2)
        left = p.u <= 0.5
        assert np.allclose(p.v[left], 2 * p.u[left], atol=1e-12)
        assert np.allclose(p.v[~left], 2 * (1 - p.u[~left]), atol=1e-12)

    def test_glued_origin_partition(self):
        u, v, first = Glued(Frank(5), Product(), 0.3).sample_with_origin(5000, make_rng(4))
        assert np.array_equal(first, u <= 0.3)

    def test_frank_negative_strong(self):
        p = sample_copula(Frank(-30), 2000, 3)
        assert _measures(p.u, p.v).rho_n < -0.9

    @pytest.mark.parametrize("c", [Product(), Frank(8.0), Frank(-3.0),
                                   ConvexCombo(UpperBound(), LowerBound(), 0.4),
                                   Glued(Frank(-30), Frank(30), 0.5)])
    def test_uniform_margins(self, c):
        n = 10_000
        p = sample_copula(c, n, 9)
        grid = np.arange(1, n + 1) / n
        bound = 2 / np.sqrt(n)
        assert np.max(np.abs(np.sort(p.u) - grid)) <= bound
        assert np.max(np.abs(np.sort(p.v) - grid)) <= bound

    @pytest.mark.parametrize("c", [Product(), Frank(8.0), Frank(-30.0),
                                   ConvexCombo(UpperBound(), LowerBound(), 0.4),
                                   Glued(Frank(-30), Frank(30), 0.5)])
    def test_sampler_matches_cdf(self, c):
        n = 20_000
        p = sample_copula(c, n, 12)
        g = np.arange(1, 21) / 20
        u, v = np.meshgrid(g, g, indexing="ij")
        emp = np.array([[np.mean((p.u <= a) & (p.v <= b)) for b in g] for a in g])
        assert np.max(np.abs(emp - c.cdf(u, v))) <= 0.02

    @pytest.mark.parametrize("theta", [3.0, 10.0, -3.0, -10.0])
    def test_frank_sign_law(self, theta):
        p = sample_copula(Frank(theta), 5000, 21)
        m = _measures(p.u, p.v)
        if theta > 0:
            assert abs(m.sigma_n - m.rho_n) <= 0.02
        else:
            assert abs(m.sigma_n + m.rho_n) <= 0.02

    def test_deterministic(self):
        a = sample_copula(Glued(Frank(-30), Frank(30), 0.5), 100, 77)
        b = sample_copula(Glued(Frank(-30), Frank(30), 0.5), 100, 77)
        assert np.array_equal(a.u, b.u) and np.array_equal(a.v, b.v)


class TestMarginals:
    def test_uniform(self):
        assert marginal_quantile(Uniform(0, 1), 0.3) == pytest.approx(0.3)
        assert marginal_quantile(Uniform(2, 4), 0.5) == pytest.approx(3.0)

    def test_kumaraswamy_against_bisection(self):
        a, b = 0.25, 0.15
        m = Kumaraswamy(a, b)
        for p in (0.1, 0.5, 0.9):
            want = bisect_inverse(lambda x: 1 - (1 - x ** a) ** b, p)
            assert marginal_quantile(m, p) == pytest.approx(want, abs=1e-10)

    def test_normal(self):
        assert marginal_quantile(Normal(0, 0.03), 0.5) == 0.0
        assert marginal_quantile(Normal(1, 2), 0.975) == pytest.approx(1 + 2 * stats.norm.ppf(0.975), abs=1e-10)

    def test_student_t(self):
        m = StudentT(3.0, 1.5, 2.5)
        for p in (0.01, 0.3, 0.5, 0.99):
            assert marginal_quantile(m, p) == pytest.approx(3.0 + 1.5 * stats.t.ppf(p, 2.5), abs=1e-10)

    def test_pareto_lomax(self):
        m = Pareto(2.0, 10.0)
        assert marginal_quantile(m, 0.75) == pytest.approx(10.0 * (0.25 ** -0.5 - 1))
        assert m.cdf(marginal_quantile(m, 0.3)) == pytest.approx(0.3)

    def test_mixture_roundtrip(self):
        m = Mixture((Normal(-2, 0.5), Normal(1.5, 1.2)), (0.3, 0.7))
        p = np.array([0.01, 0.2, 0.3, 0.5, 0.95])
        assert np.allclose(m.cdf(m.quantile(p)), p, atol=1e-10)

    @pytest.mark.parametrize("m", [Uniform(0, 1), Kumaraswamy(0.25, 0.15), StudentT(0, 1, 3),
                                   Normal(0, 1), Pareto(2, 10),
                                   Mixture((Normal(-2, 0.7), Normal(2, 0.7)), (0.5, 0.5))])
    def test_quantile_increasing(self, m):
        p = np.linspace(0.01, 0.99, 99)
        assert np.all(np.diff(m.quantile(p)) > 0)

    def test_domain(self):
        for bad in (0.0, 1.0, -0.1):
            with pytest.raises(ValueError):
                marginal_quantile(Normal(0, 1), bad)


class TestSimulation:
    def test_noisy_line_degenerate(self):
        line = NoisyLineMixture(Pareto(2, 10), Pareto(2, 10), Normal(0, 0.03), 0.0)
        m = _measures(*_xy(mixture_simulator(line, 1000, 1)))
        assert m.rho_n > 0.99
        indep = NoisyLineMixture(Pareto(2, 10), Pareto(2, 10), Normal(0, 0.03), 1.0)
        assert _measures(*_xy(mixture_simulator(indep, 1000, 1))).sigma_n < 0.12

    def test_gallery_like(self):
        s = simulate_bivariate(Product(), Kumaraswamy(1, 4), Normal(0, 1), 1000, 3)
        assert _measures(s.x, s.y).sigma_n < 0.12

    def test_deterministic(self):
        args = (Glued(Frank(-30), Frank(30), 0.5), Kumaraswamy(0.25, 0.15), StudentT(3, 1.5, 2.5), 200)
        a, b = simulate_bivariate(*args, 5), simulate_bivariate(*args, 5)
        assert np.array_equal(a.x, b.x) and np.array_equal(a.y, b.y)


def _xy(s):
    return s.x, s.y


class TestParsing:
    @pytest.mark.parametrize("text", ["product", "m", "w", "frank:30", "frank:-2.5",
                                      "glue:0.5:frank:-30:frank:30", "convex:0.3:m:w",
                                      "glue:0.4:convex:0.5:m:product:w"])
    def test_copula_roundtrip(self, text):
        c = parse_copula(text)
        assert parse_copula(str(c)) == c

    def test_copula_types(self):
        c = parse_copula("glue:0.5:frank:-30:frank:30")
        assert c == Glued(Frank(-30.0), Frank(30.0), 0.5)

    @pytest.mark.parametrize("text", ["", "frank", "frank:x", "glue:0.5:m", "m:extra", "gumbel:2",
                                      "glue:1.5:m:w"])
    def test_copula_errors(self, text):
        with pytest.raises(ModelSpecError):
            parse_copula(text)

    def test_marginals(self):
        assert parse_marginal("kumaraswamy:0.25,0.15") == Kumaraswamy(0.25, 0.15)
        assert parse_marginal("t:3,1.5,2.5") == StudentT(3.0, 1.5, 2.5)
        assert parse_marginal("pareto:2,10") == Pareto(2.0, 10.0)
        m = parse_marginal("mixture:0.3*normal:-2,0.5|0.7*normal:1.5,1.2")
        assert m == Mixture((Normal(-2, 0.5), Normal(1.5, 1.2)), (0.3, 0.7))

    @pytest.mark.parametrize("text", ["normal", "normal:0", "normal:0,-1", "beta:1,2",
                                      "mixture:0.5*normal:0,1"])
    def test_marginal_errors(self, text):
        with pytest.raises(ModelSpecError):
            parse_marginal(text)


@settings(max_examples=30, deadline=None)
@given(st.floats(0.05, 0.95), st.floats(-20, 20).filter(lambda t: abs(t) > 0.1))
def test_glued_frank_cdf_is_copula(theta, t):
    c = Glued(Frank(-t), Frank(t), theta)
    g = np.linspace(0, 1, 9)
    u, v = np.meshgrid(g, g, indexing="ij")
    val = c.cdf(u, v)
    # 2-increasing on the grid
    rect = val[1:, 1:] - val[:-1, 1:] - val[1:, :-1] + val[:-1, :-1]
    assert np.all(rect >= -1e-12)

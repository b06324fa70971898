import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from numpy.testing import assert_allclose
from scipy import integrate, stats

from vineshift.errors import DegenerateDataError, InsufficientDataError
from vineshift.statcore import (GaussianKernel1D, kendall_tau,
                                pseudo_observations,
                                rank_pseudo_observations,
                                silverman_bandwidth, std_normal_cdf,
                                std_normal_pdf, std_normal_quantile)

# mpmath 50-digit references:
#   npdf(0)   = 0.39894228040143267793994605993438186847585863116493
#   npdf(1)   = 0.24197072451914334980049666330425750590925521761614
#   ncdf(1)   = 0.84134474606854294859337880785606868894593668137229
PHI_0 = 0.3989422804014327
PHI_1 = 0.24197072451914335
NCDF_1 = 0.8413447460685429


class TestNormalFunctions:
    def test_pdf_reference_values(self):
        assert_allclose(std_normal_pdf(0.0), PHI_0, rtol=1e-15)
        assert_allclose(std_normal_pdf(1.0), PHI_1, rtol=1e-15)
        assert_allclose(std_normal_pdf(-1.0), PHI_1, rtol=1e-15)

    def test_cdf_reference_values(self):
        assert_allclose(std_normal_cdf(0.0), 0.5, rtol=1e-15)
        assert_allclose(std_normal_cdf(1.0), NCDF_1, rtol=1e-15)
        assert_allclose(std_normal_cdf(-1.0), 1.0 - NCDF_1, rtol=1e-12)
        assert std_normal_cdf(np.inf) == 1.0
        assert std_normal_cdf(-np.inf) == 0.0

    def test_quantile_inverts_cdf(self):
        p = np.linspace(0.001, 0.999, 41)
        assert_allclose(std_normal_cdf(std_normal_quantile(p)), p, atol=1e-13)

    def test_quantile_rejects_boundary(self):
        with pytest.raises(ValueError):
            std_normal_quantile(0.0)
        with pytest.raises(ValueError):
            std_normal_quantile(1.0)

    def test_vector_shapes(self):
        x = np.zeros((3, 2))
        assert std_normal_pdf(x).shape == (3, 2)
        assert isinstance(std_normal_pdf(0.5), float)


class TestSilvermanBandwidth:
    def test_unit_sigma_formula(self):
        # sample engineered to sigma=1 exactly; constants checked with
        # mpmath: (4/3)^(1/5)*1000^(-1/5) = 0.26606499942619717...
        #         (4/4)^(1/6)*1000^(-1/6) = 0.31622776601683793...
        n = 1000
        base = np.arange(n, dtype=float)
        base = (base - base.mean()) / base.std(ddof=1)
        assert_allclose(silverman_bandwidth(base, dim=1),
                        0.26606499942619717, rtol=1e-14)
        assert_allclose(silverman_bandwidth(base, dim=2),
                        0.31622776601683793, rtol=1e-14)

    def test_scale_equivariance(self):
        rng = np.random.default_rng(0)
        x = rng.standard_normal(200)
        assert_allclose(silverman_bandwidth(3.0 * x),
                        3.0 * silverman_bandwidth(x), rtol=1e-12)

    def test_degenerate_input(self):
        with pytest.raises(DegenerateDataError):
            silverman_bandwidth(np.ones(50))
        with pytest.raises(InsufficientDataError):
            silverman_bandwidth([1.0])


class TestGaussianKernel1D:
    def test_single_center_is_gaussian(self):
        m = GaussianKernel1D(centers=[2.0], bandwidth=1.5)
        x = np.linspace(-3, 7, 31)
        assert_allclose(m.pdf(x), stats.norm.pdf(x, loc=2.0, scale=1.5), rtol=1e-12)
        assert_allclose(m.cdf(x), stats.norm.cdf(x, loc=2.0, scale=1.5), rtol=1e-12)

    def test_two_center_mixture_by_hand(self):
        # 0.5*phi(x) + 0.5*phi(x-1) at x=0: (PHI_0 + PHI_1)/2
        m = GaussianKernel1D(centers=[0.0, 1.0], bandwidth=1.0)
        assert_allclose(m.pdf(0.0), 0.5 * (PHI_0 + PHI_1), rtol=1e-14)
        assert_allclose(m.cdf(0.0), 0.5 * (0.5 + (1.0 - NCDF_1)), rtol=1e-12)

    def test_pdf_integrates_to_one(self):
        rng = np.random.default_rng(4)
        m = GaussianKernel1D.fit(rng.standard_normal(80))
        total, _ = integrate.quad(m.pdf, -12, 12, limit=200)
        assert_allclose(total, 1.0, atol=1e-9)

    def test_logpdf_matches_log_of_pdf(self):
        rng = np.random.default_rng(5)
        m = GaussianKernel1D.fit(rng.standard_normal(60))
        x = np.linspace(-4, 4, 17)
        assert_allclose(m.logpdf(x), np.log(m.pdf(x)), rtol=1e-12)

    def test_logpdf_finite_in_far_tail(self):
        m = GaussianKernel1D(centers=[0.0], bandwidth=1.0)
        v = m.logpdf(40.0)
        assert np.isfinite(v)
        assert_allclose(v, -0.5 * 1600 - np.log(np.sqrt(2 * np.pi)), rtol=1e-12)

    def test_quantile_roundtrip(self):
        rng = np.random.default_rng(6)
        m = GaussianKernel1D.fit(rng.standard_normal(40) * 2.0 + 1.0)
        p = np.array([0.01, 0.1, 0.5, 0.9, 0.99])
        assert_allclose(m.cdf(m.quantile(p)), p, atol=1e-10)

    def test_validation(self):
        with pytest.raises(ValueError):
            GaussianKernel1D(centers=[], bandwidth=1.0)
        with pytest.raises(ValueError):
            GaussianKernel1D(centers=[1.0], bandwidth=0.0)


def brute_tau(x, y):
    n = len(x)
    s = 0
    for i in range(n):
        for j in range(i + 1, n):
            s += np.sign(x[i] - x[j]) * np.sign(y[i] - y[j])
    return s / (n * (n - 1) / 2)


class TestKendallTau:
    def test_perfect_orderings(self):
        x = np.arange(10.0)
        assert kendall_tau(x, x) == 1.0
        assert kendall_tau(x, -x) == -1.0

    def test_matches_brute_force_continuous(self):
        rng = np.random.default_rng(7)
        for _ in range(50):
            n = int(rng.integers(2, 40))
            x = rng.standard_normal(n)
            y = rng.standard_normal(n)
            assert_allclose(kendall_tau(x, y), brute_tau(x, y), atol=1e-12)

    def test_matches_brute_force_with_ties(self):
        rng = np.random.default_rng(8)
        for _ in range(150):
            n = int(rng.integers(2, 30))
            x = rng.integers(0, 5, n).astype(float)
            y = rng.integers(0, 4, n).astype(float)
            assert_allclose(kendall_tau(x, y), brute_tau(x, y), atol=1e-12)

    def test_gaussian_population_value(self):
        # tau = 2/pi * arcsin(rho); rho=0.8 gives 0.5903344706017331
        rng = np.random.default_rng(9)
        n = 40000
        z = rng.standard_normal((n, 2))
        x = z[:, 0]
        y = 0.8 * z[:, 0] + np.sqrt(1 - 0.64) * z[:, 1]
        assert abs(kendall_tau(x, y) - 0.5903344706017331) < 0.02

    def test_input_validation(self):
        with pytest.raises(ValueError):
            kendall_tau([1, 2], [1, 2, 3])
        with pytest.raises(InsufficientDataError):
            kendall_tau([1.0], [2.0])

    @given(st.lists(st.integers(-3, 3), min_size=2, max_size=25),
           st.data())
    @settings(max_examples=60, deadline=None)
    def test_property_matches_brute(self, xs, data):
        ys = data.draw(st.lists(st.integers(-3, 3),
                                min_size=len(xs), max_size=len(xs)))
        x = np.array(xs, dtype=float)
        y = np.array(ys, dtype=float)
        assert_allclose(kendall_tau(x, y), brute_tau(x, y), atol=1e-12)


class TestPseudoObservations:
    def test_rank_values_small_case(self):
        u = rank_pseudo_observations([3.0, 1.0, 2.0])
        assert_allclose(u, [3 / 4, 1 / 4, 2 / 4])

    def test_rank_average_ties(self):
        u = rank_pseudo_observations([5.0, 5.0, 1.0])
        assert_allclose(u, [2.5 / 4, 2.5 / 4, 1 / 4])

    def test_rank_open_interval(self):
        rng = np.random.default_rng(10)
        u = rank_pseudo_observations(rng.standard_normal(200))
        assert u.min() > 0.0 and u.max() < 1.0

    def test_kernel_pseudo_open_interval(self):
        rng = np.random.default_rng(11)
        u = pseudo_observations(rng.exponential(size=300))
        assert u.min() > 0.0 and u.max() < 1.0

    def test_kernel_pseudo_three_point_oracle(self):
        # centers (0,1,2), h = silverman; u_0 = mean_i Phi((0-c_i)/h)
        x = np.array([0.0, 1.0, 2.0])
        h = silverman_bandwidth(x)
        u = pseudo_observations(x)
        expect0 = np.mean(stats.norm.cdf((0.0 - x) / h))
        assert_allclose(u[0], expect0, rtol=1e-12)

    def test_degenerate(self):
        with pytest.raises(DegenerateDataError):
            rank_pseudo_observations(np.full(9, 2.5))

    # integer grids keep exp() values exactly distinct in float
    @given(st.lists(st.integers(-1000, 1000), min_size=2, max_size=40,
                    unique=True))
    @settings(max_examples=60, deadline=None)
    def test_rank_invariant_under_monotone_transform(self, xs):
        x = np.array(xs, dtype=float) / 20.0
        assert_allclose(rank_pseudo_observations(x),
                        rank_pseudo_observations(np.exp(x / 25.0)), atol=1e-12)

    @given(st.lists(st.integers(-1000, 1000), min_size=2, max_size=40,
                    unique=True))
    @settings(max_examples=40, deadline=None)
    def test_tau_invariant_under_monotone_transform(self, xs):
        x = np.array(xs, dtype=float) / 20.0
        rng = np.random.default_rng(len(xs))
        y = rng.standard_normal(x.size)
        assert_allclose(kendall_tau(x, y),
                        kendall_tau(np.exp(x / 25.0), y), atol=1e-12)

import numpy as np
import pytest

from liebridge.geometry import make_grid
from liebridge.semigroup import (HeatKernelSO2, HeatKernelSO3, SemigroupOperator, class_kernel_so3,
                                 kernel_value_so2, kernel_value_so3, log_kernel_so2, semigroup)


def brute_so2_kernel(sigma, t, d, m_max):
    # independent complex-exponential partial sum
    m = np.arange(-m_max, m_max + 1)
    return np.real(np.sum(np.exp(-0.5 * sigma**2 * m**2 * t) * np.exp(1j * m * d)))


def so3_conjugation_average(kernel, t, a, b, n_gauss=96):
    """Average k_t over relative axis orientation, via quaternions + Gauss-Legendre.

    For rotations by ``a`` and ``b`` about axes at angle gamma,
    cos(psi/2) = cos(a/2)cos(b/2) + sin(a/2)sin(b/2)cos(gamma), and cos(gamma)
    is uniform on [-1, 1] for a uniformly random axis.
    """
    x, w = np.polynomial.legendre.leggauss(n_gauss)
    c = np.cos(a / 2) * np.cos(b / 2) + np.sin(a / 2) * np.sin(b / 2) * x
    psi = 2 * np.arccos(np.clip(np.abs(c), 0, 1))
    ell = np.arange(kernel.l_max + 1)[:, None]
    # unclamped series evaluated directly
    with np.errstate(invalid="ignore", divide="ignore"):
        chi = np.where(np.sin(psi / 2) < 1e-12, 2 * ell + 1, np.sin((ell + 0.5) * psi) / np.sin(psi / 2))
    k = np.sum((2 * ell + 1) * np.exp(-ell * (ell + 1) * kernel.sigma**2 * t / 2) * chi, axis=0)
    return 0.5 * np.dot(w, k)


class TestKernelSO2:
    def test_long_time_limit(self):
        k = HeatKernelSO2(1.0, 64)
        np.testing.assert_allclose(kernel_value_so2(k, 100.0, np.linspace(-3, 3, 11)), 1.0, atol=1e-12)

    def test_integrates_to_one(self):
        g = make_grid("so2", 128)
        k = HeatKernelSO2(1.0, 64)
        for t in (0.05, 0.3, 1.0):
            assert g.integrate(kernel_value_so2(k, t, g.nodes)) == pytest.approx(1.0, abs=1e-10)

    def test_truncation_converged(self):
        k = HeatKernelSO2(1.0, 40)
        v = kernel_value_so2(k, 0.1, 0.0)
        ref = brute_so2_kernel(1.0, 0.1, 0.0, 80)
        assert abs(v - ref) / ref < 1e-10

    def test_rejects_nonpositive_time(self):
        with pytest.raises(ValueError):
            kernel_value_so2(HeatKernelSO2(1.0, 8), 0.0, 0.0)

    @pytest.mark.parametrize("s2t", [0.01, 0.1, 0.5, 0.99])
    def test_wrapped_gaussian_matches_fourier(self, s2t):
        k = HeatKernelSO2(1.0, 400)
        d = np.linspace(-1.0, 1.0, 21) * min(np.pi, 4 * np.sqrt(s2t))
        fourier = np.log(np.array([brute_so2_kernel(1.0, s2t, x, 400) for x in d]))
        np.testing.assert_allclose(log_kernel_so2(k, s2t, d, 400), fourier, atol=1e-10)

    def test_log_kernel_far_tail_is_finite(self):
        k = HeatKernelSO2(1.0, 256)
        v = log_kernel_so2(k, 0.001, np.pi, 256)
        assert np.isfinite(v) and v == pytest.approx(0.5 * np.log(2 * np.pi / 0.001) - np.pi**2 / 0.002 + np.log(2),
                                                     rel=1e-12)


class TestKernelSO3:
    def test_long_time_limit(self):
        k = HeatKernelSO3(0.5, 60)
        np.testing.assert_allclose(kernel_value_so3(k, 100.0, np.linspace(0, np.pi, 9)), 1.0, atol=1e-10)

    def test_identity_limit_terms(self):
        k = HeatKernelSO3(0.5, 5)
        ell = np.arange(6)
        expected = np.sum((2 * ell + 1) ** 2 * np.exp(-ell * (ell + 1) * 0.25 * 0.3 / 2))
        assert kernel_value_so3(k, 0.3, 0.0) == pytest.approx(expected, rel=1e-14)

    def test_haar_integral(self):
        g = make_grid("so3", 400)
        k = HeatKernelSO3(0.5, 60)
        assert g.integrate(kernel_value_so3(k, 0.5, g.nodes)) == pytest.approx(1.0, abs=1e-6)

    @pytest.mark.parametrize("a,b", [(0.3, 0.3), (1.0, 2.0), (0.1, 3.0), (2.5, 1.7), (3.1, 3.1)])
    @pytest.mark.parametrize("t", [0.5, 1.0])
    def test_class_kernel_is_conjugation_average(self, a, b, t):
        k = HeatKernelSO3(0.5, 60)
        expected = so3_conjugation_average(k, t, a, b)
        assert class_kernel_so3(k, t, a, b) == pytest.approx(expected, rel=1e-9, abs=1e-12)

    def test_class_kernel_at_identity_is_kernel(self):
        # averaging over conjugates of the identity changes nothing
        k = HeatKernelSO3(0.5, 60)
        th = np.linspace(0.1, 3.0, 7)
        np.testing.assert_allclose(class_kernel_so3(k, 0.7, 0.0, th), kernel_value_so3(k, 0.7, th),
                                   rtol=1e-12, atol=1e-13 * kernel_value_so3(k, 0.7, 0.0))


def _test_function(grid, rng):
    x = grid.nodes
    f = 1.5 + np.cos(x) * rng.uniform(-1, 1) + 0.3 * np.sin(2 * x + rng.uniform(0, 6))
    return np.exp(f)


@pytest.fixture(params=["so2", "so3"])
def setup(request):
    if request.param == "so2":
        return make_grid("so2", 512), HeatKernelSO2(1.0)
    return make_grid("so3", 400), HeatKernelSO3(0.5, 60)


class TestOperator:
    @pytest.mark.parametrize("t", [0.0, 0.05, 0.3, 1.0])
    def test_stochastic(self, setup, t):
        grid, k = setup
        op = semigroup(grid, k, t)
        np.testing.assert_allclose(op.apply(np.ones(grid.size)), 1.0, atol=1e-8)
        np.testing.assert_allclose(op.apply(np.zeros(grid.size), "log"), 0.0, atol=1e-8)

    def test_log_matches_linear(self, setup, rng):
        grid, k = setup
        for t in (0.2, 1.0):
            op = semigroup(grid, k, t)
            f = _test_function(grid, rng)
            np.testing.assert_allclose(op.apply(np.log(f), "log"), np.log(op.apply(f)), atol=1e-10)

    def test_so2_fft_matches_direct_quadrature(self, rng):
        grid = make_grid("so2", 128)
        k = HeatKernelSO2(1.0)
        f = _test_function(grid, rng)
        K = kernel_value_so2(k, 0.4, np.subtract.outer(grid.nodes, grid.nodes), 64)
        direct = K @ (f * grid.weights)
        np.testing.assert_allclose(semigroup(grid, k, 0.4).apply(f), direct, rtol=1e-12)

    @pytest.mark.parametrize("s,t", [(0.3, 0.7), (0.12, 0.55), (0.5, 0.5), (0.05, 0.9)])
    def test_semigroup_law(self, setup, rng, s, t):
        grid, k = setup
        tol = 1e-6 if grid.periodic else 1e-5
        f = _test_function(grid, rng)
        lhs = semigroup(grid, k, t).apply(semigroup(grid, k, s).apply(f))
        rhs = semigroup(grid, k, s + t).apply(f)
        assert np.max(np.abs(lhs - rhs)) / np.max(np.abs(rhs)) < tol
        lhs_log = semigroup(grid, k, t).apply(semigroup(grid, k, s).apply(np.log(f), "log"), "log")
        assert np.max(np.abs(lhs_log - np.log(rhs))) < tol

    def test_positivity_mass_smoothing(self, setup, rng):
        grid, k = setup
        op = semigroup(grid, k, 0.4)
        for _ in range(20):
            f = np.exp(rng.normal(size=grid.size))
            out = op.apply(f)
            assert np.all(out > 0)
            assert grid.integrate(out) == pytest.approx(grid.integrate(f), rel=1e-8)
            assert np.ptp(out) <= np.ptp(f) * (1 + 1e-12)

    def test_kernel_symmetry(self, setup):
        grid, k = setup
        K = SemigroupOperator(grid, k, 0.6).kernel_matrix()
        assert np.max(np.abs(K - K.T)) <= 1e-12 * np.max(K)

    def test_log_accepts_minus_infinity(self, setup):
        grid, k = setup
        g = np.zeros(grid.size)
        g[: grid.size // 2] = -np.inf
        out = semigroup(grid, k, 0.5).apply(g, "log")
        assert np.all(np.isfinite(out))

    def test_input_validation(self, setup):
        grid, k = setup
        op = semigroup(grid, k, 0.5)
        with pytest.raises(ValueError):
            op.apply(np.ones(grid.size + 1))
        with pytest.raises(ValueError):
            op.apply(-np.ones(grid.size))
        with pytest.raises(ValueError):
            op.apply(np.ones(grid.size), "cosine")

    def test_identity_at_zero(self, setup, rng):
        grid, k = setup
        g = rng.normal(size=grid.size)
        assert np.array_equal(semigroup(grid, k, 0.0).apply(g, "log"), g)

    def test_cache_returns_same_operator(self, setup):
        grid, k = setup
        assert semigroup(grid, k, 0.25) is semigroup(make_grid(grid.group, grid.size), k, 0.25)

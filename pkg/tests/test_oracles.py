import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from conftest import random_stable_system
from covkit import metrics, oracles, scenarios
from covkit.errors import InputError
from covkit.linalg import expm
from covkit.ss import StateSpaceModel


class TestVanLoan:
    def test_zero_dynamics_is_brownian(self):
        sys = StateSpaceModel([[0.0, 0.0], [0.0, 0.0]], [[1.0], [2.0]], [[1.0, 0.0]])
        d = oracles.van_loan_discretize(sys, 0.25)
        np.testing.assert_array_equal(d.Ad, np.eye(2))
        np.testing.assert_allclose(d.Qd, 0.25 * np.array([[1.0, 2.0], [2.0, 4.0]]), rtol=1e-14)

    def test_scalar_closed_form(self):
        a, b, h = -3.0, 2.0, 0.1
        d = oracles.van_loan_discretize(StateSpaceModel([[a]], [[b]], [[1.0]]), h)
        assert d.Ad[0, 0] == pytest.approx(np.exp(a * h), rel=1e-15)
        assert d.Qd[0, 0] == pytest.approx(b * b * (np.exp(2 * a * h) - 1) / (2 * a), rel=1e-13)

    def test_long_step_reaches_stationary_covariance(self, mimo):
        d = oracles.van_loan_discretize(mimo, 30.0)
        P = metrics.state_covariance(mimo)
        np.testing.assert_allclose(d.Qd, P, rtol=1e-9, atol=1e-12 * np.abs(P).max())

    def test_stationary_covariance_is_fixed_point(self, mimo):
        d = oracles.van_loan_discretize(mimo, 0.01)
        P = metrics.state_covariance(mimo)
        np.testing.assert_allclose(d.Ad @ P @ d.Ad.T + d.Qd, P, rtol=1e-10, atol=1e-13)

    def test_quadrature(self):
        A = np.array([[-1.0, 3.0], [-3.0, -1.0]])
        B = np.array([[1.0], [0.5]])
        h = 0.4
        d = oracles.van_loan_discretize(StateSpaceModel(A, B, [[1.0, 0.0]]), h)
        t = np.linspace(0, h, 2001)
        vals = np.array([expm(A, s) @ B @ B.T @ expm(A, s).T for s in t])
        w = np.ones(t.size)
        w[1:-1:2], w[2:-1:2] = 4, 2
        Q = (t[1] - t[0]) / 3 * np.tensordot(w, vals, axes=1)
        np.testing.assert_allclose(d.Qd, Q, rtol=1e-11)

    @given(st.integers(0, 10_000), st.floats(0.01, 0.5), st.floats(0.01, 0.5))
    @settings(max_examples=30, deadline=None)
    def test_semigroup(self, seed, h1, h2):
        sys = random_stable_system(np.random.default_rng(seed), 3, 2, 1)
        d1 = oracles.van_loan_discretize(sys, h1)
        d2 = oracles.van_loan_discretize(sys, h2)
        d12 = oracles.van_loan_discretize(sys, h1 + h2)
        np.testing.assert_allclose(d12.Ad, d2.Ad @ d1.Ad, rtol=1e-10, atol=1e-13)
        np.testing.assert_allclose(d12.Qd, d2.Ad @ d1.Qd @ d2.Ad.T + d2.Qd, rtol=1e-10, atol=1e-13)

    def test_bad_step(self, mimo):
        with pytest.raises(InputError):
            oracles.van_loan_discretize(mimo, 0.0)


class TestLde:
    def test_state_covariance_stays_stationary(self, mimo):
        aug = oracles.lde_integrate(mimo, 0.3, 300)
        P = metrics.state_covariance(mimo)
        np.testing.assert_allclose(aug.P, P, rtol=1e-10, atol=1e-12 * np.abs(P).max())

    @pytest.mark.parametrize("method,order", [("rk4", 4.0), ("trapezoid", 2.0)])
    def test_convergence_order(self, method, order):
        sys = random_stable_system(np.random.default_rng(21), 4, 1, 2)
        T = 0.8
        _, ref = metrics.pointing_covariances(sys, T)
        errs = [np.abs(oracles.lde_integrate(sys, T, n, method).z_covariance()
                       - ref.z_covariance()).max() for n in (16, 32, 64)]
        rates = np.log2(np.array(errs[:-1]) / np.array(errs[1:]))
        assert np.all(np.abs(rates - order) < 0.3), rates

    def test_trapezoid_converges_to_exact(self, mimo):
        _, ref = metrics.pointing_covariances(mimo, 0.3)
        aug = oracles.lde_integrate(mimo, 0.3, 4000, "trapezoid")
        np.testing.assert_allclose(aug.z_covariance(), ref.z_covariance(), rtol=1e-5)

    def test_invalid_arguments(self, mimo):
        with pytest.raises(InputError):
            oracles.lde_integrate(mimo, 0.3, 1)
        with pytest.raises(InputError):
            oracles.lde_integrate(mimo, -0.3, 10)
        with pytest.raises(InputError):
            oracles.lde_integrate(mimo, 0.3, 10, "euler")


class TestMonteCarlo:
    def test_zero_input_gives_zero(self):
        sys = StateSpaceModel([[-1.0]], [[0.0]], [[1.0]])
        rep = oracles.monte_carlo_metrics(sys, 0.1, 0.01, 50, seed=1)
        for k in "ADSJ":
            np.testing.assert_array_equal(rep.estimates()[k], 0.0)

    def test_deterministic_and_chunk_independent(self, mimo):
        a = oracles.monte_carlo_metrics(mimo, 0.1, 0.01, 300, seed=7, chunk=64)
        b = oracles.monte_carlo_metrics(mimo, 0.1, 0.01, 300, seed=7, chunk=300)
        for k in "ADSJ":
            np.testing.assert_array_equal(a.estimates()[k], b.estimates()[k])
        c = oracles.monte_carlo_metrics(mimo, 0.1, 0.01, 300, seed=8)
        assert not np.array_equal(a.est_A, c.est_A)

    def test_first_order_agrees(self):
        sys = scenarios.first_order_model()
        rep = oracles.monte_carlo_metrics(sys, 2.0, 0.01, 4000, seed=3)
        pc = metrics.first_order_closed_form(-1.0, np.sqrt(2.0), 2.0)
        z = rep.z_scores(pc)
        assert max(abs(z[k][0, 0]) for k in "ADSJ") < 4.0

    def test_step_must_divide_exposure(self, mimo):
        with pytest.raises(InputError):
            oracles.monte_carlo_metrics(mimo, 0.3, 0.07, 10, seed=0)

    def test_needs_two_trials(self, mimo):
        with pytest.raises(InputError):
            oracles.monte_carlo_metrics(mimo, 0.3, 0.01, 1, seed=0)

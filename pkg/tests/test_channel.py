import math

import numpy as np
import pytest

from calamp.channel import gain_CT, numeric_G, product_eh
from calamp.model import UniformGainPrior
from calamp.priors import gain_posterior_moments
from oracles import central_diff, central_diff2, gain_ct_reference


def random_tuple(rng, P):
    y = rng.normal(1.0, 0.6, size=P)
    omega = rng.normal(0.8, 0.6, size=P)
    V = rng.uniform(0.1, 2.0, size=P)
    prior = UniformGainPrior(center=1.0, variance=float(rng.uniform(0.002, 0.03)))
    return y, omega, V, prior


class TestProductEH:
    def test_consistent_reading_certain_gain(self):
        y = np.array([[1.3, -0.4]])
        V = np.array([[0.5, 2.0]])
        e, h = product_eh(y, y.copy(), V, np.array([1.0]), np.array([0.0]), 0.25)
        assert np.all(e == 0.0)
        assert np.allclose(h, 1.0 / (V + 0.25))

    def test_direct_arithmetic(self):
        e, h = product_eh(
            np.array([[2.0]]), np.array([[1.0]]), np.array([[1.0]]),
            np.array([1.0]), np.array([0.0]), 0.0,
        )
        assert e[0, 0] == 1.0
        assert h[0, 0] == 1.0

    def test_nonpositive_denominator_rejected(self):
        with pytest.raises(ValueError):
            product_eh(np.ones((1, 1)), np.ones((1, 1)), np.zeros((1, 1)),
                       np.ones(1), np.zeros(1), 0.0)

    def test_matches_generating_function_derivative(self):
        rng = np.random.default_rng(7)
        for _ in range(10):
            P = int(rng.integers(1, 4))
            y, omega, V, prior = random_tuple(rng, P)
            delta = 1e-3
            C2, T = gain_CT(y[None, :], omega[None, :], V[None, :], delta)
            gm = gain_posterior_moments(prior, P, C2, T)
            e, h = product_eh(y[None, :], omega[None, :], V[None, :],
                              gm.mean, gm.variance, delta)
            for n in range(P):
                def G_of_omega(x, n=n):
                    shifted = omega.copy()
                    shifted[n] = x
                    return numeric_G(y, shifted, V, 0.0, prior, delta)

                fd_e = central_diff(G_of_omega, omega[n], 1e-5)
                fd_h = -central_diff2(G_of_omega, omega[n], 1e-3)
                assert e[0, n] == pytest.approx(fd_e, abs=1e-5)
                assert h[0, n] == pytest.approx(fd_h, abs=1e-4)


class TestGainCT:
    def test_single_term(self):
        C2, T = gain_CT(np.array([[2.0]]), np.array([[2.0]]), np.array([[1.0]]), 0.0)
        assert C2[0] == pytest.approx(0.25)
        assert T[0] == pytest.approx(1.0)

    def test_matching_readings_give_unit_location(self):
        rng = np.random.default_rng(3)
        y = rng.normal(size=(5, 3))
        V = rng.uniform(0.2, 1.5, size=(5, 3))
        C2, T = gain_CT(y, y.copy(), V, 0.1)
        assert np.allclose(T, 1.0)

    def test_positive_c2(self):
        rng = np.random.default_rng(4)
        y = rng.normal(size=(20, 3))
        omega = rng.normal(size=(20, 3))
        V = rng.uniform(0.05, 2.0, size=(20, 3))
        C2, _ = gain_CT(y, omega, V, 1e-6)
        assert np.all(C2 > 0.0)

    def test_matches_kahan_reference(self):
        rng = np.random.default_rng(5)
        y = rng.normal(size=(8, 3))
        omega = rng.normal(size=(8, 3))
        V = rng.uniform(0.1, 2.0, size=(8, 3))
        C2, T = gain_CT(y, omega, V, 1e-4)
        rC2, rT = gain_ct_reference(y, omega, V, 1e-4)
        assert np.allclose(C2, rC2, rtol=1e-13)
        assert np.allclose(T, rT, rtol=1e-12)

    def test_uninformative_sensor(self):
        y = np.array([[0.0, 0.0], [1.0, 2.0]])
        with pytest.raises(ValueError, match="uninformative"):
            gain_CT(y, np.ones_like(y), np.ones_like(y), 0.0)


class TestNumericG:
    def test_point_mass_reduces_to_gaussian_loglik(self):
        rng = np.random.default_rng(6)
        y = rng.normal(size=3)
        omega = rng.normal(size=3)
        V = rng.uniform(0.5, 2.0, size=3)
        G = numeric_G(y, omega, V, 0.0, UniformGainPrior(1.0, 0.0), 0.0)
        expected = sum(
            -((y[n] - omega[n]) ** 2) / (2 * V[n]) - 0.5 * math.log(2 * math.pi * V[n])
            for n in range(3)
        )
        assert G == pytest.approx(expected, abs=1e-12)

    def test_point_mass_tilt_derivative_is_gain(self):
        rng = np.random.default_rng(8)
        y = rng.normal(size=2)
        omega = rng.normal(size=2)
        V = rng.uniform(0.5, 2.0, size=2)
        prior = UniformGainPrior(center=1.3, variance=0.0)
        fd = central_diff(lambda t: numeric_G(y, omega, V, t, prior, 0.0), 0.0, 1e-5)
        assert fd == pytest.approx(1.3, abs=1e-8)

    def test_tilt_derivatives_match_gain_moments(self):
        rng = np.random.default_rng(9)
        for _ in range(10):
            P = int(rng.integers(1, 4))
            y, omega, V, prior = random_tuple(rng, P)
            delta = 1e-3
            C2, T = gain_CT(y[None, :], omega[None, :], V[None, :], delta)
            gm = gain_posterior_moments(prior, P, C2, T)

            def G_of_theta(t):
                return numeric_G(y, omega, V, t, prior, delta)

            assert float(gm.mean[0]) == pytest.approx(central_diff(G_of_theta, 0.0, 1e-5), abs=1e-5)
            assert float(gm.variance[0]) == pytest.approx(
                central_diff2(G_of_theta, 0.0, 1e-3), abs=1e-4
            )

    def test_deterministic_in_nodes(self):
        y = np.array([0.5, 1.5])
        omega = np.array([0.4, 1.2])
        V = np.array([0.3, 0.9])
        prior = UniformGainPrior(1.0, 0.01)
        assert numeric_G(y, omega, V, 0.1, prior, 0.0) == numeric_G(y, omega, V, 0.1, prior, 0.0)

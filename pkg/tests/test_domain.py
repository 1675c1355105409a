import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy import integrate

from artifact.domain import (OnShellMomentum, boost_to_rest, four_velocity, make_shell_grid,
                             make_test_function, mdot, msq, on_shell, scale_switching,
                             shell_integrate, shell_volume, sphere_rule, translate)


def test_minkowski_products():
    assert mdot(np.array([2.0, 0, 0, 0]), np.array([2.0, 0, 0, 0])) == 4.0
    assert msq(np.array([1.0, 1.0, 0, 0])) == 0.0
    assert msq(on_shell(np.array([3.0, 0, 0]), 1.0)) == pytest.approx(1.0, abs=1e-14)


def test_on_shell_momentum_rejects_negative_mass():
    with pytest.raises(ValueError):
        OnShellMomentum(np.zeros(3), -1.0)


def test_boost_to_rest():
    u = four_velocity([0.3, -0.2, 0.5])
    L = boost_to_rest(u)
    assert np.allclose(L @ u, [1, 0, 0, 0], atol=1e-14)


def test_sphere_rule_area():
    _, w = sphere_rule(8, 12)
    assert w.sum() == pytest.approx(4 * np.pi, rel=1e-14)


def test_massless_shell_integral():
    g = make_shell_grid(0.0, 1.0, 2.0, 6, 4, 4)
    assert shell_integrate(g, lambda p: np.ones(len(p))) == pytest.approx(3 / (8 * np.pi ** 2), rel=1e-12)
    assert shell_volume(0.0, 1.0, 2.0) == pytest.approx(0.0379954, rel=1e-5)


def test_massive_shell_integral_matches_radial_oracle():
    g = make_shell_grid(1.0, 0.0, 2.0, 24, 4, 4)
    ref, _ = integrate.quad(lambda r: 4 * np.pi * r * r / (2 * np.sqrt(1 + r * r)), 0, 2)
    assert shell_integrate(g, lambda p: np.ones(len(p))) == pytest.approx(ref / (2 * np.pi) ** 3, rel=1e-12)
    assert shell_volume(1.0, 0.0, 2.0) == pytest.approx(ref / (2 * np.pi) ** 3, rel=1e-12)


def test_odd_function_integrates_to_zero():
    g = make_shell_grid(1.0, 0.0, 2.0, 8, 6, 8)
    assert abs(shell_integrate(g, lambda p: p[:, 3])) < 1e-15


def test_shell_mass_mismatch():
    g = make_shell_grid(1.0, 0.0, 2.0, 2, 2, 2)
    with pytest.raises(ValueError):
        shell_integrate(g, lambda p: p[:, 0], mass=0.0)


def test_profile_normalization_and_reality():
    eta = make_test_function("profile", 1.0)
    assert eta.momentum(np.zeros(4)) == pytest.approx(1.0)
    q = np.array([0.3, -0.4, 0.2, 0.9])
    eta_a = translate(eta, [0.5, 0.1, 0, 0])
    assert eta_a.momentum(-q) == pytest.approx(np.conj(eta_a.momentum(q)))
    # Gaussian transform pair: η(0) = 1/(4π²σ⁴)
    assert eta.position(np.zeros(4)) == pytest.approx(1 / (4 * np.pi ** 2))
    assert abs(eta.momentum(2 * q)) < abs(eta.momentum(q))


def test_shift_theorem():
    eta = make_test_function("profile", 0.7)
    a = np.array([0.3, 0.1, -0.2, 0.4])
    q = np.array([0.5, 0.2, 0.1, -0.3])
    assert translate(eta, a).momentum(q) == pytest.approx(np.exp(1j * mdot(q, a)) * eta.momentum(q))


def test_switching_normalization():
    g = make_test_function("switching", 1.3)
    assert g.position(np.zeros(4)) == pytest.approx(1.0)
    # ∫ĝ d⁴q/(2π)⁴ = g(0) = 1
    assert g.momentum(np.zeros(4)) == pytest.approx(4 * np.pi ** 2 * 1.3 ** 4)


@settings(max_examples=25, deadline=None)
@given(st.floats(0.05, 1.0), st.lists(st.floats(-3, 3), min_size=4, max_size=4))
def test_scaled_switching(eps, x):
    g = make_test_function("switching", 1.0)
    ge = scale_switching(g, eps)
    x = np.array(x)
    assert ge.position(x) == pytest.approx(g.position(eps * x), rel=1e-12, abs=1e-300)
    assert ge.momentum(np.zeros(4)) == pytest.approx(g.momentum(np.zeros(4)) / eps ** 4)


def test_invalid_sigma():
    with pytest.raises(ValueError):
        make_test_function("profile", -1.0)

import numpy as np
import pytest
from scipy import integrate

from artifact.adiabatic import eps_grid, fit
from artifact.domain import four_velocity, make_test_function, translate
from artifact.longrange import (CurrentSpec, coulomb_cutoff_momentum, coulomb_cutoff_time,
                                coulomb_divergent_scan, coulomb_finite, current_divergence_residual,
                                current_eval, current_timelike_limit, divergent_coefficient)

ETA = make_test_function("profile", 1.0)
G = make_test_function("switching", 1.0)
P1 = np.array([1.25, 0.75, 0.0, 0.0])
P2 = np.array([1.0, 0.0, 0.0, 0.0])


def test_position_current_matches_brute_line_integral():
    eta = make_test_function("profile", 0.8)
    v = four_velocity([0.3, 0.1, 0.0])
    x = np.array([0.3, 0.2, -0.1, 0.5])
    brute = integrate.quad(lambda t: eta.position(x - t * v), 0, np.inf, epsabs=1e-14)[0]
    assert current_eval(CurrentSpec(eta, v, "out"), x) == pytest.approx(brute, abs=1e-10)


def test_out_plus_in_equals_as():
    v = four_velocity([0.2, -0.4, 0.1])
    xs = np.random.default_rng(2).normal(size=(6, 4))
    tot = sum(current_eval(CurrentSpec(ETA, v, d), xs) for d in ("out", "in"))
    assert np.allclose(tot, current_eval(CurrentSpec(ETA, v, "as"), xs), atol=1e-14)


def test_fourier_as_current_has_no_pv():
    pv, delta = current_eval(CurrentSpec(ETA, P2, "as"), np.array([0.5, 0.1, 0.2, 0.0]), "fourier")
    assert pv == 0 and delta != 0


def test_divergence_identity():
    assert abs(current_divergence_residual(ETA, P2, np.array([1.0, 0, 0, 0]), "out")) <= 1e-12
    v = four_velocity([0.3, 0.1, 0.0])
    assert abs(current_divergence_residual(ETA, v, np.array([0.3, 1.0, 2.0, 0.1]), "in")) <= 1e-12
    with pytest.raises(ValueError):
        current_divergence_residual(ETA, P2, np.array([0.0, 1.0, 0, 0]))


def test_timelike_limit():
    eta = make_test_function("profile", 0.8)
    f = lambda p: np.exp(-np.sum((p[..., 1:] - np.array([0.2, 0, 0])) ** 2, axis=-1))
    v = four_velocity([0.3, 0.1, 0.0])
    for direction in ("as", "out"):
        sc = current_timelike_limit(eta, f, v, [1e3], direction=direction)
        assert sc.values[0] == pytest.approx(sc.metadata["theory"], rel=0.02)
    far = lambda p: np.exp(-np.sum((p[..., 1:] - np.array([5.0, 0, 0])) ** 2, axis=-1) * 20)
    assert current_timelike_limit(eta, far, v, [1e3]).values[0] < 1e-12


def test_divergent_coefficient_closed_form_and_fit():
    assert divergent_coefficient(P1, P2) == pytest.approx(1 / (3 * np.pi), rel=1e-12)
    eps = eps_grid(points=8)
    r1 = fit(coulomb_divergent_scan(G, P1, P2, eps), "log", part="re",
             theory=divergent_coefficient(P1, P2), tol=0.02)
    r2 = fit(coulomb_divergent_scan(make_test_function("switching", 2.0), P1, P2, eps), "log", part="re")
    assert r1.verdict == "pass"
    assert r2.params["b"] == pytest.approx(r1.params["b"], rel=0.02)
    assert abs(r2.params["a"] - r1.params["a"]) > 1e-3


def test_finite_part_preconditions_and_symmetry():
    with pytest.raises(ValueError):
        coulomb_finite(ETA, ETA, P1, P2)
    d = ETA - translate(ETA, [0.5, 0, 0, 0])
    a = coulomb_finite(d, ETA, P1, P2).value
    b = coulomb_finite(ETA, d, P2, P1).value
    assert a == pytest.approx(b, abs=1e-8)


def test_time_and_momentum_representations_agree():
    d = ETA - translate(ETA, [0.5, 0, 0, 0])
    t = coulomb_cutoff_time(d, ETA, G, 0.1, P1, P2, n=14, n_tau=64)
    m = coulomb_cutoff_momentum(d, ETA, G, 0.1, P1, P2)
    tv = t[0] if isinstance(t, tuple) else t
    mv = m[0] if isinstance(m, tuple) else m
    assert np.real(tv) == pytest.approx(np.real(mv), rel=0.02, abs=1e-4)

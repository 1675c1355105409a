import numpy as np
import pytest

from artifact import diracqed as D
from artifact.adiabatic import fit
from artifact.amplitudes import RenormConstants
from artifact.domain import four_velocity, make_shell_grid, make_test_function, on_shell

P = on_shell(np.array([0.3, -0.2, 0.5]), 1.0)


def test_gamma_algebra():
    assert D.gamma_algebra_residual() <= 1e-12
    for mu in range(4):
        assert np.abs(D.GAMMA5 @ D.GAMMA[mu] + D.GAMMA[mu] @ D.GAMMA5).max() < 1e-15


def test_spinors():
    for s in (1, 2):
        u = D.spinor(s, P)
        assert (D.bar(u) @ u).real == pytest.approx(2.0, abs=1e-12)
        assert np.abs((D.slash(P) - D.ONE) @ u).max() < 1e-12
    assert D.polsum_residual(P) <= 1e-12


def test_soft_vertex_slope_and_sign():
    scales = np.geomspace(1e-1, 1e-4, 8)
    for kind in ("u", "v"):
        r = fit(D.soft_vertex_residual(P, scales, kind), "power")
        assert r.params["alpha"] == pytest.approx(1.0, abs=0.05)


def test_xi_on_shell():
    for c1 in (0.0, 0.3):
        rc = RenormConstants(c1=c1, c2=0.7)
        for s in (1, 2):
            for s2 in (1, 2):
                want = (s == s2) * c1 / (2 * np.pi ** 2)
                assert D.onshell_sandwich(P, s, s2, rc) == pytest.approx(want, abs=1e-10)


def test_xi_hermitian():
    qs = [np.array([1.5, 0.2, 0.1, 0.3]), np.array([0.4, 1.0, 0.0, 0.2])]
    assert D.xi_hermiticity_residual(qs, RenormConstants(0.1, 0.2)) < 1e-14


def test_xi_near_shell_kills_log():
    rc = RenormConstants()
    x = np.geomspace(1e-2, 1e-5, 6)
    vals = np.array([D.xi_scalar(1.0 + xi, rc) for xi in x])
    # (q²−m²)log|q²−m²| behaviour: ratio to x log x tends to a constant
    ratio = vals / (x * np.log(x))
    assert abs(ratio[-1] - ratio[-2]) < 0.05 * abs(ratio[-1])


def test_intertwiner_kernels():
    eta = make_test_function("profile", 0.8)
    eta2 = make_test_function("profile", 0.8, [0.3, 0, 0, 0])
    v = np.array([1.0, 0, 0, 0])
    k = np.array([1.0, 0.6, 0.0, 0.8])
    assert np.all(D.intertwiner_vector(eta, eta, v, P, k) == 0)
    grid = make_shell_grid(0.0, 0.05, 3.0, 4, 4, 4)
    assert D.intertwiner_two_body(eta, eta, v, P, on_shell(np.array([0.1, 0, 0]), 1.0), grid) == 0
    assert abs(D.lsz_transversality(eta2, v, k, P)) < 1e-10


def test_tail_and_flux():
    assert np.all(D.em_tail(np.array([[0, 0, 1.0]]), four_velocity([0.1, 0, 0]), 0) == 0)
    a = D.em_tail_and_flux(np.array([1.0, 0, 0, 0]), 1.0)
    assert a["flux"] == pytest.approx(a["theory"], rel=1e-3)
    b = D.em_tail_and_flux(four_velocity([0.5, 0.2, -0.1]), 1.0, n_theta=96, n_phi=96)
    assert b["flux"] == pytest.approx(a["flux"], rel=5e-3)

import numpy as np
import pytest

from artifact.adiabatic import (EpsScan, ScanError, algebraic_identity_residual, divergence_verdict,
                                eps_grid, eps_scan, fit, locality_check, lojasiewicz_value,
                                superpolynomial_verdict)


def test_default_grid():
    e = eps_grid()
    assert len(e) == 12 and e[0] == pytest.approx(0.1) and e[-1] == pytest.approx(1e-4)


def test_scan_constant_and_parallel_determinism():
    sc = eps_scan(lambda e: 3.0)
    assert np.all(sc.values == 3.0)
    f = lambda e: np.sin(e) * e ** 1.3
    assert eps_scan(f, workers=4).to_csv() == eps_scan(f).to_csv()


def test_scan_error_names_eps():
    def bad(e):
        if e < 1e-3:
            raise RuntimeError("boom")
        return e
    with pytest.raises(ScanError) as err:
        eps_scan(bad)
    assert err.value.eps < 1e-3


def test_scan_rejects_increasing_grid():
    with pytest.raises(ValueError):
        eps_scan(lambda e: e, [1e-3, 1e-2])


def test_fit_models_on_synthetic_data():
    sc = eps_scan(lambda e: e ** 2)
    assert fit(sc, "power").params["alpha"] == pytest.approx(2.0, abs=1e-6)
    b = 1 / (3 * np.pi)
    sc = eps_scan(lambda e: 0.2 + b * np.log(1 / e))
    r = fit(sc, "log", theory=b, tol=1e-6)
    assert r.params["a"] == pytest.approx(0.2, abs=1e-6) and r.verdict == "pass"
    sc = eps_scan(lambda e: 3 * e ** 0.95)
    assert fit(sc, "auto").params["alpha"] == pytest.approx(0.95, abs=1e-6)
    c = fit(eps_scan(lambda e: 1.5), "auto")
    assert c.model == "constant" and c.params["b"] == 0.0


def test_noisy_fit_reports_r2():
    rng = np.random.default_rng(0)
    eps = eps_grid()
    sc = EpsScan(eps, eps * (1 + 0.05 * rng.normal(size=len(eps))))
    r = fit(sc, "power")
    assert 0.9 < r.r2 < 1.0


def test_divergence_witness():
    r = divergence_verdict(eps_scan(lambda e: 0.01 / e))
    assert r.verdict == "divergent" and r.witness > 0
    assert divergence_verdict(eps_scan(lambda e: e)).verdict == "not-divergent"


def test_csv_schema():
    assert eps_scan(lambda e: 1j * e).to_csv().splitlines()[0] == "eps,re,im,abs"


def test_superpolynomial():
    eps = np.geomspace(0.1, 0.01, 5)
    assert superpolynomial_verdict(eps, np.exp(-1 / eps))
    assert not superpolynomial_verdict(eps, eps ** 3)


def test_lojasiewicz_corpus():
    r = lojasiewicz_value(lambda q: np.cos(q[..., 0]) + q[..., 0] ** 2)
    assert r["verdict"] == "value" and r["value"] == pytest.approx(1.0, abs=1e-3)
    r = lojasiewicz_value(lambda q: np.ones(q.shape[:-1]), h=lambda q: q[..., 0])
    assert r["verdict"] == "value" and abs(r["value"]) < 1e-3
    r = lojasiewicz_value(lambda q: np.sign(q[..., 0]))
    assert r["verdict"] == "no Łojasiewicz value"


def test_lojasiewicz_compositionality():
    t = lambda q: np.exp(q[..., 0]) + 2.0
    h = lambda q: 3.0 + q[..., 0]
    a = lojasiewicz_value(t)["value"]
    b = lojasiewicz_value(t, h)["value"]
    assert b == pytest.approx(3.0 * a, rel=1e-3)


def test_bch_and_magnus():
    A = np.zeros((3, 3)); A[0, 1] = 1.0
    B = np.zeros((3, 3)); B[1, 2] = 1.0
    assert algebraic_identity_residual("bch", A, B) <= 1e-12
    C = np.diag([1.0, 2.0, 3.0])
    assert algebraic_identity_residual("bch", C, 2 * C) <= 1e-12
    mats = [0.3 * A + 0.1 * B, -0.2 * A + 0.5 * B, 0.7 * A - 0.4 * B]
    assert algebraic_identity_residual("magnus", mats, [0.4, 1.1, 0.6]) <= 1e-12
    big = np.random.default_rng(1).normal(size=(3, 3))
    with pytest.raises(ValueError):
        algebraic_identity_residual("bch", big, big.T)


def test_locality_check_controls():
    assert locality_check(lambda e: 0.0).verdict == "superpolynomial"
    assert locality_check(lambda e: e ** 2).verdict == "not-superpolynomial"
    with pytest.raises(ValueError):
        locality_check(None)

import numpy as np
import pytest
from scipy import special

from artifact.propagators import (kernel_identity_residual, massless_dirac_gaussian_pairing,
                                  massless_dirac_position, propagator_kernel, pv_integrate)


@pytest.mark.parametrize("identity", ["feynman-split", "dirac-average",
                                      "retarded-minus-advanced-equals-commutator"])
def test_kernel_identities(identity):
    assert kernel_identity_residual(identity) <= 1e-12


def test_kernel_differences_vanish():
    f = propagator_kernel("feynman")
    d = f - (propagator_kernel("wightman") + propagator_kernel("advanced"))
    assert d.pv == 0 and d.delta_pos == 0 and d.delta_neg == 0


def test_unknown_kind():
    with pytest.raises(ValueError):
        propagator_kernel("causal")


def test_pv_odd_gaussian():
    val, _ = pv_integrate(lambda x: np.exp(-x * x), 0.0)
    assert abs(val) < 1e-12


def test_pv_shifted_gaussian_matches_dawson():
    # PV∫e^{-(x-1)²}/x dx = PV∫e^{-y²}/(y+1) dy = 2√π D(1)
    val, _ = pv_integrate(lambda x: np.exp(-(x - 1) ** 2), 0.0)
    assert val.real == pytest.approx(2 * np.sqrt(np.pi) * special.dawsn(1.0), abs=1e-10)


def test_pv_pole_outside_support():
    val, _ = pv_integrate(lambda x: np.exp(-x * x), 5.0, (-1.0, 1.0))
    from scipy import integrate
    ref, _ = integrate.quad(lambda x: np.exp(-x * x) / (x - 5.0), -1, 1)
    assert val.real == pytest.approx(ref, rel=1e-12)


def test_massless_dirac_support_and_pairing():
    assert massless_dirac_position(np.array([1.0, 0.5, 0, 0])) == 0.0
    s = 0.8
    pos = massless_dirac_gaussian_pairing(s, "position")
    mom = massless_dirac_gaussian_pairing(s, "momentum")
    assert pos == pytest.approx(s * s / 2, rel=1e-10)
    assert mom == pytest.approx(pos, rel=1e-6)

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from artifact import fock as F
from artifact.domain import MassShellGrid, make_shell_grid, make_test_function, on_shell


@pytest.fixture(scope="module")
def grids():
    eg = make_shell_grid(1.0, 0.2, 0.8, 2, 2, 2)
    pg = make_shell_grid(0.0, 0.0, 3.0, 2, 2, 2)
    return eg, F.PhotonSpace(pg, 6)


@pytest.fixture(scope="module")
def profiles():
    return (make_test_function("profile", 0.8),
            make_test_function("profile", 0.8, [0.3, 0.2, 0.0, 0.0]),
            make_test_function("profile", 0.8, [-0.2, 0.0, 0.4, 0.1]))


def mixed_state(eg, ph):
    N = len(eg)
    psi1 = np.zeros(N)
    psi1[[0, 3, 5]] = [1.0, 0.5, -0.3]
    one = F.electron_state(eg, ph, psi1)
    h = np.zeros((N, N))
    h[0, 3] = h[3, 0] = 1.0
    h[1, 6] = h[6, 1] = 0.7
    two = F.electron_state(eg, ph, h)
    s = one.scaled(1 / F.inner_norm(one)) + two.scaled(1 / F.inner_norm(two))
    return s.scaled(1 / F.inner_norm(s))


def test_occupation_space_dimension(grids):
    _, ph = grids
    from math import comb
    assert ph.dim == comb(ph.n_modes + 6, 6)


def test_commutator_on_truncation(grids):
    _, ph = grids
    a0 = ph.lower(0).toarray()
    comm = a0 @ a0.T - a0.T @ a0
    low = ph.number < ph.n_max
    assert np.allclose(comm[np.ix_(low, low)], np.eye(low.sum()))


def test_one_electron_norm_matches_gaussian_shell_integral():
    eg = make_shell_grid(1.0, 0.0, 6.0, 40, 4, 4)
    ph = F.PhotonSpace(make_shell_grid(0.0, 0.0, 1.0, 1, 1, 1), 0)
    psi = np.exp(-0.5 * np.sum(eg.nodes[:, 1:] ** 2, axis=1))
    s = F.electron_state(eg, ph, psi)
    from scipy import integrate
    ref, _ = integrate.quad(lambda r: 4 * np.pi * r * r * np.exp(-r * r) / ((2 * np.pi) ** 3 * 2 * np.sqrt(r * r + 1)), 0, 12)
    assert F.inner_norm(s) ** 2 == pytest.approx(ref, rel=1e-8)


def test_distinct_sectors_orthogonal(grids):
    eg, ph = grids
    a = F.electron_state(eg, ph, np.eye(len(eg))[1])
    b = F.vacuum(eg, ph)
    assert F.inner_norm(a, b) == 0


def test_two_photon_norm_matches_permutation_oracle():
    eg = make_shell_grid(1.0, 0.2, 0.8, 1, 1, 2)
    pg = make_shell_grid(0.0, 0.1, 2.0, 2, 2, 2)
    ph = F.PhotonSpace(pg, 2)
    rng = np.random.default_rng(3)
    f1, f2 = rng.normal(size=len(pg)), rng.normal(size=len(pg))
    h = (np.outer(f1, f2) + np.outer(f2, f1)) / np.sqrt(2)
    wf = F.SampledWaveFunction(F.SectorLabel(0, 2), eg, pg, h + 0j)
    s = F.from_sectors(eg, ph, [wf])
    w = pg.weights
    n1, n2, c = (f1 * f1) @ w, (f2 * f2) @ w, (f1 * f2) @ w
    assert F.inner_norm(s) ** 2 == pytest.approx(n1 * n2 + c * c, rel=1e-12)
    assert wf.norm() ** 2 == pytest.approx(n1 * n2 + c * c, rel=1e-12)


def test_asymmetric_wave_function_rejected(grids):
    eg, ph = grids
    h = np.zeros((len(eg), len(eg)))
    h[0, 1] = 1.0
    with pytest.raises(ValueError):
        F.electron_state(eg, ph, h)


def test_zero_kernel_displacement_is_identity(grids, profiles):
    eg, ph = grids
    s = mixed_state(eg, ph)
    eta = profiles[0]
    out = F.coherent_displace(s, F.profile_difference_kernel(eta, eta))
    assert F.inner_norm(out - s) == 0


def test_displacement_norm_and_photon_number(grids, profiles):
    eg, ph = grids
    s = F.electron_state(eg, ph, np.eye(len(eg))[2] / np.sqrt(eg.weights[2]))
    kern = F.profile_difference_kernel(profiles[1], profiles[0])
    e = 0.3
    out = F.coherent_displace(s, kern, e)
    assert abs(F.inner_norm(out) - 1.0) <= out.remainder + 1e-14
    V = kern.matrix(eg.nodes, ph)[2]
    expected = e ** 2 * np.sum(ph.w * np.abs(V) ** 2)
    blk = out.blocks[1]
    number = np.sum(np.abs(blk) ** 2 * ph.number[None, :])
    assert number == pytest.approx(expected, abs=10 * out.remainder_bound + 1e-12)


def test_displacement_rejects_lower_nmax(grids, profiles):
    eg, ph = grids
    s = F.electron_state(eg, ph, np.eye(len(eg))[2])
    with pytest.raises(ValueError):
        F.coherent_displace(s, F.profile_difference_kernel(*profiles[:2]), n_max=3)


def test_number_phase(grids):
    eg, ph = grids
    N = len(eg)
    s = mixed_state(eg, ph)
    zero = F.NumberPhaseKernel(np.zeros(N), np.zeros((N, N)))
    assert F.inner_norm(F.number_phase_apply(s, zero) - s) == 0
    rng = np.random.default_rng(0)
    w = rng.normal(size=(N, N))
    w = w + w.T
    u = rng.normal(size=N)
    out = F.number_phase_apply(s, F.NumberPhaseKernel(u, w), 0.5)
    assert F.inner_norm(out) == pytest.approx(F.inner_norm(s), rel=1e-14)
    # hand-applied phase on the (0, 3) configuration
    row = 0 * N + 3
    ph0 = np.exp(1j * 0.25 * (u[0] + u[3] + w[0, 3]))
    assert out.blocks[2][row, 0] == pytest.approx(ph0 * s.blocks[2][row, 0], abs=1e-15)


def test_number_phase_rejects_complex():
    with pytest.raises(ValueError):
        F.NumberPhaseKernel(np.array([1j]), np.zeros((1, 1)))


def test_intertwiner_identity_composition_inverse(grids, profiles):
    eg, ph = grids
    s = mixed_state(eg, ph)
    eta, eta1, eta2 = profiles
    assert F.inner_norm(F.intertwiner_apply(s, eta, eta) - s) == 0
    for direction in ("out", "in"):
        a = F.intertwiner_apply(F.intertwiner_apply(s, eta1, eta2, direction), eta, eta1, direction)
        b = F.intertwiner_apply(s, eta, eta2, direction)
        assert F.inner_norm(a - b) <= 1e-8 + a.remainder + b.remainder
        c = F.intertwiner_apply(F.intertwiner_apply(s, eta1, eta, direction), eta, eta1, direction)
        assert F.inner_norm(c - s) <= 1e-8 + c.remainder
        assert abs(F.inner_norm(b) - 1.0) <= 1e-12 + b.remainder


def test_intertwiner_qed_composition(profiles):
    eg = make_shell_grid(1.0, 0.2, 0.8, 2, 2, 1)
    ph = F.PhotonSpace(make_shell_grid(0.0, 0.0, 3.0, 2, 1, 2), 4, polarizations=2)
    h = np.zeros((len(eg), len(eg)))
    h[0, 2] = h[2, 0] = 1.0
    s = F.electron_state(eg, ph, h, charges=(1, -1))
    eta, eta1, eta2 = profiles
    v = np.array([1.0, 0.0, 0.0, 0.0])
    a = F.intertwiner_apply(F.intertwiner_apply(s, eta1, eta2, model="qed", v=v), eta, eta1, model="qed", v=v)
    b = F.intertwiner_apply(s, eta, eta2, model="qed", v=v)
    assert F.inner_norm(a - b) <= 1e-8 + a.remainder + b.remainder
    with pytest.raises(ValueError):
        F.intertwiner_apply(s, eta, eta2, model="qed")


def test_intertwiner_d2_violation(grids, profiles):
    eg, ph = grids
    h = np.zeros((len(eg), len(eg)))
    h[1, 1] = 1.0
    s = F.electron_state(eg, ph, h)
    with pytest.raises(ValueError, match="D2"):
        F.intertwiner_apply(s, profiles[0], profiles[1])


def test_translations(grids, profiles):
    eg, ph = grids
    s = mixed_state(eg, ph)
    eta = profiles[0]
    a1, a2 = np.array([0.4, 0.1, 0.0, 0.2]), np.array([-0.3, 0.2, 0.5, 0.0])
    u = F.translate(s, a1)
    assert F.inner_norm(u) == pytest.approx(F.inner_norm(s), rel=1e-14)
    x = F.translate(F.translate(s, a2, "modified", eta), a1, "modified", eta)
    y = F.translate(s, a1 + a2, "modified", eta)
    assert F.inner_norm(x - y) <= 1e-8 + x.remainder + y.remainder
    vac = F.vacuum(eg, ph)
    assert F.inner_norm(F.translate(vac, a1, "modified", eta) - vac) == 0
    # electron-free states: modified equals standard
    pg = ph.grid
    wf = F.SampledWaveFunction(F.SectorLabel(0, 1), eg, pg, np.arange(len(pg)) + 0j)
    photon = F.from_sectors(eg, ph, [wf])
    assert F.inner_norm(F.translate(photon, a1, "modified", eta) - F.translate(photon, a1)) == 0
    with pytest.raises(ValueError):
        F.translate(s, a1, "modified")


def test_pmod_vacuum_and_fiber_formula(profiles):
    assert all(F.pmod_expectation(F.vacuum(make_shell_grid(1.0, 0.2, 0.8, 1, 1, 1),
                                           F.PhotonSpace(make_shell_grid(0.0, 0.0, 3.0, 2, 2, 2), 2)),
                                  profiles[0], mu) == 0.0 for mu in range(4))
    sig, e = 0.8, 0.3
    p = on_shell(np.array([0.4, 0.1, -0.2]), 1.0)
    eg = MassShellGrid(1.0, p[None, :], np.array([1.0]))
    ph = F.PhotonSpace(make_shell_grid(0.0, 0.0, 4.0 / sig, 8, 4, 4), 2)
    s = F.electron_state(eg, ph, np.array([1.0]))
    eta = make_test_function("profile", sig)
    # ∫dμ₀ k⁰|η̂/(p·k)|² = (1/16π³)(4π/m²)(1/2)√(π/2σ²)
    corr = e ** 2 / 4 * (1 / (16 * np.pi ** 3)) * 4 * np.pi * 0.5 * np.sqrt(np.pi / (2 * sig ** 2))
    got = F.pmod_expectation(s, eta, 0, e) - p[0]
    assert got == pytest.approx(corr, rel=0.01)


def test_pmod_equals_displaced_standard_momentum(grids, profiles):
    eg, ph = grids
    eta = profiles[0]
    s = F.electron_state(eg, ph, np.eye(len(eg))[4] / np.sqrt(eg.weights[4]))
    e = 0.3
    # a − β = W(−β)* a W(−β): displace by −η̂/(2p·k) and measure the free momentum
    kern = F.profile_difference_kernel(F._ZERO, eta)
    d = F.coherent_displace(s, kern, e)
    zero = make_test_function("profile", 50.0)   # η̂ ≈ 0 on the photon grid
    for mu in range(4):
        assert F.pmod_expectation(s, eta, mu, e) == pytest.approx(
            F.pmod_expectation(d, zero, mu, e), abs=1e-6)


def test_positivity_probe(grids, profiles):
    eg, ph = grids
    rng = np.random.default_rng(11)
    for _ in range(3):
        s = mixed_state(eg, ph)
        kern = F.profile_difference_kernel(profiles[1], profiles[0])
        s = F.coherent_displace(s, kern, rng.uniform(0.1, 1.0))
        sq, kk = F.pmod_positivity(F.embed(s, 6), profiles[0])
        assert sq >= -1e-10 and kk >= -1e-10


def test_domain_classify(grids, profiles):
    eg, ph = grids
    s = mixed_state(eg, ph)
    assert F.domain_classify(s, soft_cut=0.0).label == "D_reg"
    h = np.zeros((len(eg), len(eg)))
    h[1, 1] = 1.0
    rep = F.domain_classify(F.electron_state(eg, ph, h))
    assert "D_2" not in rep.members
    # photon wave function η̂(k)/(p·k) with η̂(0)=0
    pg = make_shell_grid(0.0, 0.0, 2.0, 6, 2, 2)
    ph2 = F.PhotonSpace(pg, 1)
    diff = profiles[1] - profiles[0]
    p = on_shell(np.array([0.2, 0.0, 0.0]), 1.0)
    wf = F.SampledWaveFunction(F.SectorLabel(0, 1), eg, pg, diff.momentum(pg.nodes) / (pg.nodes @ (p * [1, -1, -1, -1])))
    rep = F.domain_classify(F.from_sectors(eg, ph2, [wf]))
    assert "D_1" in rep.members and "D_reg" not in rep.members


def test_json_round_trip(grids, profiles):
    eg, _ = grids
    ph = F.PhotonSpace(make_shell_grid(0.0, 0.0, 3.0, 2, 2, 2), 3)
    s = F.electron_state(eg, ph, np.eye(len(eg))[2])
    d = F.coherent_displace(s, F.profile_difference_kernel(profiles[1], profiles[0]))
    for layout in ("tensor", "occupation"):
        r = F.from_json(F.to_json(d, layout))
        assert F.inner_norm(r - d) < 1e-15
        assert r.remainder == d.remainder


@settings(max_examples=20, deadline=None)
@given(st.lists(st.floats(-2, 2), min_size=3, max_size=3))
def test_standard_translation_preserves_norm(a3):
    eg = make_shell_grid(1.0, 0.2, 0.8, 1, 2, 2)
    ph = F.PhotonSpace(make_shell_grid(0.0, 0.1, 2.0, 1, 2, 2), 2)
    s = F.electron_state(eg, ph, np.arange(1, len(eg) + 1, dtype=float))
    a = np.array([0.3] + a3)
    assert F.inner_norm(F.translate(s, a)) == pytest.approx(F.inner_norm(s), rel=1e-13)

"""First- and second-order amplitude flows under the scaled switching g_ε, their
adiabatic limits, and the self-energy / vacuum-polarization / bubble kernels.

Every flow resolves one Dirac delta analytically and integrates the remaining
smearing variables with Gauss-Hermite rules adapted to the Gaussian ĝ.  The
switching function enters through

    ∫ d⁴q/(2π)⁴ ĝ(q) H(q) = norm · E[mod(q) H(q)],   q ~ N(0, σ⁻² 𝟙₄),

where mod(q) = Σ c_j e^{iq·a_j} carries translations/combinations of g.
Photon arguments of first-order decay flows are returned in units of ε
(`Flow.scaled`), which leaves the L² norm unchanged.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy import integrate, special

from .adiabatic import EpsScan, superpolynomial_verdict_log
from .domain import (MassShellGrid, TestFunction, euclid_sq, gauss_legendre, make_shell_grid,
                     mdot, msq, on_shell, shell_energy, sphere_rule)
from .propagators import propagator_kernel

PROCESSES = ("decay_A", "absorption_B", "trivial_A", "trivial_B", "trivial_C", "trivial_D",
             "bubble", "vac_pol_A", "vac_pol_B", "vac_pol_C", "self_energy", "compton_AB",
             "compton_C", "compton_D", "pair_A", "pair_B", "moller")
TWO_PI = 2.0 * np.pi


@dataclass(frozen=True)
class RenormConstants:
    """c1, c2 fix the self-energy; the flags select the subtracted loop kernels."""
    c1: float = 0.0
    c2: float = 0.0
    vp_subtracted: bool = True       # Π(0) = Π'(0) = 0
    bubble_subtracted: bool = True   # t̃(q) = O(|q|⁵)

    def to_dict(self):
        return {"c1": self.c1, "c2": self.c2, "vp_subtracted": self.vp_subtracted,
                "bubble_subtracted": self.bubble_subtracted}


# ----------------------------------------------------------- wave packets

@dataclass(frozen=True)
class WavePacket:
    """Gaussian packet exp(-|p⃗ - c|²/(2w²)) on H_mass (callable on four-momenta)."""
    mass: float
    center: tuple
    width: float
    amplitude: complex = 1.0

    def __call__(self, p):
        p = np.asarray(p, dtype=float)
        d = p[..., 1:] - np.asarray(self.center, dtype=float)
        return self.amplitude * np.exp(-np.sum(d * d, axis=-1) / (2 * self.width ** 2))

    def grid(self, n_radial=3, n_theta=4, n_phi=6, radius=None) -> MassShellGrid:
        radius = 3.0 * self.width if radius is None else radius
        return make_shell_grid(self.mass, 0.0, radius, n_radial, n_theta, n_phi,
                               center=self.center)

    def params(self):
        return {"mass": self.mass, "center": list(self.center), "width": self.width}


@dataclass(frozen=True)
class ProductPacket:
    """f(x₁,x₂) = a(x₁)b(x₂) (+ a(x₂)b(x₁) when symmetric)."""
    first: WavePacket
    second: WavePacket
    symmetric: bool = True

    def __call__(self, x1, x2):
        v = self.first(x1) * self.second(x2)
        if self.symmetric:
            v = v + self.first(x2) * self.second(x1)
        return v

    def params(self):
        return {"first": self.first.params(), "second": self.second.params(),
                "symmetric": self.symmetric}


@dataclass
class Flow:
    """Flow values on output nodes with the product quadrature weights."""
    process: str
    variant: str
    eps: float
    values: np.ndarray
    weights: np.ndarray | None = None
    scaled: bool = False
    metadata: dict = field(default_factory=dict)

    def norm(self) -> float:
        if self.weights is None:
            raise ValueError("flow has no quadrature weights")
        return float(np.sqrt(np.sum(self.weights * np.abs(self.values) ** 2)))

    def sup(self) -> float:
        return float(np.abs(self.values).max())


def relative_l2(a: Flow, b: Flow) -> float:
    return float(np.sqrt(np.sum(a.weights * np.abs(a.values - b.values) ** 2))
                 / np.sqrt(np.sum(a.weights * np.abs(b.values) ** 2)))


# ---------------------------------------------------------- Gaussian rules

@dataclass(frozen=True)
class _Switch:
    sigma: float
    amp: float
    centers: np.ndarray
    coeffs: np.ndarray

    @property
    def norm(self):
        return self.amp / (4 * np.pi ** 2 * self.sigma ** 4)

    @property
    def trivial(self):
        return len(self.coeffs) == 1 and not np.any(self.centers)

    def mod(self, q):
        q = np.asarray(q, dtype=float)
        if self.trivial:
            return np.full(q.shape[:-1], complex(self.coeffs[0]))
        out = np.zeros(q.shape[:-1], dtype=complex)
        for a, c in zip(self.centers, self.coeffs):
            out += c * np.exp(1j * mdot(q, a))
        return out

    def mod_conditional(self, what, tau):
        """E over q⊥ of mod(τ ŵ/σ + q⊥) for Euclidean unit ŵ (q⊥ Gaussian, ⊥ ŵ)."""
        tau = np.asarray(tau, dtype=float)
        if self.trivial:
            return np.full(tau.shape, complex(self.coeffs[0]))
        out = np.zeros(tau.shape, dtype=complex)
        for a, c in zip(self.centers, self.coeffs):
            at = np.concatenate([[a[0]], -np.asarray(a[1:])])   # q·a = q_E · ã
            par = float(what @ at)
            perp2 = float(at @ at - par * par)
            out += c * np.exp(1j * tau * par / self.sigma - perp2 / (2 * self.sigma ** 2))
        return out


def _switch(g: TestFunction) -> _Switch:
    if g.kind != "switching":
        raise ValueError("g must be a switching function")
    if g.eps != 1.0:
        raise ValueError("pass the unscaled switching function; flows apply ε themselves")
    return _Switch(float(g.sigma), float(g.amp), np.asarray(g.centers, float),
                   np.asarray(g.coeffs, float))


def _gh_normal(dim, n, std):
    """Nodes/weights for E over N(0, std² 𝟙_dim) (weights sum to 1)."""
    x, w = np.polynomial.hermite_e.hermegauss(n)
    w = w / np.sqrt(TWO_PI)
    mesh = np.meshgrid(*([x] * dim), indexing="ij")
    pts = np.stack([c.ravel() for c in mesh], axis=-1) * std
    wts = np.ones(len(pts))
    for c in np.meshgrid(*([w] * dim), indexing="ij"):
        wts = wts * c.ravel()
    return pts, wts


def _perp_basis(n):
    """Two unit 3-vectors completing n (..., 3) to an orthonormal frame."""
    n = np.asarray(n, dtype=float)
    ref = np.where((np.abs(n[..., 2]) < 0.9)[..., None], np.array([0.0, 0.0, 1.0]),
                   np.array([1.0, 0.0, 0.0]))
    e1 = np.cross(n, ref)
    e1 /= np.linalg.norm(e1, axis=-1, keepdims=True)
    return e1, np.cross(n, e1)


def _to_rest(P, x):
    """Components of x in the rest frame of the timelike P (broadcasting)."""
    s = np.sqrt(msq(P))
    P0, Pv = P[..., 0], P[..., 1:]
    x0, xv = x[..., 0], x[..., 1:]
    pdx = np.sum(Pv * xv, axis=-1)
    y0 = (P0 * x0 - pdx) / s
    yv = xv + Pv * (pdx / (s * (P0 + s)) - x0 / s)[..., None]
    return np.concatenate([y0[..., None], yv], axis=-1)


def _from_rest(P, y):
    s = np.sqrt(msq(P))
    P0, Pv = P[..., 0], P[..., 1:]
    y0, yv = y[..., 0], y[..., 1:]
    pdy = np.sum(Pv * yv, axis=-1)
    x0 = (P0 * y0 + pdy) / s
    xv = yv + Pv * (pdy / (s * (P0 + s)) + y0 / s)[..., None]
    return np.concatenate([x0[..., None], xv], axis=-1)


def _two_body(P, ma, mb, nhat):
    """Momenta with pa + pb = P, pa ∈ H_ma, pb ∈ H_mb, pa along n̂ in the P rest frame.

    Returns (pa, pb, jac) with ∫d⁴pa δ⁺(pa²-ma²)δ⁺((P-pa)²-mb²) G = jac ∫dΩ G.
    P (..., 4), nhat (M, 3) → pa, pb (..., M, 4), jac (...).
    """
    s = msq(P)
    if np.any(s <= (ma + mb) ** 2):
        raise ValueError("total momentum below the two-body threshold")
    rs = np.sqrt(s)
    pst = np.sqrt((s - (ma + mb) ** 2) * (s - (ma - mb) ** 2)) / (2 * rs)
    ea = (s + ma * ma - mb * mb) / (2 * rs)
    ya = np.concatenate([np.broadcast_to(ea[..., None, None], pst.shape + (len(nhat), 1)),
                         pst[..., None, None] * nhat], axis=-1)
    pa = _from_rest(P[..., None, :], ya)
    return pa, P[..., None, :] - pa, pst / (4 * rs)


def _check_eps(eps):
    if not eps > 0:
        raise ValueError("eps must be positive")


# ------------------------------------------------------ self-energy kernel

def _xi_real(x, rc: RenormConstants, m=1.0):
    """Ξ as a function of x = q² - m² (real, log|·| form)."""
    x = np.asarray(x, dtype=float)
    with np.errstate(divide="ignore", invalid="ignore"):
        lg = np.where(x == 0, 0.0, (x / (m * m + x)) * np.log(np.abs(x) / (m * m)))
    return lg / (16 * np.pi ** 2) + rc.c1 + rc.c2 * x


def self_energy_kernel(q2, rc: RenormConstants = RenormConstants(), model="scalar",
                       variant="complex", m=1.0):
    """Σ(q² - m²) with the -i0 prescription (variant 'complex') or Ξ (variant 'real').

    model 'qed-sandwich' returns ū(p)Ξ(p√q²/m)u(p) from the Dirac module.
    """
    if np.any(np.asarray(q2) == 0):
        raise ValueError("q² = 0 is a pole of the self-energy kernel")
    if model == "qed-sandwich":
        from .diracqed import xi_scalar
        return xi_scalar(float(q2), rc, m)
    if model != "scalar":
        raise ValueError(f"unknown model {model!r}")
    q2 = np.asarray(q2, dtype=float)
    if variant == "real":
        return _xi_real(q2 - m * m, rc, m)
    arg = 1.0 - q2 / (m * m)
    f = 1.0 - m * m / q2
    with np.errstate(divide="ignore", invalid="ignore"):
        lg = np.log(np.abs(arg)) - 1j * np.pi * (arg < 0)
        val = np.where(f == 0, 0.0, f * lg) / (16 * np.pi ** 2) + rc.c1 + rc.c2 * (q2 - m * m)
    return val if val.ndim else complex(val)


# ------------------------------------------------ vacuum polarization Π

_NS = np.arange(1, 36)
_SERIES = np.exp(2 * special.gammaln(_NS + 1) - np.log(_NS) - special.gammaln(2 * _NS + 2))


def _series_tail(t, start):
    """Σ_{n≥start} c_n tⁿ by Horner."""
    acc = np.zeros(np.shape(t))
    for c in _SERIES[start - 1:][::-1]:
        acc = (acc + c) * t
    if start > 1:
        acc = acc * t ** (start - 1)
    return acc


def _loop_log(t, drop_linear=False):
    """L(t) = ∫₀¹ log(1 - x(1-x)t - i0) dx  (+ t/6 when drop_linear)."""
    t = np.asarray(t, dtype=float)
    out = np.zeros(t.shape, dtype=complex)
    small = np.abs(t) < 1.0
    out[small] = -_series_tail(t[small], 2 if drop_linear else 1)
    neg = t <= -1.0
    b = np.sqrt(1 - 4 / t[neg])
    out[neg] = -2 + b * np.log((b + 1) / (b - 1))
    mid = (t >= 1.0) & (t < 4.0)
    r = np.sqrt(4 / t[mid] - 1)
    out[mid] = -2 + 2 * r * np.arctan(1 / r)
    out[t == 4.0] = -2.0
    hi = t > 4.0
    b = np.sqrt(1 - 4 / t[hi])
    out[hi] = -2 + b * (np.log((1 + b) / (1 - b)) - 1j * np.pi)
    if drop_linear:
        out[~small] += t[~small] / 6.0
    return out


def vacuum_polarization(s, rc: RenormConstants = RenormConstants(), m=1.0):
    """Scalar one-loop Π(s); subtracted so that Π(0)=Π'(0)=0 when rc.vp_subtracted."""
    t = np.asarray(s, dtype=float) / (m * m)
    val = -_loop_log(t, drop_linear=rc.vp_subtracted) / (16 * np.pi ** 2)
    return val if np.ndim(val) else complex(val)


def vacuum_polarization_dispersion(s, m=1.0):
    """Twice-subtracted dispersion integral (s²/π)∫ Im Π(s')/(s'²(s'-s)) ds' for s < 4m²."""
    s = float(s)
    if s >= 4 * m * m:
        raise ValueError("dispersion oracle needs s below threshold")

    def im(sp):
        return np.sqrt(1 - 4 * m * m / sp) / (16 * np.pi)

    # sp = 4m²/u², u ∈ (0,1]
    def integrand(u):
        sp = 4 * m * m / u ** 2
        return im(sp) / (sp ** 2 * (sp - s)) * 8 * m * m / u ** 3
    val, _ = integrate.quad(integrand, 0.0, 1.0, epsabs=1e-15, epsrel=1e-12, limit=200)
    return s * s / np.pi * val


# ---------------------------------------------------------- vacuum bubble

def _phase3(sp, m=1.0, n=48):
    """Three-body (two massive + one massless) spectral weight Φ₃(s')."""
    sp = np.asarray(sp, dtype=float)
    u, w = gauss_legendre(n, 0.0, 1.0)
    x = 4 * m * m + (sp[..., None] - 4 * m * m) * u ** 2
    jac = 2 * u * (sp[..., None] - 4 * m * m)
    inner = np.sum(w * (sp[..., None] - x) * np.sqrt(1 - 4 * m * m / x) * jac, axis=-1)
    return inner / (128 * np.pi ** 3 * sp)


def bubble_kernel_reduced(s, subtractions=3, m=1.0, n=160):
    """K(s) with t̃(s) = s^n K(s) = (s^n/π)∫ Φ₃(s')/(s'^n (s'-s)) ds' below threshold."""
    s = np.asarray(s, dtype=float)
    if np.any(s >= 4 * m * m):
        raise ValueError("bubble kernel evaluated above threshold")
    u, w = gauss_legendre(n, 0.0, 1.0)
    sp = 4 * m * m / u ** 2
    phi = _phase3(sp, m)
    base = w * phi / sp ** subtractions * 8 * m * m / u ** 3
    return np.sum(base / (sp - s[..., None]), axis=-1) / np.pi


def bubble_value(g: TestFunction, eps, rc: RenormConstants = RenormConstants(), n_gh=10,
                 m=1.0):
    """(Ω|S^[2]_mod(g_ε)Ω) = -½ ε⁻⁴ ∫d⁴q/(2π)⁴ ĝ(q)ĝ(-q) t̃(εq)."""
    _check_eps(eps)
    sw = _switch(g)
    n_sub = 3 if rc.bubble_subtracted else 2
    q, w = _gh_normal(4, n_gh, 1.0 / (np.sqrt(2) * sw.sigma))
    s = msq(q)
    K = bubble_kernel_reduced(eps * eps * s, n_sub, m)
    mods = sw.mod(q) * sw.mod(-q)
    pref = -0.5 * sw.amp ** 2 * (np.pi / sw.sigma ** 2) ** 2 / TWO_PI ** 4
    return complex(pref * eps ** (2 * n_sub - 4) * np.sum(w * mods * s ** n_sub * K))


# ------------------------------------------------------------ first order

def _decay_values(f, egrid, kgrid, eta, sw, eps, modified, n_gh, m, chi=None):
    """εF(p, εκ) on egrid × kgrid (κ in units of ε)."""
    qv, qw = _gh_normal(3, n_gh, 1.0 / sw.sigma)
    pref = sw.amp * (TWO_PI / sw.sigma ** 2) ** 1.5 / TWO_PI ** 3
    kap = kgrid.nodes
    kabs = kap[:, 0]
    d = kap[:, None, 1:] - qv[None, :, :]
    out = np.zeros((len(egrid), len(kgrid)), dtype=complex)
    for i, p in enumerate(egrid.nodes):
        E, pv = p[0], p[1:]
        pp = pv + eps * d
        Ep = shell_energy(pp, m)
        q0 = kabs[:, None] - (2 * d @ pv + eps * np.sum(d * d, axis=-1)) / (E + Ep)
        q4 = np.concatenate([q0[..., None], np.broadcast_to(qv, d.shape)], axis=-1)
        term = np.exp(-0.5 * sw.sigma ** 2 * q0 ** 2) * sw.mod(q4) * f(on_shell(pp, m)) / (2 * Ep)
        if chi is not None:
            term = term * chi(q4)
        if modified:
            vd = d @ (pv / E)
            q02 = kabs[:, None] - vd
            q42 = np.concatenate([q02[..., None], np.broadcast_to(qv, d.shape)], axis=-1)
            arg = eps * np.concatenate([vd[..., None], d], axis=-1)
            sub = (np.exp(-0.5 * sw.sigma ** 2 * q02 ** 2) * sw.mod(q42) * eta.momentum(arg)
                   * f(p) / (2 * E))
            if chi is not None:
                sub = sub * chi(q42)
            term = term - sub
        out[i] = 1j * pref * (term @ qw)
    return out


def decay_flow(f: WavePacket, egrid, kgrid, g, eps, variant="standard", eta=None, n_gh=8,
               m=1.0) -> Flow:
    """Electron → electron + photon amplitude, photon argument scaled by ε."""
    _check_eps(eps)
    if variant == "modified" and eta is None:
        raise ValueError("modified variant requires a profile η")
    if variant not in ("standard", "modified"):
        raise ValueError(f"unknown variant {variant!r}")
    sw = _switch(g)
    vals = _decay_values(f, egrid, kgrid, eta, sw, eps, variant == "modified", n_gh, m)
    w = np.outer(egrid.weights, kgrid.weights)
    meta = {"g": g.params(), "eta": None if eta is None else eta.params(),
            "photon_units": "eps", "n_gh": n_gh}
    return Flow("decay_A", variant, float(eps), vals, w, True, meta)


def decay_limit(f: WavePacket, egrid, kgrid, g, method="closed", n_gh=8, m=1.0) -> Flow:
    """Pointwise ε→0 limit of εF(p, εκ); 'closed' integrates the Gaussian q⃗ exactly."""
    sw = _switch(g)
    w = np.outer(egrid.weights, kgrid.weights)
    if method == "quadrature" or not sw.trivial:
        vals = _decay_values(f, egrid, kgrid, None, sw, 0.0, False, n_gh, m)
        return Flow("decay_A", "limit", 0.0, vals, w, True, {"method": "quadrature"})
    p = egrid.nodes
    E = p[:, 0]
    v = p[:, 1:] / E[:, None]
    beta2 = np.sum(v * v, axis=-1)
    kap = kgrid.nodes
    c = kap[None, :, 0] - v @ kap[:, 1:].T
    s2 = sw.sigma ** 2
    gauss = (TWO_PI / s2) * np.sqrt(TWO_PI / (s2 * (1 + beta2)))[:, None] * \
        np.exp(-s2 * c ** 2 / (2 * (1 + beta2[:, None])))
    vals = 1j * sw.amp * sw.coeffs[0] / TWO_PI ** 3 * gauss * (f(p) / (2 * E))[:, None]
    return Flow("decay_A", "limit", 0.0, vals, w, True, {"method": "closed"})


def weak_pairing(flow: Flow, h, egrid, kgrid):
    """⟨h, F_ε⟩ for a decay flow stored in scaled photon units."""
    if not flow.scaled:
        raise ValueError("weak pairing expects a scaled decay flow")
    eps = flow.eps
    kp = eps * kgrid.nodes
    hv = np.conj(h(egrid.nodes[:, None, :], kp[None, :, :]))
    return complex(eps * np.sum(flow.weights * hv * flow.values))


def absorption_flow(f, egrid, kgrid, g, eps, variant="standard", eta=None, n_gh=6,
                    m=1.0) -> Flow:
    """Electron + photon → electron; f(p, k) is evaluated at photon momenta εκ'."""
    _check_eps(eps)
    if variant == "modified" and eta is None:
        raise ValueError("modified variant requires a profile η")
    sw = _switch(g)
    qv, qw = _gh_normal(3, n_gh, 1.0 / sw.sigma)
    pref = sw.amp * (TWO_PI / sw.sigma ** 2) ** 1.5 / TWO_PI ** 3
    kap = kgrid.nodes
    kabs = kap[:, 0]
    ek = eps * kap
    d = kap[:, None, 1:] + qv[None, :, :]
    vals = np.zeros(len(egrid), dtype=complex)
    for i, p in enumerate(egrid.nodes):
        E, pv = p[0], p[1:]
        pp = pv - eps * d
        Ep = shell_energy(pp, m)
        q0 = (2 * d @ pv - eps * np.sum(d * d, axis=-1)) / (E + Ep) - kabs[:, None]
        q4 = np.concatenate([q0[..., None], np.broadcast_to(qv, d.shape)], axis=-1)
        term = (np.exp(-0.5 * sw.sigma ** 2 * q0 ** 2) * sw.mod(q4)
                * f(on_shell(pp, m), ek[:, None, :]) / (2 * Ep))
        if variant == "modified":
            vd = d @ (pv / E)
            q02 = vd - kabs[:, None]
            q42 = np.concatenate([q02[..., None], np.broadcast_to(qv, d.shape)], axis=-1)
            arg = -eps * np.concatenate([vd[..., None], d], axis=-1)
            term = term - (np.exp(-0.5 * sw.sigma ** 2 * q02 ** 2) * sw.mod(q42)
                           * eta.momentum(arg) * (f(p, ek) / (2 * E))[:, None])
        vals[i] = 1j * eps * pref * np.sum(kgrid.weights * (term @ qw))
    meta = {"g": g.params(), "eta": None if eta is None else eta.params(), "n_gh": n_gh}
    return Flow("absorption_B", variant, float(eps), vals, egrid.weights.copy(), False, meta)


def first_order_flow(process, variant, f, eta, g, eps, egrid, kgrid, **kw) -> Flow:
    if process == "decay_A":
        return decay_flow(f, egrid, kgrid, g, eps, variant, eta, **kw)
    if process == "absorption_B":
        return absorption_flow(f, egrid, kgrid, g, eps, variant, eta, **kw)
    raise ValueError(f"first_order_flow handles decay_A and absorption_B, not {process!r}")


# -------------------------------------------------------------- locality

def _smooth_cutoff(x, lam):
    """χ(x) = 1 for |x|_E ≤ λ, 0 for |x|_E ≥ 2λ, C^∞ in between."""
    r = np.sqrt(euclid_sq(x)) / lam - 1.0
    out = np.ones(r.shape)
    mid = (r > 0) & (r < 1)

    def h(t):
        return np.where(t > 0, np.exp(-1.0 / np.where(t > 0, t, 1.0)), 0.0)
    out[mid] = h(1 - r[mid]) / (h(1 - r[mid]) + h(r[mid]))
    out[r >= 1] = 0.0
    return out


def decay_locality_log_difference(f, egrid, kgrid, g, eps, lam=0.5, variant="standard",
                                  eta=None, n_radial=96, n_theta=16, n_phi=16, m=1.0):
    """log‖F_ε − F^χ_ε‖ where χ(εq) cuts the smearing momenta at |εq|_E ~ λ.

    The difference only involves |q|_E ≥ R = λ/ε; the Gaussian factor e^{-σ²R²/2}
    is taken out analytically so the remainder is O(1) in double precision.
    """
    _check_eps(eps)
    sw = _switch(g)
    R = lam / eps
    s2 = sw.sigma ** 2
    speed = max(float(np.max(np.linalg.norm(egrid.nodes[:, 1:], axis=1) / egrid.nodes[:, 0])), 0.0)
    t_lo = R / np.sqrt(1.0 + speed ** 2) * 0.9 - 2.0 / sw.sigma
    t, wt = gauss_legendre(n_radial, max(t_lo, 0.0), 2 * R + 12.0 / sw.sigma)
    nh, wn = sphere_rule(n_theta, n_phi)
    qv = (t[:, None, None] * nh[None]).reshape(-1, 3)
    qw = (wt[:, None] * t[:, None] ** 2 * wn[None]).ravel() / TWO_PI ** 3
    kap = kgrid.nodes
    kabs = kap[:, 0]
    d = kap[:, None, 1:] - qv[None, :, :]
    total = 0.0
    for i, p in enumerate(egrid.nodes):
        E, pv = p[0], p[1:]
        pp = pv + eps * d
        Ep = shell_energy(pp, m)
        q0 = kabs[:, None] - (2 * d @ pv + eps * np.sum(d * d, axis=-1)) / (E + Ep)
        q4 = np.concatenate([q0[..., None], np.broadcast_to(qv, d.shape)], axis=-1)
        keep = 1.0 - _smooth_cutoff(eps * q4, lam)
        expo = -0.5 * s2 * (euclid_sq(q4) - R * R)
        term = keep * np.exp(np.where(keep > 0, expo, -np.inf)) * sw.mod(q4) * \
            f(on_shell(pp, m)) / (2 * Ep)
        if variant == "modified":
            vd = d @ (pv / E)
            q02 = kabs[:, None] - vd
            q42 = np.concatenate([q02[..., None], np.broadcast_to(qv, d.shape)], axis=-1)
            keep2 = 1.0 - _smooth_cutoff(eps * q42, lam)
            expo2 = -0.5 * s2 * (euclid_sq(q42) - R * R)
            arg = eps * np.concatenate([vd[..., None], d], axis=-1)
            term = term - keep2 * np.exp(np.where(keep2 > 0, expo2, -np.inf)) * sw.mod(q42) * \
                eta.momentum(arg) * f(p) / (2 * E)
        row = sw.amp * (term @ qw)
        total += np.sum(egrid.weights[i] * kgrid.weights * np.abs(row) ** 2)
    if total == 0.0:
        return -np.inf
    return 0.5 * np.log(total) - 0.5 * s2 * R * R


def decay_locality_scan(f, egrid, kgrid, g, eps_list=None, lam=0.5, order=4, **kw):
    """Superpolynomial verdict for ‖F_ε − F^χ_ε‖ over the ε list (log domain)."""
    eps_list = np.geomspace(1e-1, 1e-2, 6) if eps_list is None else np.asarray(eps_list)
    logs = np.array([decay_locality_log_difference(f, egrid, kgrid, g, e, lam, **kw)
                     for e in eps_list])
    ok, steps = superpolynomial_verdict_log(eps_list, logs, order)
    return {"eps": eps_list.tolist(), "log_norm": logs.tolist(), "steps": steps.tolist(),
            "verdict": "superpolynomial" if ok else "not-superpolynomial"}


# -------------------------------------------------- trivial first order

def _log_gh_eps(sw, q, eps):
    """Complex log of ĝ_ε(q) = ε⁻⁴ĝ(q/ε) (stable far in the Gaussian tail)."""
    u = np.asarray(q, dtype=float) / eps
    with np.errstate(divide="ignore"):
        return (np.log(sw.amp) - 4 * np.log(eps) - 0.5 * sw.sigma ** 2 * euclid_sq(u)
                + np.log(sw.mod(u).astype(complex)))


def _logsumexp(logs, weights, axis=-1):
    """log Σ w e^{logs} for complex logs/weights; returns the complex log."""
    a = np.max(np.real(logs), axis=axis, keepdims=True)
    a = np.where(np.isfinite(a), a, 0.0)
    s = np.sum(weights * np.exp(logs - a), axis=axis)
    with np.errstate(divide="ignore"):
        return np.squeeze(a, axis=axis) + np.log(s.astype(complex))


@dataclass
class TrivialResult:
    process: str
    eps: float
    log_norm: float
    min_argument: float


def trivial_flow(process, f, g, eps, grids, m=1.0) -> TrivialResult:
    """Log-norm of the trivial first-order amplitudes (A–D) and the ĝ_ε argument bound.

    grids: A → (g1, g2, gk) incoming; B → (g1, g2) incoming and (gk,) outgoing;
    C → (gk,) incoming and (g1, g2) outgoing; D → (g1, g2, gk) outgoing.
    f: callable on the incoming momenta (ignored for D).
    """
    _check_eps(eps)
    sw = _switch(g)
    if process == "trivial_A":
        g1, g2, gk = grids
        P = (g1.nodes[:, None, None] + g2.nodes[None, :, None] + gk.nodes[None, None, :])
        args = -P
        w = (g1.weights[:, None, None] * g2.weights[None, :, None] * gk.weights[None, None, :])
        fv = f(g1.nodes[:, None, None], g2.nodes[None, :, None], gk.nodes[None, None, :])
        lg = _logsumexp((_log_gh_eps(sw, args, eps)).ravel(), (w * fv).ravel())
        log_norm = float(np.real(lg))
    elif process == "trivial_B":
        g1, g2, gk = grids
        P = g1.nodes[:, None] + g2.nodes[None, :]
        args = gk.nodes[:, None, None] - P[None]
        w = (g1.weights[:, None] * g2.weights[None, :]) * f(g1.nodes[:, None], g2.nodes[None, :])
        amp = _logsumexp(_log_gh_eps(sw, args, eps).reshape(len(gk), -1), w.ravel()[None])
        log_norm = _half_log_norm(amp, gk.weights)
    elif process == "trivial_C":
        gk, g1, g2 = grids
        P = g1.nodes[:, None] + g2.nodes[None, :]
        args = P[:, :, None] - gk.nodes[None, None]
        w = gk.weights * f(gk.nodes)
        amp = _logsumexp(_log_gh_eps(sw, args, eps), w[None, None])
        log_norm = _half_log_norm(amp.ravel(), np.outer(g1.weights, g2.weights).ravel())
    elif process == "trivial_D":
        g1, g2, gk = grids
        args = g1.nodes[:, None, None] + g2.nodes[None, :, None] + gk.nodes[None, None, :]
        amp = _log_gh_eps(sw, args, eps)
        w = g1.weights[:, None, None] * g2.weights[None, :, None] * gk.weights[None, None, :]
        log_norm = _half_log_norm(amp.ravel(), w.ravel())
    else:
        raise ValueError(f"unknown trivial process {process!r}")
    lower = float(np.sqrt(euclid_sq(args).min()))
    if lower <= 0:
        raise ValueError("ĝ_ε argument reaches the origin; support not bounded away")
    return TrivialResult(process, float(eps), log_norm, lower)


def _half_log_norm(log_amp, weights):
    lw = 2 * np.real(log_amp)
    return 0.5 * float(np.real(_logsumexp(lw, weights)))


# ------------------------------------------------------------ self-energy

def _pair_rules(sw, n_r, n_s):
    """q₁ = s/2 + r: ĝ(q₁)ĝ(s-q₁) ∝ e^{-σ²|r|²} e^{-σ²|s|²/4}."""
    r, wr = _gh_normal(4, n_r, 1.0 / (np.sqrt(2) * sw.sigma))
    s3, ws = _gh_normal(3, n_s, np.sqrt(2) / sw.sigma)
    const = sw.amp ** 2 * (np.pi / sw.sigma ** 2) ** 2 * (4 * np.pi / sw.sigma ** 2) ** 1.5
    return r, wr, s3, ws, const


def self_energy_flow(f: WavePacket, p_nodes, g, eps, rc: RenormConstants = RenormConstants(),
                     n_r=6, n_s=8, m=1.0) -> Flow:
    """Second-order one-electron flow F_ε(p) with the symmetrized Ξ kernel."""
    _check_eps(eps)
    sw = _switch(g)
    r, wr, s3, ws, const = _pair_rules(sw, n_r, n_s)
    pref = -1j * TWO_PI / TWO_PI ** 8 * const
    p_nodes = np.atleast_2d(p_nodes)
    vals = np.zeros(len(p_nodes), dtype=complex)
    for i, p in enumerate(p_nodes):
        E, pv = p[0], p[1:]
        pp = pv - eps * s3
        Ep = shell_energy(pp, m)
        s0 = (2 * s3 @ pv - eps * np.sum(s3 * s3, axis=-1)) / (E + Ep)
        s4 = np.concatenate([s0[:, None], s3], axis=1)
        q1 = s4[:, None, :] / 2 + r[None, :, :]
        q2 = s4[:, None, :] - q1
        x1 = -2 * eps * mdot(p, q1) + eps ** 2 * msq(q1)
        x2 = -2 * eps * mdot(p, q2) + eps ** 2 * msq(q2)
        xi = 0.5 * (_xi_real(x1, rc, m) + _xi_real(x2, rc, m))
        if not sw.trivial:
            xi = xi * sw.mod(q1) * sw.mod(q2)
        inner = xi @ wr
        outer = ws * np.exp(-0.25 * sw.sigma ** 2 * s0 ** 2) * f(on_shell(pp, m)) / (2 * eps * Ep)
        vals[i] = pref * np.sum(outer * inner)
    return Flow("self_energy", "modified", float(eps), vals, None, False,
                {"g": g.params(), "rc": rc.to_dict(), "n_r": n_r, "n_s": n_s})


# -------------------------------------------------- vacuum polarization

def vac_pol_C_flow(f: WavePacket, k_nodes, g, eps, rc: RenormConstants = RenormConstants(),
                   n_r=6, n_s=8) -> Flow:
    """One photon in, one photon out: F^(C)_ε(k) with the resolved shell delta."""
    _check_eps(eps)
    sw = _switch(g)
    r, wr, s3, ws, const = _pair_rules(sw, n_r, n_s)
    pref = -1j * TWO_PI / TWO_PI ** 8 * const
    k_nodes = np.atleast_2d(k_nodes)
    vals = np.zeros(len(k_nodes), dtype=complex)
    for i, k in enumerate(k_nodes):
        K, kv = k[0], k[1:]
        kp = kv - eps * s3
        Kp = np.linalg.norm(kp, axis=-1)
        s0 = (2 * s3 @ kv - eps * np.sum(s3 * s3, axis=-1)) / (K + Kp)
        s4 = np.concatenate([s0[:, None], s3], axis=1)
        q1 = s4[:, None, :] / 2 + r[None, :, :]
        q2 = s4[:, None, :] - q1
        x1 = -2 * eps * mdot(k, q1) + eps ** 2 * msq(q1)
        x2 = -2 * eps * mdot(k, q2) + eps ** 2 * msq(q2)
        pi = 0.5 * (vacuum_polarization(x1, rc) + vacuum_polarization(x2, rc))
        if not sw.trivial:
            pi = pi * sw.mod(q1) * sw.mod(q2)
        inner = pi @ wr
        outer = ws * np.exp(-0.25 * sw.sigma ** 2 * s0 ** 2) * f(on_shell(kp, 0.0)) / (2 * eps * Kp)
        vals[i] = pref * np.sum(outer * inner)
    return Flow("vac_pol_C", "modified", float(eps), vals, None, False,
                {"g": g.params(), "rc": rc.to_dict()})


def vac_pol_C_bound(f, k_nodes, g, eps_list, power=3, rc: RenormConstants = RenormConstants(),
                    growth_tol=2.0, **kw):
    """Check |F^(C)_ε(k)| ≤ ε C/(1+|k|)^power on the probe set across the ε list.

    C is the largest observed ratio; the bound holds when the ratio does not
    grow as ε decreases (tail maximum ≤ growth_tol × head maximum).
    """
    k_nodes = np.atleast_2d(k_nodes)
    damp = (1.0 + np.linalg.norm(k_nodes[:, 1:], axis=1)) ** power
    ratios = []
    for e in eps_list:
        fl = vac_pol_C_flow(f, k_nodes, g, e, rc, **kw)
        ratios.append(np.abs(fl.values) * damp / e)
    ratios = np.array(ratios)
    per_eps = ratios.max(axis=1)
    half = max(1, len(per_eps) // 2)
    ok = bool(per_eps[half:].max() <= growth_tol * per_eps[:half].max())
    return {"eps": list(map(float, eps_list)), "sup_ratio": per_eps.tolist(),
            "C": float(per_eps.max()), "verdict": "bounded" if ok else "unbounded"}


def vac_pol_A_flow(kgrid1, kgrid2, g, eps, rc: RenormConstants = RenormConstants(),
                   n_r=8) -> Flow:
    """ε²F^(A)_ε(εκ₁, εκ₂) for vacuum → two photons (scaled photon arguments)."""
    _check_eps(eps)
    sw = _switch(g)
    r, wr = _gh_normal(4, n_r, 1.0 / (np.sqrt(2) * sw.sigma))
    const = sw.amp ** 2 * (np.pi / sw.sigma ** 2) ** 2 / TWO_PI ** 4
    k1 = kgrid1.nodes[:, None, :]
    k2 = kgrid2.nodes[None, :, :]
    K = k1 + k2
    q1 = K[..., None, :] / 2 + r
    x = eps ** 2 * msq(k1[..., None, :] - q1)
    pi = vacuum_polarization(x.ravel(), rc).reshape(x.shape) / eps ** 2
    if not sw.trivial:
        pi = pi * sw.mod(q1) * sw.mod(K[..., None, :] - q1)
    vals = -1j * const * np.exp(-0.25 * sw.sigma ** 2 * euclid_sq(K)) * (pi @ wr)
    w = np.outer(kgrid1.weights, kgrid2.weights)
    return Flow("vac_pol_A", "modified", float(eps), vals, w, True, {"g": g.params()})


def vac_pol_B_value(f, kgrid1, kgrid2, g, eps, rc: RenormConstants = RenormConstants(),
                    n_r=8):
    """Two photons → vacuum, paired with f(k₁, k₂) (f evaluated at εκ)."""
    fl = vac_pol_A_flow(kgrid1, kgrid2, g, eps, rc, n_r)
    k1 = eps * kgrid1.nodes[:, None, :]
    k2 = eps * kgrid2.nodes[None, :, :]
    return complex(np.sum(fl.weights * fl.values * f(k1, k2)))


# --------------------------------------------------------- Compton / pair

def _q_pairs(sw, n_gh):
    q, w = _gh_normal(4, n_gh, 1.0 / sw.sigma)
    n = len(q)
    q1 = np.repeat(q, n, axis=0)
    q2 = np.tile(q, (n, 1))
    ww = np.repeat(w, n) * np.tile(w, n)
    mods = sw.mod(q1) * sw.mod(q2)
    return q1, q2, ww * mods


def _check_den(den, what):
    m = float(np.abs(den).min())
    if m < 1e-9:
        raise ValueError(f"{what}: propagator pole inside the smearing support (|den| = {m:g})")
    return m


def compton_flow(f: ProductPacket, egrid, kgrid, g, eps, n_gh=2, n_theta=16, n_phi=16,
                 m=1.0) -> Flow:
    """Electron + photon → electron + photon (diagrams A+B), two-body resolved."""
    sw = _switch(g)
    if eps > 0:
        q1, q2, W = _q_pairs(sw, n_gh)
        norm2 = sw.norm ** 2
    else:
        q1 = q2 = np.zeros((1, 4))
        W = np.ones(1)
        norm2 = 1.0
    nh, wo = sphere_rule(n_theta, n_phi)
    vals = np.zeros((len(egrid), len(kgrid)), dtype=complex)
    min_den = np.inf
    for i, p in enumerate(egrid.nodes):
        for j, k in enumerate(kgrid.nodes):
            P = p + k - eps * (q1 + q2)
            pa, pb, jac = _two_body(P, m, 0.0, nh)
            den1 = msq(p + k - eps * q1) - m * m
            den2 = msq(p - pb - eps * q2[:, None, :]) - m * m
            min_den = min(min_den, _check_den(den1, "compton"), _check_den(den2, "compton"))
            G = (1.0 / den1[:, None] + 1.0 / den2) * f(pa, pb)
            vals[i, j] = -1j * norm2 * np.sum(W * jac * (G @ wo)) / (4 * np.pi ** 2)
    return Flow("compton_AB", "modified" if eps > 0 else "limit", float(eps), vals,
                np.outer(egrid.weights, kgrid.weights), False,
                {"g": g.params(), "min_denominator": min_den, "n_gh": n_gh})


def compton_limit(f: ProductPacket, egrid, kgrid, n_theta=24, n_phi=24, m=1.0) -> Flow:
    """Closed-form limit, photon direction integrated in the lab frame."""
    nh, wo = sphere_rule(n_theta, n_phi)
    vals = np.zeros((len(egrid), len(kgrid)), dtype=complex)
    for i, p in enumerate(egrid.nodes):
        for j, k in enumerate(kgrid.nodes):
            P = p + k
            den = P[0] - nh @ P[1:]
            kp = mdot(p, k) / den
            k4 = kp[:, None] * np.concatenate([np.ones((len(nh), 1)), nh], axis=1)
            prop = 1.0 / (2 * mdot(p, k)) - 1.0 / (2 * mdot(p, k4))
            G = kp / (2 * TWO_PI ** 3) / (2 * den) * prop * f(P - k4, k4)
            vals[i, j] = -1j * TWO_PI * np.sum(wo * G)
    return Flow("compton_AB", "limit", 0.0, vals, np.outer(egrid.weights, kgrid.weights), False,
                {"representation": "lab"})


def pair_A_flow(f: ProductPacket, egrid1, egrid2, g, eps, n_gh=2, n_theta=16, n_phi=16,
                m=1.0) -> Flow:
    """Two photons → electron pair."""
    sw = _switch(g)
    if eps > 0:
        q1, q2, W = _q_pairs(sw, n_gh)
        norm2 = sw.norm ** 2
    else:
        q1 = q2 = np.zeros((1, 4))
        W = np.ones(1)
        norm2 = 1.0
    nh, wo = sphere_rule(n_theta, n_phi)
    vals = np.zeros((len(egrid1), len(egrid2)), dtype=complex)
    for i, p1 in enumerate(egrid1.nodes):
        for j, p2 in enumerate(egrid2.nodes):
            P = p1 + p2 - eps * (q1 + q2)
            ka, kb, jac = _two_body(P, 0.0, 0.0, nh)
            r = (p1 - eps * q1)[:, None, :]
            den1 = msq(r - ka) - m * m
            den2 = msq(r - kb) - m * m
            _check_den(den1, "pair_A")
            _check_den(den2, "pair_A")
            G = (1.0 / den1 + 1.0 / den2) * f(ka, kb)
            vals[i, j] = -0.5j * norm2 * np.sum(W * jac * (G @ wo)) / (4 * np.pi ** 2)
    return Flow("pair_A", "modified" if eps > 0 else "limit", float(eps), vals,
                np.outer(egrid1.weights, egrid2.weights), False, {"g": g.params()})


def pair_A_limit(f: ProductPacket, egrid1, egrid2, n_theta=24, n_phi=24, m=1.0) -> Flow:
    """Closed-form limit with the first photon direction integrated in the lab frame."""
    nh, wo = sphere_rule(n_theta, n_phi)
    vals = np.zeros((len(egrid1), len(egrid2)), dtype=complex)
    for i, p1 in enumerate(egrid1.nodes):
        for j, p2 in enumerate(egrid2.nodes):
            P = p1 + p2
            den = P[0] - nh @ P[1:]
            ka_abs = msq(P) / (2 * den)
            ka = ka_abs[:, None] * np.concatenate([np.ones((len(nh), 1)), nh], axis=1)
            kb = P - ka
            prop = 1.0 / (msq(p1 - ka) - m * m) + 1.0 / (msq(p1 - kb) - m * m)
            G = ka_abs / (2 * TWO_PI ** 3) / (2 * den) * prop * f(ka, kb)
            vals[i, j] = -0.5j * TWO_PI * np.sum(wo * G)
    return Flow("pair_A", "limit", 0.0, vals, np.outer(egrid1.weights, egrid2.weights), False,
                {"representation": "lab"})


def pair_B_flow(f: ProductPacket, kgrid1, kgrid2, g, eps, n_gh=2, n_theta=16, n_phi=16,
                m=1.0) -> Flow:
    """Electron pair → two photons; eps = 0 gives the limit."""
    sw = _switch(g)
    if eps > 0:
        q1, q2, W = _q_pairs(sw, n_gh)
        norm2 = sw.norm ** 2
    else:
        q1 = q2 = np.zeros((1, 4))
        W = np.ones(1)
        norm2 = 1.0
    nh, wo = sphere_rule(n_theta, n_phi)
    vals = np.zeros((len(kgrid1), len(kgrid2)), dtype=complex)
    for i, k1 in enumerate(kgrid1.nodes):
        for j, k2 in enumerate(kgrid2.nodes):
            P = k1 + k2 - eps * (q1 + q2)
            pa, pb, jac = _two_body(P, m, m, nh)
            den1 = msq(pa - k1 + eps * q1[:, None, :]) - m * m
            den2 = msq(pa - k2 + eps * q2[:, None, :]) - m * m
            _check_den(den1, "pair_B")
            _check_den(den2, "pair_B")
            G = (1.0 / den1 + 1.0 / den2) * f(pa, pb)
            vals[i, j] = -0.5j * norm2 * np.sum(W * jac * (G @ wo)) / (4 * np.pi ** 2)
    return Flow("pair_B", "modified" if eps > 0 else "limit", float(eps), vals,
                np.outer(kgrid1.weights, kgrid2.weights), False, {"g": g.params()})


def _hilbert_gauss(z, sigma):
    """∫ e^{-σ²t²}/(t - z) dt (principal value for real z)."""
    z = np.asarray(z, dtype=complex) * sigma
    out = np.empty(z.shape, dtype=complex)
    real = np.abs(z.imag) < 1e-300
    out[real] = -2 * np.sqrt(np.pi) * special.dawsn(z.real[real])
    up = z.imag > 0
    out[up] = 1j * np.pi * special.wofz(z[up])
    dn = ~real & ~up
    out[dn] = -1j * np.pi * np.conj(special.wofz(np.conj(z[dn])))
    return out


def _pv_quadratic_gauss(c2, c1, c0, sigma):
    """PV ∫ e^{-σ²t²}/(c₂t² + c₁t + c₀) dt with c₂ ≠ 0 (roots real or complex)."""
    disc = (c1 * c1 - 4 * c2 * c0).astype(complex)
    sq = np.sqrt(disc)
    sq = np.where(np.real(np.conj(sq) * c1) < 0, -sq, sq)
    near = -2 * c0 / (c1 + sq)
    far = -(c1 + sq) / (2 * c2)
    return (_hilbert_gauss(near, sigma) - _hilbert_gauss(far, sigma)) / (c2 * (near - far))


def compton_C_scaled(f: WavePacket, p, kap1, kap2, g, eps, n_perp=4, n_s=6, m=1.0):
    """ε²F^(C)_ε(p, εκ₁, εκ₂) (electron → electron + two photons).

    The propagators are resolved along the smearing direction ŵ ∝ (p⁰, -p⃗) with
    an exact Gaussian principal value; only a centered switching function is supported.
    """
    _check_eps(eps)
    sw = _switch(g)
    if not sw.trivial:
        raise ValueError("compton_C supports the centered switching function only")
    sig_r = 1.0 / (np.sqrt(2) * sw.sigma)
    p = np.asarray(p, float)
    kap1 = np.asarray(kap1, float)
    kap2 = np.asarray(kap2, float)
    w = np.concatenate([[p[0]], -p[1:]])
    wn = np.linalg.norm(w)
    what = w / wn
    # orthonormal completion of ŵ in R⁴ (Euclidean)
    basis = np.linalg.svd(what[None, :])[2][1:]
    rp, wp = _gh_normal(3, n_perp, sig_r)
    rperp = rp @ basis
    s3, ws = _gh_normal(3, n_s, np.sqrt(2) / sw.sigma)
    k12 = kap1 + kap2
    total = 0.0 + 0.0j
    for s_vec, s_w in zip(s3, ws):
        xv = p[1:] + eps * (k12[1:] - s_vec)
        X0 = shell_energy(xv, m)
        s0 = (p[0] + eps * k12[0] - X0) / eps
        s4 = np.concatenate([[s0], s_vec])
        base = s4 / 2 + rperp                        # q₁ at t = 0
        wM = what * np.array([1.0, -1.0, -1.0, -1.0])   # for Minkowski products with ŵ
        c2 = eps * msq(what)
        # D1(t) = 2p·(κ₁ - q₁) + ε(κ₁ - q₁)², q₁ = base + t ŵ
        a1 = kap1 - base
        D1 = _pv_quadratic_gauss(np.full(len(base), c2), -2 * wn - 2 * eps * (a1 @ wM),
                                 2 * mdot(p, a1) + eps * msq(a1), sw.sigma)
        # D2 with q₂ = s - q₁ = (s - base) - t ŵ
        a2 = kap2 - (s4 - base)
        D2 = _pv_quadratic_gauss(np.full(len(base), c2), 2 * wn + 2 * eps * (a2 @ wM),
                                 2 * mdot(p, a2) + eps * msq(a2), sw.sigma)
        inner = np.sum(wp * (D1 + D2)) / np.sqrt(np.pi / sw.sigma ** 2)
        gfac = np.exp(-0.25 * sw.sigma ** 2 * s0 ** 2)
        total += s_w * gfac * inner * f(on_shell(xv, m)) / (2 * X0)
    # ∫d⁴r e^{-σ²r²} = (π/σ²)²: the t-direction factor √(π/σ²) is inside D1, D2
    const = sw.amp ** 2 * (np.pi / sw.sigma ** 2) ** 2 * (4 * np.pi / sw.sigma ** 2) ** 1.5
    return complex(-0.5j * TWO_PI / TWO_PI ** 8 * const * total)


def compton_D_log_norm(f, egrid_in, kgrid1, kgrid2, egrid_out, g, eps, n_r=3, m=1.0):
    """log‖F^(D)_ε‖ for electron + two photons → electron (log domain)."""
    _check_eps(eps)
    sw = _switch(g)
    r, wr = _gh_normal(4, n_r, eps / (np.sqrt(2) * sw.sigma))
    inc = (egrid_in.nodes[:, None, None] + kgrid1.nodes[None, :, None]
           + kgrid2.nodes[None, None, :])
    w_in = (egrid_in.weights[:, None, None] * kgrid1.weights[None, :, None]
            * kgrid2.weights[None, None, :])
    fv = f(egrid_in.nodes[:, None, None], kgrid1.nodes[None, :, None], kgrid2.nodes[None, None, :])
    k1 = np.broadcast_to(kgrid1.nodes[None, :, None], inc.shape)
    k2 = np.broadcast_to(kgrid2.nodes[None, None, :], inc.shape)
    logs = []
    for p in egrid_out.nodes:
        X = p - inc                                       # = q₁ + q₂
        lg = (2 * np.log(sw.amp) - 8 * np.log(eps) + 2 * np.log(np.pi * eps ** 2 / sw.sigma ** 2)
              - sw.sigma ** 2 * euclid_sq(X) / (4 * eps ** 2)) - 4 * np.log(TWO_PI)
        q1 = X[..., None, :] / 2 + r
        prop = (1.0 / (msq(p - k1[..., None, :] - q1) - m * m)
                + 1.0 / (msq(p - k2[..., None, :] - (X[..., None, :] - q1)) - m * m)) @ wr
        logs.append(_logsumexp((lg + np.log(np.abs(prop) + 1e-300)).ravel(),
                               (w_in * fv * np.exp(1j * np.angle(prop))).ravel()) + np.log(0.5))
    return _half_log_norm(np.array(logs), egrid_out.weights)


# ------------------------------------------------------------------ Møller

def _kernel_coeffs(kind):
    """1/(k² + i0)-type kernels as (pv, δ) coefficients of PV(1/k²) and δ(k²)."""
    ker = propagator_kernel(kind, 0.0)
    if ker.delta_pos != ker.delta_neg:
        raise ValueError("Møller flows need a k⁰-even kernel")
    return complex(ker.pv), -complex(ker.delta_pos)


def _transverse_pair(p1, p2):
    """Two spacelike unit vectors Minkowski-orthogonal to p₁ and p₂."""
    P = p1 + p2
    d = _to_rest(P, p1)[1:]
    e1, e2 = _perp_basis(d / np.linalg.norm(d))
    z = np.zeros(1)
    return (_from_rest(P, np.concatenate([z, e1])), _from_rest(P, np.concatenate([z, e2])))


@dataclass(frozen=True)
class MollerRules:
    n_R: int = 16
    n_psi: int = 6
    n_perp: int = 1
    n_c: int = 32
    n_phi: int = 16
    n_rho: int = 32
    R_max: float = 7.0


def _moller_q_rule(p1, p2, sw, rules: MollerRules):
    """(q₁, q₂, weight) for E over ĝ⊗ĝ with the wedge k_par² = 0 as angular breakpoints."""
    m2 = msq(p1)
    p12 = mdot(p1, p2)
    w1 = np.concatenate([[p1[0]], -p1[1:]])
    w2 = np.concatenate([[p2[0]], -p2[1:]])
    n1, n2 = np.linalg.norm(w1), np.linalg.norm(w2)
    h1, h2 = w1 / n1, w2 / n2
    M = np.array([[m2, p12], [p12, m2]])
    B = np.linalg.solve(M, np.diag([n1, -n2]))
    H = B.T @ M @ B
    cands = []
    if abs(H[1, 1]) > 1e-300:
        for t in np.roots([H[1, 1], 2 * H[0, 1], H[0, 0]]):
            if abs(np.imag(t)) < 1e-12:
                a = np.arctan(np.real(t)) % np.pi
                cands += [a, a + np.pi]
    else:
        cands += [np.pi / 2, 3 * np.pi / 2]
    br = np.unique(np.concatenate([[0.0, 2 * np.pi], np.mod(cands, 2 * np.pi)]))
    psi, wpsi = [], []
    for lo, hi in zip(br[:-1], br[1:]):
        if hi - lo > 1e-14:
            x, w = gauss_legendre(rules.n_psi, lo, hi)
            psi.append(x)
            wpsi.append(w)
    psi, wpsi = np.concatenate(psi), np.concatenate(wpsi)
    R, wR = gauss_legendre(rules.n_R, 0.0, rules.R_max)
    wR = wR * R * np.exp(-0.5 * R * R) / TWO_PI
    tau1 = (R[:, None] * np.cos(psi)[None]).ravel()
    tau2 = (R[:, None] * np.sin(psi)[None]).ravel()
    wt = (wR[:, None] * wpsi[None]).ravel()
    if rules.n_perp == 1:
        q1 = tau1[:, None] * h1 / sw.sigma
        q2 = tau2[:, None] * h2 / sw.sigma
        W = wt * sw.mod_conditional(h1, tau1) * sw.mod_conditional(h2, tau2)
        return q1, q2, W
    basis1 = np.linalg.svd(h1[None, :])[2][1:]
    basis2 = np.linalg.svd(h2[None, :])[2][1:]
    pp, wp = _gh_normal(3, rules.n_perp, 1.0 / sw.sigma)
    q1 = (tau1[:, None, None, None] * h1 / sw.sigma + (pp @ basis1)[None, :, None, :])
    q2 = (tau2[:, None, None, None] * h2 / sw.sigma + (pp @ basis2)[None, None, :, :])
    q1, q2 = np.broadcast_arrays(q1, q2)
    W = wt[:, None, None] * wp[None, :, None] * wp[None, None, :]
    q1 = q1.reshape(-1, 4)
    q2 = q2.reshape(-1, 4)
    W = W.ravel() * sw.mod(q1) * sw.mod(q2)
    return q1, q2, W


def _moller_exchange(p1, p2, q1, q2, f, eps, rules: MollerRules, m=1.0):
    """Per q-node exchange integral ∫d⁴k δδ [PV 1/k², δ(k²)] f(p₁',p₂') on the sphere.

    Returns (pv, delta) arrays; the PV uses the exact log of the pole subtraction.
    """
    Pp = p1 + p2 - eps * (q1 + q2)
    s = msq(Pp)
    # nodes pushing P' below the pair threshold carry no phase space
    open_ = (s > 4 * m * m) & (Pp[:, 0] > 0)
    if not np.all(open_):
        pv = np.zeros(len(q1), dtype=complex)
        delta = np.zeros(len(q1), dtype=complex)
        if np.any(open_):
            pv[open_], delta[open_] = _moller_exchange(p1, p2, q1[open_], q2[open_], f, eps,
                                                       rules, m)
        return pv, delta
    rs = np.sqrt(s)
    Est = rs / 2
    pst = np.sqrt(s / 4 - m * m)
    r = p1 - eps * q1
    rst = _to_rest(Pp, r)
    rabs = np.linalg.norm(rst[:, 1:], axis=1)
    rhat = rst[:, 1:] / rabs[:, None]
    # E* - r⁰* = P'·(P'/2 - r)/√s' with the exact-zero part P·(p₂-p₁) dropped
    dE = (eps * mdot(p1 + p2, q1 - q2) / 2 - eps * mdot(q1 + q2, (p2 - p1)) / 2
          - eps ** 2 * mdot(q1 + q2, q1 - q2) / 2) / rs
    m2_r2 = 2 * eps * mdot(p1, q1) - eps ** 2 * msq(q1)
    dp = (dE * (Est + rst[:, 0]) - m2_r2) / (pst + rabs)
    u_hi = (dE - dp) * (dE + dp)
    b = 2 * pst * rabs
    u_lo = u_hi - 2 * b
    c_star = 1.0 - u_hi / b
    inside = u_hi > 0
    c_ref = np.where(inside, c_star, 1.0)
    c, wc = gauss_legendre(rules.n_c, -1.0, 1.0)
    phi = TWO_PI * np.arange(rules.n_phi) / rules.n_phi
    wphi = TWO_PI / rules.n_phi
    e1, e2 = _perp_basis(rhat)

    def G(cc):
        # cc (Nq, Nc); returns f on the sphere (Nq, Nc, Nphi)
        sn = np.sqrt(np.clip(1 - cc * cc, 0.0, None))
        n = (cc[..., None, None] * rhat[:, None, None, :]
             + sn[..., None, None] * (np.cos(phi)[None, None, :, None] * e1[:, None, None, :]
                                      + np.sin(phi)[None, None, :, None] * e2[:, None, None, :]))
        y = np.concatenate([np.broadcast_to(Est[:, None, None, None], n.shape[:-1] + (1,)),
                            pst[:, None, None, None] * n], axis=-1)
        pa = _from_rest(Pp[:, None, None, :], y)
        return f(pa, Pp[:, None, None, :] - pa)

    Gc = G(np.broadcast_to(c, (len(q1), len(c))))
    Gr = G(c_ref[:, None])[:, 0, :]
    den = u_hi[:, None] - b[:, None] * (1 - c[None, :])
    rem = np.sum(wc[None, :, None] * (Gc - Gr[:, None, :]) / den[..., None], axis=1)
    pv = wphi * np.sum(rem + Gr * (np.log(np.abs(u_hi) / np.abs(u_lo)) / b)[:, None], axis=-1)
    Gs = G(np.clip(c_star, -1.0, 1.0)[:, None])[:, 0, :]
    delta = np.where(inside, wphi * np.sum(Gs, axis=-1) / b, 0.0)
    jac = pst / (4 * rs)
    return jac * pv, jac * delta


def _moller_asymptotic(p1, p2, q1, q2, eta, eps, rules: MollerRules, rho_max):
    """Per q-node ∫d⁴k δ(2p₁·(k-εq₁))δ(2p₂·(k+εq₂)) η̂(k-εq₁)η̂(-k-εq₂) PV 1/k² (without f)."""
    m2 = msq(p1)
    p12 = mdot(p1, p2)
    rhs = np.stack([eps * mdot(p1, q1), -eps * mdot(p2, q2)], axis=-1)
    xy = np.linalg.solve(np.array([[m2, p12], [p12, m2]]), rhs.T).T
    kpar = xy[:, :1] * p1 + xy[:, 1:] * p2
    cpar = msq(kpar)
    e1, e2 = _transverse_pair(p1, p2)
    rho, wrho = gauss_legendre(rules.n_rho, 0.0, rho_max)
    phi = TWO_PI * np.arange(rules.n_phi) / rules.n_phi
    wphi = TWO_PI / rules.n_phi
    dirs = np.cos(phi)[:, None] * e1 + np.sin(phi)[:, None] * e2

    def N(rr):
        k = kpar[:, None, None, :] + rr[..., None, None] * dirs[None, None, :, :]
        return eta.momentum(k - eps * q1[:, None, None, :]) * \
            eta.momentum(-k - eps * q2[:, None, None, :])

    rho_ref = np.sqrt(np.clip(cpar, 0.0, None))
    Nr = N(np.broadcast_to(rho, (len(q1), len(rho))))
    N0 = N(rho_ref[:, None])[:, 0, :]
    den = cpar[:, None] - rho[None, :] ** 2
    rem = np.sum((wrho * rho)[None, :, None] * (Nr - N0[:, None, :]) / den[..., None], axis=1)
    lg = 0.5 * np.log(np.abs(cpar) / np.abs(rho_max ** 2 - cpar))
    total = wphi * np.sum(rem + N0 * lg[:, None], axis=-1)
    return total / (4 * np.sqrt(p12 ** 2 - m2 * m2))


def moller_point(p1, p2, f, g, eps, variant="modified", eta=None, rules=MollerRules(),
                 parts=False, m=1.0):
    """F_ε(p₁, p₂) for two electrons (t-channel exchange form)."""
    _check_eps(eps)
    if variant == "modified" and eta is None:
        raise ValueError("modified Møller needs a profile η")
    p1 = np.asarray(p1, float)
    p2 = np.asarray(p2, float)
    if np.allclose(p1, p2):
        raise ValueError("coinciding electron momenta: D₂ support violated")
    sw = _switch(g)
    q1, q2, W = _moller_q_rule(p1, p2, sw, rules)
    pvc, dc = _kernel_coeffs("dirac" if variant == "modified" else "feynman")
    pv, delta = _moller_exchange(p1, p2, q1, q2, f, eps, rules, m)
    pref = TWO_PI ** 2 * sw.norm ** 2 / TWO_PI ** 4
    exch = -1j * pref * np.sum(W * (pvc * pv + dc * delta))
    out = {"exchange": complex(exch)}
    if variant == "modified":
        rho_max = 9.0 / eta.sigma
        asym = _moller_asymptotic(p1, p2, q1, q2, eta, eps, rules, rho_max)
        out["asymptotic"] = complex(1j * pref * np.sum(W * asym) * f(p1, p2))
    total = sum(out.values())
    return (total, out) if parts else total


def moller_flow(f: ProductPacket, egrid1, egrid2, g, eps, variant="modified", eta=None,
                rules=MollerRules(), m=1.0) -> Flow:
    vals = np.zeros((len(egrid1), len(egrid2)), dtype=complex)
    for i, p1 in enumerate(egrid1.nodes):
        for j, p2 in enumerate(egrid2.nodes):
            vals[i, j] = moller_point(p1, p2, f, g, eps, variant, eta, rules, m=m)
    return Flow("moller", variant, float(eps), vals, np.outer(egrid1.weights, egrid2.weights),
                False, {"g": g.params(), "eta": None if eta is None else eta.params(),
                        "rules": rules.__dict__})


def _cm_frame(p1, p2):
    P = p1 + p2
    E = float(np.sqrt(msq(P)))
    d = _to_rest(P, p1)[1:]
    Q = float(np.linalg.norm(d))
    if Q < 1e-12:
        raise ValueError("frame degeneracy: Q = 0")
    zhat = d / Q
    xhat, yhat = _perp_basis(zhat)
    return P, E, Q, xhat, yhat, zhat


def moller_limit_frame(p1, p2, f, eta, n_theta=48, n_phi=32, n_outer=48, rho_max=None):
    """ε→0 limit in the centre-of-mass frame with k⊥ = Q sinθ inside the disk."""
    p1 = np.asarray(p1, float)
    p2 = np.asarray(p2, float)
    P, E, Q, xh, yh, zh = _cm_frame(p1, p2)
    rho_max = 9.0 / eta.sigma if rho_max is None else rho_max
    phi = TWO_PI * (np.arange(n_phi) + 0.5) / n_phi
    wphi = TWO_PI / n_phi
    th, wth = gauss_legendre(n_theta, 0.0, np.pi / 2)
    rho = Q * np.sin(th)
    W = Q * np.cos(th)
    perp = np.cos(phi)[:, None] * xh + np.sin(phi)[:, None] * yh     # (Nphi, 3)
    f0 = f(p1, p2)

    def lab(vec3):
        return _from_rest(P, np.concatenate([np.zeros(vec3.shape[:-1] + (1,)), vec3], axis=-1))

    kt = rho[:, None, None] * perp[None]                            # (Nθ, Nφ, 3)
    disk = 0.0
    for sign in (+1, -1):
        K3 = (-Q - sign * W)[:, None, None] * zh                   # K_± = -Q ∓ W along ẑ
        K = lab(kt + K3)
        K2 = (-2 * Q * (Q + sign * W))[:, None]
        disk = disk + rho[:, None] * f(p1 + K, p2 - K) / K2
    eta_k = np.abs(eta.momentum(lab(kt))) ** 2
    disk = disk + eta_k * f0 * np.cos(th)[:, None] / rho[:, None]
    total = np.sum(wth[:, None] * wphi * disk)
    ro, wro = gauss_legendre(n_outer, Q, rho_max)
    ko = lab(ro[:, None, None] * perp[None])
    outer = np.abs(eta.momentum(ko)) ** 2 * f0 / (Q * ro[:, None])
    total += np.sum(wro[:, None] * wphi * outer)
    return complex(-1j / (4 * E) * total / TWO_PI ** 2)


def moller_limit_covariant(p1, p2, f, eta, n_u=40, n_phi=24, n_outer=40, rho_max=None):
    """Same limit from the double-delta form, resolved on a lab-frame tetrad."""
    p1 = np.asarray(p1, float)
    p2 = np.asarray(p2, float)
    P = p1 + p2
    D = p1 - p2
    sP = np.sqrt(msq(P))
    d = np.sqrt(-msq(D))
    e3 = D / d
    e1, e2 = _transverse_pair(p1, p2)
    Q = d / 2
    rho_max = 9.0 / eta.sigma if rho_max is None else rho_max
    phi = TWO_PI * np.arange(n_phi) / n_phi + 0.25
    wphi = TWO_PI / n_phi
    dirs = np.cos(phi)[:, None] * e1 + np.sin(phi)[:, None] * e2
    f0 = f(p1, p2)
    # inner disk: ρ = Q(1-u²), dρ/√(d²-4ρ²) = -du/√(2-u²)·(1/Q)·Q
    u, wu = gauss_legendre(n_u, 0.0, 1.0)
    rho = Q * (1 - u * u)
    root = np.sqrt(d * d - 4 * rho * rho)
    drho = 2 * Q * u
    total = 0.0
    for sign in (+1, -1):
        b = (-d + sign * root) / 2
        k = b[:, None, None] * e3 + rho[:, None, None] * dirs[None]
        k2 = -b * b - rho * rho
        total += np.sum(wu[:, None] * wphi * drho[:, None] * rho[:, None]
                        * f(p1 + k, p2 - k) / (k2 * root)[:, None])
    kt = rho[:, None, None] * dirs[None]
    total += np.sum(wu[:, None] * wphi * drho[:, None] * rho[:, None]
                    * np.abs(eta.momentum(kt)) ** 2 * f0 / (d * rho[:, None] ** 2))
    ro, wro = gauss_legendre(n_outer, Q, rho_max)
    ko = ro[:, None, None] * dirs[None]
    total += np.sum(wro[:, None] * wphi * ro[:, None] * np.abs(eta.momentum(ko)) ** 2 * f0
                    / (d * ro[:, None] ** 2))
    return complex(-0.5j * total / TWO_PI ** 2 / sP)


def moller_limit(f, egrid1, egrid2, eta, form="frame", **kw) -> Flow:
    fn = moller_limit_frame if form == "frame" else moller_limit_covariant
    vals = np.array([[fn(p1, p2, f, eta, **kw) for p2 in egrid2.nodes] for p1 in egrid1.nodes])
    return Flow("moller", "limit", 0.0, vals, np.outer(egrid1.weights, egrid2.weights), False,
                {"form": form, "eta": eta.params()})


def moller_cancellation(p1, p2, f, eta, cutoffs, n_theta=64, n_phi=32):
    """Integrals of the soft '−' branch and of the η term over k⊥ > δ, and their sum.

    The two pieces grow like log(1/δ) separately; the sum converges as δ → 0.
    """
    p1 = np.asarray(p1, float)
    p2 = np.asarray(p2, float)
    P, E, Q, xh, yh, zh = _cm_frame(p1, p2)
    phi = TWO_PI * (np.arange(n_phi) + 0.5) / n_phi
    perp = np.cos(phi)[:, None] * xh + np.sin(phi)[:, None] * yh
    f0 = f(p1, p2)
    rows = []
    for delta in cutoffs:
        t0 = np.arcsin(min(delta / Q, 1.0))
        # log-spaced θ resolves the 1/θ growth near the cutoff
        x, w = gauss_legendre(n_theta, np.log(t0), np.log(np.pi / 2))
        th, wth = np.exp(x), w * np.exp(x)
        rho = Q * np.sin(th)
        W = Q * np.cos(th)
        kt = rho[:, None, None] * perp[None]
        K = _from_rest(P, np.concatenate([np.zeros(kt.shape[:-1] + (1,)),
                                          kt + (-Q + W)[:, None, None] * zh], axis=-1))
        minus = rho[:, None] * f(p1 + K, p2 - K) / (-2 * Q * (Q - W))[:, None]
        lab_kt = _from_rest(P, np.concatenate([np.zeros(kt.shape[:-1] + (1,)), kt], axis=-1))
        etat = np.abs(eta.momentum(lab_kt)) ** 2 * f0 * np.cos(th)[:, None] / rho[:, None]
        a = float(np.real(np.sum(wth[:, None] * minus))) * TWO_PI / n_phi
        b = float(np.real(np.sum(wth[:, None] * etat))) * TWO_PI / n_phi
        rows.append((delta, a, b, a + b))
    return np.array(rows)


def moller_standard_scan(f, egrid1, egrid2, g, eps_list, rules=MollerRules(), m=1.0):
    """Standard Møller: ∫|Im F_ε|² and ∫|Re F_ε|² on the output grid per ε."""
    im2, re2 = [], []
    for e in eps_list:
        fl = moller_flow(f, egrid1, egrid2, g, e, "standard", None, rules, m)
        im2.append(float(np.sum(fl.weights * np.imag(fl.values) ** 2)))
        re2.append(float(np.sum(fl.weights * np.real(fl.values) ** 2)))
    return EpsScan(np.asarray(eps_list, float), np.asarray(im2), {"quantity": "int |Im F|^2",
                                                                  "re_norm2": re2})


# ---------------------------------------------------------- dispatchers

def second_order_flow(process, variant, f, eta, g, eps, rc: RenormConstants = RenormConstants(),
                      **kw):
    """Dispatch to the per-process flows; bubble returns a scalar."""
    if process == "bubble":
        return bubble_value(g, eps, rc, **kw)
    if process == "self_energy":
        return self_energy_flow(f, kw.pop("p_nodes"), g, eps, rc, **kw)
    if process == "vac_pol_C":
        return vac_pol_C_flow(f, kw.pop("k_nodes"), g, eps, rc, **kw)
    if process == "vac_pol_A":
        return vac_pol_A_flow(kw.pop("kgrid1"), kw.pop("kgrid2"), g, eps, rc, **kw)
    if process == "vac_pol_B":
        return vac_pol_B_value(f, kw.pop("kgrid1"), kw.pop("kgrid2"), g, eps, rc, **kw)
    if process == "compton_AB":
        return compton_flow(f, kw.pop("egrid"), kw.pop("kgrid"), g, eps, **kw)
    if process == "compton_C":
        return compton_C_scaled(f, kw.pop("p"), kw.pop("kap1"), kw.pop("kap2"), g, eps, **kw)
    if process == "compton_D":
        return compton_D_log_norm(f, kw.pop("egrid_in"), kw.pop("kgrid1"), kw.pop("kgrid2"),
                                  kw.pop("egrid_out"), g, eps, **kw)
    if process == "pair_A":
        return pair_A_flow(f, kw.pop("egrid1"), kw.pop("egrid2"), g, eps, **kw)
    if process == "pair_B":
        return pair_B_flow(f, kw.pop("kgrid1"), kw.pop("kgrid2"), g, eps, **kw)
    if process == "moller":
        return moller_flow(f, kw.pop("egrid1"), kw.pop("egrid2"), g, eps, variant, eta, **kw)
    raise ValueError(f"no second-order flow for {process!r}")


def process_limit(process, f, eta=None, form="frame", **kw) -> Flow:
    if process == "compton_AB":
        return compton_limit(f, kw.pop("egrid"), kw.pop("kgrid"), **kw)
    if process == "pair_A":
        return pair_A_limit(f, kw.pop("egrid1"), kw.pop("egrid2"), **kw)
    if process == "pair_B":
        dummy = _limit_switch()
        return pair_B_flow(f, kw.pop("kgrid1"), kw.pop("kgrid2"), dummy, 0.0, **kw)
    if process == "moller":
        if eta is None:
            raise ValueError("the Møller limit needs η")
        return moller_limit(f, kw.pop("egrid1"), kw.pop("egrid2"), eta, form, **kw)
    raise ValueError(f"no closed-form limit for {process!r}")


def _limit_switch():
    from .domain import make_test_function
    return make_test_function("switching", 1.0)


def assemble_second_order(state: dict, eta, g, eps, rc: RenormConstants = RenormConstants(),
                          grids: dict | None = None, coefficient=1.0):
    """Sector-wise second order: state maps (n_electrons, n_photons) → wave function.

    (0,0) carries a complex amplitude; (1,0) a WavePacket; (2,0) a ProductPacket.
    Returns {sector: value or Flow}; unimplemented sectors raise listing all of them.
    """
    grids = grids or {}
    missing = [s for s in state if s not in ((0, 0), (1, 0), (2, 0))]
    if missing:
        raise NotImplementedError(f"unimplemented sector combinations: {sorted(missing)}")
    out = {}
    for sector, wf in state.items():
        if sector == (0, 0):
            out[sector] = coefficient * complex(wf) * bubble_value(g, eps, rc)
        elif sector == (1, 0):
            fl = self_energy_flow(wf, grids["p_nodes"], g, eps, rc)
            fl.values = coefficient * fl.values
            out[sector] = fl
        else:
            fl = moller_flow(wf, grids["egrid1"], grids["egrid2"], g, eps, "modified", eta,
                             grids.get("rules", MollerRules()))
            fl.values = coefficient * fl.values
            out[sector] = fl
    return out

"""Asymptotic currents and the relativistic Coulomb phase.

Currents of a charge with four-velocity v smeared by a profile η:
    j_out(x) = ∫_0^∞ dτ η(x - τv),  j_in(x) = ∫_{-∞}^0 dτ η(x - τv),  j_as = j_out + j_in.
Coulomb phase with cutoff:
    Φ(η, η', g, p₁, p₂) = ∫∫ d⁴x d⁴y g(x) j(η,p₁;x) D^D(x-y) g(y) j(η',p₂;y),
with D^D(x) = δ(x²)/4π for the photon.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy import integrate, special

from .adiabatic import EpsScan
from .domain import (TestFunction, boost_to_rest, euclid_sq, gauss_legendre, mdot,
                     scale_switching, shell_energy, sphere_rule)

DIRECTIONS = ("out", "in", "as")


@dataclass(frozen=True)
class CurrentSpec:
    profile: TestFunction
    velocity: np.ndarray          # four-velocity v = p/m
    direction: str = "out"
    model: str = "scalar"

    def __post_init__(self):
        if self.direction not in DIRECTIONS:
            raise ValueError(f"unknown direction {self.direction!r}")
        if self.model not in ("scalar", "qed"):
            raise ValueError(f"unknown model {self.model!r}")


@dataclass
class CoulombPhaseResult:
    value: float
    tolerance: float
    b: float | None = None
    a: float | None = None
    imag_residue: float = 0.0
    meta: dict = field(default_factory=dict)


# ------------------------------------------------------------------ currents

def _line_integral(eta: TestFunction, v, x, lo_sign):
    """∫ dτ η(x - τv) over τ>0 (lo_sign=+1), τ<0 (-1) or all τ (0); closed form."""
    x = np.asarray(x, dtype=float)
    v = np.asarray(v, dtype=float)
    s2 = eta.sigma ** 2
    A = float(v @ v)
    norm = eta.amp / (4 * np.pi ** 2 * s2 * s2)
    out = np.zeros(x.shape[:-1])
    for a, c in zip(eta.centers, eta.coeffs):
        y = x - a
        B = y @ v
        t0 = B / A
        perp = euclid_sq(y) - B * B / A
        scale = np.sqrt(np.pi * s2 / (2 * A))
        k = np.sqrt(A / (2 * s2))
        if lo_sign > 0:
            part = special.erfc(-t0 * k)
        elif lo_sign < 0:
            part = special.erfc(t0 * k)
        else:
            part = 2.0
        out = out + c * scale * part * np.exp(-0.5 * perp / s2)
    return norm * out


def current_eval(spec: CurrentSpec, point, space="position"):
    """Position value, or the (pv, delta) coefficient pair in Fourier space.

    Fourier: ĵ(q) = pv · PV 1/(v·q) + delta · δ(v·q), with
    out: (iη̂, πη̂), in: (-iη̂, πη̂), as: (0, 2πη̂).
    """
    v = np.asarray(spec.velocity, dtype=float)
    if space == "position":
        sign = {"out": 1, "in": -1, "as": 0}[spec.direction]
        val = _line_integral(spec.profile, v, point, sign)
        if spec.model == "qed":
            return val[..., None] * v
        return val
    if space == "fourier":
        eh = spec.profile.momentum(point)
        pv, delta = {"out": (1j * eh, np.pi * eh), "in": (-1j * eh, np.pi * eh),
                     "as": (0.0 * eh, 2 * np.pi * eh)}[spec.direction]
        if spec.model == "qed":
            return pv[..., None] * v, delta[..., None] * v
        return pv, delta
    raise ValueError("space must be 'position' or 'fourier'")


def current_divergence_residual(eta: TestFunction, v, q, direction="out"):
    """(-i q·v) ĵ(q) ∓ η̂(q) off the support of δ(v·q)."""
    q = np.asarray(q, dtype=float)
    vq = mdot(q, v)
    if np.any(np.abs(vq) < 1e-14):
        raise ValueError("v·q = 0 lies on the delta support")
    pv, _ = current_eval(CurrentSpec(eta, np.asarray(v, float), direction), q, "fourier")
    jq = pv / vq                      # delta part vanishes off support
    eh = eta.momentum(q)
    sign = {"out": -1.0, "in": 1.0, "as": 0.0}[direction]
    return -1j * vq * jq + sign * eh


def current_timelike_limit(eta: TestFunction, f, v, lambdas, direction="as", m=1.0,
                           n_radial=40, n_ang=12):
    """λ³ m ∫dμ₁(u)|f(mu)|² j(η,mu;λv) for increasing λ, returned as an EpsScan in 1/λ.

    The u-integral is done in the blown-up variable w = λ(u⃗ - v⃗), on which the
    integrand has a λ-independent Gaussian scale set by σ.
    """
    v = np.asarray(v, dtype=float)
    lambdas = np.sort(np.asarray(lambdas, dtype=float))
    sign = {"out": 1, "in": -1, "as": 0}[direction]
    rmax = 12.0 * eta.sigma * v[0] ** 2
    r, wr = gauss_legendre(n_radial, 0.0, rmax)
    nh, wn = sphere_rule(n_ang, n_ang)
    w3 = (r[:, None, None] * nh[None]).reshape(-1, 3)
    dw = (wr[:, None] * r[:, None] ** 2 * wn[None]).ravel()
    vals = []
    for lam in lambdas:
        u3 = v[1:] + w3 / lam
        u0 = shell_energy(u3, 1.0)
        u = np.concatenate([u0[:, None], u3], axis=1)
        j = _line_many(eta, u, lam * v, sign)
        dens = np.abs(f(m * u)) ** 2 / ((2 * np.pi) ** 3 * 2 * u0)
        vals.append(m * np.sum(dw * dens * j))
    target = m / (2 * (2 * np.pi) ** 3) * abs(f(m * v[None, :])[0]) ** 2
    return EpsScan(1.0 / lambdas, np.asarray(vals),
                   {"evaluator": "current_timelike_limit", "direction": direction,
                    "theory": float(target), "profile": eta.params()})


def _line_many(eta, u, x, sign):
    """Line integral for many velocities u (N,4) at one point x."""
    s2 = eta.sigma ** 2
    A = euclid_sq(u)
    norm = eta.amp / (4 * np.pi ** 2 * s2 * s2)
    out = np.zeros(len(u))
    for a, c in zip(eta.centers, eta.coeffs):
        y = np.asarray(x) - a
        B = u @ y
        t0 = B / A
        perp = y @ y - B * B / A
        k = np.sqrt(A / (2 * s2))
        part = {1: special.erfc(-t0 * k), -1: special.erfc(t0 * k), 0: 2.0}[sign]
        out = out + c * np.sqrt(np.pi * s2 / (2 * A)) * part * np.exp(-0.5 * perp / s2)
    return norm * out


# ------------------------------------------------------- Coulomb: divergent part

def gamma_factor(v1, v2):
    return float(mdot(v1, v2))


def divergent_coefficient(v1, v2):
    """b = (1/4π)(γ² - 1)^(-1/2), γ = v₁·v₂."""
    gam = gamma_factor(v1, v2)
    if gam <= 1.0 + 1e-14:
        raise ValueError("coinciding velocities")
    return 1.0 / (4 * np.pi * np.sqrt(gam * gam - 1.0))


def coulomb_divergent_value(g: TestFunction, v1, v2, eps, direction="out"):
    """(1/8π) Σ± ∫ dτ₁ θ(±τ₁-ε) θ(±τ₂^±-ε) g(τ₁v₁) g(τ₂^± v₂)/|τ₁ v⃗₁| (v₂ rest frame)."""
    v1 = np.asarray(v1, float)
    v2 = np.asarray(v2, float)
    gam = gamma_factor(v1, v2)
    if gam <= 1.0 + 1e-14:
        raise ValueError("coinciding velocities")
    S = np.sqrt(gam * gam - 1.0)
    sgn = 1.0 if direction == "out" else -1.0
    total = 0.0
    for ratio in (gam + S, gam - S):
        lo = max(eps, eps / ratio)

        def integrand(s):
            t = sgn * np.exp(s)
            return float(np.real(g.position(t * v1) * g.position(t * ratio * v2)))
        # g decays on the scale σ in Euclidean length
        smax = np.log(40.0 * g.sigma / min(np.sqrt(v1 @ v1), ratio * np.sqrt(v2 @ v2)))
        val, _ = integrate.quad(integrand, np.log(lo), smax, limit=400,
                                epsabs=1e-13, epsrel=1e-12)
        total += val
    return total / (8 * np.pi * S)


def coulomb_divergent_scan(g: TestFunction, v1, v2, eps_list, direction="out") -> EpsScan:
    eps_list = np.asarray(eps_list, float)
    vals = [coulomb_divergent_value(g, v1, v2, e, direction) for e in eps_list]
    return EpsScan(eps_list, np.asarray(vals),
                   {"evaluator": "coulomb_divergent", "switching": g.params(),
                    "gamma": gamma_factor(v1, v2), "theory_b": divergent_coefficient(v1, v2)})


# ------------------------------------------------------- Coulomb: finite part

def kernel_regular(z, v1):
    """Regular part of K(z) = ∫_0^∞dτ₁ Σ± θ(τ₂^±)/(2r) in the v₂=(1,0,0,0) frame.

    r = |z⃗ + τ₁v⃗₁|, τ₂^± = z⁰ + τ₁v₁⁰ ± r.  Both branches increase in τ₁, so
    each active set is [lo±, ∞); the z-independent divergent constant from the
    upper limit is dropped.
    """
    z = np.atleast_2d(np.asarray(z, float))
    v1 = np.asarray(v1, float)
    s = np.linalg.norm(v1[1:])
    v0 = v1[0]
    z0 = z[:, 0]
    b = z[:, 1:] @ v1[1:]
    c = np.sum(z[:, 1:] ** 2, axis=1)
    cross = np.maximum(s * s * c - b * b, 0.0)

    def r(t):
        return np.sqrt(np.maximum(s * s * t * t + 2 * b * t + c, 0.0))

    def F(t):
        u = s * s * t + b
        rr = r(t)
        pos = s * rr + u
        with np.errstate(divide="ignore", invalid="ignore"):
            neg = cross / (s * rr - u)
        arg = np.where(u >= 0, pos, neg)
        return np.log(arg) / s

    zv = z0 * v0 - b
    zz = z0 * z0 - c
    disc = np.maximum(zv * zv - zz, 0.0)
    sq = np.sqrt(disc)
    t_lo = -zv - sq
    t_hi = -zv + sq
    total = np.zeros(len(z))
    for sign in (1.0, -1.0):
        active0 = z0 + sign * np.sqrt(c) > 0
        # root at which this branch switches on: sign of z⁰+τv⁰ identifies the branch
        lo = np.zeros(len(z))
        for t in (t_hi, t_lo):
            on_branch = (t > 0) & (np.sign(z0 + t * v0) == -sign)
            lo = np.where(~active0 & on_branch, t, lo)
        total += -0.5 * F(lo)
    return total


def kernel_brute(z, v1, T=2e3):
    """Brute-force truncated ∫_0^T dτ Σ± θ(τ₂^±)/(2r) for oracle tests."""
    z = np.asarray(z, float)
    v1 = np.asarray(v1, float)

    def f(t):
        w = z[1:] + t * v1[1:]
        r = np.sqrt(w @ w)
        tot = 0.0
        for sg in (1, -1):
            if z[0] + t * v1[0] + sg * r > 0:
                tot += 0.5 / r
        return tot
    val, _ = integrate.quad(f, 0, T, limit=2000, points=[1.0, 10.0])
    return val


def _check_finite_pre(eta, eta2, v1, v2):
    if abs(eta.value_at_zero) > 1e-14 and abs(eta2.value_at_zero) > 1e-14:
        raise ValueError("finite part needs a profile difference (η̂(0)=0 or η̂'(0)=0)")
    if gamma_factor(v1, v2) <= 1.0 + 1e-12:
        raise ValueError("coinciding momenta")


def _correlation_terms(eta, eta2):
    """C(z) = ∫η(x)η'(x-z)dx = Σ cᵢdⱼ A G_s(z - (aᵢ - bⱼ)), unit-mass Gaussians."""
    s = np.sqrt(eta.sigma ** 2 + eta2.sigma ** 2)
    terms = []
    for a, c in zip(eta.centers, eta.coeffs):
        for b, d in zip(eta2.centers, eta2.coeffs):
            terms.append((np.asarray(a) - np.asarray(b), c * d))
    # profiles carry unit-mass Gaussians when amp=1
    scale = eta.amp * eta2.amp
    return s, terms, scale


def _gh4(n):
    x, w = np.polynomial.hermite.hermgauss(n)
    X = np.stack(np.meshgrid(x, x, x, x, indexing="ij"), axis=-1).reshape(-1, 4)
    W = np.prod(np.stack(np.meshgrid(w, w, w, w, indexing="ij"), axis=-1).reshape(-1, 4), axis=1)
    return X, W / np.pi ** 2


def _finite_value(eta, eta2, v1, v2, direction, n):
    L = boost_to_rest(v2)
    v1r = L @ v1
    s, terms, scale = _correlation_terms(eta, eta2)
    X, W = _gh4(n)
    total = 0.0
    for delta, cd in terms:
        z = np.sqrt(2.0) * s * X + delta
        if direction == "in":
            z = -z
        total += cd * np.sum(W * kernel_regular(z @ L.T, v1r))
    return scale * total / (4 * np.pi)


def coulomb_finite(eta: TestFunction, eta2: TestFunction, p1, p2, direction="out", m=1.0,
                   n=(12, 16)) -> CoulombPhaseResult:
    """Finite Coulomb phase Φ(η, η', p₁, p₂) = (1/4π)∫d⁴z C(z) K(z).

    The τ₂ delta and the τ₁ integral are done in closed form (kernel_regular),
    leaving a 4D Gauss-Hermite quadrature over the Gaussian correlation C.
    The tolerance is the change between two quadrature orders.
    """
    v1 = np.asarray(p1, float) / m
    v2 = np.asarray(p2, float) / m
    _check_finite_pre(eta, eta2, v1, v2)
    lo = _finite_value(eta, eta2, v1, v2, direction, n[0])
    hi = _finite_value(eta, eta2, v1, v2, direction, n[1])
    return CoulombPhaseResult(float(hi), float(abs(hi - lo)) + 1e-12,
                              meta={"profiles": [eta.params(), eta2.params()],
                                    "gh_orders": list(n), "direction": direction})


# ------------------------------------------------------- Coulomb: cutoff value

def coulomb_cutoff_time(eta, eta2, g: TestFunction, eps, p1, p2, direction="out", m=1.0,
                        n=10, n_tau=48, exact=True):
    """Time representation with cutoff, 5D: 4D Gauss-Hermite in the relative
    variable d = x' - y' of the two profile Gaussians times a τ₁ integral with τ₂
    fixed by the light-cone delta.

    exact=True keeps g_ε(x)g_ε(y) and integrates the centre-of-mass variable of
    the profile pair in closed form.  exact=False evaluates g_ε on the straight
    lines, g_ε(τ₁v₁)g_ε(τ₂v₂); the two differ by terms vanishing as ε → 0.
    """
    v1 = np.asarray(p1, float) / m
    v2 = np.asarray(p2, float) / m
    if gamma_factor(v1, v2) <= 1.0 + 1e-12:
        raise ValueError("coinciding momenta")
    ge = scale_switching(g, eps)
    L = boost_to_rest(v2)
    v1r = L @ v1
    sv = np.linalg.norm(v1r[1:])
    s, terms, scale = _correlation_terms(eta, eta2)
    X, W = _gh4(n)
    # τ offsets from lo on a log scale out to where g_ε has died
    tmax = 12.0 * g.sigma / eps
    x, wx = np.polynomial.legendre.leggauss(n_tau)
    lt = np.log(1e-7) + (np.log(tmax) - np.log(1e-7)) * 0.5 * (x + 1)
    dt = np.exp(lt)
    wdt = wx * 0.5 * (np.log(tmax) - np.log(1e-7)) * dt
    sgn = 1.0 if direction == "out" else -1.0
    total = 0.0
    if exact and (len(g.coeffs) != 1 or np.any(g.centers)):
        raise ValueError("exact cutoff representation needs a centred switching Gaussian")
    kappa = (eps / g.sigma) ** 2
    s1, s2 = eta.sigma ** 2 / s ** 2, eta2.sigma ** 2 / s ** 2
    sx2 = (eta.sigma * eta2.sigma / s) ** 2
    for (delta, cd), (ai, bj) in zip(terms, _center_pairs(eta, eta2)):
        dnodes = np.sqrt(2.0) * s * X
        z = dnodes + delta
        if direction == "in":
            z = -z
        zr = z @ L.T
        z0 = zr[:, 0]
        zs = zr[:, 1:]
        b = zs @ v1r[1:]
        c = np.sum(zs * zs, axis=1)
        acc = np.zeros(len(z))
        for sign in (1.0, -1.0):
            lo = _branch_start(z0, b, c, v1r, sign)
            tau = lo[:, None] + dt[None, :]
            rr = np.sqrt(np.maximum(sv * sv * tau * tau + 2 * b[:, None] * tau + c[:, None], 1e-300))
            t2 = z0[:, None] + tau * v1r[0] + sign * rr
            if exact:
                # x = u + aᵢ + τ₁v₁, y = w + bⱼ + τ₂v₂ with u - w = d, X the pair centre
                dd = dnodes[:, None, :]
                A = s1 * dd + ai + sgn * tau[..., None] * v1
                B = -s2 * dd + bj + sgn * t2[..., None] * v2
                Cm = 0.5 * (A + B)
                den = 1.0 + 2.0 * kappa * sx2
                ww = np.exp(-0.25 * kappa * euclid_sq(A - B)
                            - kappa * euclid_sq(Cm) / den) / den ** 2
            else:
                ww = ge.position(sgn * tau[..., None] * v1) * ge.position(sgn * t2[..., None] * v2)
            acc += np.sum(wdt * np.where(t2 > 0, ww / (2 * rr), 0.0), axis=1)
        total += cd * np.sum(W * acc)
    return float(scale * total / (4 * np.pi))


def _center_pairs(eta, eta2):
    return [(np.asarray(a, float), np.asarray(b, float))
            for a in eta.centers for b in eta2.centers]


def _branch_start(z0, b, c, v1, sign):
    v0 = v1[0]
    zv = z0 * v0 - b
    zz = z0 * z0 - c
    sq = np.sqrt(np.maximum(zv * zv - zz, 0.0))
    lo = np.zeros(len(z0))
    active0 = z0 + sign * np.sqrt(c) > 0
    for t in (-zv + sq, -zv - sq):
        on_branch = (t > 0) & (np.sign(z0 + t * v0) == -sign)
        lo = np.where(~active0 & on_branch, t, lo)
    return lo


def _smeared_current_hat(eta, g, eps, v, k, direction):
    """Ĵ(k) = ∫d⁴q/(2π)⁴ ĝ_ε(k-q) ĵ(q) in closed form via the Faddeeva function."""
    sg2 = (g.sigma / eps) ** 2
    se2 = eta.sigma ** 2
    alpha = se2 + sg2
    vE = np.array([v[0], -v[1], -v[2], -v[3]])
    nv = np.sqrt(vE @ vE)
    vhat = vE / nv
    beta = np.sqrt(alpha / 2)
    gpref = g.amp / eps ** 4
    out = np.zeros(k.shape[:-1], dtype=complex)
    for a, c in zip(eta.centers, eta.coeffs):
        aE = np.array([a[0], -a[1], -a[2], -a[3]])
        qc = (sg2 * k + 1j * aE) / alpha
        const = 0.5 * alpha * np.sum(qc * qc, axis=-1) - 0.5 * sg2 * np.sum(k * k, axis=-1)
        tc = qc @ vhat
        if direction == "out":
            line = np.pi * special.wofz(beta * tc) / nv
        else:
            line = np.pi * special.wofz(-beta * tc) / nv
        out = out + c * eta.amp * np.exp(const) * (2 * np.pi / alpha) ** 1.5 * line
    return gpref * out / (2 * np.pi) ** 4


def coulomb_cutoff_momentum(eta, eta2, g: TestFunction, eps, p1, p2, direction="out", m=1.0,
                            n_rad=48, n_pol=40, n_sph=(16, 24)):
    """Momentum representation ∫d⁴k/(2π)⁴ Ĵ₁(-k) PV 1/(-k²) Ĵ₂(k).

    4D polar coordinates k⁰ = ρcosθ, |k⃗| = ρ sinθ; the light-cone poles at
    θ = π/4, 3π/4 are removed by symmetric subtraction on mirrored nodes.
    """
    v1 = np.asarray(p1, float) / m
    v2 = np.asarray(p2, float) / m
    if gamma_factor(v1, v2) <= 1.0 + 1e-12:
        raise ValueError("coinciding momenta")
    # radial nodes in log ρ: structure at ρ ~ ε/σ_g and ρ ~ 1/σ
    x, wx = np.polynomial.legendre.leggauss(n_rad)
    lo, hi = np.log(1e-3 * eps / g.sigma), np.log(12.0 / min(eta.sigma, eta2.sigma) + 12 * eps / g.sigma)
    lr = lo + (hi - lo) * 0.5 * (x + 1)
    rho = np.exp(lr)
    wrho = wx * 0.5 * (hi - lo) * rho
    nh, wn = sphere_rule(*n_sph)
    # θ in four intervals [0,π/4],[π/4,π/2],[π/2,3π/4],[3π/4,π] mirrored about each pole
    t, wt = np.polynomial.legendre.leggauss(n_pol)
    h = np.pi / 4
    d = 0.5 * h * (t + 1)          # distance from the pole in (0, h)
    wd = 0.5 * h * wt
    total = 0.0
    for pole in (np.pi / 4, 3 * np.pi / 4):
        for sgn_side, th in ((1, pole + d), (-1, pole - d)):
            cos_t, sin_t = np.cos(th), np.sin(th)
            # d⁴k = ρ³ dρ sin²θ dθ dΩ ; 1/(-k²) = -1/(ρ² cos2θ)
            ang = sin_t ** 2 / (-np.cos(2 * th))
            k = np.empty((len(rho), len(th), len(nh), 4))
            k[..., 0] = rho[:, None, None] * cos_t[None, :, None]
            k[..., 1:] = (rho[:, None, None] * sin_t[None, :, None])[..., None] * nh[None, None, :, :]
            J1 = _smeared_current_hat(eta, g, eps, v1, -k, direction)
            J2 = _smeared_current_hat(eta2, g, eps, v2, k, direction)
            f = np.tensordot(J1 * J2, wn, axes=([2], [0]))            # (rho, th)
            f = f * ang[None, :] * rho[:, None] * wrho[:, None]
            total += np.sum(f * wd[None, :])
    # pairing (pole+d, pole-d) makes the sum a symmetric-subtraction PV
    return float(np.real(total) / (2 * np.pi) ** 4), float(np.imag(total) / (2 * np.pi) ** 4)

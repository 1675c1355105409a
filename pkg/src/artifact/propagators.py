"""Two-point kernels as (principal-value, shell-delta) pairs and PV quadrature.

A kernel of kind K with mass m is represented in momentum space as

    pv · PV 1/(m² - k²)  +  [d₊ θ(k⁰) + d₋ θ(-k⁰)] · δ(k² - m²)

and is never evaluated pointwise as a distribution.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import integrate

from .domain import msq

KINDS = ("commutator", "wightman", "feynman", "retarded", "advanced", "dirac")

# (pv coefficient, delta weight for k⁰>0, delta weight for k⁰<0)
_TABLE = {
    "commutator": (0.0, 2j * np.pi, -2j * np.pi),
    "wightman": (0.0, 2j * np.pi, 0.0),
    "feynman": (1.0, 1j * np.pi, 1j * np.pi),
    "retarded": (1.0, 1j * np.pi, -1j * np.pi),
    "advanced": (1.0, -1j * np.pi, 1j * np.pi),
    "dirac": (1.0, 0.0, 0.0),
}


@dataclass(frozen=True)
class PropagatorKernel:
    kind: str
    mass: float
    pv: complex
    delta_pos: complex
    delta_neg: complex

    def __sub__(self, other):
        return PropagatorKernel("combination", self.mass, self.pv - other.pv,
                                self.delta_pos - other.delta_pos,
                                self.delta_neg - other.delta_neg)

    def __add__(self, other):
        return PropagatorKernel("combination", self.mass, self.pv + other.pv,
                                self.delta_pos + other.delta_pos,
                                self.delta_neg + other.delta_neg)

    def scaled(self, c):
        return PropagatorKernel("combination", self.mass, c * self.pv,
                                c * self.delta_pos, c * self.delta_neg)

    def pv_value(self, k):
        """Coefficient times 1/(m²-k²) at off-shell k."""
        return self.pv / (self.mass ** 2 - msq(k))

    def delta_weight(self, k):
        """Weight multiplying δ(k²-m²), selected by the sign of k⁰."""
        k0 = np.asarray(k)[..., 0]
        return np.where(k0 > 0, self.delta_pos, self.delta_neg)


def propagator_kernel(kind, m=1.0) -> PropagatorKernel:
    if m < 0:
        raise ValueError("mass must be non-negative")
    if kind not in _TABLE:
        raise ValueError(f"unknown propagator kind {kind!r}")
    pv, dp, dn = _TABLE[kind]
    return PropagatorKernel(kind, float(m), pv, dp, dn)


def _probe_momenta(n=64, seed=7):
    rng = np.random.default_rng(seed)
    k = rng.normal(size=(n, 4)) * 2.0
    k[: n // 2, 0] = np.abs(k[: n // 2, 0])
    k[n // 2:, 0] = -np.abs(k[n // 2:, 0])
    return k


def kernel_identity_residual(identity, m=1.0):
    """Sup over a probe set of |lhs - rhs| for an identity between kernels."""
    K = {k: propagator_kernel(k, m) for k in KINDS}
    if identity == "feynman-split":
        lhs, rhs = K["feynman"], K["wightman"] + K["advanced"]
    elif identity == "dirac-average":
        lhs, rhs = K["dirac"], (K["retarded"] + K["advanced"]).scaled(0.5)
    elif identity == "retarded-minus-advanced-equals-commutator":
        lhs, rhs = K["retarded"] - K["advanced"], K["commutator"]
    else:
        raise ValueError(f"unknown identity {identity!r}")
    k = _probe_momenta()
    res_pv = np.abs(lhs.pv_value(k) - rhs.pv_value(k))
    res_d = np.abs(lhs.delta_weight(k) - rhs.delta_weight(k))
    return float(max(res_pv.max(), res_d.max()))


def pv_integrate(f, pole, support=(-np.inf, np.inf), window=1.0, epsabs=1e-13, epsrel=1e-12):
    """PV ∫ f(x)/(x - pole) dx over support.

    The window [pole-h, pole+h] is folded into ∫_0^h (f(pole+t) - f(pole-t))/t dt,
    the rest is plain quadrature. Returns (value, error estimate).
    """
    a, b = support
    if not a < b:
        raise ValueError("empty support")
    if pole in (a, b):
        raise ValueError("pole on the support boundary")
    opts = dict(epsabs=epsabs, epsrel=epsrel, limit=400)

    def cquad(fun, lo, hi):
        re = integrate.quad(lambda x: np.real(fun(x)), lo, hi, **opts)
        im = integrate.quad(lambda x: np.imag(fun(x)), lo, hi, **opts)
        return re[0] + 1j * im[0], re[1] + im[1]

    if not a < pole < b:
        val, err = cquad(lambda x: f(x) / (x - pole), a, b)
        return val, err
    h = min(window, pole - a, b - pole)
    total, err = cquad(lambda t: (f(pole + t) - f(pole - t)) / t if t > 0 else 0.0, 0.0, h)
    for lo, hi in ((a, pole - h), (pole + h, b)):
        if hi > lo:
            v, e = cquad(lambda x: f(x) / (x - pole), lo, hi)
            total += v
            err += e
    if np.isrealobj(total) or abs(np.imag(total)) == 0:
        return complex(total), err
    return total, err


def massless_dirac_position(x):
    """Support test for D_0^D(x) = δ(x²)/4π: zero wherever x² ≠ 0."""
    x2 = msq(x)
    return np.where(np.abs(x2) > 1e-14, 0.0, np.nan)


def massless_dirac_gaussian_pairing(s, representation="position"):
    """∫ d⁴x D_0^D(x) exp(-|x|_E²/(2s²)) in either representation.

    Position: δ(x²)/4π collapses to the light cone, giving s²/2 analytically
    after the radial Gaussian integral.  Momentum: PV 1/(-k²) against the
    transform 4π²s⁴ exp(-s²|k|_E²/2) in 4D polar coordinates, k² = ρ² cos2θ,
    with the angular principal value done by pv_integrate.
    """
    if representation == "position":
        # x⁰ = ±r: ∫ d³x (1/4π)(1/2r)·2·exp(-r²/s²) = ∫ r exp(-r²/s²) dr
        val, _ = integrate.quad(lambda r: r * np.exp(-r * r / s ** 2), 0, np.inf)
        return val
    k = propagator_kernel("dirac", 0.0)
    radial, _ = integrate.quad(lambda r: r * np.exp(-0.5 * s * s * r * r), 0, np.inf)
    # PV ∫_0^π sin²θ/(-cos2θ) dθ with poles at π/4 and 3π/4: split at π/2
    def piece(lo, hi, pole):
        g = lambda t: np.sin(t) ** 2 * (t - pole) / (-np.cos(2 * t)) if abs(t - pole) > 1e-9 \
            else np.sin(pole) ** 2 / (2 * np.sin(2 * pole))
        return pv_integrate(g, pole, (lo, hi))[0].real
    ang = piece(0.0, np.pi / 2, np.pi / 4) + piece(np.pi / 2, np.pi, 3 * np.pi / 4)
    pref = 4 * np.pi / (2 * np.pi) ** 4 * 4 * np.pi ** 2 * s ** 4
    return float(np.real(k.pv) * pref * radial * ang)

"""Dirac algebra, spinors, the QED self-energy matrix, soft vertices and the
order-e QED kernels (intertwiner, LSZ dressing, long-range field tail)."""
from __future__ import annotations

import numpy as np

from .adiabatic import EpsScan
from .domain import METRIC, mdot, msq, on_shell, sphere_rule

I2 = np.eye(2)
PAULI = [np.array([[0, 1], [1, 0]], dtype=complex),
         np.array([[0, -1j], [1j, 0]], dtype=complex),
         np.array([[1, 0], [0, -1]], dtype=complex)]


def _dirac_rep():
    g0 = np.block([[I2, 0 * I2], [0 * I2, -I2]]).astype(complex)
    gs = [np.block([[0 * I2, s], [-s, 0 * I2]]) for s in PAULI]
    return np.array([g0] + gs)


GAMMA = _dirac_rep()
GAMMA5 = 1j * GAMMA[0] @ GAMMA[1] @ GAMMA[2] @ GAMMA[3]
ONE = np.eye(4, dtype=complex)


def slash(p):
    """γ^μ p_μ for a four-vector (or a stack of them)."""
    p = np.asarray(p)
    low = p * np.array([1.0, -1.0, -1.0, -1.0])
    return np.tensordot(low, GAMMA, axes=([-1], [0]))


def bar(u):
    return np.conj(u) @ GAMMA[0]


def gamma_algebra_residual() -> float:
    res = 0.0
    for mu in range(4):
        for nu in range(4):
            ac = GAMMA[mu] @ GAMMA[nu] + GAMMA[nu] @ GAMMA[mu]
            res = max(res, np.abs(ac - 2 * METRIC[mu, nu] * ONE).max())
            res = max(res, abs(np.trace(GAMMA[mu] @ GAMMA[nu]) - 4 * METRIC[mu, nu]))
        res = max(res, np.abs(GAMMA5 @ GAMMA[mu] + GAMMA[mu] @ GAMMA5).max())
    res = max(res, np.abs(GAMMA5 @ GAMMA5 - ONE).max())
    res = max(res, np.abs(GAMMA[0] - GAMMA[0].conj().T).max())
    for i in range(1, 4):
        res = max(res, np.abs(GAMMA[i] + GAMMA[i].conj().T).max())
    return float(res)


# ------------------------------------------------------------------ spinors

def spinor(sigma, p, kind="u", m=1.0):
    """u(σ,p) = (p̸+m)(χ_σ,0)/√(E+m), v(σ,p) = (−p̸+m)(0,χ_σ)/√(E+m); ūu = 2m, v̄v = −2m."""
    if sigma not in (1, 2):
        raise ValueError("sigma must be 1 or 2")
    p = np.asarray(p, dtype=float)
    if abs(msq(p) - m * m) > 1e-9 * max(1.0, p[0] ** 2) or p[0] <= 0:
        raise ValueError("p must lie on the mass shell")
    chi = np.zeros(4, dtype=complex)
    if kind == "u":
        chi[sigma - 1] = 1.0
        return (slash(p) + m * ONE) @ chi / np.sqrt(p[0] + m)
    if kind == "v":
        chi[1 + sigma] = 1.0
        return (-slash(p) + m * ONE) @ chi / np.sqrt(p[0] + m)
    raise ValueError("kind must be 'u' or 'v'")


def polsum_residual(p, m=1.0) -> float:
    su = sum(np.outer(spinor(s, p, "u", m), bar(spinor(s, p, "u", m))) for s in (1, 2))
    sv = sum(np.outer(spinor(s, p, "v", m), bar(spinor(s, p, "v", m))) for s in (1, 2))
    r = max(np.abs(su - (slash(p) + m * ONE)).max(), np.abs(sv - (slash(p) - m * ONE)).max())
    for s in (1, 2):
        u, v = spinor(s, p, "u", m), spinor(s, p, "v", m)
        r = max(r, np.abs((slash(p) - m * ONE) @ u).max(), np.abs((slash(p) + m * ONE) @ v).max(),
                abs(bar(u) @ u - 2 * m), abs(bar(v) @ v + 2 * m))
    return float(r)


def photon_polarizations(k):
    """Two spacelike ε(s,k) = (0, e⃗_s) with k·ε = 0 and ε·ε' = −δ."""
    k = np.asarray(k, dtype=float)
    n = k[1:] / np.linalg.norm(k[1:])
    ref = np.array([0.0, 0.0, 1.0]) if abs(n[2]) < 0.9 else np.array([1.0, 0.0, 0.0])
    e1 = np.cross(n, ref)
    e1 /= np.linalg.norm(e1)
    e2 = np.cross(n, e1)
    return np.array([np.concatenate([[0.0], e1]), np.concatenate([[0.0], e2])])


def soft_vertex_value(p, k, kind="u", m=1.0, normal_ordered=True):
    """V[σ,σ',μ] = s̄(σ,p)γ^μ s(σ',p+k), with p+k re-projected onto H_m.

    For kind='v' and normal_ordered=True the fermionic reordering sign of the
    d*d term in :ψ̄γψ: is included, so the soft limit is −2p^μδ.
    """
    p = np.asarray(p, float)
    q = on_shell(p[1:] + np.asarray(k, float)[1:], m)
    out = np.zeros((2, 2, 4), dtype=complex)
    for s in (1, 2):
        for s2 in (1, 2):
            a = bar(spinor(s, p, kind, m))
            b = spinor(s2, q, kind, m)
            out[s - 1, s2 - 1] = [a @ GAMMA[mu] @ b for mu in range(4)]
    if kind == "v" and normal_ordered:
        out = -out
    return out


def soft_vertex_residual(p, scales, kind="u", direction=(0.3, -0.5, 0.8), m=1.0) -> EpsScan:
    """Residual max|V − (±2p^μ δ)| as the null momentum k = λ k̂ shrinks."""
    p = np.asarray(p, float)
    d = np.asarray(direction, float)
    d /= np.linalg.norm(d)
    sign = -1.0 if kind == "v" else 1.0
    target = sign * 2 * np.einsum("ab,m->abm", np.eye(2), p)
    scales = np.sort(np.asarray(scales, float))[::-1]
    vals = []
    for lam in scales:
        k = lam * np.concatenate([[1.0], d])
        vals.append(np.abs(soft_vertex_value(p, k, kind, m) - target).max())
    return EpsScan(scales, np.array(vals, dtype=complex),
                   {"kind": kind, "p": p.tolist(), "direction": d.tolist(),
                    "note": "p+k re-projected onto the mass shell"})


# ------------------------------------------------------------ self-energy

def _xi_coefficients(q2, rc, m=1.0):
    """Ξ(q) = A(q²)𝟙 + B(q²)q̸."""
    if q2 == 0:
        raise ValueError("q² = 0 is a pole of the self-energy matrix")
    c1, c2 = rc.c1, rc.c2
    f = 1.0 - m * m / q2
    x = abs(1.0 - q2 / (m * m))
    lg = f * np.log(x) if f != 0 else 0.0
    A = m * lg - m / 4 + c1 - c2 * m
    B = 0.25 * (1.0 + m * m / q2) * lg + m * m / (4 * q2) + c2
    return A / (4 * np.pi ** 2), B / (4 * np.pi ** 2)


def xi_matrix(q, rc, m=1.0):
    q = np.asarray(q, dtype=float)
    A, B = _xi_coefficients(float(msq(q)), rc, m)
    return A * ONE + B * slash(q)


def onshell_sandwich(p, sigma, sigma2, rc, m=1.0):
    return complex(bar(spinor(sigma, p, "u", m)) @ xi_matrix(p, rc, m) @ spinor(sigma2, p, "u", m))


def xi_scalar(q2, rc, m=1.0):
    """ū(p)Ξ(q)u(p) with q = p√q²/m timelike, i.e. 2m(A + B√q²)."""
    if q2 <= 0:
        raise ValueError("needs timelike q")
    A, B = _xi_coefficients(q2, rc, m)
    return 2 * m * (A + B * np.sqrt(q2))


def xi_hermiticity_residual(qs, rc, m=1.0):
    return float(max(np.abs(GAMMA[0] @ xi_matrix(q, rc, m).conj().T @ GAMMA[0]
                            - xi_matrix(q, rc, m)).max() for q in qs))


# ------------------------------------------------------------- QED kernels

def _current(p, v, k):
    p, v, k = (np.asarray(x, float) for x in (p, v, k))
    pk, vk = mdot(p, k), mdot(v, k)
    if np.any(np.abs(pk) < 1e-300) or np.any(np.abs(vk) < 1e-300):
        raise ValueError("degenerate denominator p·k or v·k")
    return p / pk[..., None] - v / vk[..., None]


def intertwiner_vector(eta_new, eta_old, v, p, k):
    """v^μ(η',η,p,k) = (p^μ/p·k − v^μ/v·k)(η̂'(k) − η̂(k))."""
    k = np.asarray(k, float)
    d = eta_new.momentum(k) - eta_old.momentum(k)
    return _current(p, v, k) * d[..., None]


def intertwiner_two_body(eta_new, eta_old, v, p1, p2, photon_grid):
    """v(η',η,p₁,p₂) = ∫dμ₀ (p₁/p₁k − v/vk)·(p₂/p₂k − v/vk)(η̂'(k)η̂(−k) − η̂'(−k)η̂(k))."""
    k = photon_grid.nodes
    a = _current(p1, v, k)
    b = _current(p2, v, k)
    ep, e0 = eta_new.momentum(k), eta_old.momentum(k)
    # η real ⇒ η̂(−k) = conj η̂(k)
    integrand = mdot(a, b) * (ep * np.conj(e0) - np.conj(ep) * e0)
    return complex(np.sum(photon_grid.weights * integrand))


def lsz_current(eta, v, k, p, charge=1.0):
    """J^μ(η,v,k) on a one-particle state of momentum p and charge sign ρ (order e)."""
    k = np.asarray(k, float)
    return charge * eta.momentum(k)[..., None] * _current(p, v, k)


def lsz_kernel(eta, v, k, p, s, charge=1.0):
    """Polarization component ε(s,k)·J(η,v,k)."""
    eps = photon_polarizations(k)[s - 1]
    return complex(mdot(eps, lsz_current(eta, v, k, p, charge)))


def lsz_transversality(eta, v, k, p, charge=1.0):
    return complex(mdot(np.asarray(k, float), lsz_current(eta, v, k, p, charge)))


def coulomb_weight(p1, p2, m=1.0):
    """p₁·p₂/m² multiplying Φ in the QED Coulomb phase."""
    return float(mdot(p1, p2) / m ** 2)


# ------------------------------------------------------ long-range tail/flux

def em_tail(n3, v, Q, e=1.0):
    """lim R² F^{μν}(Rn) = −eQ(n^μv^ν − n^νv^μ)/((n·v)² − n²)^{3/2}, n = (0, n⃗)."""
    n3 = np.atleast_2d(np.asarray(n3, float))
    n = np.concatenate([np.zeros((len(n3), 1)), n3], axis=1)
    v = np.asarray(v, float)
    den = (mdot(n, v) ** 2 - msq(n)) ** 1.5
    F = np.einsum("im,n->imn", n, v) - np.einsum("in,m->imn", n, v)
    return -e * Q * F / den[:, None, None]


def em_tail_and_flux(v, Q, e=1.0, n_theta=64, n_phi=64):
    """Tail samples on a sphere grid and the radial electric flux ∮ n̂·E dΩ, E^i = F^{i0}."""
    nhat, w = sphere_rule(n_theta, n_phi)
    F = em_tail(nhat, v, Q, e)
    radial = np.einsum("ni,ni->n", nhat, F[:, 1:, 0])
    return {"directions": nhat, "tail": F, "flux": float(np.sum(w * radial)),
            "theory": -4 * np.pi * e * Q}

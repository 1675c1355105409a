"""Minkowski kinematics, mass-shell quadrature and the Gaussian test-function family.

Conventions: metric (+,-,-,-), natural units, Fourier transform
f~(q) = ∫ d⁴x exp(i q·x) f(x) with the Minkowski product in the exponent.
"""
from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np

METRIC = np.diag([1.0, -1.0, -1.0, -1.0])
TWO_PI3 = (2.0 * np.pi) ** 3


def mdot(a, b):
    """Minkowski product over the last axis (broadcasting)."""
    a = np.asarray(a)
    b = np.asarray(b)
    return a[..., 0] * b[..., 0] - np.sum(a[..., 1:] * b[..., 1:], axis=-1)


def msq(a):
    return mdot(a, a)


def euclid_sq(a):
    a = np.asarray(a)
    return np.sum(a * a, axis=-1)


def shell_energy(p3, m):
    p3 = np.asarray(p3, dtype=float)
    return np.sqrt(np.sum(p3 * p3, axis=-1) + m * m)


def on_shell(p3, m):
    """Four-momenta (..., 4) on H_m from spatial parts (..., 3)."""
    p3 = np.asarray(p3, dtype=float)
    return np.concatenate([shell_energy(p3, m)[..., None], p3], axis=-1)


@dataclass(frozen=True)
class OnShellMomentum:
    mass: float
    spatial: tuple

    def __post_init__(self):
        if self.mass < 0:
            raise ValueError("mass must be non-negative")
        if self.mass == 0 and np.linalg.norm(self.spatial) == 0:
            raise ValueError("massless momentum needs |p| > 0")

    @property
    def energy(self) -> float:
        return float(shell_energy(self.spatial, self.mass))

    @property
    def four(self) -> np.ndarray:
        return on_shell(np.asarray(self.spatial, dtype=float), self.mass)

    @property
    def velocity(self) -> np.ndarray:
        if self.mass == 0:
            raise ValueError("massless momentum has no four-velocity")
        return self.four / self.mass


def four_velocity(v3):
    """Four-velocity from a spatial velocity |v3| < 1."""
    v3 = np.asarray(v3, dtype=float)
    beta2 = float(v3 @ v3)
    if beta2 >= 1.0:
        raise ValueError("spatial velocity must be subluminal")
    gam = 1.0 / np.sqrt(1.0 - beta2)
    return np.concatenate([[gam], gam * v3])


def velocity_from_momentum(p3, m=1.0):
    return on_shell(p3, m) / m


def boost_to_rest(u):
    """Lorentz matrix L with L @ u = (1,0,0,0) for a four-velocity u."""
    u = np.asarray(u, dtype=float)
    gam = u[0]
    w = u[1:]
    L = np.eye(4)
    L[0, 0] = gam
    L[0, 1:] = -w
    L[1:, 0] = -w
    if gam - 1.0 > 1e-15:
        L[1:, 1:] += np.outer(w, w) / (gam + 1.0)
    return L


# ---------------------------------------------------------------- quadrature

def gauss_legendre(n, a, b):
    x, w = np.polynomial.legendre.leggauss(n)
    half = 0.5 * (b - a)
    return a + half * (x + 1.0), half * w


def sphere_rule(n_theta, n_phi):
    """Unit vectors and solid-angle weights (sum 4π)."""
    c, wc = np.polynomial.legendre.leggauss(n_theta)
    phi = 2.0 * np.pi * np.arange(n_phi) / n_phi
    s = np.sqrt(1.0 - c * c)
    n = np.stack([np.outer(s, np.cos(phi)), np.outer(s, np.sin(phi)),
                  np.outer(c, np.ones(n_phi))], axis=-1).reshape(-1, 3)
    w = np.outer(wc, np.full(n_phi, 2.0 * np.pi / n_phi)).ravel()
    return n, w


@dataclass(frozen=True)
class MassShellGrid:
    mass: float
    nodes: np.ndarray = field(repr=False)     # (N, 4)
    weights: np.ndarray = field(repr=False)   # (N,) include d³p/((2π)³ 2E)
    region: dict = field(default_factory=dict)

    def __len__(self):
        return len(self.weights)

    def descriptor(self) -> dict:
        return {"mass": self.mass, **self.region}


def make_shell_grid(mass, r0, r1, n_radial=16, n_theta=8, n_phi=8, center=None):
    """Spherical product grid on H_m for |p - center| in [r0, r1]."""
    if not (0 <= r0 < r1):
        raise ValueError("need 0 <= r0 < r1")
    r, wr = gauss_legendre(n_radial, r0, r1)
    n, wn = sphere_rule(n_theta, n_phi)
    c = np.zeros(3) if center is None else np.asarray(center, dtype=float)
    p3 = c + (r[:, None, None] * n[None, :, :]).reshape(-1, 3)
    E = shell_energy(p3, mass)
    w = (wr[:, None] * r[:, None] ** 2 * wn[None, :]).ravel() / (TWO_PI3 * 2.0 * E)
    region = {"r0": float(r0), "r1": float(r1), "n_radial": n_radial,
              "n_theta": n_theta, "n_phi": n_phi, "center": c.tolist()}
    return MassShellGrid(float(mass), on_shell(p3, mass), w, region)


def shell_volume(mass, r0, r1):
    """∫ d³p/((2π)³ 2E) over r0 <= |p| <= r1."""
    if mass == 0:
        return (r1 ** 2 - r0 ** 2) / (8 * np.pi ** 2)

    def prim(r):
        E = np.sqrt(r * r + mass * mass)
        return 0.5 * (r * E - mass * mass * np.arcsinh(r / mass))
    return (prim(r1) - prim(r0)) / (4 * np.pi ** 2)


def shell_integrate(grid: MassShellGrid, f, mass=None):
    """Quadrature of ∫dμ_m f; f maps an (N,4) array of momenta to N values."""
    if mass is not None and not np.isclose(mass, grid.mass):
        raise ValueError(f"grid mass {grid.mass} does not match expected mass {mass}")
    vals = np.asarray(f(grid.nodes))
    return np.sum(grid.weights * vals)


def grid_to_csv_rows(grid: MassShellGrid):
    rows = ["E,px,py,pz,weight"]
    for p, w in zip(grid.nodes, grid.weights):
        rows.append(",".join(f"{x:.17g}" for x in (*p, w)))
    return "\n".join(rows) + "\n"


# ------------------------------------------------------------ test functions

KINDS = ("profile", "switching", "profile-difference")


@dataclass(frozen=True)
class TestFunction:
    """Finite combination Σ c_j G_σ(x - a_j) of Gaussians of common width.

    Momentum side: f~(q) = amp · Σ c_j exp(i q·a_j) exp(-σ²|q|_E²/2).
    Profiles have amp = 1 (so f~(0)=1); switching functions have g(0)=1,
    i.e. amp = 4π²σ⁴.
    """
    __test__ = False

    kind: str
    sigma: float
    centers: np.ndarray = field(repr=False)   # (K, 4)
    coeffs: np.ndarray = field(repr=False)    # (K,) real
    amp: float = 1.0
    eps: float = 1.0

    @property
    def value_at_zero(self) -> float:
        """Stored momentum-space value at the origin."""
        if self.kind == "profile":
            return 1.0
        if self.kind == "profile-difference":
            return 0.0
        return float(self.amp * np.sum(self.coeffs))

    def params(self) -> dict:
        return {"family": "gaussian", "kind": self.kind, "sigma": self.sigma,
                "eps": self.eps, "centers": np.asarray(self.centers).tolist(),
                "coeffs": np.asarray(self.coeffs).tolist()}

    def momentum(self, q):
        q = np.asarray(q, dtype=float)
        damp = np.exp(-0.5 * self.sigma ** 2 * euclid_sq(q))
        ph = np.zeros(q.shape[:-1], dtype=complex)
        for a, c in zip(self.centers, self.coeffs):
            if np.any(a):
                ph = ph + c * np.exp(1j * mdot(q, a))
            else:
                ph = ph + c
        return self.amp * damp * ph

    def position(self, x):
        x = np.asarray(x, dtype=float)
        s2 = self.sigma ** 2
        norm = self.amp / (4 * np.pi ** 2 * s2 * s2)
        out = np.zeros(x.shape[:-1])
        for a, c in zip(self.centers, self.coeffs):
            out = out + c * np.exp(-0.5 * euclid_sq(x - a) / s2)
        return norm * out

    def is_real_momentum(self):
        return not np.any(np.abs(np.asarray(self.centers)))

    def __add__(self, other):
        return _combine(self, other, 1.0)

    def __sub__(self, other):
        return _combine(self, other, -1.0)


def _combine(f1, f2, sign):
    if not np.isclose(f1.sigma, f2.sigma) or not np.isclose(f1.amp, f2.amp):
        raise ValueError("combinations need a common width")
    centers = np.concatenate([f1.centers, f2.centers])
    coeffs = np.concatenate([f1.coeffs, sign * f2.coeffs])
    total = f1.amp * coeffs.sum()
    if f1.kind == "switching":
        kind = "switching"
    elif abs(total) < 1e-14:
        kind = "profile-difference"
    elif abs(total - 1.0) < 1e-14:
        kind = "profile"
    else:
        kind = "combination"
    return TestFunction(kind, f1.sigma, centers, coeffs, f1.amp, f1.eps)


def make_test_function(kind, sigma, a=None, eta2=None):
    """Build a Gaussian profile/switching function, or η - η2 for 'profile-difference'."""
    if not sigma > 0:
        raise ValueError("sigma must be positive")
    if kind not in KINDS:
        raise ValueError(f"unknown kind {kind!r}")
    a = np.zeros(4) if a is None else np.asarray(a, dtype=float)
    if kind == "profile-difference":
        base = make_test_function("profile", sigma, a)
        other = eta2 if eta2 is not None else make_test_function("profile", sigma)
        return base - other
    amp = 1.0 if kind == "profile" else 4 * np.pi ** 2 * sigma ** 4
    return TestFunction(kind, float(sigma), a[None, :], np.ones(1), amp)


def translate(f: TestFunction, a):
    """f_a(x) = f(x - a)."""
    a = np.asarray(a, dtype=float)
    return replace(f, centers=np.asarray(f.centers) + a)


def scale_switching(g: TestFunction, eps):
    """g_ε(x) = g(εx): width σ/ε, centers a/ε, momentum dual ε⁻⁴ ĝ(q/ε)."""
    if g.kind != "switching":
        raise ValueError("only switching functions are scaled")
    if not eps > 0:
        raise ValueError("eps must be positive")
    s = g.sigma / eps
    return TestFunction("switching", s, np.asarray(g.centers) / eps, g.coeffs,
                        g.amp / eps ** 4, g.eps * eps)


def eval_test_function(f: TestFunction, point, space="momentum"):
    if space == "momentum":
        return f.momentum(point)
    if space == "position":
        return f.position(point)
    raise ValueError("space must be 'position' or 'momentum'")

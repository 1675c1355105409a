"""Truncated Fock-space calculus for electrons on a fixed mass-shell grid and
photons in a discrete mode basis.

Photon modes are the nodes of a massless grid (times two transverse
polarizations in the QED model) with mode operators a_j = √w_j a(k_j), so
[a_i, a_j*] = δ_ij.  States are stored per electron number as a complex array
of shape (N_e**n, D): rows are ordered electron configurations (row-major over
grid nodes), columns are photon occupation states with total number ≤ N_max.
Stored coefficients absorb the quadrature weights, so the norm is the plain
Euclidean norm:

    electrons:  c = ψ(p₁..pₙ) Π √w(pᵢ)
    photons:    c(n⃗) = √(n!/Π n_j!) Π √w_j h(k...)

Every operator in scope is diagonal in the electron momenta and acts per row.
"""
from __future__ import annotations

import itertools
import json
import math
from dataclasses import dataclass, field, replace

import numpy as np
from scipy import sparse, special

from .diracqed import photon_polarizations
from .domain import MassShellGrid, TestFunction, mdot, translate as translate_profile
from .longrange import coulomb_finite

DEFAULT_E = 0.3
DEFAULT_NMAX = 6


@dataclass(frozen=True)
class SectorLabel:
    n_electrons: int
    n_photons: int
    n_positrons: int = 0

    def __post_init__(self):
        if min(self.n_electrons, self.n_photons, self.n_positrons) < 0:
            raise ValueError("particle numbers must be non-negative")


# ------------------------------------------------------------- photon modes

class PhotonSpace:
    """Occupation basis over the modes of a massless grid, total number ≤ n_max."""

    def __init__(self, grid: MassShellGrid, n_max=DEFAULT_NMAX, polarizations=1):
        if grid.mass != 0:
            raise ValueError("photon grid must be massless")
        if n_max < 0:
            raise ValueError("n_max must be non-negative")
        if polarizations not in (1, 2):
            raise ValueError("polarizations must be 1 (scalar) or 2 (transverse)")
        self.grid = grid
        self.n_max = int(n_max)
        self.polarizations = polarizations
        node = np.repeat(np.arange(len(grid)), polarizations)
        self.mode_node = node
        self.mode_pol = np.tile(np.arange(polarizations), len(grid))
        self.k = grid.nodes[node]
        self.w = grid.weights[node]
        self.pol_vectors = None
        if polarizations == 2:
            self.pol_vectors = np.concatenate([photon_polarizations(kk)[:, 1:] for kk in grid.nodes])
        M = len(node)
        self.n_modes = M
        occ = [np.zeros((1, M), dtype=np.int64)]
        for n in range(1, self.n_max + 1):
            combos = np.array(list(itertools.combinations_with_replacement(range(M), n)))
            o = np.zeros((len(combos), M), dtype=np.int64)
            rows = np.repeat(np.arange(len(combos)), n)
            np.add.at(o, (rows, combos.ravel()), 1)
            occ.append(o)
        self.occ = np.concatenate(occ)
        self.number = self.occ.sum(axis=1)
        self.dim = len(self.occ)
        # hash occupation rows for vectorized lookup; the same random vector for
        # every space with the same mode count makes embeddings cheap
        self._r = np.random.default_rng(M).integers(1, 2 ** 62, size=M, dtype=np.int64)
        self._hash = self.occ @ self._r
        order = np.argsort(self._hash)
        if len(np.unique(self._hash)) != self.dim:
            raise RuntimeError("occupation hash collision")
        self._sorted_hash = self._hash[order]
        self._order = order
        self.momentum = self.occ @ self.k            # (D, 4) total photon momentum
        self._lower = [self._lowering(j) for j in range(M)]
        # joint sparsity pattern of all a_j: a(f) for any f reuses it
        dst = np.concatenate([m.tocoo().row for m in self._lower])
        src = np.concatenate([m.tocoo().col for m in self._lower])
        self._pat_mode = np.concatenate([np.full(m.nnz, j) for j, m in enumerate(self._lower)])
        self._pat_vals = np.concatenate([m.tocoo().data for m in self._lower])
        tag = sparse.csr_matrix((np.arange(1, len(dst) + 1, dtype=float), (dst, src)),
                                shape=(self.dim, self.dim))
        self._pat_perm = tag.data.astype(np.int64) - 1
        self._pat_indices, self._pat_indptr = tag.indices, tag.indptr

    def index_of(self, hashes):
        pos = np.searchsorted(self._sorted_hash, hashes)
        pos = np.clip(pos, 0, self.dim - 1)
        ok = self._sorted_hash[pos] == hashes
        return np.where(ok, self._order[pos], -1)

    def _lowering(self, j):
        src = np.nonzero(self.occ[:, j])[0]
        dst = self.index_of(self._hash[src] - self._r[j])
        vals = np.sqrt(self.occ[src, j].astype(float))
        return sparse.csr_matrix((vals, (dst, src)), shape=(self.dim, self.dim))

    def lower(self, j):
        """Matrix of a_j."""
        return self._lower[j]

    def annihilator(self, f):
        """Matrix of a(f) = Σ_j conj(f_j) a_j for mode coefficients f."""
        data = (np.conj(f)[self._pat_mode] * self._pat_vals)[self._pat_perm]
        return sparse.csr_matrix((data, self._pat_indices, self._pat_indptr),
                                 shape=(self.dim, self.dim))

    def compatible(self, other: "PhotonSpace"):
        return (self.polarizations == other.polarizations
                and np.array_equal(self.grid.nodes, other.grid.nodes)
                and np.array_equal(self.grid.weights, other.grid.weights))

    def embedding(self, bigger: "PhotonSpace"):
        """Indices of this basis inside a compatible space with n_max ≥ self.n_max."""
        if not self.compatible(bigger) or bigger.n_max < self.n_max:
            raise ValueError("incompatible photon spaces")
        return bigger.index_of(self._hash)

    def descriptor(self):
        return {"n_max": self.n_max, "polarizations": self.polarizations,
                "n_modes": self.n_modes, **self.grid.descriptor()}


# ------------------------------------------------------------ wave functions

@dataclass(frozen=True)
class SampledWaveFunction:
    """h(p₁..pₙ, k₁..k_m) on the product grid; photon slots index modes."""
    sector: SectorLabel
    electron_grid: MassShellGrid
    photon_grid: MassShellGrid
    amplitude: np.ndarray = field(repr=False)
    polarizations: int = 1

    def __post_init__(self):
        n, m = self.sector.n_electrons, self.sector.n_photons
        M = len(self.photon_grid) * self.polarizations
        shape = (len(self.electron_grid),) * n + (M,) * m
        if tuple(self.amplitude.shape) != shape:
            raise ValueError(f"amplitude shape {self.amplitude.shape} != {shape}")

    def symmetry_residual(self):
        n, m = self.sector.n_electrons, self.sector.n_photons
        h = self.amplitude
        res = 0.0
        axes_e, axes_k = list(range(n)), list(range(n, n + m))
        for perm in itertools.permutations(axes_e):
            res = max(res, float(np.max(np.abs(h - np.transpose(h, list(perm) + axes_k)), initial=0.0)))
        for perm in itertools.permutations(axes_k):
            res = max(res, float(np.max(np.abs(h - np.transpose(h, axes_e + list(perm))), initial=0.0)))
        return res

    def norm(self):
        n, m = self.sector.n_electrons, self.sector.n_photons
        we = self.electron_grid.weights
        wk = np.repeat(self.photon_grid.weights, self.polarizations)
        dens = np.abs(self.amplitude) ** 2
        for _ in range(n):
            dens = np.tensordot(we, dens, axes=(0, 0))
        for _ in range(m):
            dens = np.tensordot(wk, dens, axes=(0, 0))
        return float(np.sqrt(dens))


@dataclass(frozen=True)
class FockVector:
    electron_grid: MassShellGrid
    photons: PhotonSpace
    blocks: dict                                 # n_e -> (N_e**n_e, D) complex
    charges: dict = field(default_factory=dict)  # n_e -> tuple of ±1 per slot (QED)
    remainder: float = 0.0                       # accumulated exact truncation loss
    remainder_bound: float = 0.0                 # accumulated analytic bound

    def charge_signs(self, n):
        return np.asarray(self.charges.get(n, (1,) * n), dtype=float)

    def configs(self, n):
        N = len(self.electron_grid)
        if n == 0:
            return np.zeros((1, 0), dtype=int)
        return np.stack(np.unravel_index(np.arange(N ** n), (N,) * n), axis=-1)

    def electron_momenta(self, n):
        return self.electron_grid.nodes[self.configs(n)]      # (C, n, 4)

    def with_blocks(self, blocks, loss=0.0, bound=0.0):
        return replace(self, blocks=blocks, remainder=self.remainder + loss,
                       remainder_bound=self.remainder_bound + bound)

    def scaled(self, alpha):
        return replace(self, blocks={n: alpha * b for n, b in self.blocks.items()})

    def __add__(self, other):
        _check_compatible(self, other)
        blocks = dict(self.blocks)
        for n, b in other.blocks.items():
            blocks[n] = blocks[n] + b if n in blocks else b.copy()
        return replace(self, blocks=blocks, remainder=self.remainder + other.remainder,
                       remainder_bound=self.remainder_bound + other.remainder_bound)

    def __sub__(self, other):
        return self + other.scaled(-1.0)

    def sector_labels(self):
        out = []
        for n, b in self.blocks.items():
            for m in np.unique(self.photons.number[np.any(b != 0, axis=0)]):
                out.append(SectorLabel(n, int(m)))
        return out

    def sector(self, label: SectorLabel) -> SampledWaveFunction:
        """Tensor form h(p..., k...) of one sector."""
        n, m = label.n_electrons, label.n_photons
        ph = self.photons
        M = ph.n_modes
        blk = self.blocks.get(n)
        h = np.zeros((len(self.electron_grid),) * n + (M,) * m, dtype=complex)
        if blk is not None:
            ew = np.sqrt(np.prod(self.electron_grid.weights[self.configs(n)], axis=1))
            tuples = list(itertools.product(range(M), repeat=m))
            if tuples:
                t = np.array(tuples, dtype=int).reshape(len(tuples), m)
                occ = np.zeros((len(t), M), dtype=np.int64)
                np.add.at(occ, (np.repeat(np.arange(len(t)), m), t.ravel()), 1)
                idx = ph.index_of(occ @ ph._r)
                fact = math.factorial(m) / special.factorial(occ).prod(axis=1)
                scale = np.sqrt(fact) * np.prod(np.sqrt(ph.w)[t], axis=1)
                vals = blk[:, idx] / ew[:, None] / scale[None, :]
                h = vals.reshape(h.shape)
        return SampledWaveFunction(label, self.electron_grid, ph.grid, h, ph.polarizations)


def _check_compatible(a: FockVector, b: FockVector):
    if not (np.array_equal(a.electron_grid.nodes, b.electron_grid.nodes)
            and a.photons.compatible(b.photons) and a.photons.n_max == b.photons.n_max):
        raise ValueError("incompatible grids")


def vacuum(electron_grid, photons: PhotonSpace) -> FockVector:
    b = np.zeros((1, photons.dim), dtype=complex)
    b[0, 0] = 1.0
    return FockVector(electron_grid, photons, {0: b})


def from_sectors(electron_grid, photons: PhotonSpace, waves, charges=None) -> FockVector:
    """FockVector from SampledWaveFunctions (symmetrized tensors)."""
    blocks = {}
    M = photons.n_modes
    for wf in waves:
        n, m = wf.sector.n_electrons, wf.sector.n_photons
        if m > photons.n_max:
            raise ValueError("sector exceeds the photon truncation")
        if wf.symmetry_residual() > 1e-12:
            raise ValueError("wave function is not permutation symmetric")
        N = len(electron_grid)
        ew = np.sqrt(np.prod(electron_grid.weights[
            np.stack(np.unravel_index(np.arange(N ** n), (N,) * n), axis=-1)], axis=1)) if n else np.ones(1)
        h = wf.amplitude.reshape(N ** n, M ** m) if m else wf.amplitude.reshape(N ** n, 1)
        blk = blocks.setdefault(n, np.zeros((N ** n, photons.dim), dtype=complex))
        sel = np.nonzero(photons.number == m)[0]
        for s in sel:
            o = photons.occ[s]
            modes = np.repeat(np.arange(M), o)
            flat = np.ravel_multi_index(tuple(modes), (M,) * m) if m else 0
            fact = math.factorial(m) / np.prod([math.factorial(x) for x in o[o > 0]])
            blk[:, s] += ew * np.sqrt(fact) * np.prod(np.sqrt(photons.w[modes])) * h[:, flat]
    return FockVector(electron_grid, photons, blocks, dict(charges or {}))


def electron_state(electron_grid, photons, psi, charges=None) -> FockVector:
    """n-electron, zero-photon state from ψ sampled on the ordered product grid."""
    psi = np.asarray(psi, dtype=complex)
    n = psi.ndim
    wf = SampledWaveFunction(SectorLabel(n, 0), electron_grid, photons.grid, psi, photons.polarizations)
    ch = {n: tuple(charges)} if charges is not None else None
    return from_sectors(electron_grid, photons, [wf], ch)


def embed(psi: FockVector, n_max) -> FockVector:
    if n_max < psi.photons.n_max:
        raise ValueError("N_max below the existing photon occupancy")
    if n_max == psi.photons.n_max:
        return psi
    big = PhotonSpace(psi.photons.grid, n_max, psi.photons.polarizations)
    idx = psi.photons.embedding(big)
    blocks = {}
    for n, b in psi.blocks.items():
        nb = np.zeros((b.shape[0], big.dim), dtype=complex)
        nb[:, idx] = b
        blocks[n] = nb
    return replace(psi, photons=big, blocks=blocks)


def inner_norm(psi: FockVector, other: FockVector | None = None):
    """⟨Ψ, Ψ'⟩, or ‖Ψ‖ when Ψ' is omitted."""
    if other is None:
        return float(np.sqrt(sum(np.vdot(b, b).real for b in psi.blocks.values())))
    if not (np.array_equal(psi.electron_grid.nodes, other.electron_grid.nodes)
            and psi.photons.compatible(other.photons)):
        raise ValueError("incompatible grids")
    if psi.photons.n_max != other.photons.n_max:
        top = max(psi.photons.n_max, other.photons.n_max)
        psi, other = embed(psi, top), embed(other, top)
    return complex(sum(np.vdot(b, other.blocks[n]) for n, b in psi.blocks.items()
                       if n in other.blocks))


# ------------------------------------------------------ coherent displacements

@dataclass(frozen=True)
class DisplacementKernel:
    """v(p, k) evaluated on (electron nodes, photon modes) -> (N_e, M) complex."""
    evaluate: object
    order: int = 1
    label: str = ""

    def matrix(self, electron_nodes, photons: PhotonSpace):
        return np.asarray(self.evaluate(electron_nodes, photons), dtype=complex)


@dataclass(frozen=True)
class NumberPhaseKernel:
    one_body: np.ndarray       # (N_e,) real
    two_body: np.ndarray       # (N_e, N_e) real symmetric

    def __post_init__(self):
        for arr in (self.one_body, self.two_body):
            if np.iscomplexobj(arr) and np.any(np.abs(np.imag(arr)) > 0):
                raise ValueError("phase kernels must be real")
        if not np.allclose(self.two_body, self.two_body.T, atol=1e-13, rtol=0):
            raise ValueError("two-body kernel must be symmetric")


def profile_difference_kernel(eta_new: TestFunction, eta_old: TestFunction, model="scalar", v=None):
    """Scalar (η̂'−η̂)/(2p·k) or transverse components of (p/p·k − v/v·k)(η̂'−η̂)."""
    def scalar(nodes, ph):
        k = ph.k
        d = eta_new.momentum(k) - eta_old.momentum(k)
        return d[None, :] / (2.0 * mdot(nodes[:, None, :], k[None, :, :]))

    def qed(nodes, ph):
        k = ph.k
        d = eta_new.momentum(k) - eta_old.momentum(k)
        vv = np.asarray(v, float)
        cur = (nodes[:, None, 1:] / mdot(nodes[:, None, :], k[None, :, :])[..., None]
               - vv[None, None, 1:] / mdot(vv, k)[None, :, None])
        return np.sum(cur * ph.pol_vectors[None, :, :], axis=-1) * d[None, :]

    if model == "qed":
        if v is None:
            raise ValueError("the QED model needs a four-velocity v")
        return DisplacementKernel(qed, 1, "qed")
    return DisplacementKernel(scalar, 1, "scalar")


def _row_kernels(psi: FockVector, n, V, e):
    """Total mode coefficients f[c, j] = e √w_j Σᵢ ρᵢ v(pᵢ, k_j) per configuration."""
    cfg = psi.configs(n)
    sgn = psi.charge_signs(n)
    f = np.zeros((len(cfg), psi.photons.n_modes), dtype=complex)
    for i in range(n):
        f += sgn[i] * V[cfg[:, i]]
    return e * f * np.sqrt(psi.photons.w)[None, :]


def _apply_lower(ph: PhotonSpace, f, Y):
    """Rows of Y (C, D) mapped by a(f_c) = Σ_j conj(f_cj) a_j."""
    out = np.zeros_like(Y)
    for c in range(Y.shape[0]):
        if np.any(f[c]) and np.any(Y[c]):
            out[c] = ph.annihilator(f[c]) @ Y[c]
    return out


def _apply_raise(ph: PhotonSpace, f, Y):
    out = np.zeros_like(Y)
    for c in range(Y.shape[0]):
        if np.any(f[c]) and np.any(Y[c]):
            out[c] = ph.annihilator(f[c]).getH() @ Y[c]
    return out


def _exp_series(op, Y, terms):
    out = Y.copy()
    term = Y
    for k in range(1, terms + 1):
        term = op(term) / k
        if not np.any(term):
            break
        out = out + term
    return out


def weyl_rows(ph: PhotonSpace, f, Y):
    """P W(f_c) per row, W(f) = e^{-|f|²/2} e^{a*(f)} e^{-a(f)}; exact on the truncation."""
    Y = _exp_series(lambda Z: -_apply_lower(ph, f, Z), Y, ph.n_max + 1)
    Y = _exp_series(lambda Z: _apply_raise(ph, f, Z), Y, ph.n_max + 1)
    return np.exp(-0.5 * np.sum(np.abs(f) ** 2, axis=1))[:, None] * Y


def truncation_bound(fnorm, n_max):
    return fnorm ** (n_max + 1) * np.exp(0.5 * fnorm ** 2) / math.sqrt(math.factorial(n_max + 1))


def coherent_displace(psi: FockVector, kernel: DisplacementKernel, e=DEFAULT_E,
                      n_max=None) -> FockVector:
    """Apply exp(a*(F) − a(F)) with F = e Σᵢ v(pᵢ,·) per electron configuration.

    The result carries the exact truncation loss sqrt(‖Ψ‖² − ‖PWΨ‖²) in
    `remainder` and the bound ‖F‖^{N+1}e^{‖F‖²/2}/√((N+1)!)·‖Ψ‖ in
    `remainder_bound`.
    """
    if n_max is not None:
        psi = embed(psi, n_max)
    ph = psi.photons
    V = kernel.matrix(psi.electron_grid.nodes, ph)
    blocks, bound = {}, 0.0
    for n, b in psi.blocks.items():
        f = _row_kernels(psi, n, V, e)
        blocks[n] = weyl_rows(ph, f, b)
        fn = np.sqrt(np.sum(np.abs(f) ** 2, axis=1))
        rown = np.linalg.norm(b, axis=1)
        bound += float(np.sqrt(np.sum((truncation_bound(fn, ph.n_max) * rown) ** 2)))
    before = inner_norm(psi) ** 2
    after = sum(np.vdot(b, b).real for b in blocks.values())
    loss = float(np.sqrt(max(before - after, 0.0)))
    return psi.with_blocks(blocks, loss, bound)


def number_phase_apply(psi: FockVector, kernel: NumberPhaseKernel, e=DEFAULT_E) -> FockVector:
    """exp(i e²[Σᵢ u(pᵢ) + Σ_{i<j} w(pᵢ,pⱼ)]) per configuration (charges ρᵢ weight u, w)."""
    blocks = {}
    for n, b in psi.blocks.items():
        cfg = psi.configs(n)
        sgn = psi.charge_signs(n)
        ph = np.zeros(len(cfg))
        for i in range(n):
            ph += kernel.one_body[cfg[:, i]]
            for j in range(i + 1, n):
                ph += sgn[i] * sgn[j] * kernel.two_body[cfg[:, i], cfg[:, j]]
        blocks[n] = np.exp(1j * e ** 2 * ph)[:, None] * b
    return replace(psi, blocks=blocks)


# --------------------------------------------------------------- intertwiners

def _pair_form(psi, eta_a, eta_b, model, v):
    """K(p,p') = Σ_j w_j κ_j(p)κ_j(p') Im(conj â_j b̂_j): the Weyl cocycle form."""
    ph = psi.photons
    nodes = psi.electron_grid.nodes
    if model == "qed":
        kap = profile_difference_kernel(_ONE, _ZERO, "qed", v).matrix(nodes, ph)
    else:
        kap = 1.0 / (2.0 * mdot(nodes[:, None, :], ph.k[None, :, :]))
    im = np.imag(np.conj(eta_a.momentum(ph.k)) * eta_b.momentum(ph.k))
    kr = np.real(kap)
    K = (kr * (ph.w * im)[None, :]) @ kr.T
    return 0.5 * (K + K.T)


class _ConstProfile:
    """Stand-in with a constant momentum-space value (strips the profile factor)."""
    def __init__(self, c):
        self.c = c

    def momentum(self, q):
        return np.full(np.asarray(q).shape[:-1], self.c, dtype=complex)


_ONE, _ZERO = _ConstProfile(1.0), _ConstProfile(0.0)


def _check_d2(psi: FockVector, tol):
    for n, b in psi.blocks.items():
        if n < 2:
            continue
        cfg = psi.configs(n)
        coinc = np.zeros(len(cfg), dtype=bool)
        for i in range(n):
            for j in range(i + 1, n):
                coinc |= cfg[:, i] == cfg[:, j]
        if np.any(np.abs(b[coinc]) > tol):
            raise ValueError("D2 violation: amplitude on coinciding electron momenta")


def coulomb_pair_matrix(electron_grid, eta_new, eta_old, direction="out", model="scalar",
                        pairs=None, n=(12, 16)):
    """Symmetrized Coulomb exponent per node pair (i≠j), without e²."""
    nodes = electron_grid.nodes
    m = electron_grid.mass
    N = len(nodes)
    if model == "qed":
        X, Y = eta_new - eta_old, eta_new + eta_old
    else:
        X, Y = eta_old - eta_new, eta_old + eta_new
    Phi = np.zeros((N, N))
    todo = pairs if pairs is not None else [(i, j) for i in range(N) for j in range(N) if i != j]
    for i, j in todo:
        Phi[i, j] = coulomb_finite(X, Y, nodes[i], nodes[j], direction, m, n).value
    if model == "qed":
        pref = 0.5 * mdot(nodes[:, None, :], nodes[None, :, :]) / m ** 2
    else:
        pref = np.full((N, N), (1.0 if direction == "out" else -1.0) / (8.0 * m ** 2))
    C = pref * Phi
    return C + C.T


def _needed_pairs(psi, tol=0.0):
    seen = set()
    for n, b in psi.blocks.items():
        if n < 2:
            continue
        live = np.any(np.abs(b) > tol, axis=1)
        for row in psi.configs(n)[live]:
            for i in range(n):
                for j in range(i + 1, n):
                    a, c = sorted((int(row[i]), int(row[j])))
                    if a != c:
                        seen.add((a, c))
    return sorted(seen)


def _same_profile(a: TestFunction, b: TestFunction):
    return (np.isclose(a.sigma, b.sigma) and a.amp == b.amp
            and np.array_equal(a.centers, b.centers) and np.array_equal(a.coeffs, b.coeffs))


def intertwiner_apply(psi: FockVector, eta_new: TestFunction, eta_old: TestFunction,
                      direction="out", model="scalar", v=None, e=DEFAULT_E, n_max=None,
                      coulomb=True, d2_tol=1e-14, coulomb_order=(12, 16)) -> FockVector:
    """V_{out/in}(η', η)Ψ: displacement by (η̂'−η̂), the two-body number phase
    (the cocycle of the displacement, so that V(η,η')V(η',η'') = V(η,η'')),
    and the finite Coulomb-phase factor over ordered electron pairs."""
    if model == "qed" and v is None:
        raise ValueError("the QED model needs a four-velocity v")
    if direction not in ("out", "in"):
        raise ValueError("direction must be 'out' or 'in'")
    _check_d2(psi, d2_tol)
    if n_max is not None:
        psi = embed(psi, n_max)
    if _same_profile(eta_new, eta_old):
        return psi
    kern = profile_difference_kernel(eta_new, eta_old, model, v)
    out = coherent_displace(psi, kern, e)
    K = _pair_form(psi, eta_new, eta_old, model, v)
    two = 2.0 * K
    if coulomb:
        pairs = _needed_pairs(psi)
        if pairs:
            sym = coulomb_pair_matrix(psi.electron_grid, eta_new, eta_old, direction, model,
                                      pairs + [(j, i) for i, j in pairs], coulomb_order)
            two = two + sym
    np.fill_diagonal(two, 0.0)
    phase = NumberPhaseKernel(np.diag(K).copy(), two)
    return number_phase_apply(out, phase, e)


# ---------------------------------------------------------------- translations

def translate(psi: FockVector, a, mode="standard", eta: TestFunction | None = None,
              e=DEFAULT_E, model="scalar", v=None) -> FockVector:
    """U(a) or U_mod(η;a) = V(η, η_a)U(a) (no Coulomb factor)."""
    a = np.asarray(a, dtype=float)
    ph = psi.photons
    kph = np.exp(1j * mdot(ph.momentum, a))
    blocks = {}
    for n, b in psi.blocks.items():
        P = psi.electron_momenta(n).sum(axis=1) if n else np.zeros((1, 4))
        blocks[n] = np.exp(1j * mdot(P, a))[:, None] * b * kph[None, :]
    out = replace(psi, blocks=blocks)
    if mode == "standard":
        return out
    if mode != "modified":
        raise ValueError("mode must be 'standard' or 'modified'")
    if eta is None:
        raise ValueError("modified translation needs a profile")
    return intertwiner_apply(out, eta, translate_profile(eta, a), "out", model, v, e,
                             coulomb=False, d2_tol=np.inf)


# ------------------------------------------------- modified energy-momentum

def _dressing(psi, n, eta, e):
    """β_cj = e √w_j Σᵢ η̂(k_j)/(2pᵢ·k_j)."""
    V = profile_difference_kernel(eta, _ZERO).matrix(psi.electron_grid.nodes, psi.photons)
    return _row_kernels(replace(psi, charges={}), n, V, e)


def _shifted_lowering(ph, beta, Y, j):
    return (ph.lower(j) @ Y.T).T - beta[:, j][:, None] * Y


def pmod_expectation(psi: FockVector, eta: TestFunction, mu=0, e=DEFAULT_E) -> float:
    """⟨Ψ|P^μ_mod(η)|Ψ⟩ = Σ electrons p^μ + Σ_j k_j^μ ‖(a_j − β_j)Ψ‖²."""
    ph = psi.photons
    total = 0.0
    for n, b in psi.blocks.items():
        if n == 0:
            total += float(np.sum(ph.k[:, mu] * np.array(
                [np.linalg.norm((ph.lower(j) @ b.T)) ** 2 for j in range(ph.n_modes)])))
            continue
        P = psi.electron_momenta(n).sum(axis=1)[:, mu]
        total += float(np.sum(P * np.sum(np.abs(b) ** 2, axis=1)))
        beta = _dressing(psi, n, eta, e)
        for j in range(ph.n_modes):
            total += ph.k[j, mu] * np.linalg.norm(_shifted_lowering(ph, beta, b, j)) ** 2
    return total


def pmod_positivity(psi: FockVector, eta: TestFunction, e=DEFAULT_E):
    """(⟨K⁰⟩² − Σ⟨Kⁱ⟩², g_{μν}⟨K^μ K^ν⟩) for the photon fiber form K."""
    big = embed(psi, psi.photons.n_max + 1)
    ph = big.photons
    Kpsi = {mu: {} for mu in range(4)}
    exp = np.zeros(4)
    for n, b in big.blocks.items():
        beta = _dressing(big, n, eta, e) if n else np.zeros((b.shape[0], ph.n_modes))
        acc = np.zeros((4,) + b.shape, dtype=complex)
        for j in range(ph.n_modes):
            low = _shifted_lowering(ph, beta, b, j)
            up = (ph.lower(j).T @ low.T).T - np.conj(beta[:, j])[:, None] * low
            acc += ph.k[j][:, None, None] * up[None]
        for mu in range(4):
            Kpsi[mu][n] = acc[mu]
            exp[mu] += np.vdot(b, acc[mu]).real
    g = np.diag([1.0, -1.0, -1.0, -1.0])
    kk = sum(g[mu, mu] * sum(np.vdot(Kpsi[mu][n], Kpsi[mu][n]).real for n in Kpsi[mu])
             for mu in range(4))
    return float(exp[0] ** 2 - np.sum(exp[1:] ** 2)), float(kk)


# ------------------------------------------------------------ classification

@dataclass(frozen=True)
class DomainReport:
    label: str
    members: frozenset
    soft: bool
    collinear: bool
    coinciding: bool
    singular: bool


def domain_classify(psi: FockVector, soft_cut=0.1, collinear_tol=1e-3, amp_tol=1e-12) -> DomainReport:
    """Smallest of D_reg ⊂ D_2 ⊂ D_1 whose sampled predicates hold.

    soft: support on photon modes with |k| < soft_cut; collinear: two photons in
    the same direction; coinciding: two electrons on one node; singular: the
    amplitude grows like 1/|k| toward the smallest sampled photon radius.
    """
    ph = psi.photons
    kabs = np.linalg.norm(ph.k[:, 1:], axis=1)
    khat = ph.k[:, 1:] / kabs[:, None]
    soft = collinear = coinc = singular = False
    for n, b in psi.blocks.items():
        live = np.abs(b) > amp_tol
        rows, cols = np.nonzero(live)
        if n >= 2:
            cfg = psi.configs(n)[np.unique(rows)]
            for i in range(n):
                for j in range(i + 1, n):
                    coinc |= bool(np.any(cfg[:, i] == cfg[:, j]))
        for s in np.unique(cols):
            modes = np.nonzero(ph.occ[s])[0]
            if np.any(kabs[modes] < soft_cut):
                soft = True
            if np.any(ph.occ[s] >= 2):
                collinear = True
            elif len(modes) > 1:
                cosang = khat[modes] @ khat[modes].T
                if np.any(np.triu(cosang, 1) > 1 - collinear_tol):
                    collinear = True
        # 1/|k| growth test on one-photon amplitudes per unit weight
        one = np.nonzero(ph.number == 1)[0]
        if len(one):
            j = ph.occ[one].argmax(axis=1)
            amp = np.max(np.abs(b[:, one]), axis=0) / np.sqrt(ph.w[j])
            radii = np.unique(np.round(kabs[j], 12))
            if len(radii) >= 2 and np.any(amp > amp_tol):
                a0 = amp[np.isclose(kabs[j], radii[0])].max()
                a1 = amp[np.isclose(kabs[j], radii[1])].max()
                if a0 > amp_tol and a1 > amp_tol and a0 / a1 > np.sqrt(radii[1] / radii[0]):
                    singular = True
    members = set()
    if not singular:
        members.add("D_1")
        if not coinc:
            members.add("D_2")
            if not (soft or collinear):
                members.add("D_reg")
    label = "D_reg" if "D_reg" in members else "D_2" if "D_2" in members else \
        "D_1" if members else "none"
    return DomainReport(label, frozenset(members), soft, collinear, coinc, singular)


# ----------------------------------------------------------------- JSON I/O

def _grid_json(g: MassShellGrid):
    return {"mass": g.mass, "nodes": g.nodes.tolist(), "weights": g.weights.tolist(),
            "region": g.region}


def _grid_from(d):
    return MassShellGrid(float(d["mass"]), np.asarray(d["nodes"], float),
                         np.asarray(d["weights"], float), dict(d.get("region", {})))


TENSOR_LIMIT = 2_000_000


def to_json(psi: FockVector, layout="tensor") -> str:
    """Serialize a FockVector.

    layout="tensor": grids as explicit nodes/weights, then one entry per sector
    with the row-major complex tensor h(p₁..pₙ, k₁..k_m) split into re/im lists.
    layout="occupation": per electron number the stored (configuration ×
    occupation-state) coefficient matrix, for states whose tensors are too large.
    """
    doc = {"format": "fockvector/1", "layout": layout,
           "electron_grid": _grid_json(psi.electron_grid),
           "photon_grid": _grid_json(psi.photons.grid), "n_max": psi.photons.n_max,
           "polarizations": psi.photons.polarizations, "remainder": psi.remainder,
           "remainder_bound": psi.remainder_bound,
           "charges": {str(n): list(c) for n, c in psi.charges.items()}}
    if layout == "tensor":
        sectors = []
        for lab in psi.sector_labels():
            size = len(psi.electron_grid) ** lab.n_electrons * psi.photons.n_modes ** lab.n_photons
            if size > TENSOR_LIMIT:
                raise ValueError(f"sector {lab} has {size} entries; use layout='occupation'")
            h = psi.sector(lab).amplitude
            sectors.append({"n_electrons": lab.n_electrons, "n_photons": lab.n_photons,
                            "n_positrons": lab.n_positrons, "shape": list(h.shape),
                            "re": h.real.ravel().tolist(), "im": h.imag.ravel().tolist()})
        doc["sectors"] = sectors
    elif layout == "occupation":
        doc["blocks"] = [{"n_electrons": n, "shape": list(b.shape), "re": b.real.ravel().tolist(),
                          "im": b.imag.ravel().tolist()} for n, b in psi.blocks.items()]
    else:
        raise ValueError("layout must be 'tensor' or 'occupation'")
    return json.dumps(doc)


def from_json(text: str) -> FockVector:
    doc = json.loads(text)
    if doc.get("format") != "fockvector/1":
        raise ValueError("unknown FockVector layout")
    eg = _grid_from(doc["electron_grid"])
    ph = PhotonSpace(_grid_from(doc["photon_grid"]), doc["n_max"], doc["polarizations"])
    charges = {int(n): tuple(c) for n, c in doc.get("charges", {}).items()}
    if doc.get("layout", "tensor") == "occupation":
        blocks = {b["n_electrons"]: (np.asarray(b["re"]) + 1j * np.asarray(b["im"])).reshape(b["shape"])
                  for b in doc["blocks"]}
        psi = FockVector(eg, ph, blocks, charges)
    else:
        waves = []
        for s in doc["sectors"]:
            h = (np.asarray(s["re"]) + 1j * np.asarray(s["im"])).reshape(s["shape"])
            waves.append(SampledWaveFunction(SectorLabel(s["n_electrons"], s["n_photons"], s["n_positrons"]),
                                             eg, ph.grid, h, ph.polarizations))
        psi = from_sectors(eg, ph, waves, charges)
    return replace(psi, remainder=doc["remainder"], remainder_bound=doc["remainder_bound"])

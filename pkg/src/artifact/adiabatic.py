"""ε-scans, rate fits, Łojasiewicz point values, BCH/Magnus validators, locality check."""
from __future__ import annotations

import csv
import io
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np
from scipy import linalg

FIT_MODELS = ("power", "log", "constant", "divergent", "auto")


def eps_grid(eps_max=1e-1, eps_min=1e-4, points=12):
    """Geometric, strictly decreasing grid."""
    if not (0 < eps_min < eps_max) or points < 2:
        raise ValueError("need 0 < eps_min < eps_max and at least two points")
    return np.geomspace(eps_max, eps_min, points)


@dataclass
class EpsScan:
    eps: np.ndarray
    values: np.ndarray
    metadata: dict = field(default_factory=dict)

    def __post_init__(self):
        self.eps = np.asarray(self.eps, dtype=float)
        self.values = np.asarray(self.values)
        if np.any(self.eps <= 0) or np.any(np.diff(self.eps) >= 0):
            raise ValueError("eps must be positive and strictly decreasing")
        if self.values.shape[0] != self.eps.shape[0]:
            raise ValueError("one value per eps")

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["eps", "re", "im", "abs"])
        for e, v in zip(self.eps, self.values):
            v = complex(v)
            w.writerow([repr(float(e)), repr(v.real), repr(v.imag), repr(abs(v))])
        return buf.getvalue()


class ScanError(RuntimeError):
    def __init__(self, eps, cause):
        super().__init__(f"evaluator failed at eps={eps!r}: {cause}")
        self.eps = eps


def eps_scan(evaluator, eps=None, workers=1, metadata=None) -> EpsScan:
    """Evaluate independently at every ε; thread pool keeps the grid order."""
    eps = eps_grid() if eps is None else np.asarray(eps, dtype=float)
    if len(eps) > 1:
        ratios = eps[1:] / eps[:-1]
        if np.any(ratios <= 0) or np.any(ratios >= 1):
            raise ValueError("eps grid must be decreasing with ratio in (0,1)")

    def one(e):
        try:
            return evaluator(float(e))
        except Exception as exc:  # abort with the offending eps
            raise ScanError(float(e), exc) from exc

    if workers and workers > 1:
        with ThreadPoolExecutor(workers) as pool:
            vals = list(pool.map(one, eps))
    else:
        vals = [one(e) for e in eps]
    return EpsScan(eps, np.asarray(vals), dict(metadata or {}))


@dataclass
class RateFit:
    model: str
    params: dict
    r2: float
    theory: float | None = None
    rel_err: float | None = None
    verdict: str = ""
    witness: float | None = None

    def to_json(self) -> dict:
        return {"model": self.model, "params": self.params, "r2": self.r2,
                "theory": self.theory, "rel_err": self.rel_err, "verdict": self.verdict}


def _r2(y, yhat):
    ss_res = float(np.sum((y - yhat) ** 2))
    ss_tot = float(np.sum((y - y.mean()) ** 2))
    if ss_tot == 0.0:
        return 1.0 if ss_res == 0.0 else 0.0
    return max(0.0, 1.0 - ss_res / ss_tot)


def _lstsq(X, y):
    if np.linalg.matrix_rank(X) < X.shape[1]:
        raise ValueError("degenerate design matrix")
    coef, *_ = np.linalg.lstsq(X, y, rcond=None)
    return coef


def _component(values, part):
    if part == "re":
        return np.real(values).astype(float)
    if part == "im":
        return np.imag(values).astype(float)
    return np.abs(values).astype(float)


def fit(scan: EpsScan, model="auto", part="abs", theory=None, tol=None, param=None,
        tail=None) -> RateFit:
    """Least-squares fit in the model's linearizing coordinates.

    part selects re/im/abs of the values; theory is compared with `param`
    (default α for power, b for log).  tail restricts to the last points.
    """
    if model not in FIT_MODELS:
        raise ValueError(f"unknown model {model!r}")
    eps = scan.eps
    y = _component(scan.values, part)
    if len(eps) < 5:
        raise ValueError("fit needs at least five points")
    L = np.log(1.0 / eps)
    if model == "auto":
        spread = np.ptp(y)
        if spread <= 1e-12 * max(1.0, np.abs(y).max()):
            model = "constant"
        else:
            fits = [fit(scan, "log", part)]
            if np.all(y > 0):
                fits.append(fit(scan, "power", part))
            best = max(fits, key=lambda f: f.r2)
            model = best.model
    if model == "constant":
        a = float(y.mean())
        res = RateFit("constant", {"a": a, "b": 0.0}, _r2(y, np.full_like(y, a)))
        key = param or "a"
    elif model == "log":
        X = np.stack([np.ones_like(L), L], axis=1)
        a, b = _lstsq(X, y)
        res = RateFit("log", {"a": float(a), "b": float(b)}, _r2(y, a + b * L))
        key = param or "b"
    elif model == "power":
        if np.any(y <= 0):
            raise ValueError("power fit needs positive values")
        X = np.stack([np.ones_like(L), -L], axis=1)
        lc, alpha = _lstsq(X, np.log(y))
        res = RateFit("power", {"C": float(np.exp(lc)), "alpha": float(alpha)},
                      _r2(np.log(y), lc - alpha * L))
        key = param or "alpha"
    else:
        return divergence_verdict(scan, part)
    if theory is not None:
        val = res.params[key]
        res.theory = float(theory)
        res.rel_err = float(abs(val - theory) / abs(theory)) if theory != 0 else float(abs(val))
        if tol is not None:
            res.verdict = "pass" if res.rel_err <= tol else "fail"
    return res


def divergence_verdict(scan: EpsScan, part="abs", tail=None) -> RateFit:
    """Divergence as a verdict with a lower-bound witness (never a fitted infinity).

    Divergent if |value| grows monotonically as ε decreases and the power fit
    has a negative exponent; witness is the minimum of the tail values.
    """
    y = _component(scan.values, part)
    tail = tail or max(3, len(y) // 2)
    ty = np.abs(y[-tail:])
    monotone = bool(np.all(np.diff(np.abs(y)) > 0))
    alpha = None
    if np.all(np.abs(y) > 0):
        L = np.log(1.0 / scan.eps)
        X = np.stack([np.ones_like(L), -L], axis=1)
        _, alpha = _lstsq(X, np.log(np.abs(y)))
    diverges = monotone and alpha is not None and alpha < 0
    witness = float(ty.min())
    return RateFit("divergent", {"alpha": None if alpha is None else float(alpha),
                                 "witness": witness, "monotone": monotone},
                   r2=0.0, verdict="divergent" if diverges else "not-divergent",
                   witness=witness)


def superpolynomial_verdict(eps, values, order=4):
    """Each successive ratio beats (ε_{i+1}/ε_i)^order; exact zeros count as beating."""
    eps = np.asarray(eps, dtype=float)
    v = np.abs(np.asarray(values, dtype=float))
    ok = True
    for i in range(len(v) - 1):
        bound = (eps[i + 1] / eps[i]) ** order
        if v[i] == 0.0:
            ok &= v[i + 1] == 0.0
        elif v[i + 1] / v[i] >= bound:
            ok = False
    return bool(ok)


def superpolynomial_verdict_log(eps, log_values, order=4):
    """Same test on log-magnitudes (for values far below double range)."""
    eps = np.asarray(eps, dtype=float)
    lv = np.asarray(log_values, dtype=float)
    steps = np.diff(lv) - order * np.diff(np.log(eps))
    return bool(np.all(steps < 0)), steps


# ------------------------------------------------------------ Łojasiewicz

def _gaussian_mollifier(dim, sigma=1.0, shift=None):
    """ĝ on R^dim with ∫ĝ d^N q/(2π)^N = 1, optionally shifted."""
    shift = np.zeros(dim) if shift is None else np.asarray(shift, dtype=float)
    norm = (2 * np.pi / sigma ** 2) ** (dim / 2) / (2 * np.pi) ** dim

    def g(u):
        d = u - shift
        return np.exp(-0.5 * sigma ** 2 * np.sum(d * d, axis=-1)) / norm
    g.sigma = sigma
    g.shift = shift
    return g


def default_mollifiers(dim):
    return [_gaussian_mollifier(dim, 1.0), _gaussian_mollifier(dim, 0.7, np.r_[0.6, np.zeros(dim - 1)])]


def _split_rule(dim, sigma, n=120, width=14.0):
    half = width / sigma
    x, w = np.polynomial.legendre.leggauss(n)
    # Gauss-Legendre on [-half, 0] and [0, half]: exact split at the origin
    xs = np.concatenate([0.5 * half * (x - 1), 0.5 * half * (x + 1)])
    ws = np.concatenate([0.5 * half * w, 0.5 * half * w])
    grids = np.meshgrid(*([xs] * dim), indexing="ij")
    pts = np.stack([gg.ravel() for gg in grids], axis=-1)
    wts = np.ones(len(pts))
    for wg in np.meshgrid(*([ws] * dim), indexing="ij"):
        wts = wts * wg.ravel()
    return pts, wts


def lojasiewicz_value(t, h=None, dim=1, eps=None, mollifiers=None, tol=1e-3):
    """∫ t(q) h(q) ĝ_ε(q) d^N q/(2π)^N for ε → 0 and two different mollifiers.

    Returns a report dict; verdict 'value' when every mollifier converges to a
    common number, 'no Łojasiewicz value' when they converge to different
    numbers, 'divergent' otherwise.
    """
    eps = np.geomspace(1e-1, 1e-4, 7) if eps is None else np.asarray(eps)
    h = h or (lambda q: np.ones(q.shape[:-1]))
    mollifiers = mollifiers or default_mollifiers(dim)
    rows = []
    for g in mollifiers:
        pts, wts = _split_rule(dim, g.sigma)
        pts = pts + g.shift
        vals = []
        for e in eps:
            q = e * pts
            vals.append(np.sum(wts * t(q) * h(q) * g(pts)) / (2 * np.pi) ** dim)
        rows.append(np.asarray(vals))
    limits = [r[-1] for r in rows]
    def settles(r):
        d = np.abs(np.diff(r))
        return d[-1] <= tol * max(1.0, abs(r[-1])) and np.all(d[-3:][1:] <= d[-3:][:-1] + 1e-15)
    converged = all(settles(r) for r in rows)
    scale = max(1.0, max(abs(x) for x in limits))
    agree = max(abs(x - limits[0]) for x in limits) <= 10 * tol * scale
    if not converged:
        verdict = "divergent"
    elif agree:
        verdict = "value"
    else:
        verdict = "no Łojasiewicz value"
    return {"eps": eps.tolist(), "values": [r.tolist() for r in rows],
            "limits": [complex(x) if np.iscomplexobj(x) else float(x) for x in limits],
            "value": float(np.real(limits[0])) if verdict == "value" else None,
            "verdict": verdict}


# ------------------------------------------------------ algebraic identities

def _comm(a, b):
    return a @ b - b @ a


def algebraic_identity_residual(which, *inputs, check_tol=1e-12):
    """bch: inputs (A, B).  magnus: inputs (list of matrices A_k, list of durations)."""
    if which == "bch":
        A, B = (np.asarray(x, dtype=complex) for x in inputs)
        C = _comm(A, B)
        if np.abs(_comm(A, C)).max() > check_tol or np.abs(_comm(B, C)).max() > check_tol:
            raise ValueError("BCH hypothesis [A,[A,B]] = [B,[A,B]] = 0 violated")
        lhs = linalg.expm(A + B)
        rhs = linalg.expm(A) @ linalg.expm(B) @ linalg.expm(-0.5 * C)
        return float(np.abs(lhs - rhs).max())
    if which == "magnus":
        mats, dts = inputs
        mats = [np.asarray(m, dtype=complex) for m in mats]
        for a in mats:
            for b in mats:
                for c in mats:
                    if np.abs(_comm(a, _comm(b, c))).max() > check_tol:
                        raise ValueError("Magnus hypothesis [A,[A',A'']] = 0 violated")
        # anti-time-ordered: earliest factor leftmost
        ordered = np.eye(mats[0].shape[0], dtype=complex)
        for a, dt in zip(mats, dts):
            ordered = ordered @ linalg.expm(-1j * a * dt)
        X = sum(-1j * a * dt for a, dt in zip(mats, dts))
        Y = np.zeros_like(ordered)
        for i in range(len(mats)):
            for j in range(i):
                Y += 0.5 * dts[i] * dts[j] * _comm(mats[i], mats[j])
        return float(np.abs(ordered - linalg.expm(X) @ linalg.expm(Y)).max())
    raise ValueError(f"unknown identity {which!r}")


# ------------------------------------------------------------ locality

def locality_check(difference_norm, eps=None, order=4) -> RateFit:
    """Scan ‖Ψ_ε - Ψ^χ_ε‖ given an evaluator of that difference norm.

    Superpolynomial verdict when every successive ratio beats (ε_{i+1}/ε_i)^order.
    """
    if difference_norm is None:
        raise ValueError("flow without smearing hook")
    eps = np.geomspace(1e-1, 1e-2, 6) if eps is None else np.asarray(eps)
    vals = np.array([float(difference_norm(float(e))) for e in eps])
    ok = superpolynomial_verdict(eps, vals, order)
    return RateFit("superpolynomial", {"eps": eps.tolist(), "values": vals.tolist()},
                   r2=1.0, verdict="superpolynomial" if ok else "not-superpolynomial")

"""Command-line entry point: ε-scans to CSV, fits and verdicts to JSON.

Every subcommand writes `<out>/<command>.json`; scanning subcommands also
write `<out>/<command>.csv` with columns eps,re,im,abs.  With --check the exit
code is 0 only when the verdict is "pass".
"""
from __future__ import annotations

import json
import sys
import time
from dataclasses import asdict, dataclass, fields
from pathlib import Path

import click
import numpy as np

from . import __version__
from . import acceptance as ACC
from . import amplitudes as A
from . import fock as F
from . import longrange as LR
from .adiabatic import (EpsScan, algebraic_identity_residual, divergence_verdict, eps_grid, fit,
                        lojasiewicz_value)
from .domain import four_velocity, make_shell_grid, make_test_function

COMMANDS = ("coulomb", "firstorder", "selfenergy", "vacpol", "compton", "pair", "moller",
            "currents", "fock-checks", "dirac-checks", "lojasiewicz", "identities",
            "all-acceptance")
MODELS = ("scalar", "qed")
QED_COMMANDS = ("fock-checks", "dirac-checks", "all-acceptance")


class ConfigError(ValueError):
    def __init__(self, problems):
        self.problems = list(problems)
        super().__init__("invalid configuration: " + "; ".join(self.problems))


@dataclass(frozen=True)
class RunConfig:
    command: str
    model: str = "scalar"
    profile_family: str = "gaussian"
    sigma: float = 1.0
    translation: tuple = (0.0, 0.0, 0.0, 0.0)
    switch_width: float = 1.0
    eps_max: float = 1e-1
    eps_min: float = 1e-4
    points: int = 7
    grid_order: int = 2
    c1: float = 0.0
    c2: float = 0.0
    nmax: int = 6
    out: str = "artifact-out"
    seed: int = 0

    def validate(self):
        bad = []
        if self.command not in COMMANDS:
            bad.append(f"command: unknown {self.command!r}")
        if self.model not in MODELS:
            bad.append(f"model: must be one of {MODELS}")
        elif self.model == "qed" and self.command not in QED_COMMANDS:
            bad.append(f"model: 'qed' is only available for {QED_COMMANDS}")
        if self.profile_family != "gaussian":
            bad.append("profile_family: only 'gaussian' is implemented")
        for name in ("sigma", "switch_width", "eps_max", "eps_min"):
            v = getattr(self, name)
            if not (isinstance(v, (int, float)) and np.isfinite(v) and v > 0):
                bad.append(f"{name}: must be positive, got {v!r}")
        if all(isinstance(getattr(self, n), (int, float)) for n in ("eps_min", "eps_max")) \
                and self.eps_min >= self.eps_max:
            bad.append("eps_min: must be smaller than eps_max")
        if not isinstance(self.points, int) or self.points < 5:
            bad.append(f"points: need an integer >= 5 for the fits, got {self.points!r}")
        if not isinstance(self.grid_order, int) or self.grid_order < 1:
            bad.append(f"grid_order: must be a positive integer, got {self.grid_order!r}")
        if not isinstance(self.nmax, int) or self.nmax < 1:
            bad.append(f"nmax: must be a positive integer, got {self.nmax!r}")
        if len(self.translation) != 4:
            bad.append("translation: needs four components")
        for name in ("c1", "c2"):
            if not np.isfinite(getattr(self, name)):
                bad.append(f"{name}: must be finite")
        if bad:
            raise ConfigError(bad)
        return self

    def to_dict(self):
        d = asdict(self)
        d["translation"] = list(self.translation)
        return d

    def to_json(self):
        return json.dumps(self.to_dict(), sort_keys=True)

    def eps(self):
        return eps_grid(self.eps_max, self.eps_min, self.points)

    def eta(self):
        return make_test_function("profile", self.sigma, self.translation)

    def g(self):
        return make_test_function("switching", self.switch_width)

    def renorm(self):
        return A.RenormConstants(c1=self.c1, c2=self.c2)


FIELD_NAMES = tuple(f.name for f in fields(RunConfig))


def parse_config(source, **overrides) -> RunConfig:
    """Build a validated RunConfig from a dict, a JSON string or a JSON file path."""
    if isinstance(source, (str, Path)):
        text = str(source)
        data = json.loads(Path(text).read_text() if not text.lstrip().startswith("{") else text)
    else:
        data = dict(source)
    data.update({k: v for k, v in overrides.items() if v is not None})
    unknown = sorted(set(data) - set(FIELD_NAMES))
    problems = [f"{k}: unknown key" for k in unknown]
    if "command" not in data:
        problems.append("command: missing")
    if problems:
        raise ConfigError(problems)
    if "translation" in data:
        data["translation"] = tuple(float(x) for x in data["translation"])
    return RunConfig(**data).validate()


# ------------------------------------------------------------------ runners

P1 = np.array([1.25, 0.75, 0.0, 0.0])
P2 = np.array([1.0, 0.0, 0.0, 0.0])


def _verdict(ok):
    return "pass" if ok else "fail"


def run_coulomb(cfg):
    """Divergent Coulomb coefficient scan and log fit against the closed form."""
    theory = LR.divergent_coefficient(P1, P2)
    scan = LR.coulomb_divergent_scan(cfg.g(), P1, P2, cfg.eps())
    r = fit(scan, "log", part="re", theory=theory, tol=0.02)
    return scan, {**r.to_json(), "p1": P1.tolist(), "p2": P2.tolist()}, r.verdict


def _electron():
    return A.WavePacket(1.0, (0.1, 0.0, 0.2), 0.3)


def run_firstorder(cfg):
    """Standard decay flow: weak pairing scan and its power fit."""
    f = _electron()
    eg = f.grid(1, cfg.grid_order, 2 * cfg.grid_order)
    kg = make_shell_grid(0.0, 0.0, 10.0, 6, 4, 6)
    h = A.ProductPacket(A.WavePacket(1.0, (0.1, 0.0, 0.2), 0.4), A.WavePacket(0.0, (0, 0, 0), 1.0),
                        False)
    g = cfg.g()
    vals = [A.weak_pairing(A.decay_flow(f, eg, kg, g, e), h, eg, kg) for e in cfg.eps()]
    scan = EpsScan(cfg.eps(), np.array(vals), {"quantity": "weak pairing <h, F_eps>"})
    r = fit(scan, "power", theory=1.0)
    ok = abs(r.params["alpha"] - 1.0) <= 0.1
    return scan, r.to_json(), _verdict(ok)


def run_selfenergy(cfg):
    """One-electron self-energy sup-norm scan (--c1, --c2)."""
    f = _electron()
    nodes = f.grid(1, cfg.grid_order, cfg.grid_order).nodes
    g, rc = cfg.g(), cfg.renorm()
    sup = np.array([A.self_energy_flow(f, nodes, g, e, rc).sup() for e in cfg.eps()])
    scan = EpsScan(cfg.eps(), sup, {"quantity": "sup |F_eps|"})
    if cfg.c1 != 0.0:
        r = divergence_verdict(scan)
        out = r.to_json()
        out["witness"] = r.witness
        return scan, out, _verdict(r.verdict == "divergent" and r.witness > 0)
    r = fit(scan, "power")
    return scan, r.to_json(), _verdict(r.params["alpha"] >= 0.9)


def run_vacpol(cfg):
    """Photon vacuum-polarization flow and its ε/(1+|k|)^3 bound."""
    photon = A.WavePacket(0.0, (0, 0, 1.0), 0.3)
    nodes = photon.grid(1, cfg.grid_order, cfg.grid_order).nodes
    g, rc = cfg.g(), cfg.renorm()
    vals = [A.vac_pol_C_flow(photon, nodes[:1], g, e, rc).values[0] for e in cfg.eps()]
    scan = EpsScan(cfg.eps(), np.array(vals), {"quantity": "F^(C)_eps(k0)", "k0": nodes[0].tolist()})
    b = A.vac_pol_C_bound(photon, nodes, g, cfg.eps(), rc=rc)
    return scan, {"model": "bound", "C": b["C"], "verdict": b["verdict"]}, \
        _verdict(b["verdict"] == "bounded")


def _flow_scan(flow_at, limit, cfg, quantity):
    vals, errs = [], []
    for e in cfg.eps():
        fl = flow_at(e)
        vals.append(np.ravel(fl.values)[0])
        errs.append(A.relative_l2(fl, limit))
    scan = EpsScan(cfg.eps(), np.array(vals), {"quantity": quantity})
    out = {"model": "limit", "limit_value": [np.ravel(limit.values)[0].real,
                                             np.ravel(limit.values)[0].imag],
           "rel_l2": errs, "tolerance": 0.05}
    return scan, out, _verdict(errs[-1] <= 0.05)


def run_compton(cfg):
    """Compton flow against its closed-form limit."""
    f = A.ProductPacket(A.WavePacket(1.0, (0, 0, 0.3), 0.25), A.WavePacket(0.0, (0, 0, -0.8), 0.25),
                        False)
    eg, kg = f.first.grid(1, cfg.grid_order, 2), f.second.grid(1, cfg.grid_order, 2)
    g = cfg.g()
    return _flow_scan(lambda e: A.compton_flow(f, eg, kg, g, e), A.compton_limit(f, eg, kg), cfg,
                      "Compton F_eps at the first output node")


def run_pair(cfg):
    """Pair creation flow against its closed-form limit."""
    ph = A.ProductPacket(A.WavePacket(0.0, (0, 0, 1.5), 0.25), A.WavePacket(0.0, (0, 0, -1.5), 0.25))
    q = np.sqrt(1.5 ** 2 - 1.0)
    eg1 = A.WavePacket(1.0, (0, 0, q), 0.6).grid(1, cfg.grid_order, 2, radius=0.6)
    eg2 = A.WavePacket(1.0, (0, 0, -q), 0.6).grid(1, cfg.grid_order, 2, radius=0.6)
    g = cfg.g()
    return _flow_scan(lambda e: A.pair_A_flow(ph, eg1, eg2, g, e), A.pair_A_limit(ph, eg1, eg2), cfg,
                      "pair creation F_eps at the first output node")


def run_moller(cfg):
    """Modified Møller flow against its closed-form limit."""
    a = A.WavePacket(1.0, (0.1, 0, 0.6), 0.3)
    b = A.WavePacket(1.0, (0, 0.1, -0.4), 0.3)
    f = A.ProductPacket(a, b)
    eg1, eg2 = a.grid(1, cfg.grid_order, 2), b.grid(1, cfg.grid_order, 2)
    g, eta = cfg.g(), cfg.eta()
    return _flow_scan(lambda e: A.moller_flow(f, eg1, eg2, g, e, "modified", eta),
                      A.moller_limit(f, eg1, eg2, eta), cfg, "modified Møller F_eps at the first node")


def run_currents(cfg):
    """Asymptotic currents: divergence identity and timelike limit (ε = 1/λ)."""
    eta = cfg.eta()
    v = four_velocity([0.3, 0.1, 0.0])
    f = lambda p: np.exp(-np.sum((p[..., 1:] - np.array([0.2, 0, 0])) ** 2, axis=-1))
    lams = 1.0 / cfg.eps()
    sc = LR.current_timelike_limit(eta, f, v, lams)
    theory = sc.metadata["theory"]
    scan = EpsScan(cfg.eps(), np.asarray(sc.values), {"quantity": "lambda^3 current integral",
                                                      "lambda": lams.tolist()})
    div = max(abs(LR.current_divergence_residual(eta, v, q, d))
              for d in ("out", "in") for q in (np.array([1.0, 0.2, 0, 0]), np.array([0.3, 1.0, 2.0, 0.1])))
    rel = abs(sc.values[-1] - theory) / theory
    return scan, {"model": "limit", "theory": theory, "rel_err": rel, "divergence_residual": div}, \
        _verdict(rel <= 0.02 and div <= 1e-12)


def run_dirac(cfg):
    """Gamma algebra, spinors, soft vertex, Ξ sandwich, flux, LSZ."""
    res = ACC.dirac_qed()
    return None, res.to_json(), _verdict(res.passed)


def run_fock(cfg):
    """Intertwiner and modified-translation checks on the truncated Fock space."""
    if cfg.model == "qed":
        eg = make_shell_grid(1.0, 0.2, 0.8, 2, 2, 1)
        ph = F.PhotonSpace(make_shell_grid(0.0, 0.0, 3.0, 2, 1, 2), min(cfg.nmax, 4), polarizations=2)
        h = np.zeros((len(eg), len(eg)))
        h[0, 2] = h[2, 0] = 1.0
        s = F.electron_state(eg, ph, h, charges=(1, -1))
        eta, eta1, eta2 = ACC._profiles()
        v = np.array([1.0, 0.0, 0.0, 0.0])
        x = F.intertwiner_apply(F.intertwiner_apply(s, eta1, eta2, model="qed", v=v), eta, eta1,
                                model="qed", v=v)
        y = F.intertwiner_apply(s, eta, eta2, model="qed", v=v)
        ratio = F.inner_norm(x - y) / (1e-8 + x.remainder + y.remainder)
        return None, {"model": "qed", "composition_ratio": ratio}, _verdict(ratio <= 1)
    res = ACC.fock_calculus(n_max=cfg.nmax)
    res2 = ACC.modified_momentum()
    out = {"fock": res.to_json(), "modified_momentum": res2.to_json()}
    return None, out, _verdict(res.passed and res2.passed)


def run_lojasiewicz(cfg):
    """Łojasiewicz point values on the reference corpus."""
    corpus = {"cos+q^2": (lambda q: np.cos(q[..., 0]) + q[..., 0] ** 2, None, "value"),
              "polynomial h": (lambda q: np.ones(q.shape[:-1]), lambda q: q[..., 0], "value"),
              "sgn": (lambda q: np.sign(q[..., 0]), None, "no Łojasiewicz value")}
    out, ok = {}, True
    for name, (t, h, want) in corpus.items():
        r = lojasiewicz_value(t, h)
        out[name] = {"verdict": r["verdict"], "expected": want, "value": r.get("value")}
        ok &= r["verdict"] == want
    return None, out, _verdict(ok)


def run_identities(cfg):
    """BCH and Magnus residuals on random nilpotent matrices."""
    rng = np.random.default_rng(cfg.seed)
    X = np.triu(rng.normal(size=(4, 4)), 1)
    Y = np.triu(rng.normal(size=(4, 4)), 2)
    mats = [a * X + b * Y for a, b in rng.normal(size=(3, 2))]
    res = {"bch": algebraic_identity_residual("bch", X, Y),
           "magnus": algebraic_identity_residual("magnus", mats, list(rng.uniform(0.2, 1.0, 3)))}
    return None, res, _verdict(max(res.values()) <= 1e-12)


def run_all(cfg):
    """Run the full acceptance suite, one PASS/FAIL line per criterion."""
    results = ACC.run_all()
    for r in results:
        click.echo(r.line())
    return None, {"criteria": [r.to_json() for r in results]}, \
        _verdict(all(r.passed for r in results))


RUNNERS = {"coulomb": run_coulomb, "firstorder": run_firstorder, "selfenergy": run_selfenergy,
           "vacpol": run_vacpol, "compton": run_compton, "pair": run_pair, "moller": run_moller,
           "currents": run_currents, "fock-checks": run_fock,
           "dirac-checks": run_dirac, "lojasiewicz": run_lojasiewicz,
           "identities": run_identities, "all-acceptance": run_all}


def _jsonable(x):
    if isinstance(x, dict):
        return {str(k): _jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_jsonable(v) for v in x]
    if isinstance(x, np.ndarray):
        return _jsonable(x.tolist())
    if isinstance(x, (np.bool_, bool)):
        return bool(x)
    if isinstance(x, (np.integer,)):
        return int(x)
    if isinstance(x, (complex, np.complexfloating)):
        return [float(x.real), float(x.imag)]
    if isinstance(x, (np.floating, float)):
        return float(x)
    return x


def emit_report(cfg: RunConfig, scan, fit_info, verdict, runtime_s):
    """Write the CSV (if any) and the JSON report; returns the report dict."""
    out = Path(cfg.out)
    try:
        out.mkdir(parents=True, exist_ok=True)
        scan_file = None
        if scan is not None:
            scan_file = str(out / f"{cfg.command}.csv")
            Path(scan_file).write_text(scan.to_csv())
        report = {"command": cfg.command, "config": cfg.to_dict(), "scan_file": scan_file,
                  "fit": _jsonable(fit_info), "verdict": verdict, "runtime_s": runtime_s,
                  "version": __version__,
                  "test_functions": {"eta": _jsonable(cfg.eta().params()),
                                     "g": _jsonable(cfg.g().params())}}
        (out / f"{cfg.command}.json").write_text(json.dumps(report, indent=2, sort_keys=True) + "\n")
    except OSError as exc:
        raise click.ClickException(f"cannot write results to {out}: {exc}") from exc
    return report


def execute(cfg: RunConfig, check=False):
    t0 = time.perf_counter()
    scan, fit_info, verdict = RUNNERS[cfg.command](cfg)
    report = emit_report(cfg, scan, fit_info, verdict, time.perf_counter() - t0)
    click.echo(json.dumps({k: report[k] for k in ("command", "verdict", "scan_file")}))
    if check and verdict != "pass":
        sys.exit(1)
    return report


# ------------------------------------------------------------------ click wiring

_DEFAULTS = RunConfig("coulomb")


def _options(fn):
    opts = [
        click.option("--config", "config_file", type=click.Path(exists=True, dir_okay=False),
                     help="JSON file with RunConfig fields; flags override it."),
        click.option("--model", type=click.Choice(MODELS), default=None,
                     help=f"Coupling model  [default: {_DEFAULTS.model}]"),
        click.option("--eps-min", type=float, default=None,
                     help=f"Smallest ε  [default: {_DEFAULTS.eps_min}]"),
        click.option("--eps-max", type=float, default=None,
                     help=f"Largest ε  [default: {_DEFAULTS.eps_max}]"),
        click.option("--points", type=int, default=None,
                     help=f"Number of geometric ε points  [default: {_DEFAULTS.points}]"),
        click.option("--sigma", type=float, default=None,
                     help=f"Profile η width  [default: {_DEFAULTS.sigma}]"),
        click.option("--switch-width", type=float, default=None,
                     help=f"Switching function g width  [default: {_DEFAULTS.switch_width}]"),
        click.option("--c1", type=float, default=None, help=f"Mass counterterm  [default: {_DEFAULTS.c1}]"),
        click.option("--c2", type=float, default=None,
                     help=f"Wave-function counterterm  [default: {_DEFAULTS.c2}]"),
        click.option("--nmax", type=int, default=None,
                     help=f"Photon-number truncation  [default: {_DEFAULTS.nmax}]"),
        click.option("--grid-order", type=int, default=None,
                     help=f"Angular order of output grids  [default: {_DEFAULTS.grid_order}]"),
        click.option("--seed", type=int, default=None, help=f"RNG seed  [default: {_DEFAULTS.seed}]"),
        click.option("--out", type=str, default=None,
                     help=f"Output directory  [default: {_DEFAULTS.out}]"),
        click.option("--check", is_flag=True, help="Exit nonzero unless the verdict is pass."),
    ]
    for opt in reversed(opts):
        fn = opt(fn)
    return fn


def _make_command(name):
    @click.command(name=name, help=(RUNNERS[name].__doc__ or f"Run the {name} checks."))
    @_options
    def cmd(config_file, check, **flags):
        base = json.loads(Path(config_file).read_text()) if config_file else {}
        base["command"] = name
        try:
            cfg = parse_config(base, **flags)
        except ConfigError as exc:
            raise click.UsageError("\n".join(exc.problems)) from exc
        execute(cfg, check)
    return cmd


@click.group()
@click.version_option(__version__)
def main():
    """Adiabatic-cutoff scattering checks: ε-scans, fits and verdicts."""


for _name in COMMANDS:
    main.add_command(_make_command(_name))


if __name__ == "__main__":
    main()

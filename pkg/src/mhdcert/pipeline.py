"""Config-driven end-to-end runs.

integrate -> estimators -> control problem(s) -> certificate, with every
intermediate written to ``out``:

    trajectory.csv   |gamma_k|, |beta_k| for the watched modes
    estimators.csv   D_p and eps_p on the estimator grid
    control.csv      R_n, D_n + R_n and R_p on the same grid
    certificate.json existence certificate
    summary.json     config hash, datum norms, certificate, T_c
    timings.json     wall-clock timings and kernel backend

Everything except timings.json is a deterministic function of the config.
"""

from __future__ import annotations

import csv
import dataclasses
import hashlib
import json
import math
import time
from dataclasses import dataclass, field
from pathlib import Path


from . import kernels
from .constants import ConstantsPolicy, constants_for_run
from .control import ControlProblem, check_global_certificate, solve_control_n, solve_control_p_linear
from .data import parse_datum
from .estimators import EstimatorSet
from .galerkin import GalerkinProblem, integrate
from .spectral import ModeSet, pair_norm

DEFAULT_WATCH = [[0, 1, 0], [1, 1, 0]]


def _order(p):
    p = float(p)
    return int(p) if p.is_integer() else p


def emit_mode_cube(radius: int, dim: int = 3) -> ModeSet:
    """All nonzero k with integer coordinates in [-radius, radius]."""
    return ModeSet.cube(radius, dim)


def parse_modes(spec: str, dim: int) -> ModeSet:
    """``cube:N`` or ``file:PATH`` (JSON list of modes; -k partners are added)."""
    kind, _, arg = str(spec).partition(":")
    if kind == "cube":
        return emit_mode_cube(int(arg), dim)
    if kind == "file":
        modes = json.loads(Path(arg).read_text())
        return ModeSet.from_modes(modes, dim=dim, symmetrize=True)
    raise ValueError(f"unknown mode set {spec!r}; expected cube:N or file:PATH")


@dataclass
class RunConfig:
    datum: str
    nu: float
    eta: float
    t_final: float
    dim: int = 3
    modes: str = "cube:2"
    n: int = 3
    p_list: list = field(default_factory=lambda: [5])
    D_orders: list | None = None
    eps_orders: list | None = None
    grid_size: int = 401
    rtol: float = 1e-9
    atol: float = 1e-12
    constants: object = "tabulated"
    watch_modes: list | None = None
    out: str = "out"
    plots: bool = False

    def __post_init__(self):
        for name in ("nu", "eta", "t_final", "rtol", "atol"):
            setattr(self, name, float(getattr(self, name)))
        self.n = _order(self.n)
        self.p_list = [_order(p) for p in self.p_list]
        for name in ("D_orders", "eps_orders"):
            if getattr(self, name) is not None:
                setattr(self, name, [_order(p) for p in getattr(self, name)])
        self.dim = int(self.dim)
        self.grid_size = int(self.grid_size)

    @classmethod
    def from_dict(cls, data: dict) -> "RunConfig":
        names = {f.name for f in dataclasses.fields(cls)}
        unknown = set(data) - names - {"mu"}
        if unknown:
            raise ValueError(f"unknown config keys: {sorted(unknown)}")
        data = dict(data)
        if "mu" in data:
            mu = data.pop("mu")
            data.setdefault("nu", mu)
            data.setdefault("eta", mu)
        missing = [k for k in ("datum", "nu", "eta", "t_final") if k not in data]
        if missing:
            raise ValueError(f"config is missing {missing}")
        cfg = cls(**data)
        cfg.validate()
        return cfg

    @classmethod
    def load(cls, path) -> "RunConfig":
        try:
            data = json.loads(Path(path).read_text())
        except json.JSONDecodeError as exc:
            raise ValueError(f"{path}: not valid JSON ({exc})") from exc
        return cls.from_dict(data)

    def with_overrides(self, mu=None, t_final=None, out=None) -> "RunConfig":
        changes = {}
        if mu is not None:
            changes.update(nu=mu, eta=mu)
        if t_final is not None:
            changes["t_final"] = t_final
        if out is not None:
            changes["out"] = str(out)
        cfg = dataclasses.replace(self, **changes)
        cfg.validate()
        return cfg

    @property
    def mu(self) -> float:
        return min(self.nu, self.eta)

    @property
    def d_orders(self) -> list:
        if self.D_orders is not None:
            return sorted(set(self.D_orders))
        return sorted({self.n, self.n + 1} | {q for p in self.p_list for q in (p, p + 1)})

    @property
    def e_orders(self) -> list:
        if self.eps_orders is not None:
            return sorted(set(self.eps_orders))
        return sorted({self.n} | set(self.p_list))

    def validate(self) -> None:
        if self.nu < 0 or self.eta < 0:
            raise ValueError("nu and eta must be nonnegative")
        if not self.t_final > 0:
            raise ValueError("t_final must be positive")
        if self.dim < 2:
            raise ValueError("dim must be at least 2")
        if not self.n > self.dim / 2 + 1:
            raise ValueError(f"n={self.n} must exceed dim/2 + 1")
        for p in self.p_list:
            if not p > self.n:
                raise ValueError(f"order p={p} must exceed n={self.n}")
        if self.grid_size < 2:
            raise ValueError("grid_size must be at least 2")
        if not (self.rtol > 0 and self.atol > 0):
            raise ValueError("tolerances must be positive")
        need_D = {self.n, self.n + 1} | {q for p in self.p_list for q in (p, p + 1)}
        if not need_D <= set(self.d_orders):
            raise ValueError(f"D_orders must include {sorted(need_D)}")
        if not ({self.n} | set(self.p_list)) <= set(self.e_orders):
            raise ValueError("eps_orders must include n and every p")
        ConstantsPolicy.parse(self.constants)

    def to_dict(self) -> dict:
        out = dataclasses.asdict(self)
        out["constants"] = ConstantsPolicy.parse(self.constants).to_dict()
        return out

    def hash(self) -> str:
        """Digest of everything that affects the numbers (not the output path)."""
        data = self.to_dict()
        data.pop("out")
        data.pop("plots")
        blob = json.dumps(data, sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(blob.encode()).hexdigest()


@dataclass
class RunReport:
    config: RunConfig
    summary: dict
    certificate: object
    trajectory: object
    estimators: EstimatorSet
    constants: object
    Rn: object
    Rp: dict
    timings: dict
    out: Path


def _watch_list(cfg: RunConfig, G: ModeSet) -> list:
    if cfg.watch_modes is not None:
        for k in cfg.watch_modes:
            if len(k) != cfg.dim or tuple(int(x) for x in k) not in G:
                raise ValueError(f"watched mode {k} is not in G")
        return [list(map(int, k)) for k in cfg.watch_modes]
    if cfg.dim != 3:
        return []
    return [k for k in DEFAULT_WATCH if tuple(k) in G]


def _num_key(p) -> str:
    return str(_order(p))


def _write_control_csv(path, times, Dn, Rn, Rp: dict, n) -> None:
    ts = times[times < Rn.t_end] if Rn.blew_up else times
    r = Rn.sample(ts)
    d = Dn(ts)
    cols = {f"R_{_num_key(n)}": r, f"D_{_num_key(n)}_plus_R_{_num_key(n)}": d + r}
    for p, sol in sorted(Rp.items()):
        cols[f"R_{_num_key(p)}"] = sol.sample(ts)
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["t"] + list(cols))
        for i, t in enumerate(ts):
            w.writerow([f"{t:.6f}"] + [f"{c[i]:.12e}" for c in cols.values()])


def _dump(path, obj) -> None:
    Path(path).write_text(json.dumps(obj, indent=1) + "\n")


def _clean(x):
    """JSON-safe floats (infinities become null)."""
    if isinstance(x, float) and not math.isfinite(x):
        return None
    if isinstance(x, dict):
        return {k: _clean(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_clean(v) for v in x]
    return x


def run_pipeline(config: RunConfig) -> RunReport:
    config.validate()
    timings = {}
    clock = time.perf_counter

    t0 = clock()
    u0 = parse_datum(config.datum)
    if u0.dim != config.dim:
        raise ValueError(f"datum has dimension {u0.dim}, config says {config.dim}")
    G = parse_modes(config.modes, config.dim)
    watch = _watch_list(config, G)
    constants = constants_for_run(config.n, config.p_list, config.dim, config.constants)
    timings["setup"] = clock() - t0

    out = Path(config.out)
    out.mkdir(parents=True, exist_ok=True)

    t0 = clock()
    traj = integrate(
        GalerkinProblem(G, config.nu, config.eta, u0, config.t_final, rtol=config.rtol, atol=config.atol)
    )
    timings["integrate"] = clock() - t0

    t0 = clock()
    est = EstimatorSet.compute(traj, u0, config.d_orders, config.e_orders, config.grid_size)
    timings["estimators"] = clock() - t0

    t0 = clock()
    n, mu = config.n, config.mu
    problem = ControlProblem.from_estimators(est, constants, n, mu, config.t_final)
    Rn = solve_control_n(problem)
    G_hat_n = constants.hat("G", n)
    cert = check_global_certificate(est.D[n], Rn, mu, G_hat_n)
    Rp = {}
    for p in config.p_list:
        lin = ControlProblem.from_estimators(est, constants, n, mu, config.t_final, p=p)
        Rp[p] = solve_control_p_linear(lin, Rn)
    timings["control"] = clock() - t0

    t0 = clock()
    traj.write_csv(out / "trajectory.csv", est.times, watch)
    est.write_csv(out / "estimators.csv")
    _write_control_csv(out / "control.csv", est.times, est.D[n], Rn, Rp, n)
    cert_dict = _clean(cert.to_dict())
    _dump(out / "certificate.json", cert_dict)
    summary = {
        "config_hash": config.hash(),
        "datum_norms": {_num_key(p): pair_norm(u0, p) for p in config.d_orders},
        "certificate": cert_dict,
        "Tc": Rn.T_c,
        "Tc_bracket": list(Rn.bracket) if Rn.blew_up else None,
        "blew_up": Rn.blew_up,
        "mu": mu,
        "t_final": config.t_final,
        "n_modes": len(G),
        "constants": {f"{kind}({_num_key(a)},{_num_key(b)})": v for (a, b, kind), v in sorted(constants.entries.items(), key=str)},
        "delta": {_num_key(p): v for p, v in est.delta.items()},
        "timings": "timings.json",
    }
    summary = _clean(summary)
    _dump(out / "summary.json", summary)
    if config.plots:
        from .plots import write_plots

        write_plots(out, est, Rn, Rp, n)
    timings["write"] = clock() - t0
    timings["backend"] = kernels.BACKEND
    _dump(out / "timings.json", timings)
    return RunReport(config, summary, cert, traj, est, constants, Rn, Rp, timings, out)


__all__ = ["RunConfig", "RunReport", "emit_mode_cube", "parse_modes", "run_pipeline"]

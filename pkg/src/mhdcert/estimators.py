"""A-posteriori estimators for a Galerkin trajectory.

* growth ``D_p(t) = |u_G(t)|_p``
* differential error ``eps_p(t) = |e(u_G(t))|_p`` where ``e`` is the part of
  the nonlinear term that the truncation throws away, living on ``dG``
* the cheaper over-estimate ``eps'_pq`` built from growth estimators only
* datum errors ``delta_p`` (exact tail norm) and ``delta'_pq`` (tail bound)

Time-dependent estimators are sampled on a grid and interpolated with a
cubic spline, clipped at zero.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.interpolate import CubicSpline

from .galerkin import Trajectory
from .spectral import ModeSet, SpectralField, StatePair, modeset_dG, pair_norm, tail_radius

DEFAULT_GRID = 401


@dataclass
class EstimatorTrajectory:
    """Sampled scalar function of time with a cubic-spline interpolant."""

    order: float
    times: np.ndarray
    values: np.ndarray
    kind: str = "growth"  # "growth" | "diff_error"
    name: str = ""
    _spline: CubicSpline | None = field(default=None, repr=False, compare=False)

    def __post_init__(self):
        self.times = np.asarray(self.times, dtype=float)
        self.values = np.asarray(self.values, dtype=float)
        if self.times.shape != self.values.shape or self.times.ndim != 1:
            raise ValueError("times and values must be 1-d arrays of equal length")
        if len(self.times) > 1 and np.any(np.diff(self.times) <= 0):
            raise ValueError("sample times must be strictly increasing")
        if np.any(self.values < 0):
            raise ValueError(f"estimator {self.label} has negative samples")
        if not self.name:
            self.name = self.label

    @property
    def label(self) -> str:
        tag = "D" if self.kind == "growth" else "eps"
        return f"{tag}_{_fmt(self.order)}"

    @property
    def t_final(self) -> float:
        return float(self.times[-1])

    def __call__(self, t):
        if len(self.times) == 1:
            return np.full_like(np.asarray(t, dtype=float), self.values[0]) + 0.0
        if self._spline is None:
            self._spline = CubicSpline(self.times, self.values)
        out = self._spline(t)
        return np.maximum(out, 0.0) if np.ndim(out) else max(float(out), 0.0)

    def max(self) -> float:
        return float(np.max(self.values))

    def scaled(self, c: float) -> "EstimatorTrajectory":
        if c < 0:
            raise ValueError("scale must be nonnegative")
        return EstimatorTrajectory(self.order, self.times, c * self.values, self.kind, self.name)

    @classmethod
    def constant(cls, value: float, t_final: float, order=0, kind="growth") -> "EstimatorTrajectory":
        return cls(order, np.array([0.0, t_final]), np.array([value, value], dtype=float), kind)


@dataclass(frozen=True)
class DatumError:
    p: float
    value: float
    mode: str = "tautological"  # or "rough"
    q: float | None = None


def _fmt(x) -> str:
    x = float(x)
    return str(int(x)) if x.is_integer() else repr(x)


def make_grid(t_final: float, grid=None) -> np.ndarray:
    """``grid`` is a point count, an explicit array, or None for the default."""
    if grid is None:
        grid = DEFAULT_GRID
    if np.ndim(grid) == 0:
        n = int(grid)
        if n < 2:
            raise ValueError("grid needs at least two points")
        return np.linspace(0.0, float(t_final), n)
    g = np.asarray(grid, dtype=float)
    if g[0] < 0 or g[-1] > t_final * (1 + 1e-12) or np.any(np.diff(g) <= 0):
        raise ValueError("grid must be increasing and inside [0, T_F]")
    return g


class _Weights:
    """Per-mode |k|^2p weights, in order of increasing |k| for the sums."""

    def __init__(self, reps: np.ndarray):
        k2 = np.sum(reps.astype(float) ** 2, axis=1)
        self.order = np.argsort(k2, kind="stable")
        self.k2 = k2[self.order]
        self._cache = {}

    def norm(self, amp2: np.ndarray, p: float) -> float:
        """``amp2`` holds |u_k|^2 + |b_k|^2 per representative."""
        w = self._cache.get(p)
        if w is None:
            w = self._cache[p] = 2.0 * self.k2**p
        return math.sqrt(math.fsum(w * amp2[self.order]))


class EstimatorSampler:
    """Evaluates all estimators of one trajectory on a shared grid.

    Coefficients and the dG residual are computed once per grid time.
    """

    def __init__(self, traj: Trajectory, grid=None):
        self.traj = traj
        self.times = make_grid(traj.t_final, grid)
        self._amp = None
        self._res = None
        self._wG = _Weights(traj.G.reps)
        self._wd = None

    def _amp_G(self) -> np.ndarray:
        if self._amp is None:
            rows = []
            for t in self.times:
                u, b = self.traj.coeffs_at(float(t))
                rows.append(np.sum(np.abs(u) ** 2, axis=1) + np.sum(np.abs(b) ** 2, axis=1))
            self._amp = np.array(rows)
        return self._amp

    def _amp_dG(self) -> np.ndarray:
        if self._res is None:
            system = self.traj.system
            self._wd = _Weights(system.dG.reps)
            rows = []
            for t in self.times:
                r, s = system.residual_coeffs(*self.traj.coeffs_at(float(t)))
                rows.append(np.sum(np.abs(r) ** 2, axis=1) + np.sum(np.abs(s) ** 2, axis=1))
            self._res = np.array(rows)
        return self._res

    def growth(self, p: float) -> EstimatorTrajectory:
        amp = self._amp_G()
        vals = np.array([self._wG.norm(a, p) for a in amp])
        return EstimatorTrajectory(p, self.times.copy(), vals, "growth")

    def eps(self, p: float) -> EstimatorTrajectory:
        amp = self._amp_dG()
        vals = np.array([self._wd.norm(a, p) for a in amp])
        return EstimatorTrajectory(p, self.times.copy(), vals, "diff_error")

    def eps_rough(self, p: float, q: float, K_hat_q: float) -> EstimatorTrajectory:
        if q < p:
            raise ValueError(f"rough estimator needs q >= p (got p={p}, q={q})")
        r = tail_radius(self.traj.G)
        Dq = self.growth(q).values
        Dq1 = self.growth(q + 1).values
        vals = K_hat_q / r ** (q - p) * Dq * Dq1
        return EstimatorTrajectory(p, self.times.copy(), vals, "diff_error", f"eps_rough_{_fmt(p)}_{_fmt(q)}")


def growth_D(traj: Trajectory, p: float, grid=None) -> EstimatorTrajectory:
    return EstimatorSampler(traj, grid).growth(p)


def eps_tautological(traj: Trajectory, p: float, grid=None) -> EstimatorTrajectory:
    return EstimatorSampler(traj, grid).eps(p)


def eps_rough(traj: Trajectory, p: float, q: float, constants, grid=None) -> EstimatorTrajectory:
    """``K-hat_q / |G|^(q-p) * D_q * D_(q+1)``; ``constants`` must hold K-hat_q."""
    K_hat_q = constants.hat("K", q)
    return EstimatorSampler(traj, grid).eps_rough(p, q, K_hat_q)


def _check_support(state: StatePair, G: ModeSet) -> None:
    for f in (state.u, state.b):
        if len(f.modes) == 0:
            continue
        outside = G.index_of(f.modes) < 0
        if np.any(outside & (np.linalg.norm(f.coeffs, axis=1) > 0)):
            raise ValueError("state has support outside G")


def diff_error_field(state: StatePair, G: ModeSet) -> StatePair:
    """Differential error ``-(1 - E^G) P(u_G, u_G)`` as a pair supported on dG."""
    from .galerkin import GalerkinSystem

    _check_support(state, G)
    dG = modeset_dG(G)
    if dG.n_pairs == 0:
        return StatePair.zero(G.dim)
    system = GalerkinSystem(G)
    u = state.u.on_modes(G.reps)
    b = state.b.on_modes(G.reps)
    r, s = system.residual_coeffs(u, b)
    return StatePair(SpectralField(dG.reps, -r, G.dim), SpectralField(dG.reps, -s, G.dim))


def datum_error(u0: StatePair, G: ModeSet, p: float, mode: str = "tautological", q: float | None = None) -> DatumError:
    """Distance between the datum and its projection on G, exact or bounded."""
    if mode == "tautological":
        return DatumError(p, pair_norm(u0.restrict(G, inside=False), p), mode)
    if mode == "rough":
        if q is None or q < p:
            raise ValueError("rough datum error needs q >= p")
        return DatumError(p, pair_norm(u0, q) / tail_radius(G) ** (q - p), mode, q)
    raise ValueError(f"unknown datum error mode {mode!r}")


@dataclass
class EstimatorSet:
    """The estimators of one run, keyed by order."""

    times: np.ndarray
    D: dict
    eps: dict
    delta: dict

    @classmethod
    def compute(cls, traj: Trajectory, u0: StatePair, D_orders, eps_orders, grid=None) -> "EstimatorSet":
        sampler = EstimatorSampler(traj, grid)
        D = {p: sampler.growth(p) for p in D_orders}
        eps = {p: sampler.eps(p) for p in eps_orders}
        delta = {p: datum_error(u0, traj.G, p).value for p in sorted(set(D_orders) | set(eps_orders))}
        return cls(sampler.times, D, eps, delta)

    def write_csv(self, path) -> None:
        cols = [self.D[p] for p in sorted(self.D)] + [self.eps[p] for p in sorted(self.eps)]
        write_estimators_csv(path, cols)


def write_estimators_csv(path, estimators) -> None:
    """Write several estimators sampled on the same grid as CSV columns."""
    estimators = list(estimators)
    times = estimators[0].times
    for e in estimators[1:]:
        if not np.array_equal(e.times, times):
            raise ValueError("estimators must share their sample grid")
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["t"] + [e.name for e in estimators])
        for i, t in enumerate(times):
            w.writerow([f"{t:.6f}"] + [f"{e.values[i]:.12e}" for e in estimators])


__all__ = [
    "DEFAULT_GRID",
    "DatumError",
    "EstimatorSampler",
    "EstimatorSet",
    "EstimatorTrajectory",
    "datum_error",
    "diff_error_field",
    "eps_rough",
    "eps_tautological",
    "growth_D",
    "make_grid",
    "write_estimators_csv",
]

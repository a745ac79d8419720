"""Shared fixtures-by-function for the test suite (cached scenario runs, random fields)."""

import functools
from dataclasses import dataclass

import numpy as np

from mhdcert import (
    ControlProblem,
    GalerkinProblem,
    ModeSet,
    SpectralField,
    StatePair,
    constants_for_run,
    integrate,
    make_abc,
    solve_control_n,
    solve_control_p_linear,
)
from mhdcert.estimators import EstimatorSet

ABC_HORIZON = {20: 0.5, 10: 2.0, 6: 2.0, 5: 2.0, 3: 2.0, 0: 2.0}


@dataclass
class Run:
    mu: float
    t_final: float
    traj: object
    est: EstimatorSet
    constants: object
    problem: ControlProblem
    Rn: object
    Rp: object  # order-5 linear solution, or None


@functools.lru_cache(maxsize=None)
def constants():
    return constants_for_run(3, [5])


@functools.lru_cache(maxsize=None)
def abc_run(mu, t_final=None, radius=2, grid=401, with_p=True) -> Run:
    """ABC(1,1,1,1) on cube(radius) with nu = eta = mu, n = 3, p = 5."""
    t_final = ABC_HORIZON[mu] if t_final is None else t_final
    u0 = make_abc(1, 1, 1, 1)
    G = ModeSet.cube(radius)
    traj = integrate(GalerkinProblem(G, mu, mu, u0, t_final))
    est = EstimatorSet.compute(traj, u0, [3, 4, 5, 6], [3, 5], grid)
    C = constants()
    problem = ControlProblem.from_estimators(est, C, 3, mu, t_final, p=5 if with_p else None)
    Rn = solve_control_n(problem)
    Rp = solve_control_p_linear(problem, Rn) if with_p else None
    return Run(mu, t_final, traj, est, C, problem, Rn, Rp)


@functools.lru_cache(maxsize=None)
def proxy_traj(mu, t_final, radius=3):
    return integrate(GalerkinProblem(ModeSet.cube(radius), mu, mu, make_abc(1, 1, 1, 1), t_final))


def first_crossing(f, g, t0, t1, n=20001):
    """First t in [t0, t1] with f(t) >= g(t), or None."""
    ts = np.linspace(t0, t1, n)
    bad = np.asarray(f(ts)) >= np.asarray(g(ts))
    return float(ts[np.argmax(bad)]) if bad.any() else None


def random_field(rng, dim=3, radius=3, n_modes=None, scale=1.0) -> SpectralField:
    """Random real divergence-free field with modes in [-radius, radius]^dim."""
    reps = ModeSet.cube(radius, dim).reps
    if n_modes is not None and n_modes < len(reps):
        reps = reps[np.sort(rng.choice(len(reps), n_modes, replace=False))]
    c = scale * (rng.standard_normal((len(reps), dim)) + 1j * rng.standard_normal((len(reps), dim)))
    k = reps.astype(float)
    c = c - (np.sum(k * c, axis=1) / np.sum(k * k, axis=1))[:, None] * k
    return SpectralField(reps, c, dim)


def random_pair(rng, dim=3, radius=3, n_modes=None, scale=1.0) -> StatePair:
    return StatePair(random_field(rng, dim, radius, n_modes, scale), random_field(rng, dim, radius, n_modes, scale))


def rel(a, b):
    return abs(a - b) / max(abs(a), abs(b), 1e-300)

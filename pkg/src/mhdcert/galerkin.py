"""Galerkin truncation of incompressible MHD to a finite mode set.

The unknowns are the coefficients ``gamma_k`` (velocity) and ``beta_k``
(magnetic field) for ``k`` in ``G``; only one representative per ``+-k``
pair is integrated, the partner being its complex conjugate.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field

import numpy as np
from scipy.integrate import solve_ivp

from . import kernels
from .spectral import ModeSet, SpectralField, StatePair, Triads, build_triads, modeset_dG


class GalerkinSystem:
    """Right-hand side of the Galerkin ODE on ``G``, plus the residual on ``dG``.

    State vectors hold the complex coefficient array of shape
    ``(2, n_pairs, d)`` (velocity, magnetic) viewed as interleaved reals.
    """

    def __init__(self, G: ModeSet, nu: float = 0.0, eta: float = 0.0):
        if nu < 0 or eta < 0:
            raise ValueError("viscosity and resistivity must be nonnegative")
        self.G = G
        self.nu = float(nu)
        self.eta = float(eta)
        self.dim = G.dim
        full = G.full
        self.rhs_triads: Triads = build_triads(G.reps, full, full)
        self._dG = None
        self._err_triads = None
        k2 = np.sum(G.reps.astype(float) ** 2, axis=1)
        self._damp_u = -self.nu * k2[:, None]
        self._damp_b = -self.eta * k2[:, None]

    @property
    def dG(self) -> ModeSet:
        if self._dG is None:
            self._dG = modeset_dG(self.G)
        return self._dG

    @property
    def err_triads(self) -> Triads:
        if self._err_triads is None:
            full = self.G.full
            self._err_triads = build_triads(self.dG.reps, full, full)
        return self._err_triads

    @property
    def mu(self) -> float:
        return min(self.nu, self.eta)

    # -- packing

    @property
    def size(self) -> int:
        return 2 * 2 * self.G.n_pairs * self.dim

    def pack(self, state: StatePair) -> np.ndarray:
        self.check_support(state)
        z = np.empty((2, self.G.n_pairs, self.dim), dtype=np.complex128)
        z[0] = state.u.on_modes(self.G.reps)
        z[1] = state.b.on_modes(self.G.reps)
        return z.reshape(-1).view(np.float64).copy()

    def unpack_coeffs(self, y: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        z = np.ascontiguousarray(y).view(np.complex128).reshape(2, self.G.n_pairs, self.dim)
        return z[0], z[1]

    def unpack(self, y: np.ndarray) -> StatePair:
        u, b = self.unpack_coeffs(y)
        reps = self.G.reps
        return StatePair(SpectralField(reps, u.copy(), self.dim), SpectralField(reps, b.copy(), self.dim))

    def check_support(self, state: StatePair) -> None:
        for name, f in (("velocity", state.u), ("magnetic field", state.b)):
            if len(f.modes) and np.any(self.G.index_of(f.modes) < 0):
                outside = f.modes[self.G.index_of(f.modes) < 0]
                nz = np.linalg.norm(f.coeffs[self.G.index_of(f.modes) < 0], axis=1) > 0
                if np.any(nz):
                    raise ValueError(f"{name} has support outside G, e.g. k={tuple(outside[nz][0])}")

    # -- dynamics

    def _nonlinear(self, u: np.ndarray, b: np.ndarray, tri: Triads) -> tuple[np.ndarray, np.ndarray]:
        uf = np.vstack([u, np.conj(u)])
        bf = np.vstack([b, np.conj(b)])
        return kernels.pair_convolve(tri.kvec, tri.out_idx, tri.h_idx, tri.q_idx, tri.qvec, uf, bf)

    def rhs_coeffs(self, u: np.ndarray, b: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        nu_, nb_ = self._nonlinear(u, b, self.rhs_triads)
        return self._damp_u * u + nu_, self._damp_b * b + nb_

    def __call__(self, t: float, y: np.ndarray) -> np.ndarray:
        u, b = self.unpack_coeffs(y)
        du, db = self.rhs_coeffs(u, b)
        out = np.empty((2,) + du.shape, dtype=np.complex128)
        out[0] = du
        out[1] = db
        return out.reshape(-1).view(np.float64)

    def residual_coeffs(self, u: np.ndarray, b: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        """Coefficients ``(rho_k, sigma_k)`` of the nonlinear term on ``dG``."""
        return self._nonlinear(u, b, self.err_triads)


def rhs(state: StatePair, G: ModeSet, nu: float, eta: float) -> StatePair:
    """Time derivative of a state supported on ``G`` under the Galerkin system."""
    system = GalerkinSystem(G, nu, eta)
    return system.unpack(system(0.0, system.pack(state)))


@dataclass(frozen=True)
class GalerkinProblem:
    G: ModeSet
    nu: float
    eta: float
    u0: StatePair
    t_final: float
    rtol: float = 1e-9
    atol: float = 1e-12
    method: str = "DOP853"

    def __post_init__(self):
        if self.nu < 0 or self.eta < 0:
            raise ValueError("viscosity and resistivity must be nonnegative")
        if not self.t_final > 0:
            raise ValueError("final time must be positive")
        if self.u0.dim != self.G.dim:
            raise ValueError("datum and mode set have different dimensions")

    @property
    def mu(self) -> float:
        return min(self.nu, self.eta)


@dataclass
class Trajectory:
    """Galerkin solution sampled at the integrator steps, with dense output."""

    system: GalerkinSystem
    times: np.ndarray
    samples: np.ndarray  # (n_times, state size)
    dense: object = field(repr=False)
    t_final: float = 0.0

    @property
    def G(self) -> ModeSet:
        return self.system.G

    def vector_at(self, t: float) -> np.ndarray:
        if t < 0 or t > self.t_final * (1 + 1e-12):
            raise ValueError(f"t={t} outside [0, {self.t_final}]")
        i = np.searchsorted(self.times, t)
        if i < len(self.times) and self.times[i] == t:
            return self.samples[i]
        return self.dense(t)

    def coeffs_at(self, t: float) -> tuple[np.ndarray, np.ndarray]:
        return self.system.unpack_coeffs(self.vector_at(t))

    def state_at(self, t: float) -> StatePair:
        return self.system.unpack(self.vector_at(t))

    def write_csv(self, path, times, watch) -> None:
        """Write ``|gamma_k|`` and ``|beta_k|`` for each watched ``k``."""
        watch = [tuple(int(x) for x in k) for k in watch]
        idx = []
        for k in watch:
            j = self.G.index_of(np.array([k]))[0]
            if j < 0:
                raise ValueError(f"watched mode {k} is not in G")
            idx.append(j % self.G.n_pairs)
        header = ["t"]
        for k in watch:
            tag = "_".join(str(x) for x in k)
            header += [f"abs_gamma_{tag}", f"abs_beta_{tag}"]
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(header)
            for t in times:
                u, b = self.coeffs_at(float(t))
                row = [f"{t:.6f}"]
                for j in idx:
                    row += [f"{np.linalg.norm(u[j]):.12e}", f"{np.linalg.norm(b[j]):.12e}"]
                w.writerow(row)


def integrate(problem: GalerkinProblem) -> Trajectory:
    """Integrate the Galerkin system from the projection of the datum onto ``G``."""
    system = GalerkinSystem(problem.G, problem.nu, problem.eta)
    y0 = system.pack(problem.u0.restrict(problem.G))
    sol = solve_ivp(
        system,
        (0.0, problem.t_final),
        y0,
        method=problem.method,
        rtol=problem.rtol,
        atol=problem.atol,
        dense_output=True,
    )
    if sol.status != 0:
        raise RuntimeError(f"Galerkin integration failed: {sol.message}")
    samples = np.ascontiguousarray(sol.y.T)
    samples[0] = y0
    return Trajectory(system, sol.t, samples, sol.sol, problem.t_final)


def state_at(traj: Trajectory, t: float) -> StatePair:
    return traj.state_at(t)


__all__ = [
    "GalerkinProblem",
    "GalerkinSystem",
    "Trajectory",
    "integrate",
    "rhs",
    "state_at",
]

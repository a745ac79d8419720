"""Control Cauchy problems, blow-up times and existence certificates.

The nonlinear problem of order n

    R_n' = -mu R_n + (G_n D_n + K_n D_{n+1}) R_n + G_n R_n^2 + eps_n,   R_n(0) = delta_n

bounds the Sobolev distance between the exact and the approximate solution
for as long as R_n stays finite.  Its blow-up time T_c is a lower bound for
the lifespan of the exact solution.  Here G_n, K_n are the hatted constants.
Once R_n is known, the order-p distance (p > n) obeys the linear problem

    R_p' = -mu R_p + (G_p D_p + K_p D_{p+1} + G_pn R_n) R_p + eps_p,    R_p(0) = delta_p.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from scipy.integrate import cumulative_simpson, solve_ivp
from scipy.interpolate import CubicHermiteSpline

Scalar = Callable[[float], float]

BLOWUP_THRESHOLD = 1e8


def e_mu(mu: float, t):
    """``(1 - exp(-mu t)) / mu``, and ``t`` itself when ``mu = 0``."""
    t = np.asarray(t, dtype=float)
    if mu == 0:
        out = t.copy()
    else:
        out = -np.expm1(-mu * t) / mu
    return float(out) if out.ndim == 0 else out


def _as_fn(x) -> Scalar:
    if callable(x):
        return x
    v = float(x)
    if v < 0:
        raise ValueError("estimator inputs must be nonnegative")
    return lambda t, v=v: v if np.ndim(t) == 0 else np.full(np.shape(t), v)


def _check_nonneg(name, x):
    vals = getattr(x, "values", None)
    if vals is not None:
        if np.any(np.asarray(vals) < 0):
            raise ValueError(f"{name} has negative samples")
    elif not callable(x) and x is not None and float(x) < 0:
        raise ValueError(f"{name} must be nonnegative")


@dataclass
class ControlProblem:
    """Inputs of the control problems; estimator slots take callables or constants."""

    n: float
    mu: float
    G_hat_n: float
    K_hat_n: float
    D_n: object
    D_n1: object
    eps_n: object
    delta_n: float
    t_final: float
    d: int = 3
    # linear problem of order p
    p: float | None = None
    G_hat_p: float | None = None
    K_hat_p: float | None = None
    G_hat_pn: float | None = None
    D_p: object = None
    D_p1: object = None
    eps_p: object = None
    delta_p: float | None = None
    threshold: float = BLOWUP_THRESHOLD
    rtol: float = 1e-11
    atol: float = 1e-14

    def __post_init__(self):
        if not self.n > self.d / 2 + 1:
            raise ValueError(f"basic order n={self.n} must exceed d/2 + 1 = {self.d / 2 + 1}")
        if self.mu < 0:
            raise ValueError("mu must be nonnegative")
        if not self.t_final > 0:
            raise ValueError("horizon must be positive")
        for name in ("G_hat_n", "K_hat_n", "delta_n"):
            if getattr(self, name) < 0:
                raise ValueError(f"{name} must be nonnegative")
        for name in ("D_n", "D_n1", "eps_n", "D_p", "D_p1", "eps_p", "delta_p"):
            _check_nonneg(name, getattr(self, name))

    @classmethod
    def from_estimators(cls, est, constants, n, mu, t_final, p=None, **kw) -> "ControlProblem":
        """Assemble from an :class:`~mhdcert.estimators.EstimatorSet` and a constants bundle."""
        args = dict(
            n=n,
            mu=mu,
            G_hat_n=constants.hat("G", n),
            K_hat_n=constants.hat("K", n),
            D_n=est.D[n],
            D_n1=est.D[n + 1],
            eps_n=est.eps[n],
            delta_n=est.delta[n],
            t_final=t_final,
            d=constants.d,
        )
        if p is not None:
            args.update(
                p=p,
                G_hat_p=constants.hat("G", p),
                K_hat_p=constants.hat("K", p),
                G_hat_pn=constants.hat("G", p, n),
                D_p=est.D[p],
                D_p1=est.D[p + 1],
                eps_p=est.eps[p],
                delta_p=est.delta[p],
            )
        args.update(kw)
        return cls(**args)


@dataclass
class ControlSolution:
    order: float
    times: np.ndarray
    values: np.ndarray
    T_c: float
    blew_up: bool
    t_end: float  # last time where the solution is available
    bracket: tuple = (None, None)
    dense: object = field(default=None, repr=False)
    A_p: np.ndarray | None = field(default=None, repr=False)  # accumulated exponent at ``times``

    def __call__(self, t):
        t_arr = np.asarray(t, dtype=float)
        if np.any(t_arr < 0) or np.any(t_arr > self.t_end * (1 + 1e-12)):
            raise ValueError(f"t outside [0, {self.t_end}]")
        out = self.dense(np.minimum(t_arr, self.t_end))
        out = np.maximum(np.asarray(out)[0] if np.ndim(out) > t_arr.ndim else out, 0.0)
        return float(out) if t_arr.ndim == 0 else out

    def sample(self, times) -> np.ndarray:
        return np.asarray(self(np.asarray(times, dtype=float)), dtype=float)


def _comparison_gap(R: float, mu: float, G: float) -> float:
    """Blow-up time of ``y' = G y^2 - mu y`` from ``y(0) = R``.

    R_n is a supersolution of this equation, so it blows up no later.
    """
    if G <= 0 or R <= 0:
        return math.inf
    if mu == 0:
        return 1.0 / (G * R)
    if G * R <= mu:
        return math.inf
    return -math.log1p(-mu / (G * R)) / mu


def solve_control_n(problem: ControlProblem) -> ControlSolution:
    """Integrate the nonlinear control problem and locate its blow-up.

    When ``R_n`` reaches the threshold (or the step size collapses) at time
    ``t_s``, the true blow-up lies in ``[t_s, t_s + gap]`` where ``gap`` is
    the blow-up time of the comparison equation ``y' = G y^2 - mu y``
    started from ``R_n(t_s)``: all dropped terms are nonnegative.  The
    bracket is then narrowed to relative width 1e-3 by raising the
    threshold if needed.
    """
    mu, G, K = problem.mu, problem.G_hat_n, problem.K_hat_n
    D, D1, eps = _as_fn(problem.D_n), _as_fn(problem.D_n1), _as_fn(problem.eps_n)

    def f(t, y):
        r = y[0]
        return [-mu * r + (G * D(t) + K * D1(t)) * r + G * r * r + eps(t)]

    threshold = problem.threshold
    while True:
        def hit(t, y, thr=threshold):
            return y[0] - thr

        hit.terminal = True
        hit.direction = 1
        sol = solve_ivp(
            f,
            (0.0, problem.t_final),
            [float(problem.delta_n)],
            method="DOP853",
            rtol=problem.rtol,
            atol=problem.atol,
            events=hit,
            dense_output=True,
        )
        if sol.status == 0:
            return ControlSolution(
                problem.n, sol.t, np.maximum(sol.y[0], 0.0), problem.t_final, False, problem.t_final, (None, None), sol.sol
            )
        if sol.status == 1:
            t_s, r_s = float(sol.t_events[0][0]), threshold
        else:  # step size underflow: treat as blow-up at the last accepted step
            t_s, r_s = float(sol.t[-1]), float(sol.y[0, -1])
        hi = t_s + _comparison_gap(r_s, mu, G)
        if hi - t_s <= 1e-3 * t_s or threshold > 1e250 or sol.status != 1:
            break
        threshold *= 1e6
    return ControlSolution(
        problem.n,
        sol.t,
        np.maximum(sol.y[0], 0.0),
        0.5 * (t_s + hi) if math.isfinite(hi) else t_s,
        True,
        t_s,
        (t_s, hi),
        sol.sol,
    )


def _linear_inputs(problem: ControlProblem, p):
    if problem.p is None and p is None:
        raise ValueError("linear problem needs an order p")
    p = problem.p if p is None else p
    if not p > problem.n:
        raise ValueError(f"order p={p} must exceed n={problem.n}")
    for name in ("G_hat_p", "K_hat_p", "G_hat_pn", "D_p", "D_p1", "eps_p", "delta_p"):
        if getattr(problem, name) is None:
            raise ValueError(f"linear problem is missing {name}")
    return p, _as_fn(problem.D_p), _as_fn(problem.D_p1), _as_fn(problem.eps_p)


def solve_control_p_linear(problem: ControlProblem, Rn: ControlSolution, p: float | None = None) -> ControlSolution:
    """Integrate the linear order-p problem up to where ``Rn`` is available."""
    p, Dp, Dp1, eps = _linear_inputs(problem, p)
    mu = problem.mu
    Gp, Kp, Gpn = problem.G_hat_p, problem.K_hat_p, problem.G_hat_pn
    t_end = Rn.t_end

    def f(t, y):
        a = Gp * Dp(t) + Kp * Dp1(t) + Gpn * Rn(t)
        return [-mu * y[0] + a * y[0] + eps(t)]

    sol = solve_ivp(
        f, (0.0, t_end), [float(problem.delta_p)], method="DOP853", rtol=problem.rtol, atol=problem.atol, dense_output=True
    )
    if sol.status != 0:
        raise RuntimeError(f"linear control problem failed: {sol.message}")
    out = ControlSolution(p, sol.t, np.maximum(sol.y[0], 0.0), Rn.T_c, Rn.blew_up, t_end, Rn.bracket, sol.sol)
    _, A = linear_quadrature(problem, Rn, sol.t, p)
    out.A_p = A
    return out


def linear_quadrature(problem: ControlProblem, Rn: ControlSolution, times, p=None, n_points: int = 20001):
    """Closed form of the linear problem by quadrature.

    ``R_p(t) = exp(-mu t + A(t)) (delta_p + int_0^t exp(mu s - A(s)) eps_p(s) ds)``
    with ``A(t) = int_0^t (G_p D_p + K_p D_{p+1} + G_pn R_n)``.
    Returns ``(R_p, A)`` at ``times``.
    """
    p, Dp, Dp1, eps = _linear_inputs(problem, p)
    times = np.asarray(times, dtype=float)
    t_max = float(times.max()) if times.size else 0.0
    s = np.linspace(0.0, t_max, n_points)
    a = problem.G_hat_p * Dp(s) + problem.K_hat_p * Dp1(s) + problem.G_hat_pn * Rn.sample(s)
    A = cumulative_simpson(a, x=s, initial=0.0)
    g = np.exp(problem.mu * s - A) * eps(s)
    I = cumulative_simpson(g, x=s, initial=0.0)
    # off-grid times: Hermite interpolation with the exact derivatives a, g
    A_t = CubicHermiteSpline(s, A, a)(times)
    I_t = CubicHermiteSpline(s, I, g)(times)
    with np.errstate(over="ignore", invalid="ignore"):  # R_p is unbounded near a blow-up of R_n
        R = np.exp(-problem.mu * times + A_t) * (problem.delta_p + I_t)
    return R, A_t


# ---------------------------------------------------------------------------
# zero approximate solution


@dataclass(frozen=True)
class ZeroSolutionBounds:
    """Bounds obtained by taking the zero field as approximate solution."""

    n: float
    mu: float
    G_hat_n: float
    norm_n: float
    T_c: float
    norms: dict
    G_hat_pn: dict

    def R_n(self, t):
        t = np.asarray(t, dtype=float)
        if np.any(t < 0) or np.any(t >= self.T_c):
            raise ValueError("t outside [0, T_c)")
        out = self.norm_n * np.exp(-self.mu * t) / (1.0 - self.G_hat_n * self.norm_n * e_mu(self.mu, t))
        return float(out) if out.ndim == 0 else out

    def R_p(self, p, t):
        if p not in self.G_hat_pn:
            raise KeyError(f"no G-hat_(p n) for p={p}")
        t = np.asarray(t, dtype=float)
        if np.any(t < 0) or np.any(t >= self.T_c):
            raise ValueError("t outside [0, T_c)")
        base = 1.0 - self.G_hat_n * self.norm_n * e_mu(self.mu, t)
        out = self.norms[p] * np.exp(-self.mu * t) / base ** (self.G_hat_pn[p] / self.G_hat_n)
        return float(out) if out.ndim == 0 else out

    @property
    def is_global(self) -> bool:
        return math.isinf(self.T_c)


def zero_solution_Tc(norm_n: float, mu: float, G_hat_n: float) -> float:
    if norm_n == 0 or G_hat_n == 0:
        return math.inf
    x = G_hat_n * norm_n
    if mu > 0:
        if x <= mu:
            return math.inf
        return -math.log1p(-mu / x) / mu
    return 1.0 / x


def zero_solution_threshold(norm_n: float, G_hat_n: float) -> float:
    """Smallest ``mu`` giving global existence for the zero approximate solution."""
    return G_hat_n * norm_n


def zero_solution_bounds(u0_norms: dict, n, mu: float, constants) -> ZeroSolutionBounds:
    """``u0_norms`` maps orders to ``|u_0|_p``; must contain ``n``."""
    d = constants.d
    if not n > d / 2 + 1:
        raise ValueError(f"basic order n={n} must exceed d/2 + 1")
    if mu < 0:
        raise ValueError("mu must be nonnegative")
    G = constants.hat("G", n)
    norm_n = float(u0_norms[n])
    Gpn = {}
    for p in u0_norms:
        if p > n:
            try:
                Gpn[p] = constants.hat("G", p, n)
            except LookupError:
                pass
    return ZeroSolutionBounds(n, mu, G, norm_n, zero_solution_Tc(norm_n, mu, G), dict(u0_norms), Gpn)


# ---------------------------------------------------------------------------
# certificates


@dataclass(frozen=True)
class ExistenceCertificate:
    kind: str  # "global" | "finite"
    order_n: float
    mu: float
    G_hat_n: float
    t1: float | None = None
    value: float | None = None
    T_c: float | None = None

    @property
    def envelope(self) -> dict | None:
        if self.kind != "global":
            return None
        return {"coeff": self.value, "rate": self.mu, "denom_coeff": self.G_hat_n * self.value}

    def to_dict(self) -> dict:
        out = {"order_n": self.order_n, "mu": self.mu, "G_hat_n": self.G_hat_n, "kind": self.kind}
        if self.kind == "global":
            out.update(t1=self.t1, value=self.value, envelope=self.envelope)
        else:
            out["T_c"] = self.T_c
        return out

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=1, sort_keys=False)

    @classmethod
    def from_dict(cls, data: dict) -> "ExistenceCertificate":
        return cls(data["kind"], data["order_n"], data["mu"], data["G_hat_n"], data.get("t1"), data.get("value"), data.get("T_c"))


def check_global_certificate(Dn, Rn: ControlSolution, mu: float, G_hat_n: float, t1: float | None = None) -> ExistenceCertificate:
    """Look for a time t1 with ``(D_n + R_n)(t1) <= mu / G_n``.

    Without ``t1`` the sample times of ``Dn`` inside the existence interval
    are scanned and the earliest qualifying one is used.
    """
    finite = ExistenceCertificate("finite", Rn.order, mu, G_hat_n, T_c=Rn.T_c)
    if G_hat_n <= 0:
        raise ValueError("G_hat_n must be positive")
    limit = mu / G_hat_n
    if t1 is not None:
        if t1 < 0 or t1 > Rn.t_end or (Rn.blew_up and t1 >= Rn.t_end):
            raise ValueError(f"t1={t1} outside the existence interval of R_n")
        cand = np.array([float(t1)])
    else:
        ts = np.asarray(Dn.times, dtype=float)
        cand = ts[ts < Rn.t_end] if Rn.blew_up else ts[ts <= Rn.t_end * (1 + 1e-12)]
    if cand.size == 0:
        return finite
    vals = np.asarray(Dn(cand), dtype=float) + Rn.sample(cand)
    ok = np.nonzero(vals <= limit)[0]
    if ok.size == 0:
        return finite
    i = int(ok[0])
    return ExistenceCertificate("global", Rn.order, mu, G_hat_n, float(cand[i]), float(vals[i]))


def decay_envelope(cert: ExistenceCertificate, t):
    """Bound on ``|u(t)|_n`` for ``t >= t1`` carried by a global certificate."""
    if cert.kind != "global":
        raise ValueError("decay envelope needs a global certificate")
    t = np.asarray(t, dtype=float)
    if np.any(t < cert.t1):
        raise ValueError("envelope is only defined for t >= t1")
    s = t - cert.t1
    out = cert.value * np.exp(-cert.mu * s) / (1.0 - cert.G_hat_n * cert.value * e_mu(cert.mu, s))
    return float(out) if out.ndim == 0 else out


__all__ = [
    "BLOWUP_THRESHOLD",
    "ControlProblem",
    "ControlSolution",
    "ExistenceCertificate",
    "ZeroSolutionBounds",
    "check_global_certificate",
    "decay_envelope",
    "e_mu",
    "linear_quadrature",
    "solve_control_n",
    "solve_control_p_linear",
    "zero_solution_Tc",
    "zero_solution_bounds",
    "zero_solution_threshold",
]

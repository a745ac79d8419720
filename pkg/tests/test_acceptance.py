"""Acceptance criteria, one pass/fail line each.

Run with ``pytest tests/test_acceptance.py -s`` or as a script.  Each check
returns ``(ok, detail)``; the test asserts ``ok`` after recording the line.
"""

import functools
import math
import sys
import tempfile
import time
from pathlib import Path

import numpy as np

sys.path.insert(0, str(Path(__file__).resolve().parent))

import pytest  # noqa: E402

from helpers import first_crossing, proxy_traj, random_pair  # noqa: E402
from mhdcert import (  # noqa: E402
    ControlProblem,
    GalerkinProblem,
    ModeSet,
    constants_for_run,
    integrate,
    make_abc,
    make_orszag_tang,
    solve_control_n,
    zero_solution_bounds,
)
from mhdcert.constants import ConstantsPolicy, estimate_constants, round_up  # noqa: E402
from mhdcert.data import abc_norm3, orszag_tang_norm3  # noqa: E402
from mhdcert.control import linear_quadrature, zero_solution_threshold  # noqa: E402
from mhdcert.pipeline import RunConfig, run_pipeline  # noqa: E402
from mhdcert.spectral import (  # noqa: E402
    bilinear_boldP,
    bilinear_P,
    inner_product,
    pair_inner,
    pair_norm,
    sobolev_norm,
)

CONFIGS = Path(__file__).resolve().parents[1] / "configs"
_TMP = tempfile.mkdtemp(prefix="mhdcert-acceptance-")
_ELAPSED = {}


@functools.lru_cache(maxsize=None)
def scenario(mu):
    """Full pipeline run of the shipped ABC config for this mu (timed)."""
    cfg = RunConfig.load(CONFIGS / f"abc_mu{mu}.json").with_overrides(out=f"{_TMP}/mu{mu}")
    t0 = time.perf_counter()
    rep = run_pipeline(cfg)
    _ELAPSED[mu] = time.perf_counter() - t0
    return rep


def _t(c):
    return "never" if c is None else f"{c:.4f}"


def _rel(a, b):
    return abs(a - b) / abs(b)


def crit_1():
    t0 = time.perf_counter()
    n3 = pair_norm(make_abc(1, 1, 1, 1), 3)
    rng = np.random.default_rng(2024)
    worst = 0.0
    for _ in range(20):
        A, B, C, D, beta = rng.uniform(-3, 3, 5)
        worst = max(worst, _rel(pair_norm(make_abc(A, B, C, D), 3), abc_norm3(A, B, C, D)))
        worst = max(worst, _rel(pair_norm(make_orszag_tang(beta), 3), orszag_tang_norm3(beta)))
    dt = time.perf_counter() - t0
    ok = abs(n3 - 41.6695) <= 1e-3 and worst <= 1e-12 and dt < 1
    return ok, f"|u0|_3={n3:.6f} (41.6695), closed-form worst rel {worst:.1e}, {dt:.2f}s"


def crit_2():
    t0 = time.perf_counter()
    G3 = constants_for_run(3).hat("G", 3)
    mu_min = round_up(zero_solution_threshold(pair_norm(make_abc(1, 1, 1, 1), 3), G3))
    coeff = round_up(zero_solution_threshold(abc_norm3(1, 0, 0, 0), G3))
    coeff_ot = round_up(zero_solution_threshold(orszag_tang_norm3(1.0), G3) / math.sqrt(136))
    dt = time.perf_counter() - t0
    ok = abs(mu_min - 25.9) <= 0.05 and abs(coeff - 9.77) <= 0.01 and abs(coeff_ot - 9.77) <= 0.01 and dt < 1
    return ok, f"mu >= {mu_min} (25.9), coefficient {coeff} / {coeff_ot} (9.77), {dt:.3f}s"


def crit_3():
    want = {5: (0.3238, 0.01), 3: (0.1853, 0.01), 0: (0.1211, 0.005)}
    ok, parts = True, []
    for mu, (ref, tol) in want.items():
        rep = scenario(mu)
        Tc = rep.Rn.T_c
        good = rep.Rn.blew_up and abs(Tc - ref) <= tol and _ELAPSED[mu] < 60
        ok &= good
        parts.append(f"mu={mu}: Tc={Tc:.4f} ({ref}) {_ELAPSED[mu]:.1f}s")
    return ok, "; ".join(parts)


def crit_4():
    ok, parts = True, []
    for mu in (20, 10, 6):
        kind = scenario(mu).certificate.kind
        ok &= kind == "global"
        parts.append(f"mu={mu} {kind}")
    G3 = constants_for_run(3).hat("G", 3)
    for mu, t1, ref in ((20, 0.25, 0.186), (6, 1.0, 1.09)):
        rep = scenario(mu)
        v = float(rep.estimators.D[3](t1) + rep.Rn(t1))
        refG = {0.186: 0.115, 1.09: 0.68}[ref]
        ok &= _rel(v, ref) <= 0.05 and _rel(G3 * v, refG) <= 0.05
        parts.append(f"mu={mu} (D+R)({t1:g})={v:.4f} ({ref}), G*={G3 * v:.4f} ({refG})")
    t1 = scenario(6).certificate.t1
    ok &= t1 is not None and 0.25 <= t1 <= 0.40
    parts.append(f"mu=6 earliest t1={t1} (0.32)")
    return ok, "; ".join(parts)


def _ratio_crossing(rep, order, factor, t_end, p=None):
    """First t with R >= D / factor, scanning a fine grid on [0, t_end)."""
    R = rep.Rn if p is None else rep.Rp[p]
    D = rep.estimators.D[order]
    hi = min(t_end, R.t_end) * (1 - 1e-9)
    return first_crossing(R.sample, lambda t: D(t) / factor, 0.0, hi)


def crit_5():
    parts, ok = [], True
    r20 = scenario(20)
    c = _ratio_crossing(r20, 3, 100, 0.5)
    ok &= c is None
    parts.append(f"mu=20 R3<D3/100 on [0,0.5): {c is None}")
    c = _ratio_crossing(r20, 5, 1, 0.5, p=5)
    ok &= c is None
    parts.append(f"R5<D5: {c is None}")
    c = _ratio_crossing(r20, 5, 10, 0.5, p=5)
    ok &= c is not None and abs(c - 0.047) <= 0.005
    parts.append(f"R5<D5/10 until {_t(c)} (0.047)")
    for mu, ref, tol in ((6, 0.11, 0.01), (5, 0.1, None), (0, 0.067, 0.005)):
        c = _ratio_crossing(scenario(mu), 3, 10, 2.0)
        if tol is None:
            good = c is not None and c >= ref
        else:
            good = c is not None and abs(c - ref) <= tol
        ok &= good
        parts.append(f"mu={mu} R3<D3/10 until {_t(c)} ({ref})")
    return ok, "; ".join(parts)


def crit_6():
    G = ModeSet.cube(2)
    drift = 0.0
    for u0 in (make_abc(1, 1, 1, 1), make_orszag_tang(0.8)):
        tr = integrate(GalerkinProblem(G, 0.0, 0.0, u0, 2.0))
        e = np.array([pair_norm(tr.state_at(t), 0) for t in np.linspace(0, 2, 201)])
        drift = max(drift, np.ptp(e) / e[0])
    rng = np.random.default_rng(7)
    excess = -np.inf
    for _ in range(6):
        mu = rng.uniform(0.1, 5)
        nu, eta = mu + rng.uniform(0, 1) * rng.integers(0, 2), mu
        if rng.integers(0, 2):
            nu, eta = eta, nu
        u0 = random_pair(rng, radius=2, n_modes=20)
        tr = integrate(GalerkinProblem(G, nu, eta, u0, 1.0))
        ts = np.linspace(0, 1, 101)
        e0 = pair_norm(tr.state_at(0.0), 0)
        for t in ts:
            excess = max(excess, pair_norm(tr.state_at(t), 0) / (e0 * math.exp(-min(nu, eta) * t)) - 1)
    ok = drift <= 1e-8 and excess <= 1e-9
    return ok, f"inviscid drift {drift:.1e}; max (|u(t)|_0 / e^-mu t |u0|_0) - 1 = {excess:.1e}"


def crit_7():
    rng = np.random.default_rng(11)
    out = ModeSet.cube(3)
    orth = dec = par = 0.0
    for _ in range(10):
        V, W = random_pair(rng, radius=2, n_modes=15), random_pair(rng, radius=2, n_modes=15)
        PVW = bilinear_boldP(V, W, out)
        orth = max(orth, abs(pair_inner(PVW, W, 0)) / (pair_norm(PVW, 0) * pair_norm(W, 0)))
        p = float(rng.choice([0, 1, 2.5, 3]))
        v, b, w, c = V.u, V.b, W.u, W.b
        rhs = (
            inner_product(bilinear_P(v, w, out), w, p)
            + inner_product(bilinear_P(v, c, out), c, p)
            - 0.5 * inner_product(bilinear_P(b, w + c, out), w + c, p)
            + 0.5 * inner_product(bilinear_P(b, w - c, out), w - c, p)
        )
        dec = max(dec, abs(pair_inner(PVW, W, p) - rhs) / (pair_norm(PVW, p) * pair_norm(W, p)))
        lhs = sobolev_norm(w + c, p) ** 2 + sobolev_norm(w - c, p) ** 2
        par = max(par, _rel(lhs, 2 * sobolev_norm(w, p) ** 2 + 2 * sobolev_norm(c, p) ** 2))
    v = make_abc(1.3, -0.7, 2.1, 0).u
    beltrami = sobolev_norm(bilinear_P(v, v, out), 0) / sobolev_norm(v, 0) ** 2

    C = constants_for_run(3, [5])
    ric = 0.0
    for norm, mu in ((41.6695, 0.0), (41.6695, 5.0), (20.0, 10.0)):
        sol = solve_control_n(ControlProblem(3, mu, C.hat("G", 3), C.hat("K", 3), 0, 0, 0, norm, 2.0))
        z = zero_solution_bounds({3: norm}, 3, mu, C)
        ts = np.linspace(0, 2, 401)
        ts = ts[ts < sol.t_end]
        ric = max(ric, float(np.max(np.abs(sol.sample(ts) - z.R_n(ts)) / z.R_n(ts))))
    rep = scenario(20)
    lin = ControlProblem.from_estimators(rep.estimators, rep.constants, 3, 20.0, 0.5, p=5)
    Rp = rep.Rp[5]
    q, _ = linear_quadrature(lin, rep.Rn, Rp.times)
    mask = Rp.values > 0
    quad = float(np.max(np.abs(q[mask] - Rp.values[mask]) / Rp.values[mask]))

    ok = orth <= 1e-10 and dec <= 1e-9 and par <= 1e-12 and beltrami <= 1e-12 and ric <= 1e-8 and quad <= 1e-6
    return ok, (
        f"orthogonality {orth:.1e}, decomposition {dec:.1e}, parallelogram {par:.1e}, "
        f"Beltrami {beltrami:.1e}, Riccati {ric:.1e}, linear vs quadrature {quad:.1e}"
    )


def crit_8():
    t0 = time.perf_counter()
    tab = constants_for_run(3, [5])
    exact = {
        (3, 3, "K"): 0.320, (3, 3, "G"): 0.438, (5, 5, "K"): 0.657, (5, 5, "G"): 0.749, (5, 3, "G"): 1.26,
        (3, 3, "K_hat"): 0.453, (3, 3, "G_hat"): 0.620, (5, 5, "K_hat"): 0.930, (5, 5, "G_hat"): 1.06,
        (5, 3, "G_hat"): 1.79,
    }
    tab_ok = all(tab.entries.get(k) == v for k, v in exact.items())
    K30 = estimate_constants(3, 3, 3, ConstantsPolicy("computed", 30)).get(3, 3, "K")
    K40 = estimate_constants(3, 3, 3, ConstantsPolicy("computed", 40)).get(3, 3, "K")
    dt = time.perf_counter() - t0
    ok = tab_ok and 0 < K40 <= 0.320 and 0 < K30 <= 0.320 and _rel(K30, K40) <= 0.01 and dt < 300
    return ok, f"tabulated exact: {tab_ok}; K3(R=30)={K30:.6f}, K3(R=40)={K40:.6f}, {dt:.1f}s"


def crit_9():
    t0 = time.perf_counter()
    ok, parts = True, []
    for mu in (20, 6):
        rep = scenario(mu)
        big = proxy_traj(mu, rep.config.t_final)
        worst = 0.0
        for t in rep.estimators.times:
            if rep.Rn.blew_up and t >= rep.Rn.t_end:
                break
            diff = pair_norm(big.state_at(float(t)) - rep.trajectory.state_at(float(t)), 3)
            R = rep.Rn(float(t))
            if diff > R:
                ok = False
            if R > 0:
                worst = max(worst, diff / R)
        parts.append(f"mu={mu}: max |u_G' - u_G|_3 / R_3 = {worst:.3f}")
    dt = time.perf_counter() - t0
    ok &= dt < 600
    return ok, "; ".join(parts) + f", {dt:.1f}s"


CRITERIA = [
    (1, "ABC datum norm and closed forms", crit_1),
    (2, "zero-solution thresholds", crit_2),
    (3, "blow-up times", crit_3),
    (4, "global certificates", crit_4),
    (5, "comparative bounds", crit_5),
    (6, "energy laws", crit_6),
    (7, "structural properties", crit_7),
    (8, "inequality constants", crit_8),
    (9, "proxy comparison soundness", crit_9),
]


def _line(num, title, fn):
    ok, detail = fn()
    return ok, f"[{'PASS' if ok else 'FAIL'}] {num}. {title}: {detail}"


@pytest.mark.parametrize("num, title, fn", CRITERIA, ids=[f"criterion_{c[0]}" for c in CRITERIA])
def test_criterion(num, title, fn, acceptance_line):
    ok, line = _line(num, title, fn)
    acceptance_line(line)
    assert ok, line


if __name__ == "__main__":
    failed = 0
    for crit in CRITERIA:
        ok, line = _line(*crit)
        print(line, flush=True)
        failed += not ok
    sys.exit(1 if failed else 0)

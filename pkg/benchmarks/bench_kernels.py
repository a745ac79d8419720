"""Numba vs numpy timings for the hot kernels.

    python3 benchmarks/bench_kernels.py [--repeat 20]

Both implementations are imported side by side, so the env switch is not
needed here.  Results are also checked for agreement.
"""

import argparse
import time

import numpy as np

from mhdcert import kernels
from mhdcert.constants import _ball
from mhdcert.spectral import ModeSet, build_triads, modeset_dG


def _state(G, rng):
    n, d = G.n_pairs, G.dim
    u = rng.standard_normal((n, d)) + 1j * rng.standard_normal((n, d))
    b = rng.standard_normal((n, d)) + 1j * rng.standard_normal((n, d))
    return np.vstack([u, np.conj(u)]), np.vstack([b, np.conj(b)])


def _time(fn, repeat):
    fn()  # warm up (jit compile)
    best = np.inf
    for _ in range(repeat):
        t = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t)
    return best


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--repeat", type=int, default=20)
    args = ap.parse_args()
    if kernels.pair_convolve_nb is None:
        raise SystemExit("numba is not available (or disabled); nothing to compare")
    rng = np.random.default_rng(0)

    cases = []
    for radius in (2, 3):
        G = ModeSet.cube(radius)
        uf, bf = _state(G, rng)
        tri = build_triads(G.reps, G.full, G.full)
        cases.append((f"Galerkin rhs, cube({radius})", tri, uf, bf))
    G = ModeSet.cube(2)
    uf, bf = _state(G, rng)
    cases.append(("residual on dG, cube(2)", build_triads(modeset_dG(G).reps, G.full, G.full), uf, bf))

    print(f"{'kernel':34s} {'triads':>8s} {'numpy ms':>10s} {'numba ms':>10s} {'speedup':>8s} {'max diff':>9s}")
    for name, tri, uf, bf in cases:
        a = (tri.kvec, tri.out_idx, tri.h_idx, tri.q_idx, tri.qvec, uf, bf)
        t_np = _time(lambda: kernels.pair_convolve_np(*a), args.repeat)
        t_nb = _time(lambda: kernels.pair_convolve_nb(*a), args.repeat)
        r1, r2 = kernels.pair_convolve_np(*a), kernels.pair_convolve_nb(*a)
        diff = max(np.max(np.abs(r1[0] - r2[0])), np.max(np.abs(r1[1] - r2[1])))
        print(f"{name:34s} {len(tri.out_idx):8d} {1e3 * t_np:10.3f} {1e3 * t_nb:10.3f} {t_np / t_nb:8.1f} {diff:9.1e}")

    for R in (20, 40):
        hs = _ball(3, float(R))
        k = np.array([1.0, 1.0, 2.0])
        for kind, label in ((kernels.KIND_K, "K"), (kernels.KIND_G, "G")):
            f_np = lambda: kernels.lattice_sum_np(k, hs, 3.0, 3.0, kind, R - 1.0)
            f_nb = lambda: kernels.lattice_sum_nb(k, hs, 3.0, 3.0, kind, R - 1.0)
            t_np = _time(f_np, max(1, args.repeat // 4))
            t_nb = _time(f_nb, max(1, args.repeat // 4))
            diff = abs(f_np()[0] - f_nb()[0]) / f_np()[0]
            print(f"{'lattice ' + label + f'_33, R={R}':34s} {len(hs):8d} {1e3 * t_np:10.3f} {1e3 * t_nb:10.3f} {t_np / t_nb:8.1f} {diff:9.1e}")


if __name__ == "__main__":
    main()

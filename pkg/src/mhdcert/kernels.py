"""Hot loops: triad convolutions and lattice sums.

Every kernel has two implementations, a loop version compiled with numba and
a vectorised numpy version.  The public names dispatch to the numba version
unless ``MHDCERT_DISABLE_NUMBA`` is set (see :mod:`mhdcert._accel`).

Triad tables describe a convolution ``sum_h [v_h . (k-h)] w_{k-h}``: entry
``t`` says that the output ``out_idx[t]`` receives the product of input
``h_idx[t]`` of ``v`` and input ``q_idx[t]`` of ``w``, with ``qvec[t] = k-h``.
Tables are sorted by ``out_idx`` so the per-output summation order is fixed.
"""

import math

import numpy as np

from ._accel import BACKEND, HAVE_NUMBA, jit

KIND_K = 0
KIND_G = 1


def _project_np(kvec, s):
    kk = np.einsum("od,od->o", kvec, kvec)
    ks = np.einsum("od,od->o", kvec, s)
    return s - (ks / kk)[:, None] * kvec


def _segment_sum(out_idx, terms, n_out):
    d = terms.shape[1]
    s = np.empty((n_out, d), dtype=np.complex128)
    for r in range(d):
        re = np.bincount(out_idx, weights=terms[:, r].real, minlength=n_out)
        im = np.bincount(out_idx, weights=terms[:, r].imag, minlength=n_out)
        s[:, r] = re + 1j * im
    return s


def convolve_np(kvec, out_idx, h_idx, q_idx, qvec, v, w):
    """Leray-projected advection ``P_k(v, w)`` for every output wavenumber."""
    n_out, d = kvec.shape
    if len(out_idx) == 0:
        return np.zeros((n_out, d), dtype=np.complex128)
    vq = np.einsum("td,td->t", v[h_idx], qvec)
    s = _segment_sum(out_idx, vq[:, None] * w[q_idx], n_out)
    return (-1j * (2.0 * np.pi) ** (-d / 2.0)) * _project_np(kvec, s)


def pair_convolve_np(kvec, out_idx, h_idx, q_idx, qvec, u, b):
    """Both components of the MHD bilinear map evaluated on ``(u, b)`` twice."""
    n_out, d = kvec.shape
    if len(out_idx) == 0:
        z = np.zeros((n_out, d), dtype=np.complex128)
        return z, z.copy()
    uq = np.einsum("td,td->t", u[h_idx], qvec)[:, None]
    bq = np.einsum("td,td->t", b[h_idx], qvec)[:, None]
    uqi = u[q_idx]
    bqi = b[q_idx]
    s1 = _segment_sum(out_idx, uq * uqi - bq * bqi, n_out)
    s2 = _segment_sum(out_idx, uq * bqi - bq * uqi, n_out)
    pref = -1j * (2.0 * np.pi) ** (-d / 2.0)
    return pref * _project_np(kvec, s1), pref * _project_np(kvec, s2)


def _convolve_loop(kvec, out_idx, h_idx, q_idx, qvec, v, w):
    n_out, d = kvec.shape
    s = np.zeros((n_out, d), dtype=np.complex128)
    for t in range(out_idx.shape[0]):
        o = out_idx[t]
        h = h_idx[t]
        q = q_idx[t]
        vq = 0j
        for r in range(d):
            vq += v[h, r] * qvec[t, r]
        for r in range(d):
            s[o, r] += vq * w[q, r]
    pref = -1j * (2.0 * np.pi) ** (-d / 2.0)
    for o in range(n_out):
        kk = 0.0
        ks = 0j
        for r in range(d):
            kk += kvec[o, r] * kvec[o, r]
            ks += kvec[o, r] * s[o, r]
        for r in range(d):
            s[o, r] = pref * (s[o, r] - ks / kk * kvec[o, r])
    return s


def _pair_convolve_loop(kvec, out_idx, h_idx, q_idx, qvec, u, b):
    n_out, d = kvec.shape
    s1 = np.zeros((n_out, d), dtype=np.complex128)
    s2 = np.zeros((n_out, d), dtype=np.complex128)
    for t in range(out_idx.shape[0]):
        o = out_idx[t]
        h = h_idx[t]
        q = q_idx[t]
        uq = 0j
        bq = 0j
        for r in range(d):
            uq += u[h, r] * qvec[t, r]
            bq += b[h, r] * qvec[t, r]
        for r in range(d):
            s1[o, r] += uq * u[q, r] - bq * b[q, r]
            s2[o, r] += uq * b[q, r] - bq * u[q, r]
    pref = -1j * (2.0 * np.pi) ** (-d / 2.0)
    for o in range(n_out):
        kk = 0.0
        k1 = 0j
        k2 = 0j
        for r in range(d):
            kk += kvec[o, r] * kvec[o, r]
            k1 += kvec[o, r] * s1[o, r]
            k2 += kvec[o, r] * s2[o, r]
        for r in range(d):
            s1[o, r] = pref * (s1[o, r] - k1 / kk * kvec[o, r])
            s2[o, r] = pref * (s2[o, r] - k2 / kk * kvec[o, r])
    return s1, s2


def lattice_sum_np(kvec, hs, p, n, kind, shell_from):
    """Truncated lattice sum of the K (``kind=0``) or G (``kind=1``) summand.

    ``hs`` holds the summation points (zero excluded), sorted by norm.
    Returns ``(total, shell)`` where ``shell`` collects the points with
    ``|h| > shell_from``.
    """
    d = hs.shape[1]
    l = kvec[None, :] - hs
    hh = np.einsum("md,md->m", hs, hs)
    ll = np.einsum("md,md->m", l, l)
    keep = ll > 0.25
    hs, l, hh, ll = hs[keep], l[keep], hh[keep], ll[keep]
    hn = np.sqrt(hh)
    ln = np.sqrt(ll)
    kn = math.sqrt(float(kvec @ kvec))
    hl = np.einsum("md,md->m", hs, l)
    # exact for integer points, so collinear pairs give exactly zero
    q2 = np.maximum(0.0, hh * ll - hl * hl) / (hh * ll)
    if d == 2:
        cos_kl = (l @ kvec) / (kn * ln)
        q2 = q2 * cos_kl * cos_kl
    if kind == KIND_K:
        den = hn**p * ln**n + hn**n * ln**p
        terms = 4.0 * kn ** (2 * p) * q2 / (den * den)
    else:
        den = hn**p * ln ** (n - 1) + hn**n * ln ** (p - 1)
        num = kn**p - ln**p
        terms = 4.0 * num * num * q2 / (den * den)
    return float(np.sum(terms)), float(np.sum(terms[hn > shell_from]))


def _lattice_sum_loop(kvec, hs, p, n, kind, shell_from):
    m, d = hs.shape
    kn = 0.0
    for r in range(d):
        kn += kvec[r] * kvec[r]
    kn = math.sqrt(kn)
    total = 0.0
    shell = 0.0
    for i in range(m):
        hh = 0.0
        ll = 0.0
        hl = 0.0
        kl = 0.0
        for r in range(d):
            lr = kvec[r] - hs[i, r]
            hh += hs[i, r] * hs[i, r]
            ll += lr * lr
            hl += hs[i, r] * lr
            kl += kvec[r] * lr
        if ll < 0.25:
            continue
        hn = math.sqrt(hh)
        ln = math.sqrt(ll)
        q2 = (hh * ll - hl * hl) / (hh * ll)
        if q2 < 0.0:
            q2 = 0.0
        if d == 2:
            ckl = kl / (kn * ln)
            q2 = q2 * ckl * ckl
        if kind == 0:
            den = hn**p * ln**n + hn**n * ln**p
            term = 4.0 * kn ** (2 * p) * q2 / (den * den)
        else:
            den = hn**p * ln ** (n - 1) + hn**n * ln ** (p - 1)
            num = kn**p - ln**p
            term = 4.0 * num * num * q2 / (den * den)
        total += term
        if hn > shell_from:
            shell += term
    return total, shell


if HAVE_NUMBA:
    convolve_nb = jit(_convolve_loop)
    pair_convolve_nb = jit(_pair_convolve_loop)
    lattice_sum_nb = jit(_lattice_sum_loop)
    convolve = convolve_nb
    pair_convolve = pair_convolve_nb
    lattice_sum = lattice_sum_nb
else:
    convolve_nb = pair_convolve_nb = lattice_sum_nb = None
    convolve = convolve_np
    pair_convolve = pair_convolve_np
    lattice_sum = lattice_sum_np

__all__ = [
    "BACKEND",
    "KIND_G",
    "KIND_K",
    "convolve",
    "convolve_np",
    "convolve_nb",
    "pair_convolve",
    "pair_convolve_np",
    "pair_convolve_nb",
    "lattice_sum",
    "lattice_sum_np",
    "lattice_sum_nb",
]

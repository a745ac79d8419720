"""Inequality constants K_pn, G_pn and their hatted (sqrt 2) variants.

Two sources are available.  ``tabulated`` returns the published certified
values for d = 3.  ``computed`` evaluates the defining lattice sums

    K_pn(k) = 4 |k|^2p  sum_h Q^2 / (|h|^p |k-h|^n + |h|^n |k-h|^p)^2
    G_pn(k) = 4 sum_h (|k|^p - |k-h|^p)^2 Q^2
                    / (|h|^p |k-h|^(n-1) + |h|^n |k-h|^(p-1))^2

over ``0 < |h| <= R``, ``h != k``, takes the largest value over a finite
scan of ``k`` and returns ``(2 pi)^(-d/2) sqrt(max)``.  Truncation only
drops nonnegative terms, so computed values are lower estimates of the
true constants and carry no certificate.
"""

from __future__ import annotations

import functools
import itertools
import math
from dataclasses import dataclass, field

import numpy as np

from . import kernels

KINDS = ("K", "G", "K_hat", "G_hat")

# d = 3 published values; the hatted ones are sqrt(2) times the plain ones
# rounded up in the third significant digit.
_TABLE = {
    3: {
        (3, 3, "K"): 0.320,
        (3, 3, "G"): 0.438,
        (5, 5, "K"): 0.657,
        (5, 5, "G"): 0.749,
        (5, 3, "G"): 1.26,
        (3, 3, "K_hat"): 0.453,
        (3, 3, "G_hat"): 0.620,
        (5, 5, "K_hat"): 0.930,
        (5, 5, "G_hat"): 1.06,
        (5, 3, "G_hat"): 1.79,
    }
}


class ConstantsError(LookupError):
    pass


def round_up(x: float, digits: int = 3) -> float:
    """Round ``x > 0`` up to ``digits`` significant figures."""
    if x == 0 or not math.isfinite(x):
        return x
    e = math.floor(math.log10(abs(x))) - digits + 1
    scale = 10.0**e
    # the tiny slack keeps exact decimals (0.620 -> 0.620) from bumping up
    return round(math.ceil(x / scale - 1e-9) * scale, max(0, -e))


def q_factor(h, l) -> float:
    """Angular factor of the lattice sums for the pair ``(h, l)``."""
    h = np.asarray(h, dtype=float)
    l = np.asarray(l, dtype=float)
    if h.shape != l.shape:
        raise ValueError("h and l must have the same dimension")
    hn = math.sqrt(h @ h)
    ln = math.sqrt(l @ l)
    if hn == 0 or ln == 0:
        raise ValueError("q_factor is undefined for zero vectors")
    c = float(h @ l) / (hn * ln)
    s = math.sqrt(max(0.0, 1.0 - c * c))
    if len(h) != 2:
        return s
    m = h + l
    mn = math.sqrt(m @ m)
    if mn == 0:
        return 0.0
    return s * abs(float(m @ l)) / (mn * ln)


@functools.lru_cache(maxsize=8)
def _ball(dim: int, R: float) -> np.ndarray:
    r = int(math.floor(R))
    ax = np.arange(-r, r + 1, dtype=float)
    pts = np.stack(np.meshgrid(*([ax] * dim), indexing="ij"), axis=-1).reshape(-1, dim)
    n2 = np.einsum("md,md->m", pts, pts)
    keep = (n2 > 0) & (n2 <= R * R + 1e-9)
    pts, n2 = pts[keep], n2[keep]
    order = np.lexsort(pts.T[::-1])
    order = order[np.argsort(n2[order], kind="stable")]
    out = np.ascontiguousarray(pts[order])
    out.setflags(write=False)
    return out


@dataclass(frozen=True)
class LatticeSum:
    value: float
    tail: float  # last-shell share of the total, a convergence hint only


def _lattice(kind: int, k, p: float, n: float, R: float, points=None) -> LatticeSum:
    k = np.asarray(k, dtype=float)
    d = len(k)
    kn = math.sqrt(k @ k)
    if kn == 0:
        raise ValueError("k must be nonzero")
    floor = d / 2 + (1 if kind == kernels.KIND_G else 0)
    if not (p >= n > floor):
        need = "p >= n > d/2 + 1" if kind == kernels.KIND_G else "p >= n > d/2"
        raise ValueError(f"invalid orders p={p}, n={n} for d={d}: need {need}")
    if R < 2 * kn:
        raise ValueError(f"truncation radius R={R} must be at least 2|k|={2 * kn:g}")
    hs = _ball(d, float(R)) if points is None else np.ascontiguousarray(points, dtype=float)
    total, shell = kernels.lattice_sum(k, hs, float(p), float(n), kind, float(R) - 1.0)
    return LatticeSum(float(total), float(shell / total) if total > 0 else 0.0)


def lattice_K(k, p: float, n: float, R: float, points=None) -> LatticeSum:
    """Truncated K lattice sum at ``k``; ``points`` overrides the ball of radius R."""
    return _lattice(kernels.KIND_K, k, p, n, R, points)


def lattice_G(k, p: float, n: float, R: float, points=None) -> LatticeSum:
    """Truncated G lattice sum at ``k``; ``points`` overrides the ball of radius R."""
    return _lattice(kernels.KIND_G, k, p, n, R, points)


def scan_modes(dim: int, radius: float) -> list[tuple[int, ...]]:
    """One ``k`` per orbit of coordinate permutations and sign flips, ``0 < |k| <= radius``."""
    r = int(math.floor(radius))
    out = []
    for k in itertools.combinations_with_replacement(range(r + 1), dim):
        n2 = sum(x * x for x in k)
        if 0 < n2 <= radius * radius + 1e-9:
            out.append(k)
    out.sort(key=lambda k: (sum(x * x for x in k), k))
    return out


@dataclass(frozen=True)
class ConstantsPolicy:
    kind: str = "tabulated"  # or "computed"
    R: float = 40.0
    k_scan_radius: float = 6.0

    def __post_init__(self):
        if self.kind not in ("tabulated", "computed"):
            raise ValueError(f"unknown constants policy {self.kind!r}")

    @classmethod
    def parse(cls, spec) -> "ConstantsPolicy":
        """Accept a policy, a dict, ``"tabulated"`` or ``"computed[:R[:k]]"``."""
        if isinstance(spec, cls):
            return spec
        if isinstance(spec, dict):
            return cls(**spec)
        parts = str(spec).split(":")
        args = [float(x) for x in parts[1:]]
        return cls(parts[0], *args)

    def to_dict(self) -> dict:
        if self.kind == "tabulated":
            return {"kind": "tabulated"}
        return {"kind": self.kind, "R": self.R, "k_scan_radius": self.k_scan_radius}


@dataclass
class ConstantsBundle:
    d: int
    entries: dict = field(default_factory=dict)  # (p, n, kind) -> value
    source: str = "tabulated"
    R: float | None = None
    k_scan_radius: float | None = None
    k_argmax: dict = field(default_factory=dict)  # (p, n, kind) -> k
    tail: dict = field(default_factory=dict)

    def get(self, p, n, kind) -> float:
        key = (_num(p), _num(n), kind)
        if key not in self.entries:
            have = ", ".join(f"{k}({a},{b})" for a, b, k in sorted(self.entries, key=str)) or "none"
            raise ConstantsError(f"constant {kind}_{{{p},{n}}} not available (have: {have})")
        return self.entries[key]

    def hat(self, kind: str, p, n=None) -> float:
        """``hat("G", 3)`` is G-hat_{33}; ``hat("G", 5, 3)`` is G-hat_{53}."""
        return self.get(p, p if n is None else n, kind + "_hat")

    def merged(self, other: "ConstantsBundle") -> "ConstantsBundle":
        if other.d != self.d:
            raise ValueError("cannot merge constants for different dimensions")
        return ConstantsBundle(
            self.d,
            {**self.entries, **other.entries},
            self.source,
            self.R,
            self.k_scan_radius,
            {**self.k_argmax, **other.k_argmax},
            {**self.tail, **other.tail},
        )


def _num(x):
    x = float(x)
    return int(x) if x.is_integer() else x


def tabulated_entries(d: int) -> dict:
    return dict(_TABLE.get(d, {}))


def estimate_constants(p, n, d: int = 3, policy="tabulated") -> ConstantsBundle:
    """Constants of orders ``(p, n)`` in dimension ``d``.

    The bundle holds whichever of K, G (and hats) exist for the pair; a pair
    with nothing available raises :class:`ConstantsError`.
    """
    policy = ConstantsPolicy.parse(policy)
    p, n = _num(p), _num(n)
    if policy.kind == "tabulated":
        table = _TABLE.get(d, {})
        entries = {key: v for key, v in table.items() if key[:2] == (p, n)}
        if not entries:
            avail = sorted({(dd, a, b) for dd, t in _TABLE.items() for a, b, _ in t})
            names = ", ".join(f"(d={dd}, p={a}, n={b})" for dd, a, b in avail)
            raise ConstantsError(f"no tabulated constants for d={d}, p={p}, n={n}; available: {names}")
        return ConstantsBundle(d, entries, "tabulated")

    bundle = ConstantsBundle(d, {}, "computed", policy.R, policy.k_scan_radius)
    ks = scan_modes(d, policy.k_scan_radius)
    if not ks:
        raise ValueError("k_scan_radius must be at least 1")
    scale = (2 * math.pi) ** (-d / 2)
    for kind, fn, floor in (("K", lattice_K, d / 2), ("G", lattice_G, d / 2 + 1)):
        if not (p >= n > floor):
            continue
        best, arg, tail = -1.0, None, 0.0
        for k in ks:
            s = fn(k, p, n, policy.R)
            if s.value > best:
                best, arg, tail = s.value, k, s.tail
        val = scale * math.sqrt(best)
        bundle.entries[(p, n, kind)] = val
        bundle.entries[(p, n, kind + "_hat")] = math.sqrt(2.0) * val
        bundle.k_argmax[(p, n, kind)] = list(arg)
        bundle.tail[(p, n, kind)] = tail
    if not bundle.entries:
        raise ValueError(f"orders p={p}, n={n} admit no constants in d={d} (need p >= n > d/2)")
    return bundle


def constants_for_run(n, p_list=(), d: int = 3, policy="tabulated") -> ConstantsBundle:
    """Everything the control problems need: (n,n), and (p,p), (p,n) for each p."""
    bundle = estimate_constants(n, n, d, policy)
    for p in p_list:
        bundle = bundle.merged(estimate_constants(p, p, d, policy))
        bundle = bundle.merged(estimate_constants(p, n, d, policy))
    return bundle


def constants_table(bundle: ConstantsBundle, p, n) -> dict:
    """JSON-ready row ``{d, p, n, K, G, K_hat, G_hat, source, R, k_argmax}``."""
    p, n = _num(p), _num(n)
    row = {"d": bundle.d, "p": p, "n": n}
    for kind in KINDS:
        row[kind] = bundle.entries.get((p, n, kind))
    row["source"] = bundle.source
    row["R"] = bundle.R
    row["k_argmax"] = {kind: bundle.k_argmax.get((p, n, kind)) for kind in ("K", "G")} if bundle.k_argmax else None
    if bundle.tail:
        row["tail"] = {kind: bundle.tail.get((p, n, kind)) for kind in ("K", "G")}
    return row


__all__ = [
    "ConstantsBundle",
    "ConstantsError",
    "ConstantsPolicy",
    "LatticeSum",
    "constants_for_run",
    "constants_table",
    "estimate_constants",
    "lattice_G",
    "lattice_K",
    "q_factor",
    "round_up",
    "scan_modes",
    "tabulated_entries",
]

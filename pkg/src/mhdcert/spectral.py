"""Divergence-free, mean-zero vector fields on the torus in Fourier form.

Conventions: the torus has period 2*pi in every direction and a field is
``v(x) = sum_k v_k e_k(x)`` with ``e_k(x) = (2*pi)**(-d/2) exp(i k.x)``.  Real
fields satisfy ``v_{-k} = conj(v_k)``, so only one wavenumber of each
``+-k`` pair is stored: the one whose first nonzero coordinate is positive.
"""

from __future__ import annotations

import json
import math
import warnings
from dataclasses import dataclass
from typing import Iterable

import numpy as np

from . import kernels

DIV_TOL = 1e-12


class DivergenceWarning(UserWarning):
    """Input coefficients were not solenoidal and have been Leray-projected."""


# ---------------------------------------------------------------------------
# wavenumber bookkeeping


def canonical(k) -> tuple[tuple[int, ...], int]:
    """Return the stored representative of ``+-k`` and the sign relating them."""
    k = tuple(int(x) for x in k)
    for x in k:
        if x > 0:
            return k, 1
        if x < 0:
            return tuple(-y for y in k), -1
    raise ValueError("zero wavenumber has no representative (fields are mean-zero)")


def _is_canonical(modes: np.ndarray) -> np.ndarray:
    out = np.zeros(len(modes), dtype=bool)
    decided = np.zeros(len(modes), dtype=bool)
    for r in range(modes.shape[1]):
        col = modes[:, r]
        out |= ~decided & (col > 0)
        decided |= col != 0
    return out


def _lexsort(modes: np.ndarray) -> np.ndarray:
    if len(modes) == 0:
        return np.zeros(0, dtype=np.int64)
    return np.lexsort(modes.T[::-1])


class _KeyIndex:
    """Vectorised lookup of integer wavenumbers in a fixed array."""

    def __init__(self, modes: np.ndarray, radius: int):
        self.radius = int(radius)
        self.base = 2 * self.radius + 1
        keys = self.encode(modes)
        self.order = np.argsort(keys, kind="stable")
        self.sorted_keys = keys[self.order]

    def encode(self, modes: np.ndarray) -> np.ndarray:
        keys = np.zeros(len(modes), dtype=np.int64)
        for r in range(modes.shape[1] - 1, -1, -1):
            keys = keys * self.base + (modes[:, r].astype(np.int64) + self.radius)
        return keys

    def find(self, modes: np.ndarray) -> np.ndarray:
        """Index of each row of ``modes`` or -1 when absent."""
        if len(self.sorted_keys) == 0 or len(modes) == 0:
            return np.full(len(modes), -1, dtype=np.int64)
        inside = np.all(np.abs(modes) <= self.radius, axis=1)
        keys = self.encode(np.where(inside[:, None], modes, 0))
        pos = np.searchsorted(self.sorted_keys, keys)
        pos = np.minimum(pos, len(self.sorted_keys) - 1)
        hit = inside & (self.sorted_keys[pos] == keys)
        return np.where(hit, self.order[pos], -1)


def _max_abs(*arrays: np.ndarray) -> int:
    m = 0
    for a in arrays:
        if a.size:
            m = max(m, int(np.abs(a).max()))
    return m


@dataclass(frozen=True)
class Triads:
    """Precomputed summation pattern of a convolution over finite supports."""

    kvec: np.ndarray  # (n_out, d) float
    out_idx: np.ndarray
    h_idx: np.ndarray
    q_idx: np.ndarray
    qvec: np.ndarray

    def __len__(self):
        return len(self.out_idx)


def build_triads(out_modes: np.ndarray, h_modes: np.ndarray, q_modes: np.ndarray) -> Triads:
    """All ``(k, h, k-h)`` with ``k`` in ``out_modes``, ``h`` in ``h_modes`` and
    ``k-h`` in ``q_modes``; sorted by output, then by position of ``h``."""
    out_modes = np.asarray(out_modes, dtype=np.int64).reshape(len(out_modes), -1)
    d = out_modes.shape[1]
    h_modes = np.asarray(h_modes, dtype=np.int64).reshape(-1, d)
    q_modes = np.asarray(q_modes, dtype=np.int64).reshape(-1, d)
    n_out, n_h = len(out_modes), len(h_modes)
    empty = np.zeros(0, dtype=np.int64)
    if n_out == 0 or n_h == 0 or len(q_modes) == 0:
        return Triads(out_modes.astype(float), empty, empty, empty, np.zeros((0, d)))
    index = _KeyIndex(q_modes, _max_abs(q_modes))
    o = np.repeat(np.arange(n_out), n_h)
    h = np.tile(np.arange(n_h), n_out)
    q = out_modes[o] - h_modes[h]
    qi = index.find(q)
    hit = qi >= 0
    return Triads(
        kvec=out_modes.astype(float),
        out_idx=o[hit],
        h_idx=h[hit],
        q_idx=qi[hit],
        qvec=q[hit].astype(float),
    )


# ---------------------------------------------------------------------------
# mode sets


class ModeSet:
    """Finite set of nonzero wavenumbers closed under ``k -> -k``."""

    __slots__ = ("dim", "reps", "_index")

    def __init__(self, reps: np.ndarray, dim: int):
        reps = np.asarray(reps, dtype=np.int64).reshape(-1, dim)
        self.dim = int(dim)
        self.reps = reps[_lexsort(reps)]
        self.reps.setflags(write=False)
        self._index = None

    @classmethod
    def from_modes(cls, modes: Iterable, dim: int | None = None, symmetrize: bool = False) -> "ModeSet":
        """Build from wavenumbers listing both members of every pair.

        With ``symmetrize=True`` missing partners are added instead of
        raising.
        """
        arr = np.asarray(list(modes) if not isinstance(modes, np.ndarray) else modes, dtype=np.int64)
        if arr.size == 0:
            if dim is None:
                raise ValueError("dimension required for an empty mode set")
            return cls(np.zeros((0, dim), dtype=np.int64), dim)
        arr = arr.reshape(len(arr), -1)
        dim = arr.shape[1] if dim is None else dim
        if arr.shape[1] != dim:
            raise ValueError(f"modes have dimension {arr.shape[1]}, expected {dim}")
        if np.any(np.all(arr == 0, axis=1)):
            raise ValueError("mode set must not contain the zero wavenumber")
        arr = np.unique(arr, axis=0)
        canon = _is_canonical(arr)
        pos = {tuple(k) for k in arr[canon]}
        neg = {tuple(-k) for k in arr[~canon]}
        if not symmetrize and pos != neg:
            bad = sorted(pos ^ neg)[:3]
            raise ValueError(f"mode set is not symmetric under k -> -k (e.g. partner of {bad} missing)")
        reps = np.array(sorted(pos | neg), dtype=np.int64).reshape(-1, dim)
        return cls(reps, dim)

    @classmethod
    def cube(cls, radius: int, dim: int = 3) -> "ModeSet":
        """All nonzero ``k`` with every coordinate in ``[-radius, radius]``."""
        if radius < 1:
            raise ValueError("cube radius must be >= 1")
        axes = [np.arange(-radius, radius + 1)] * dim
        grid = np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1).reshape(-1, dim)
        return cls(grid[_is_canonical(grid)], dim)

    @property
    def full(self) -> np.ndarray:
        """Every wavenumber: representatives followed by their negatives."""
        return np.vstack([self.reps, -self.reps])

    @property
    def n_pairs(self) -> int:
        return len(self.reps)

    def __len__(self) -> int:
        return 2 * len(self.reps)

    def _lookup(self) -> _KeyIndex:
        if self._index is None:
            self._index = _KeyIndex(self.full, _max_abs(self.reps))
        return self._index

    def index_of(self, modes: np.ndarray) -> np.ndarray:
        """Positions in :attr:`full` (or -1) for each row of ``modes``."""
        return self._lookup().find(np.asarray(modes, dtype=np.int64).reshape(-1, self.dim))

    def __contains__(self, k) -> bool:
        k = np.asarray(k, dtype=np.int64).reshape(1, self.dim)
        return bool(self.index_of(k)[0] >= 0)

    def tuples(self) -> set[tuple[int, ...]]:
        return {tuple(int(x) for x in k) for k in self.full}

    def __eq__(self, other):
        return isinstance(other, ModeSet) and self.dim == other.dim and np.array_equal(self.reps, other.reps)

    def __hash__(self):
        return hash((self.dim, self.reps.tobytes()))

    def __repr__(self):
        return f"ModeSet(dim={self.dim}, size={len(self)})"


def modeset_sum(G: ModeSet) -> frozenset:
    """``G + G`` as a set of wavenumber tuples (may contain the origin)."""
    full = G.full
    if len(full) == 0:
        return frozenset()
    sums = (full[:, None, :] + full[None, :, :]).reshape(-1, G.dim)
    return frozenset(tuple(int(x) for x in k) for k in np.unique(sums, axis=0))


def modeset_dG(G: ModeSet) -> ModeSet:
    """``(G + G)`` minus ``G`` and the origin: the support of the Galerkin error."""
    zero = (0,) * G.dim
    rest = modeset_sum(G) - G.tuples() - {zero}
    if not rest:
        return ModeSet(np.zeros((0, G.dim), dtype=np.int64), G.dim)
    return ModeSet.from_modes(sorted(rest), dim=G.dim)


def tail_radius(G: ModeSet) -> float:
    """Smallest ``|k|`` over nonzero lattice points outside ``G``."""
    m = _max_abs(G.reps) + 1
    axes = [np.arange(-m, m + 1)] * G.dim
    box = np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1).reshape(-1, G.dim)
    box = box[np.any(box != 0, axis=1)]
    outside = box[G.index_of(box) < 0]
    return float(np.sqrt(np.min(np.sum(outside * outside, axis=1))))


def galerkin_tail_bound(f_norm_q: float, p: float, q: float, G: ModeSet) -> float:
    """Upper bound for the order-``p`` norm of the part of a field outside ``G``,
    given its order-``q`` norm."""
    if q < p:
        raise ValueError(f"need q >= p, got p={p}, q={q}")
    return f_norm_q / tail_radius(G) ** (q - p)


# ---------------------------------------------------------------------------
# fields


def leray_project(k, c) -> np.ndarray:
    """Orthogonal projection of ``c`` onto the plane orthogonal to ``k``."""
    k = np.asarray(k, dtype=float)
    c = np.asarray(c, dtype=complex)
    kk = float(k @ k)
    if kk == 0.0:
        raise ValueError("Leray projection is undefined at the zero wavenumber")
    return c - (k @ c) / kk * k


def _project_rows(modes: np.ndarray, coeffs: np.ndarray) -> np.ndarray:
    if len(modes) == 0:
        return coeffs
    kf = modes.astype(float)
    kk = np.einsum("nd,nd->n", kf, kf)
    kc = np.einsum("nd,nd->n", kf, coeffs)
    return coeffs - (kc / kk)[:, None] * kf


class SpectralField:
    """Real, divergence-free, mean-zero vector field with finite Fourier support.

    Immutable.  ``modes`` are the stored representatives (sorted
    lexicographically) and ``coeffs[i]`` is the coefficient at ``modes[i]``.
    """

    __slots__ = ("dim", "modes", "coeffs")

    def __init__(self, modes: np.ndarray, coeffs: np.ndarray, dim: int):
        # trusted constructor: canonical, sorted, solenoidal input
        self.dim = int(dim)
        self.modes = np.asarray(modes, dtype=np.int64).reshape(-1, dim)
        self.coeffs = np.asarray(coeffs, dtype=np.complex128).reshape(-1, dim)
        self.modes.setflags(write=False)
        self.coeffs.setflags(write=False)

    @classmethod
    def zero(cls, dim: int) -> "SpectralField":
        return cls(np.zeros((0, dim), dtype=np.int64), np.zeros((0, dim), dtype=complex), dim)

    @classmethod
    def from_modes(cls, modes, coeffs, dim: int | None = None, tol: float = DIV_TOL) -> "SpectralField":
        """Validate and normalise arbitrary input.

        Either member of a ``+-k`` pair may be given (or both, if they are
        complex conjugates).  Coefficients are Leray-projected; a
        :class:`DivergenceWarning` is emitted when that changes them by more
        than ``tol`` relative.
        """
        modes = np.asarray(modes, dtype=np.int64)
        coeffs = np.asarray(coeffs, dtype=np.complex128)
        if modes.size == 0:
            if dim is None:
                raise ValueError("dimension required for an empty field")
            return cls.zero(dim)
        modes = modes.reshape(len(modes), -1)
        dim = modes.shape[1] if dim is None else int(dim)
        if modes.shape[1] != dim or coeffs.shape != modes.shape:
            raise ValueError(f"modes {modes.shape} and coefficients {coeffs.shape} do not match dimension {dim}")
        if np.any(np.all(modes == 0, axis=1)):
            raise ValueError("field must have zero mean: the k = 0 coefficient is not allowed")
        canon = _is_canonical(modes)
        reps = np.where(canon[:, None], modes, -modes)
        vals = np.where(canon[:, None], coeffs, np.conj(coeffs))
        order = _lexsort(reps)
        reps, vals = reps[order], vals[order]
        same = np.all(reps[1:] == reps[:-1], axis=1) if len(reps) > 1 else np.zeros(0, dtype=bool)
        keep = np.ones(len(reps), dtype=bool)
        for i in np.nonzero(same)[0]:
            a, b = vals[i], vals[i + 1]
            scale = max(np.abs(a).max(), np.abs(b).max(), 1.0)
            if np.abs(a - b).max() > 1e-12 * scale:
                raise ValueError(f"reality violated at k={tuple(int(x) for x in reps[i])}: v_(-k) != conj(v_k)")
            keep[i + 1] = False
        reps, vals = reps[keep], vals[keep]
        projected = _project_rows(reps, vals)
        delta = np.abs(projected - vals).max(initial=0.0)
        scale = np.abs(vals).max(initial=0.0)
        if delta > tol * max(scale, np.finfo(float).tiny):
            warnings.warn(
                f"non-solenoidal coefficients (max violation {delta:.3e}); Leray-projected",
                DivergenceWarning,
                stacklevel=2,
            )
        return cls(reps, projected, dim)

    @classmethod
    def from_dict(cls, mapping: dict, dim: int | None = None) -> "SpectralField":
        modes = list(mapping.keys())
        return cls.from_modes(modes, [mapping[k] for k in modes], dim=dim)

    # -- access

    def full(self) -> tuple[np.ndarray, np.ndarray]:
        """All wavenumbers and coefficients, conjugate partners included."""
        return np.vstack([self.modes, -self.modes]), np.vstack([self.coeffs, np.conj(self.coeffs)])

    def coefficient(self, k) -> np.ndarray:
        rep, sign = canonical(k)
        hit = np.nonzero(np.all(self.modes == np.asarray(rep), axis=1))[0]
        if len(hit) == 0:
            return np.zeros(self.dim, dtype=complex)
        c = self.coeffs[hit[0]]
        return c.copy() if sign > 0 else np.conj(c)

    def support(self) -> ModeSet:
        return ModeSet(self.modes, self.dim)

    def restrict(self, G: ModeSet, inside: bool = True) -> "SpectralField":
        """Keep the modes inside ``G`` (or outside it with ``inside=False``)."""
        hit = G.index_of(self.modes) >= 0 if len(self.modes) else np.zeros(0, dtype=bool)
        mask = hit if inside else ~hit
        return SpectralField(self.modes[mask], self.coeffs[mask], self.dim)

    def on_modes(self, reps: np.ndarray) -> np.ndarray:
        """Coefficients at the given representatives (zero where absent)."""
        reps = np.asarray(reps, dtype=np.int64).reshape(-1, self.dim)
        out = np.zeros((len(reps), self.dim), dtype=np.complex128)
        if len(self.modes) and len(reps):
            idx = _KeyIndex(self.modes, _max_abs(self.modes, reps)).find(reps)
            hit = idx >= 0
            out[hit] = self.coeffs[idx[hit]]
        return out

    def divergence_residual(self) -> float:
        """Largest ``|k.v_k| / (|k| |v_k|)`` over the support."""
        if len(self.modes) == 0:
            return 0.0
        kf = self.modes.astype(float)
        kc = np.abs(np.einsum("nd,nd->n", kf, self.coeffs))
        den = np.sqrt(np.einsum("nd,nd->n", kf, kf)) * np.linalg.norm(self.coeffs, axis=1)
        ok = den > 0
        return float(np.max(kc[ok] / den[ok], initial=0.0))

    # -- algebra

    def _combine(self, other: "SpectralField", sign: float) -> "SpectralField":
        if not isinstance(other, SpectralField):
            return NotImplemented
        if other.dim != self.dim:
            raise ValueError("dimension mismatch")
        modes = np.vstack([self.modes, other.modes])
        if len(modes) == 0:
            return SpectralField.zero(self.dim)
        uniq = np.unique(modes, axis=0)
        uniq = uniq[_lexsort(uniq)]
        vals = self.on_modes(uniq) + sign * other.on_modes(uniq)
        return SpectralField(uniq, vals, self.dim)

    def __add__(self, other):
        return self._combine(other, 1.0)

    def __sub__(self, other):
        return self._combine(other, -1.0)

    def __mul__(self, scalar):
        if isinstance(scalar, complex) or np.iscomplexobj(scalar):
            raise TypeError("fields are real; only real scalars are allowed")
        return SpectralField(self.modes, float(scalar) * self.coeffs, self.dim)

    __rmul__ = __mul__

    def __neg__(self):
        return SpectralField(self.modes, -self.coeffs, self.dim)

    def __repr__(self):
        return f"SpectralField(dim={self.dim}, pairs={len(self.modes)})"

    # -- serialization

    def to_records(self) -> list[dict]:
        return [
            {"k": [int(x) for x in k], "re": [float(x) for x in c.real], "im": [float(x) for x in c.imag]}
            for k, c in zip(self.modes, self.coeffs)
        ]

    @classmethod
    def from_records(cls, records: list, dim: int | None = None) -> "SpectralField":
        if not isinstance(records, list):
            raise ValueError("field must be a JSON array of {k, re, im} records")
        modes, coeffs = [], []
        for i, rec in enumerate(records):
            try:
                k = [int(x) for x in rec["k"]]
                c = np.asarray(rec["re"], dtype=float) + 1j * np.asarray(rec["im"], dtype=float)
            except (KeyError, TypeError, ValueError) as exc:
                raise ValueError(f"malformed record #{i}: {rec!r}") from exc
            if len(c) != len(k):
                raise ValueError(f"record #{i}: k has {len(k)} entries but coefficient has {len(c)}")
            modes.append(k)
            coeffs.append(c)
        if not modes:
            if dim is None:
                raise ValueError("cannot infer the dimension of an empty field")
            return cls.zero(dim)
        if dim is not None and len(modes[0]) != dim:
            raise ValueError(f"dimension mismatch: expected {dim}, found {len(modes[0])}")
        if len({len(k) for k in modes}) != 1:
            raise ValueError("records with mixed dimensions")
        return cls.from_modes(np.array(modes), np.array(coeffs), dim=dim)

    def to_json(self) -> str:
        return json.dumps(self.to_records())


@dataclass(frozen=True)
class StatePair:
    """Velocity and magnetic field evolved together."""

    u: SpectralField
    b: SpectralField

    def __post_init__(self):
        if self.u.dim != self.b.dim:
            raise ValueError(f"velocity has dimension {self.u.dim} but magnetic field has {self.b.dim}")

    @property
    def dim(self) -> int:
        return self.u.dim

    @classmethod
    def zero(cls, dim: int) -> "StatePair":
        return cls(SpectralField.zero(dim), SpectralField.zero(dim))

    def __add__(self, other):
        return StatePair(self.u + other.u, self.b + other.b)

    def __sub__(self, other):
        return StatePair(self.u - other.u, self.b - other.b)

    def __mul__(self, scalar):
        return StatePair(self.u * scalar, self.b * scalar)

    __rmul__ = __mul__

    def __neg__(self):
        return StatePair(-self.u, -self.b)

    def restrict(self, G: ModeSet, inside: bool = True) -> "StatePair":
        return StatePair(self.u.restrict(G, inside), self.b.restrict(G, inside))

    def to_dict(self) -> dict:
        return {"dim": self.dim, "u": self.u.to_records(), "b": self.b.to_records()}

    @classmethod
    def from_dict(cls, data: dict) -> "StatePair":
        if not isinstance(data, dict) or "u" not in data or "b" not in data:
            raise ValueError("datum must be a JSON object with fields 'u' and 'b'")
        dim = data.get("dim")
        u = SpectralField.from_records(data["u"], dim=dim)
        b = SpectralField.from_records(data["b"], dim=dim if dim is not None else u.dim)
        return cls(u, b)


# ---------------------------------------------------------------------------
# norms and inner products


def sobolev_norm(f: SpectralField, p: float) -> float:
    """``sqrt(sum_k |k|^(2p) |v_k|^2)`` over both members of every pair."""
    if len(f.modes) == 0:
        return 0.0
    k2 = np.sum(f.modes.astype(float) ** 2, axis=1)
    terms = 2.0 * k2**p * np.sum(np.abs(f.coeffs) ** 2, axis=1)
    return math.sqrt(math.fsum(terms[np.argsort(k2, kind="stable")]))


def inner_product(f: SpectralField, g: SpectralField, p: float) -> float:
    """Real Sobolev inner product ``sum_k |k|^(2p) conj(v_k).w_k``."""
    if f.dim != g.dim:
        raise ValueError("dimension mismatch")
    if len(f.modes) == 0 or len(g.modes) == 0:
        return 0.0
    gv = g.on_modes(f.modes)
    k2 = np.sum(f.modes.astype(float) ** 2, axis=1)
    terms = 2.0 * k2**p * np.real(np.sum(np.conj(f.coeffs) * gv, axis=1))
    return math.fsum(terms[np.argsort(k2, kind="stable")])


def pair_norm(s: StatePair, p: float) -> float:
    """``sqrt(|u|_p^2 + |b|_p^2)``."""
    if s.u.dim != s.b.dim:
        raise ValueError("dimension mismatch")
    return math.hypot(sobolev_norm(s.u, p), sobolev_norm(s.b, p))


def pair_inner(s: StatePair, t: StatePair, p: float) -> float:
    return inner_product(s.u, t.u, p) + inner_product(s.b, t.b, p)


# ---------------------------------------------------------------------------
# bilinear maps


def _as_out(out: ModeSet | np.ndarray, dim: int) -> np.ndarray:
    if isinstance(out, ModeSet):
        if out.dim != dim:
            raise ValueError("output mode set has the wrong dimension")
        return out.reps
    return np.asarray(out, dtype=np.int64).reshape(-1, dim)


def bilinear_P(v: SpectralField, w: SpectralField, out: ModeSet) -> SpectralField:
    """Leray-projected advection ``-L(v . grad w)`` evaluated on the modes of ``out``."""
    if v.dim != w.dim:
        raise ValueError("dimension mismatch")
    reps = _as_out(out, v.dim)
    vm, vc = v.full()
    wm, wc = w.full()
    tri = build_triads(reps, vm, wm)
    vals = kernels.convolve(tri.kvec, tri.out_idx, tri.h_idx, tri.q_idx, tri.qvec, vc, wc)
    return SpectralField(reps, vals, v.dim)


def bilinear_boldP(V: StatePair, W: StatePair, out: ModeSet) -> StatePair:
    """MHD pairing ``(P(v,w) - P(b,c), P(v,c) - P(b,w))`` for ``V=(v,b)``, ``W=(w,c)``."""
    if V.dim != W.dim:
        raise ValueError("dimension mismatch")
    v, b = V.u, V.b
    w, c = W.u, W.b
    first = bilinear_P(v, w, out) - bilinear_P(b, c, out)
    second = bilinear_P(v, c, out) - bilinear_P(b, w, out)
    return StatePair(first, second)


__all__ = [
    "DivergenceWarning",
    "ModeSet",
    "SpectralField",
    "StatePair",
    "Triads",
    "bilinear_P",
    "bilinear_boldP",
    "build_triads",
    "canonical",
    "galerkin_tail_bound",
    "inner_product",
    "leray_project",
    "modeset_dG",
    "modeset_sum",
    "pair_inner",
    "pair_norm",
    "sobolev_norm",
    "tail_radius",
]

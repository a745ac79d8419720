"""Benchmark initial data in Fourier form and datum files."""

from __future__ import annotations

import json
import math
from pathlib import Path

import numpy as np

from .spectral import SpectralField, StatePair

SCALE = (2.0 * math.pi) ** 1.5


def make_orszag_tang(beta: float) -> StatePair:
    """Three-dimensional Orszag-Tang vortex with magnetic amplitude ``beta``.

    ``u0 = (-2 sin x2, 2 sin x1, 0)`` and
    ``b0 = beta (-2 sin 2x2 + sin x3, 2 sin x1 + sin x3, sin x1 + sin x2)``.
    """
    c = SCALE
    # representatives of +-a1, +-a2 (upper signs)
    u = {
        (1, 0, 0): -c * 1j * np.array([0.0, 1.0, 0.0]),
        (0, 1, 0): c * 1j * np.array([1.0, 0.0, 0.0]),
    }
    b = {
        (1, 0, 0): -c * 1j * beta * np.array([0.0, 1.0, 0.5]),
        (0, 1, 0): -c * 1j * beta * np.array([0.0, 0.0, 0.5]),
        (0, 0, 1): -c * 1j * beta * np.array([0.5, 0.5, 0.0]),
        (0, 2, 0): c * 1j * beta * np.array([1.0, 0.0, 0.0]),
    }
    return StatePair(SpectralField.from_dict(u, dim=3), SpectralField.from_dict(b, dim=3))


def make_abc(A: float, B: float, C: float, D: float) -> StatePair:
    """ABC velocity field with the magnetic perturbation of amplitude ``D``.

    ``u0 = (B cos x2 + C sin x3, A sin x1 + C cos x3, A cos x1 + B sin x2)``,
    ``b0 = D (sin x1 cos x2, -cos x1 sin x2, 0)``.
    """
    c = SCALE
    u = {
        (1, 0, 0): c * A / 2 * np.array([0.0, -1j, 1.0]),
        (0, 1, 0): c * B / 2 * np.array([1.0, 0.0, -1j]),
        (0, 0, 1): c * C / 2 * np.array([-1j, 1.0, 0.0]),
    }
    b = {
        (1, 1, 0): c * 1j * D / 4 * np.array([-1.0, 1.0, 0.0]),
        (1, -1, 0): c * 1j * D / 4 * np.array([-1.0, -1.0, 0.0]),
    }
    return StatePair(SpectralField.from_dict(u, dim=3), SpectralField.from_dict(b, dim=3))


def abc_norm3(A: float, B: float, C: float, D: float) -> float:
    """Closed-form order-3 norm of :func:`make_abc` data."""
    return SCALE * math.sqrt(A * A + B * B + C * C + 4 * D * D)


def orszag_tang_norm3(beta: float) -> float:
    """Closed-form order-3 norm of :func:`make_orszag_tang` data."""
    return SCALE * math.sqrt(4 + 132 * beta * beta)


def save_datum(state: StatePair, path) -> None:
    Path(path).write_text(json.dumps(state.to_dict(), indent=1) + "\n")


def load_datum(path) -> StatePair:
    """Read a ``{"u": [...], "b": [...]}`` datum file.

    Coefficients are Leray-projected on load (with a warning if that changes
    them) and missing conjugate partners are implied.
    """
    try:
        data = json.loads(Path(path).read_text())
    except json.JSONDecodeError as exc:
        raise ValueError(f"{path}: not valid JSON ({exc})") from exc
    return StatePair.from_dict(data)


def parse_datum(spec: str) -> StatePair:
    """Parse ``abc:A,B,C,D``, ``ot:beta`` or ``file:PATH``."""
    kind, _, arg = spec.partition(":")
    kind = kind.strip().lower()
    if kind == "abc":
        vals = [float(x) for x in arg.split(",")]
        if len(vals) != 4:
            raise ValueError(f"abc datum needs four parameters A,B,C,D, got {arg!r}")
        return make_abc(*vals)
    if kind in ("ot", "orszag_tang"):
        return make_orszag_tang(float(arg))
    if kind == "file":
        return load_datum(arg)
    raise ValueError(f"unknown datum {spec!r}; expected abc:A,B,C,D, ot:beta or file:PATH")


__all__ = [
    "abc_norm3",
    "load_datum",
    "make_abc",
    "make_orszag_tang",
    "orszag_tang_norm3",
    "parse_datum",
    "save_datum",
]

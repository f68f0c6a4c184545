"""Transfer matrices of the 1D Helmholtz equation ``E'' + eps(x) omega**2 E = 0``.

Matrices act on the state ``(E, dE/dx)`` and are real for real frequency, so
``det == 1`` is an exact check of the symplectic structure. Every function
accepts a scalar frequency; the underscored helpers also broadcast over
arrays of frequencies, which the band scan relies on.
"""
from __future__ import annotations

import numpy as np

from .crystal import LayeredCrystal
from .errors import PositionOutOfCell


def _layer_entries(n, d, w):
    """(m11, m12, m21, m22) for one layer, broadcasting over ``w``."""
    phi = n * w * d
    c = np.cos(phi)
    s = np.sin(phi)
    # sin(n w d) / (n w) written through sinc so w = 0 gives d
    m12 = d * np.sinc(phi / np.pi)
    return c, m12, -n * w * s, c


def _layer_derivative_entries(n, d, w):
    phi = n * w * d
    c = np.cos(phi)
    s = np.sin(phi)
    d11 = -n * d * s
    safe = np.where(w == 0, 1.0, w)
    d12 = np.where(w == 0, 0.0, (d * c - s / (n * safe)) / safe)
    d21 = -n * s - n * n * w * d * c
    return d11, d12, d21, d11


def _matmul(a, b):
    """Entrywise 2x2 product ``a @ b`` for tuples of broadcastable arrays."""
    a11, a12, a21, a22 = a
    b11, b12, b21, b22 = b
    return (
        a11 * b11 + a12 * b21,
        a11 * b12 + a12 * b22,
        a21 * b11 + a22 * b21,
        a21 * b12 + a22 * b22,
    )


def _add(a, b):
    return tuple(x + y for x, y in zip(a, b))


def _cell_entries(crystal: LayeredCrystal, w):
    w = np.asarray(w, dtype=float)
    one, zero = np.ones_like(w), np.zeros_like(w)
    t = (one, zero, zero, one)
    for layer in crystal.layers:
        t = _matmul(_layer_entries(layer.index, layer.thickness, w), t)
    return t


def _cell_entries_with_derivative(crystal: LayeredCrystal, w):
    w = np.asarray(w, dtype=float)
    one, zero = np.ones_like(w), np.zeros_like(w)
    t = (one, zero, zero, one)
    dt = (zero, zero, zero, zero)
    for layer in crystal.layers:
        m = _layer_entries(layer.index, layer.thickness, w)
        dm = _layer_derivative_entries(layer.index, layer.thickness, w)
        dt = _add(_matmul(dm, t), _matmul(m, dt))
        t = _matmul(m, t)
    return t, dt


def _as_matrix(entries) -> np.ndarray:
    m11, m12, m21, m22 = (float(e) for e in entries)
    return np.array([[m11, m12], [m21, m22]])


def layer_matrix(index: float, thickness: float, omega: float) -> np.ndarray:
    """Transfer matrix across a homogeneous layer of index ``n`` and thickness ``d``."""
    return _as_matrix(_layer_entries(index, thickness, float(omega)))


def cell_matrix(crystal: LayeredCrystal, omega: float) -> np.ndarray:
    """Ordered product ``M_N ... M_1`` across one unit cell."""
    return _as_matrix(_cell_entries(crystal, float(omega)))


def propagate_to(crystal: LayeredCrystal, omega: float, x: float) -> np.ndarray:
    """Transfer matrix from ``0`` to ``x`` inside the unit cell, ``0 <= x <= period``."""
    lam = crystal.period
    if not (0.0 <= x <= lam):
        raise PositionOutOfCell(f"x={x!r} outside [0, {lam!r}]")
    if x == lam:
        return cell_matrix(crystal, omega)
    j = int(crystal.layer_of(x))
    t = (1.0, 0.0, 0.0, 1.0)
    for layer in crystal.layers[:j]:
        t = _matmul(_layer_entries(layer.index, layer.thickness, float(omega)), t)
    rest = x - crystal.boundaries[j]
    if rest > 0.0:
        t = _matmul(_layer_entries(crystal.layers[j].index, rest, float(omega)), t)
    return _as_matrix(t)


def bloch_trace(crystal: LayeredCrystal, omega):
    """Half-trace of the cell matrix, ``cos(K * period)`` inside bands."""
    m11, _, _, m22 = _cell_entries(crystal, omega)
    out = 0.5 * (m11 + m22)
    return float(out) if np.ndim(out) == 0 else out


def bloch_trace_derivative(crystal: LayeredCrystal, omega):
    """Analytic frequency derivative of :func:`bloch_trace` (product rule over layers)."""
    _, dt = _cell_entries_with_derivative(crystal, omega)
    out = 0.5 * (dt[0] + dt[3])
    return float(out) if np.ndim(out) == 0 else out


def trace_and_derivative(crystal: LayeredCrystal, omega):
    t, dt = _cell_entries_with_derivative(crystal, omega)
    tr = 0.5 * (t[0] + t[3])
    dtr = 0.5 * (dt[0] + dt[3])
    if np.ndim(tr) == 0:
        return float(tr), float(dtr)
    return tr, dtr

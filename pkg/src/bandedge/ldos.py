"""Bloch modes, their nodes, and the local density of states.

Modes carry the normalization ``(1/period) * integral eps(x) |E(x)|**2 dx = 1``
so that the permittivity-weighted cell average of the LDOS is the DOS.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import minimize_scalar

from .crystal import LayeredCrystal
from .errors import DegenerateCell, DegenerateGap, InGap
from .spectrum import BandEdge, bisect, dispersion, find_bands
from .transfer import _layer_entries, bloch_trace, bloch_trace_derivative, cell_matrix, propagate_to

#: positions closer than this (in units of the period) to an edge-mode node
NODE_GUARD = 1e-3


@dataclass(frozen=True, eq=False)
class BlochMode:
    """A Bloch solution sampled through its ``(E, E')`` state at each layer start.

    ``states[j]`` is the state at the left boundary of layer ``j``; the field
    inside the layer follows from the closed-form layer propagator.
    """

    crystal: LayeredCrystal
    omega: float
    K: float
    states: np.ndarray
    dk_domega: float = math.nan
    band_index: int | None = None

    def _local(self, x):
        x = np.asarray(x, dtype=float)
        lam = self.crystal.period
        cells = np.floor(x / lam)
        r = x - cells * lam
        j = self.crystal.layer_of(r)
        s = r - self.crystal.boundaries[j]
        k = self.crystal.indices[j] * self.omega
        a, b = self.states[j, 0], self.states[j, 1]
        phase = np.exp(1j * self.K * lam * cells)
        return a, b, k, s, phase

    def field(self, x):
        """Complex field ``E(x)``; outside ``[0, period)`` the Bloch phase is applied."""
        a, b, k, s, phase = self._local(x)
        e = a * np.cos(k * s) + b * s * np.sinc(k * s / np.pi)
        return e * phase

    def field_derivative(self, x):
        a, b, k, s, phase = self._local(x)
        return (-k * a * np.sin(k * s) + b * np.cos(k * s)) * phase

    def intensity(self, x):
        return np.abs(self.field(x)) ** 2

    def end_state(self) -> np.ndarray:
        """``(E, E')`` propagated across the whole cell to ``x = period``."""
        last = self.crystal.layers[-1]
        m11, m12, m21, m22 = _layer_entries(last.index, last.thickness, self.omega)
        a, b = self.states[-1]
        return np.array([m11 * a + m12 * b, m21 * a + m22 * b])

    def bloch_residual(self) -> float:
        lam = self.crystal.period
        start = self.states[0]
        diff = self.end_state() - np.exp(1j * self.K * lam) * start
        return float(np.max(np.abs(diff)) / max(np.max(np.abs(start)), 1e-300))

    def normalization(self) -> float:
        return _weighted_norm(self.crystal, self.omega, self.states)

    @property
    def is_real(self) -> bool:
        return bool(np.all(np.abs(self.states.imag) < 1e-10 * np.max(np.abs(self.states))))


def _layer_starts(crystal: LayeredCrystal, omega: float, v) -> np.ndarray:
    states = np.empty((len(crystal.layers), 2), dtype=complex)
    cur = np.asarray(v, dtype=complex)
    for j, layer in enumerate(crystal.layers):
        states[j] = cur
        m11, m12, m21, m22 = _layer_entries(layer.index, layer.thickness, omega)
        cur = np.array([m11 * cur[0] + m12 * cur[1], m21 * cur[0] + m22 * cur[1]])
    return states


def _weighted_norm(crystal: LayeredCrystal, omega: float, states) -> float:
    """``(1/period) * integral eps |E|^2`` from per-layer trigonometric antiderivatives."""
    total = 0.0
    for layer, (a, b) in zip(crystal.layers, states):
        n, d = layer.index, layer.thickness
        k = n * omega
        s2 = math.sin(2 * k * d) / (4 * k)
        i_cc = 0.5 * d + s2
        i_ss = 0.5 * d - s2
        i_sc = math.sin(k * d) ** 2 / (2 * k)
        part = abs(a) ** 2 * i_cc + abs(b) ** 2 * i_ss / k**2 + 2 * (a * np.conj(b)).real * i_sc / k
        total += n * n * part
    return float(total / crystal.period)


def quadrature_norm(mode: BlochMode, order: int = 32) -> float:
    """Gauss-Legendre cross-check of :meth:`BlochMode.normalization`."""
    nodes, weights = np.polynomial.legendre.leggauss(order)
    c = mode.crystal
    total = 0.0
    for j, layer in enumerate(c.layers):
        x0, x1 = c.boundaries[j], c.boundaries[j + 1]
        x = 0.5 * (x1 - x0) * nodes + 0.5 * (x1 + x0)
        total += layer.permittivity * 0.5 * (x1 - x0) * np.dot(weights, mode.intensity(x))
    return float(total / c.period)


def _normalized(crystal, omega, v, K, dk, band_index=None) -> BlochMode:
    states = _layer_starts(crystal, omega, v)
    states = states / math.sqrt(_weighted_norm(crystal, omega, states))
    states.setflags(write=False)
    return BlochMode(crystal, omega, K, states, dk, band_index)


def _null_vector(m: np.ndarray, scale: float):
    """Null vector of a rank-one 2x2 matrix from its larger-norm row."""
    rows = np.abs(m[0, 0]) ** 2 + np.abs(m[0, 1]) ** 2, np.abs(m[1, 0]) ** 2 + np.abs(m[1, 1]) ** 2
    r = m[0] if rows[0] >= rows[1] else m[1]
    if math.sqrt(max(rows)) <= 1e-9 * scale:
        return None
    return np.array([r[1], -r[0]])


def _is_homogeneous(crystal: LayeredCrystal) -> bool:
    idx = crystal.indices
    return bool(np.all(idx == idx[0]))


def bloch_mode(crystal: LayeredCrystal, omega: float, band_index: int | None = None) -> BlochMode:
    """Normalized Bloch mode with ``K`` in ``(0, pi/period)`` at a band-interior frequency."""
    t = cell_matrix(crystal, omega)
    tr = 0.5 * (t[0, 0] + t[1, 1])
    lam = crystal.period
    if abs(tr) >= 1.0:
        if _is_homogeneous(crystal) and np.allclose(t, np.sign(tr) * np.eye(2), atol=1e-9):
            # folding point of a uniform medium: plane wave exp(i n omega x)
            n = crystal.indices[0]
            K = 0.0 if tr > 0 else math.pi / lam
            return _normalized(crystal, omega, np.array([1.0, 1j * n * omega]), K, n, band_index)
        if np.allclose(t, np.sign(tr) * np.eye(2), atol=1e-9):
            raise DegenerateCell(f"cell matrix is +-identity at omega={omega!r}")
        raise InGap(f"omega={omega!r} is not inside a band (trace={tr!r})")
    K, dk = dispersion(crystal, omega)
    lam_eig = complex(tr, math.sqrt((1.0 - tr) * (1.0 + tr)))
    v = _null_vector(t - lam_eig * np.eye(2), 1.0 + np.abs(t).max())
    mode = _normalized(crystal, omega, v, K, dk, band_index)
    e0 = mode.states[0, 0] if abs(mode.states[0, 0]) > 0 else mode.states[0, 1]
    phase = np.conj(e0) / abs(e0)
    states = mode.states * phase
    states.setflags(write=False)
    return BlochMode(crystal, omega, K, states, dk, band_index)


def edge_mode(crystal: LayeredCrystal, edge: BandEdge) -> BlochMode:
    """Real standing wave at a band edge, normalized like every other mode."""
    t = cell_matrix(crystal, edge.omega_c)
    v = _null_vector(t - edge.parity * np.eye(2), 1.0 + np.abs(t).max())
    if v is None:
        raise DegenerateGap(f"zero-width gap at omega={edge.omega_c!r}")
    return _normalized(crystal, edge.omega_c, v.astype(complex), edge.K_edge, math.inf, edge.band_index)


def ldos(crystal: LayeredCrystal, x, omega: float):
    """Local DOS ``|dK/domega| / pi * |E(x)|**2``; zero in gaps. ``x`` may be an array."""
    try:
        mode = bloch_mode(crystal, omega)
    except InGap:
        out = np.zeros_like(np.asarray(x, dtype=float))
        return float(out) if out.ndim == 0 else out
    except DegenerateCell:
        # closed gap: the LDOS is continuous through the touch; DOS factor from its limit,
        # field shape from a nearby frequency (shape error O(1e-6))
        mode = bloch_mode(crystal, omega * (1.0 - 1e-6))
        mode = BlochMode(crystal, omega, mode.K, mode.states, dispersion(crystal, omega)[1])
    out = abs(mode.dk_domega) / math.pi * mode.intensity(x)
    return float(out) if np.ndim(out) == 0 else out


def mode_nodes(mode: BlochMode, n_scan: int = 4096) -> list[float]:
    """Zeros of a real (edge) mode in ``[0, period)``, bisected to machine precision."""
    if not mode.is_real:
        # a running Bloch wave and its conjugate are independent, so E never vanishes
        return []
    lam = mode.crystal.period
    xs = np.linspace(0.0, lam, n_scan + 1)
    e = mode.field(xs).real
    f = lambda x: float(mode.field(x).real)
    found = [float(x) for x, v in zip(xs[:-1], e[:-1]) if v == 0.0]
    for i in np.nonzero(np.sign(e[:-1]) * np.sign(e[1:]) < 0)[0]:
        a = bisect(f, float(xs[i]), float(xs[i + 1]), rtol=0.0)
        b = np.nextafter(a, math.inf)
        found.append(a if abs(f(a)) <= abs(f(b)) else float(b))
    return sorted(x for x in set(found) if x < lam)


def soft_minima(mode: BlochMode, n_scan: int = 4096) -> list[float]:
    """Local minima of ``|E|**2`` where the field does not change sign."""
    lam = mode.crystal.period
    xs = np.linspace(0.0, lam, n_scan + 1)
    e = mode.field(xs)
    inten = np.abs(e) ** 2
    floor = 1e-12 * inten.max()
    out = []
    for i in range(1, n_scan):
        if inten[i] + floor < inten[i - 1] and inten[i] + floor < inten[i + 1]:
            if np.sign(e[i - 1].real) * np.sign(e[i + 1].real) < 0 and mode.is_real:
                continue
            res = minimize_scalar(lambda x: float(mode.intensity(x)), bounds=(xs[i - 1], xs[i + 1]),
                                  method="bounded", options={"xatol": 1e-12 * lam})
            out.append(float(res.x))
    return out


def near_node(x: float, nodes, period: float, guard: float = NODE_GUARD) -> bool:
    """True when ``x`` lies within ``guard * period`` of a node (periodically)."""
    for x0 in nodes:
        d = abs((x - x0 + 0.5 * period) % period - 0.5 * period)
        if d < guard * period:
            return True
    return False


def _monotone_segments(crystal: LayeredCrystal, top: float, density: float = 4000.0):
    """Split ``[0, top]`` into pieces on which the trace is monotone and inside a band."""
    lam = crystal.period
    bands = find_bands(crystal, top)
    n = max(int(math.ceil(density * top * lam)), 64)
    segments = []
    for band in bands:
        lo, hi = band.omega_lo, min(band.omega_hi, top)
        if hi <= lo:
            continue
        w = np.linspace(lo, hi, max(int(n * (hi - lo) / top), 16))
        dtr = bloch_trace_derivative(crystal, w[1:-1])
        cuts = [lo]
        for i in np.nonzero(np.sign(dtr[:-1]) * np.sign(dtr[1:]) < 0)[0]:
            cuts.append(bisect(lambda x: bloch_trace_derivative(crystal, x), float(w[i + 1]), float(w[i + 2]),
                               rtol=1e-14))
        cuts.append(hi)
        segments.extend(zip(cuts[:-1], cuts[1:]))
    return segments


def _solve_trace(crystal, a, b, targets, iters: int = 80):
    """Vectorized bisection of ``trace(omega) = target`` on a monotone segment ``[a, b]``."""
    ta = bloch_trace(crystal, a)
    lo = np.full(targets.shape, a)
    hi = np.full(targets.shape, b)
    for _ in range(iters):
        mid = 0.5 * (lo + hi)
        same = np.sign(bloch_trace(crystal, mid) - targets) == np.sign(ta - targets)
        lo = np.where(same, mid, lo)
        hi = np.where(same, hi, mid)
    return 0.5 * (lo + hi)


def _deposit(bins, u, v, weight):
    """Spread each weight uniformly over ``[u, v]`` and integrate into the bins."""
    lo, hi = np.minimum(u, v), np.maximum(u, v)
    width = np.where(hi > lo, hi - lo, 1.0)
    edges = np.asarray(bins, dtype=float)[:, None]
    frac = np.clip((edges - lo) / width, 0.0, 1.0)
    frac = np.where(hi > lo, frac, (edges >= lo).astype(float))
    cdf = frac @ weight
    return np.diff(cdf)


def ldos_histogram_oracle(crystal: LayeredCrystal, x, omega_bins, K_samples: int = 10_000):
    """Brute-force LDOS per frequency bin from uniform sampling of the Bloch wavenumber.

    Every sampled ``K`` is mapped to its frequency in each band by bisection on
    the trace, and the weight ``dK / pi`` (times ``|E_K(x)|**2`` unless ``x`` is
    None) is spread linearly between neighbouring samples before binning. The
    result approximates ``integral_bin rho(x, omega) d omega``; passing
    ``x=None`` gives the DOS instead.
    """
    if K_samples < 1000:
        raise ValueError("K_samples must be at least 1000")
    bins = np.asarray(omega_bins, dtype=float)
    lam = crystal.period
    dk = math.pi / (lam * K_samples)
    ks = (np.arange(K_samples) + 0.5) * dk
    cos_k = np.cos(ks * lam)
    top = float(bins[-1]) * 1.001
    out = np.zeros(len(bins) - 1)
    for a, b in _monotone_segments(crystal, top):
        ta, tb = bloch_trace(crystal, a), bloch_trace(crystal, b)
        lo_t, hi_t = min(ta, tb), max(ta, tb)
        sel = (cos_k > lo_t) & (cos_k < hi_t)
        if not np.any(sel):
            continue
        omegas = _solve_trace(crystal, a, b, cos_k[sel])
        order = np.argsort(omegas)
        omegas = omegas[order]
        if x is None:
            inten = np.ones_like(omegas)
        else:
            inten = np.array([bloch_mode(crystal, float(w)).intensity(x) for w in omegas])
        # the half-intervals to the segment ends keep the sampled measure complete
        u = np.concatenate(([a], omegas[:-1], [omegas[-1]]))
        v = np.concatenate(([omegas[0]], omegas[1:], [b]))
        w_int = np.concatenate(([inten[0]], 0.5 * (inten[:-1] + inten[1:]), [inten[-1]]))
        mass = np.full(len(u), dk / math.pi)
        mass[0] = mass[-1] = 0.5 * dk / math.pi
        if b >= top:
            # truncated segment: drop the end piece whose K extent is not a half step
            u, v, w_int, mass = u[:-1], v[:-1], w_int[:-1], mass[:-1]
        out += _deposit(bins, u, v, mass * w_int)
    return out

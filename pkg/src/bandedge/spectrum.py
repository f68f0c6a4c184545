"""Bands, band edges, the exact dispersion K(omega) and the density of states.

Edges are located by scanning the Bloch half-trace on a uniform grid and
bisecting every bracketed crossing of ``trace = +1`` or ``trace = -1``.
"""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .crystal import LayeredCrystal
from .errors import InGap, ScanTooCoarse
from .transfer import bloch_trace, bloch_trace_derivative, cell_matrix, trace_and_derivative

logger = logging.getLogger(__name__)

#: scan points per unit of reduced frequency ``omega * period``
SCAN_DENSITY = 20_000
ROOT_RTOL = 1e-12
#: ``|d trace / d omega| / period`` below this marks a zero-width gap
DEGENERATE_SLOPE = 1e-8


@dataclass(frozen=True)
class Band:
    index: int
    omega_lo: float
    omega_hi: float
    edge_parity_lo: int
    edge_parity_hi: int | None
    touches: tuple[float, ...] = field(default=(), compare=False)

    def contains(self, omega: float) -> bool:
        return self.omega_lo <= omega <= self.omega_hi

    @property
    def width(self) -> float:
        return self.omega_hi - self.omega_lo


@dataclass(frozen=True)
class BandEdge:
    """Frequency where a band meets a gap.

    ``side`` says on which side of the gap the adjacent band lies: ``"lower"``
    is the top of the band below the gap, ``"upper"`` the bottom of the band
    above it.
    """

    omega_c: float
    K_edge: float
    side: str
    band_index: int
    trace_slope: float
    gap_index: int
    parity: int

    @property
    def band_sign(self) -> int:
        """Direction from the edge into the adjacent band (-1 below, +1 above)."""
        return -1 if self.side == "lower" else 1


@dataclass(frozen=True)
class _Gap:
    lo: float
    hi: float
    sign: int
    degenerate: bool


def bisect(f: Callable[[float], float], a: float, b: float, rtol: float = ROOT_RTOL,
           keep: str = "a", maxiter: int = 200) -> float:
    """Bisection on a sign-changing bracket ``[a, b]``.

    Returns the bracket end named by ``keep`` once the bracket is narrower than
    ``rtol`` relative to its magnitude, so the caller decides which side of the
    root the answer lies on.
    """
    fa, fb = f(a), f(b)
    if fa == 0.0:
        return a
    if fb == 0.0:
        return b
    if np.sign(fa) == np.sign(fb):
        raise ValueError("root is not bracketed")
    for _ in range(maxiter):
        m = 0.5 * (a + b)
        if m <= a or m >= b:
            break
        fm = f(m)
        if np.sign(fm) == np.sign(fa):
            a, fa = m, fm
        else:
            b, fb = m, fm
        if b - a <= rtol * max(abs(a), abs(b)):
            break
    return a if keep == "a" else b


def _states(trace):
    return np.where(trace > 1.0, 1, np.where(trace < -1.0, -1, 0))


def _scan_events(crystal: LayeredCrystal, a: float, b: float, n: int):
    """Bracketed band/gap transitions on ``[a, b]`` as ``(root, kind, sign)``."""
    w = np.linspace(a, b, n)
    s = _states(bloch_trace(crystal, w))
    jumps = np.nonzero(s[1:] != s[:-1])[0]
    events = []
    for i in jumps:
        s0, s1 = int(s[i]), int(s[i + 1])
        if s0 * s1 == -1:
            raise ScanTooCoarse(
                f"trace jumps across a whole band between omega={w[i]!r} and {w[i + 1]!r}")
        g = s0 or s1
        kind = "open" if s0 == 0 else "close"
        # keep the band-side end of the final bracket
        # bracket collapsed to adjacent doubles (well inside ROOT_RTOL)
        root = bisect(lambda x: bloch_trace(crystal, x) - g, float(w[i]), float(w[i + 1]),
                      rtol=0.0, keep="a" if kind == "open" else "b")
        events.append((root, kind, g))
    return events, int(s[0]), int(s[-1])


def _classify(crystal, lo, hi, sign) -> _Gap:
    lam = crystal.period
    slopes = abs(bloch_trace_derivative(crystal, lo)), abs(bloch_trace_derivative(crystal, hi))
    degenerate = max(slopes) / lam < DEGENERATE_SLOPE or (hi - lo) <= 4 * ROOT_RTOL * hi
    return _Gap(lo, hi, sign, degenerate)


def _scan_gaps(crystal: LayeredCrystal, omega_max: float, density: float) -> list[_Gap]:
    """Scan ``[0, omega_max]``, then extend until the last band below ``omega_max`` closes."""
    lam = crystal.period
    gaps: list[_Gap] = []
    pending = None
    a, b = 0.0, omega_max
    cap = 4.0 * omega_max
    while True:
        n = max(int(math.ceil(density * (b - a) * lam)) + 1, 16)
        events, _, _ = _scan_events(crystal, a, b, n)
        for root, kind, g in events:
            if kind == "open":
                pending = (root, g)
            elif pending is not None:
                gaps.append(_classify(crystal, pending[0], root, g))
                pending = None
        if b >= cap:
            if pending is not None:
                gaps.append(_Gap(pending[0], math.inf, pending[1], False))
            break
        if pending is None and any(not gp.degenerate and gp.hi >= omega_max for gp in gaps):
            break
        a, b = b, min(cap, b + max(0.25 * omega_max, 1.0 / lam))
    return gaps


def _bands_from_gaps(gaps: list[_Gap], omega_max: float) -> list[Band]:
    bands: list[Band] = []
    lo, parity = 0.0, 1
    touches: list[float] = []
    for gap in gaps:
        if gap.degenerate:
            touches.append(0.5 * (gap.lo + gap.hi))
            continue
        if lo >= omega_max:
            break
        bands.append(Band(len(bands) + 1, lo, gap.lo, parity, gap.sign, tuple(touches)))
        lo, parity, touches = gap.hi, gap.sign, []
    else:
        if lo < omega_max:
            bands.append(Band(len(bands) + 1, lo, math.inf, parity, None, tuple(touches)))
    return bands


def find_bands(crystal: LayeredCrystal, omega_max: float, density: float = SCAN_DENSITY,
               retry: bool = True) -> list[Band]:
    """All bands starting below ``omega_max``, ordered by frequency.

    Zero-width gaps (tangential touches of ``trace = +-1``) are not edges; they
    are recorded in :attr:`Band.touches`. A scan that jumps across a whole
    band is repeated once with four times the density before
    :class:`ScanTooCoarse` propagates.
    """
    if not omega_max > 0:
        raise ValueError("omega_max must be positive")
    try:
        gaps = _scan_gaps(crystal, omega_max, density)
    except ScanTooCoarse:
        if not retry:
            raise
        logger.warning("band scan too coarse at density %g, rescanning at 4x", density)
        gaps = _scan_gaps(crystal, omega_max, 4 * density)
    return _bands_from_gaps(gaps, omega_max)


def band_edges(bands: list[Band], crystal: LayeredCrystal | None = None) -> list[BandEdge]:
    """Both edges of every open gap between consecutive bands, ascending in frequency.

    ``crystal`` is only needed to fill ``trace_slope``; without it the slope is NaN.
    """
    edges: list[BandEdge] = []
    for gap_index, (below, above) in enumerate(zip(bands, bands[1:]), start=1):
        parity = below.edge_parity_hi
        lam = crystal.period if crystal is not None else 1.0
        k_edge = 0.0 if parity == 1 else math.pi / lam
        for omega_c, side, band in ((below.omega_hi, "lower", below), (above.omega_lo, "upper", above)):
            slope = bloch_trace_derivative(crystal, omega_c) if crystal is not None else math.nan
            edges.append(BandEdge(omega_c, k_edge, side, band.index, slope, gap_index, parity))
    return edges


def gap_edges(crystal: LayeredCrystal, gap: int) -> tuple[BandEdge, BandEdge]:
    """Lower and upper edge of the ``gap``-th open gap (1-based)."""
    if gap < 1:
        raise ValueError("gap index is 1-based")
    omega_max = 1.25 * (gap + 1) * math.pi / (crystal.period * math.sqrt(crystal.mean_permittivity))
    for _ in range(12):
        bands = find_bands(crystal, omega_max)
        edges = band_edges(bands, crystal)
        if len(edges) >= 2 * gap:
            return edges[2 * gap - 2], edges[2 * gap - 1]
        if len(bands) == 1 and math.isinf(bands[0].omega_hi) and not edges:
            break
        omega_max *= 2.0
    raise InGap(f"crystal has fewer than {gap} open gaps in the scanned range")


def is_touch(crystal: LayeredCrystal, omega: float, atol: float = 1e-9) -> bool:
    """True where the cell matrix is +-identity: a closed gap, not an edge."""
    t = cell_matrix(crystal, omega)
    s = 1.0 if t[0, 0] + t[1, 1] > 0 else -1.0
    return bool(np.abs(t - s * np.eye(2)).max() <= atol * (1.0 + omega * crystal.period))


def _touch_slope(crystal: LayeredCrystal, omega: float) -> float:
    # trace ~ +-(1 - a u^2 / 2) about the touch, so |dK/domega| -> sqrt(a) / period
    h = 1e-5 * max(omega, 1.0 / crystal.period)
    curv = (bloch_trace_derivative(crystal, omega + h) - bloch_trace_derivative(crystal, omega - h)) / (2 * h)
    return math.sqrt(abs(curv)) / crystal.period


def dispersion(crystal: LayeredCrystal, omega: float) -> tuple[float, float]:
    """Bloch wavenumber ``K`` in ``[0, pi/period]`` and ``dK/domega`` inside a band.

    At a closed gap (tangential touch of ``trace = +-1``) the finite limit of
    ``dK/domega`` is returned.
    """
    tr, dtr = trace_and_derivative(crystal, omega)
    if abs(tr) >= 1.0:
        if omega > 0 and is_touch(crystal, omega):
            return (0.0 if tr > 0 else math.pi / crystal.period), _touch_slope(crystal, omega)
        raise InGap(f"omega={omega!r} is not inside a band (trace={tr!r})")
    lam = crystal.period
    k = math.acos(tr) / lam
    dk = -dtr / (lam * math.sqrt((1.0 - tr) * (1.0 + tr)))
    return k, dk


def dos(crystal: LayeredCrystal, omega: float) -> float:
    """Density of states per unit length, ``|dK/domega| / pi``; exactly 0 in gaps."""
    try:
        _, dk = dispersion(crystal, omega)
    except InGap:
        return 0.0
    return abs(dk) / math.pi


def dos_curve(crystal: LayeredCrystal, omegas) -> tuple[np.ndarray, np.ndarray]:
    """Vectorized DOS over a frequency grid; returns ``(values, in_gap)``."""
    w = np.asarray(omegas, dtype=float)
    tr, dtr = trace_and_derivative(crystal, np.atleast_1d(w))
    gap = np.abs(tr) >= 1.0
    with np.errstate(divide="ignore", invalid="ignore"):
        val = np.abs(dtr) / (math.pi * crystal.period * np.sqrt((1.0 - tr) * (1.0 + tr)))
    val = np.where(gap, 0.0, val)
    for i in np.nonzero(gap & (np.atleast_1d(w) > 0))[0]:
        if is_touch(crystal, float(np.atleast_1d(w)[i])):
            val[i] = dos(crystal, float(np.atleast_1d(w)[i]))
            gap[i] = False
    return val.reshape(w.shape), gap.reshape(w.shape)

"""Spontaneous-emission rates from the LDOS.

In the Wigner-Weisskopf (golden-rule) limit the rate of an emitter at ``x``
is proportional to the LDOS there; rates here use unit coupling, so they are
LDOS values. An ensemble of independent emitters samples the LDOS with its
position distribution.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.integrate import quad
from scipy.stats import norm

from .crystal import LayeredCrystal
from .errors import InGap, UnnormalizedDistribution
from .ldos import bloch_mode, ldos

NORMALIZATION_TOL = 1e-10
_GAUSS_REACH = 12.0


@dataclass(frozen=True)
class EmitterDistribution:
    """Emitter positions within the unit cell.

    ``kind`` is ``"delta"`` (all at ``x0``), ``"uniform"`` or ``"gauss"``
    (a Gaussian of width ``sigma`` about ``x0`` wrapped onto the cell).
    """

    kind: str
    x0: float = 0.0
    sigma: float = 0.0

    def __post_init__(self):
        if self.kind not in ("delta", "uniform", "gauss"):
            raise ValueError(f"unknown distribution kind {self.kind!r}")
        if self.kind == "gauss" and not self.sigma > 0:
            raise ValueError("gauss distribution needs sigma > 0")

    @classmethod
    def parse(cls, text: str) -> "EmitterDistribution":
        """Parse ``delta:<x0>``, ``uniform`` or ``gauss:<x0>:<sigma>``."""
        parts = text.split(":")
        try:
            if parts[0] == "delta" and len(parts) == 2:
                return cls("delta", float(parts[1]))
            if parts[0] == "uniform" and len(parts) == 1:
                return cls("uniform")
            if parts[0] == "gauss" and len(parts) == 3:
                return cls("gauss", float(parts[1]), float(parts[2]))
        except ValueError as exc:
            raise ValueError(f"bad distribution spec {text!r}: {exc}") from exc
        raise ValueError(f"bad distribution spec {text!r}")

    def pdf(self, x, period: float):
        x = np.asarray(x, dtype=float)
        if self.kind == "uniform":
            return np.full(x.shape, 1.0 / period)
        if self.kind == "gauss":
            m = math.ceil(_GAUSS_REACH * self.sigma / period) + 1
            images = self.x0 + period * np.arange(-m, m + 1)
            return norm.pdf(x[..., None], loc=images, scale=self.sigma).sum(axis=-1)
        raise ValueError("a delta distribution has no density")

    def normalization(self, period: float) -> float:
        if self.kind != "gauss":
            return 1.0
        m = math.ceil(_GAUSS_REACH * self.sigma / period) + 1
        images = self.x0 + period * np.arange(-m, m + 1)
        return float(np.sum(norm.cdf(period, images, self.sigma) - norm.cdf(0.0, images, self.sigma)))


@dataclass(frozen=True)
class MixtureDistribution:
    components: tuple[EmitterDistribution, ...]
    weights: tuple[float, ...]

    def __post_init__(self):
        w = np.asarray(self.weights, dtype=float)
        if len(w) != len(self.components) or len(w) == 0:
            raise ValueError("one weight per component is required")
        if np.any(w < 0) or abs(w.sum() - 1.0) > NORMALIZATION_TOL:
            raise UnnormalizedDistribution(f"mixture weights {self.weights!r} do not sum to 1")


def se_rate(crystal: LayeredCrystal, x, omega: float, coupling: float = 1.0):
    """Emission rate of an emitter at ``x``; zero inside gaps."""
    return coupling * ldos(crystal, x, omega)


def _breakpoints(crystal: LayeredCrystal, a: float, b: float) -> list[float]:
    lam = crystal.period
    pts = [a]
    for cell in range(math.floor(a / lam), math.floor(b / lam) + 1):
        for edge in crystal.boundaries[:-1]:
            p = cell * lam + edge
            if a < p < b:
                pts.append(p)
    pts.append(b)
    return sorted(pts)


def _integrate(f, pts, rtol):
    return sum(quad(f, p, q, epsabs=0.0, epsrel=rtol, limit=200)[0] for p, q in zip(pts[:-1], pts[1:]))


def se_rate_average(crystal: LayeredCrystal, dist, omega: float, coupling: float = 1.0,
                    rtol: float = 1e-10) -> float:
    """Rate averaged over emitter positions, ``integral p(x) rho(x, omega) dx``."""
    if isinstance(dist, MixtureDistribution):
        return float(sum(w * se_rate_average(crystal, d, omega, coupling, rtol)
                         for d, w in zip(dist.components, dist.weights)))
    lam = crystal.period
    if dist.kind == "delta":
        return float(se_rate(crystal, dist.x0, omega, coupling))
    if abs(dist.normalization(lam) - 1.0) > NORMALIZATION_TOL:
        raise UnnormalizedDistribution(f"{dist!r} does not integrate to 1 over the cell")
    try:
        mode = bloch_mode(crystal, omega)
    except InGap:
        return 0.0
    scale = coupling * abs(mode.dk_domega) / math.pi
    if dist.kind == "uniform":
        f = lambda x: float(mode.intensity(x)) / lam
        return scale * _integrate(f, _breakpoints(crystal, 0.0, lam), rtol)
    reach = _GAUSS_REACH * dist.sigma
    if reach < 0.5 * lam:
        # integrate the unwrapped Gaussian on the line; intensity is periodic
        a, b = dist.x0 - reach, dist.x0 + reach
        pts = sorted(set(_breakpoints(crystal, a, b) + [dist.x0]))
        f = lambda x: norm.pdf(x, dist.x0, dist.sigma) * float(mode.intensity(x))
        return scale * _integrate(f, pts, rtol)
    f = lambda x: float(dist.pdf(x, lam)) * float(mode.intensity(x))
    return scale * _integrate(f, _breakpoints(crystal, 0.0, lam), rtol)

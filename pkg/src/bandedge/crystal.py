"""Periodic stacks of lossless dielectric layers.

Units follow ``c = 1``: frequencies are angular wavenumbers in inverse length
units, so ``omega * period`` is the reduced frequency in units of ``c / period``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from .errors import EmptyStack, InvalidLayer


@dataclass(frozen=True)
class Layer:
    index: float
    thickness: float

    def __post_init__(self):
        n, d = self.index, self.thickness
        if not (math.isfinite(n) and math.isfinite(d)):
            raise InvalidLayer(f"non-finite layer parameters n={n!r}, d={d!r}")
        if n < 1.0:
            raise InvalidLayer(f"refractive index must be >= 1, got {n!r}")
        if d <= 0.0:
            raise InvalidLayer(f"thickness must be > 0, got {d!r}")

    @property
    def permittivity(self) -> float:
        return self.index * self.index


@dataclass(frozen=True)
class LayeredCrystal:
    """One unit cell ``[0, period)`` of a 1D photonic crystal.

    Layer 1 starts at ``x = 0``; the permittivity profile repeats with the
    period. Layer intervals are left-closed and right-open.
    """

    layers: tuple[Layer, ...]
    period: float = field(init=False)
    boundaries: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        if len(self.layers) == 0:
            raise EmptyStack("a crystal needs at least one layer")
        edges = np.concatenate(([0.0], np.cumsum([l.thickness for l in self.layers])))
        edges.setflags(write=False)
        object.__setattr__(self, "boundaries", edges)
        object.__setattr__(self, "period", float(edges[-1]))

    @property
    def indices(self) -> np.ndarray:
        return np.array([l.index for l in self.layers])

    @property
    def thicknesses(self) -> np.ndarray:
        return np.array([l.thickness for l in self.layers])

    @property
    def mean_permittivity(self) -> float:
        """Thickness-weighted cell average of the permittivity."""
        eps = self.indices**2
        return float(np.dot(eps, self.thicknesses) / self.period)

    def layer_of(self, x):
        """Index of the layer containing each position ``x`` (reduced mod period)."""
        xr = np.mod(np.asarray(x, dtype=float), self.period)
        j = np.searchsorted(self.boundaries, xr, side="right") - 1
        return np.clip(j, 0, len(self.layers) - 1)

    def scaled(self, s: float) -> "LayeredCrystal":
        """Same stack with every thickness multiplied by ``s``."""
        return LayeredCrystal(tuple(Layer(l.index, s * l.thickness) for l in self.layers))

    def to_config(self) -> dict:
        return {"layers": [{"n": l.index, "d": l.thickness} for l in self.layers]}


def build_crystal(layers: Iterable[Sequence[float] | Layer]) -> LayeredCrystal:
    """Build a crystal from ``(index, thickness)`` pairs."""
    built = []
    for item in layers:
        if isinstance(item, Layer):
            built.append(item)
            continue
        try:
            n, d = item
            n, d = float(n), float(d)
        except (TypeError, ValueError) as exc:
            raise InvalidLayer(f"cannot interpret {item!r} as (index, thickness)") from exc
        built.append(Layer(n, d))
    return LayeredCrystal(tuple(built))


def permittivity_at(crystal: LayeredCrystal, x):
    """Permittivity ``n(x)**2`` at position(s) ``x``; scalar in, scalar out."""
    xa = np.asarray(x, dtype=float)
    if not np.all(np.isfinite(xa)):
        raise ValueError("position must be finite")
    eps = (crystal.indices**2)[crystal.layer_of(xa)]
    return float(eps) if eps.ndim == 0 else eps


def quarter_wave_stack(n1: float = 1.0, n2: float = 2.0, period: float = 1.0) -> LayeredCrystal:
    """Two-layer cell with ``n1*d1 == n2*d2``; the canonical test crystal for defaults."""
    d1 = period * n2 / (n1 + n2)
    d2 = period - d1
    return build_crystal([(n1, d1), (n2, d2)])

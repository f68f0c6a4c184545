"""Effective-dispersion model densities of states near a gap edge in 3D.

The isotropic model puts the band extremum on the whole sphere ``|k| = k0``,
``omega = omega_c + A (|k| - k0)**2``, so the DOS diverges like
``|omega - omega_c|**(-1/2)``. The anisotropic model expands about a single
point, ``omega = omega_c + A |k - k0|**2``, and its DOS vanishes like
``(omega - omega_c)**(1/2)``. Both count one polarization per unit volume.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

from .errors import AtEdge, BelowEdge, BranchExhausted


@dataclass(frozen=True)
class IsotropicModel:
    omega_c: float
    k0: float
    A: float | None = None

    def __post_init__(self):
        if self.A is None:
            object.__setattr__(self, "A", self.omega_c / self.k0**2)
        if not (self.omega_c > 0 and self.k0 > 0 and self.A > 0):
            raise ValueError("IsotropicModel needs omega_c, k0, A > 0")

    def wavenumber(self, omega: float) -> float:
        """``|k|`` on the branch adjacent to the edge (above: ``k > k0``, below: ``k < k0``)."""
        delta = omega - self.omega_c
        if delta == 0:
            raise AtEdge("isotropic DOS diverges at omega_c")
        q = math.sqrt(abs(delta) / self.A)
        k = self.k0 + q if delta > 0 else self.k0 - q
        if k <= 0:
            raise BranchExhausted(f"below-edge branch reaches k <= 0 at omega={omega!r}")
        return k


@dataclass(frozen=True)
class AnisotropicModel:
    omega_c: float
    A: float

    def __post_init__(self):
        if not (self.omega_c > 0 and self.A > 0):
            raise ValueError("AnisotropicModel needs omega_c, A > 0")


def isotropic_dos(model: IsotropicModel, omega: float) -> float:
    """``k**2 / (2 pi**2) * |dk/domega|`` for the isotropic model."""
    k = model.wavenumber(omega)
    dk = 1.0 / (2.0 * math.sqrt(model.A * abs(omega - model.omega_c)))
    return k * k / (2.0 * math.pi**2) * dk


def anisotropic_dos(model: AnisotropicModel, omega: float) -> float:
    """``sqrt(omega - omega_c) / (4 pi**2 A**1.5)``; zero at the edge."""
    delta = omega - model.omega_c
    if delta < 0:
        raise BelowEdge(f"omega={omega!r} lies below the edge {model.omega_c!r}")
    return math.sqrt(delta) / (4.0 * math.pi**2 * model.A**1.5)

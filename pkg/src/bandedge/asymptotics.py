"""Power-law exponents of the DOS and LDOS near band edges.

Near an edge ``omega_c`` both densities behave like ``const * |omega - omega_c|**eta``.
Exponents are estimated by ordinary least squares in log-log coordinates on
geometric detuning ladders.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from sklearn.base import BaseEstimator, RegressorMixin
from sklearn.utils.validation import check_array, check_is_fitted, check_X_y

from .crystal import LayeredCrystal
from .errors import DegenerateAbscissa, NodeNotResolved, NonPositiveSample
from .ldos import bloch_mode, edge_mode, ldos
from .spectrum import BandEdge, dos

DEFAULT_WINDOW = (1e-6, 1e-4)
DEFAULT_POINTS = 16
SENSITIVITY_WINDOW = (1e-8, 1e-3)
SENSITIVITY_POINTS = 26
CLEAN_R2 = 0.99
#: exponent tolerance used to label a clean LDOS fit as universal or nodal
REGIME_TOL = 0.05


@dataclass(frozen=True)
class AsymptoticFit:
    eta: float
    amplitude: float
    r_squared: float
    window: tuple[float, float]
    n_points: int
    side: str | None = None
    detunings: np.ndarray = field(default=None, repr=False, compare=False)
    values: np.ndarray = field(default=None, repr=False, compare=False)

    @property
    def clean(self) -> bool:
        return self.r_squared >= CLEAN_R2

    @property
    def regime(self) -> str:
        """``"universal"`` (eta ~ -1/2), ``"node"`` (eta ~ +1/2) or ``"crossover"``."""
        if self.clean and abs(self.eta + 0.5) <= REGIME_TOL:
            return "universal"
        if self.clean and abs(self.eta - 0.5) <= REGIME_TOL:
            return "node"
        return "crossover"

    def as_dict(self) -> dict:
        return {
            "eta": self.eta,
            "const": self.amplitude,
            "r_squared": self.r_squared,
            "window": list(self.window),
            "n_points": self.n_points,
            "side": self.side,
            "clean": self.clean,
        }


def _loglog_ols(delta: np.ndarray, rho: np.ndarray) -> tuple[float, float, float]:
    if np.any(delta <= 0) or np.any(rho <= 0) or not np.all(np.isfinite(rho)):
        raise NonPositiveSample("power-law fit needs strictly positive, finite samples")
    lx, ly = np.log(delta), np.log(rho)
    if np.ptp(lx) == 0.0:
        raise DegenerateAbscissa("all detunings are equal")
    slope, intercept = np.polyfit(lx, ly, 1)
    resid = ly - (intercept + slope * lx)
    ss_tot = float(np.sum((ly - ly.mean()) ** 2))
    r2 = 1.0 - float(np.sum(resid**2)) / ss_tot if ss_tot > 0 else 1.0
    return float(slope), float(math.exp(intercept)), r2


def fit_exponent(samples, side: str | None = None, min_points: int = 8) -> AsymptoticFit:
    """Least-squares fit of ``log rho = log const + eta * log delta``.

    ``samples`` is a sequence of ``(delta, rho)`` pairs or a 2-column array.
    """
    arr = np.asarray(samples, dtype=float)
    if arr.ndim != 2 or arr.shape[1] != 2:
        raise ValueError("samples must be (delta, value) pairs")
    if len(arr) < min_points:
        raise ValueError(f"need at least {min_points} samples, got {len(arr)}")
    delta, rho = arr[:, 0], arr[:, 1]
    eta, const, r2 = _loglog_ols(delta, rho)
    return AsymptoticFit(eta, const, r2, (float(delta.min()), float(delta.max())), len(arr), side,
                         delta.copy(), rho.copy())


class PowerLawRegressor(RegressorMixin, BaseEstimator):
    """scikit-learn regressor for ``y = const * x**eta`` on positive data.

    Fits by ordinary least squares in log-log space, so it drops into
    pipelines and model-selection tools; ``score`` is R^2 on the original scale.
    """

    def __init__(self, min_points=2):
        self.min_points = min_points

    def fit(self, X, y):
        X, y = check_X_y(X, y, ensure_min_samples=self.min_points, y_numeric=True)
        if X.shape[1] != 1:
            raise ValueError("PowerLawRegressor expects a single feature (the detuning)")
        self.eta_, self.const_, self.r_squared_ = _loglog_ols(X[:, 0], y)
        self.n_features_in_ = 1
        return self

    def predict(self, X):
        check_is_fitted(self, "eta_")
        X = check_array(X)
        return self.const_ * X[:, 0] ** self.eta_


def detuning_ladder(edge: BandEdge, window=DEFAULT_WINDOW, points: int = DEFAULT_POINTS) -> np.ndarray:
    """Geometric detunings ``delta`` with ``delta / omega_c`` spanning ``window``."""
    lo, hi = window
    if not 0 < lo < hi:
        raise ValueError("window must satisfy 0 < lo < hi")
    return edge.omega_c * np.geomspace(lo, hi, points)


def edge_exponent_dos(crystal: LayeredCrystal, edge: BandEdge, window=DEFAULT_WINDOW,
                      points: int = DEFAULT_POINTS) -> AsymptoticFit:
    """DOS exponent on the band side of ``edge``."""
    delta = detuning_ladder(edge, window, points)
    rho = [dos(crystal, edge.omega_c + edge.band_sign * d) for d in delta]
    return fit_exponent(np.column_stack([delta, rho]), side=edge.side)


def edge_exponent_ldos(crystal: LayeredCrystal, edge: BandEdge, x: float, window=DEFAULT_WINDOW,
                       points: int = DEFAULT_POINTS) -> AsymptoticFit:
    """LDOS exponent at position ``x`` on the band side of ``edge``."""
    delta = detuning_ladder(edge, window, points)
    rho = [ldos(crystal, x, edge.omega_c + edge.band_sign * d) for d in delta]
    return fit_exponent(np.column_stack([delta, rho]), side=edge.side)


@dataclass(frozen=True)
class SensitivityReport:
    node_x: float
    shift: float
    ratios: list[tuple[float, float]]
    max_ratio: float
    detuning_at_max: float
    small_delta_slope: float

    def as_dict(self) -> dict:
        return {
            "node_x": self.node_x,
            "shift": self.shift,
            "max_ratio": self.max_ratio,
            "detuning_at_max": self.detuning_at_max,
            "small_delta_slope": self.small_delta_slope,
        }


def sensitivity_scan(crystal: LayeredCrystal, edge: BandEdge, node_x: float, shift: float | None = None,
                     ladder=None) -> SensitivityReport:
    """LDOS ratio ``rho(node_x + shift) / rho(node_x)`` along a detuning ladder.

    ``ladder`` holds absolute detunings; by default ``delta / omega_c`` runs
    geometrically over ``[1e-8, 1e-3]``. ``small_delta_slope`` is the log-log
    slope of the ratio over the smallest decade of the ladder.
    """
    lam = crystal.period
    shift = 1e-4 * lam if shift is None else float(shift)
    standing = edge_mode(crystal, edge)
    if abs(standing.field(node_x)) > 1e-9:
        raise NodeNotResolved(f"|E({node_x!r})| = {abs(standing.field(node_x)):.3e} is not a node")
    if ladder is None:
        ladder = detuning_ladder(edge, SENSITIVITY_WINDOW, SENSITIVITY_POINTS)
    ladder = np.sort(np.asarray(ladder, dtype=float))
    ratios = []
    for d in ladder:
        mode = bloch_mode(crystal, edge.omega_c + edge.band_sign * d)
        ratios.append((float(d), float(mode.intensity(node_x + shift) / mode.intensity(node_x))))
    r = np.array([v for _, v in ratios])
    i = int(np.argmax(r))
    k = max(int(np.count_nonzero(ladder <= 10.0 * ladder[0])), 2)
    if len(ladder) >= 2 and np.all(r[:k] > 0):
        slope = float(np.polyfit(np.log(ladder[:k]), np.log(r[:k]), 1)[0])
    else:
        slope = 0.0
    return SensitivityReport(float(node_x), shift, ratios, float(r[i]), float(ladder[i]), slope)

"""Single-detection-rate bound of the Wigner-function local realistic model.

The model admits a minimal reliably-detectable light level: it departs
from quantum mechanics whenever the per-detector singles rate R_S stays
below

    R_S  <  eta F^2 Rc^2 / (2 L d^2 lambda sqrt(tau T))

with eta the detector quantum efficiency, F the focal length of the
collection lens, Rc the active radius of the nonlinear medium, d the
medium-to-detector distance, lambda the mean detected wavelength, tau the
photon coherence time, L the detector active depth and T the photon
absorption time.  Everything here is SI; unit-suffixed input is handled at
the CLI boundary.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, replace

from .errors import InvalidGeometry, NonPositiveRate

__all__ = [
    "ApparatusGeometry",
    "Regime",
    "threshold_rate",
    "critical_absorption_time",
    "classify_regime",
]


@dataclass(frozen=True)
class ApparatusGeometry:
    """Apparatus parameters entering the rate bound (SI units).

    absorb_T may be left None when only the critical absorption time is
    wanted; threshold_rate requires it.
    """

    eta: float
    focal_F: float
    active_radius_Rc: float
    distance_d: float
    wavelength_lambda: float
    coherence_tau: float
    depth_L: float
    absorb_T: float | None = None

    def __post_init__(self):
        labels = {
            "eta": self.eta,
            "focal_F": self.focal_F,
            "active_radius_Rc": self.active_radius_Rc,
            "distance_d": self.distance_d,
            "wavelength_lambda": self.wavelength_lambda,
            "coherence_tau": self.coherence_tau,
            "depth_L": self.depth_L,
        }
        if self.absorb_T is not None:
            labels["absorb_T"] = self.absorb_T
        for name, value in labels.items():
            if not (math.isfinite(value) and value > 0.0):
                raise InvalidGeometry(f"{name} must be finite and > 0, got {value}")
        if self.eta > 1.0:
            raise InvalidGeometry(f"eta must be <= 1, got {self.eta}")

    def with_absorption_time(self, T: float) -> "ApparatusGeometry":
        return replace(self, absorb_T=T)


class Regime(enum.Enum):
    DEVIATION_EXPECTED = "deviation-expected"
    QUANTUM_REGIME = "quantum-regime"


def _prefactor(g: ApparatusGeometry) -> float:
    # eta F^2 Rc^2 / (2 L d^2 lambda); multiplying by 1/sqrt(tau T) gives
    # the threshold rate
    return (g.eta * g.focal_F ** 2 * g.active_radius_Rc ** 2
            / (2.0 * g.depth_L * g.distance_d ** 2 * g.wavelength_lambda))


def threshold_rate(g: ApparatusGeometry) -> float:
    """Singles rate (counts/s) below which the model predicts a deviation."""
    if g.absorb_T is None:
        raise InvalidGeometry("absorb_T is required to evaluate the threshold")
    return _prefactor(g) / math.sqrt(g.coherence_tau * g.absorb_T)


def critical_absorption_time(g: ApparatusGeometry, observed_rate: float) -> float:
    """Absorption time T* at which the threshold equals the observed rate.

    For T below T* the observed rate sits inside the deviation region.
    Inverse of threshold_rate in T: T* = (prefactor / R_S)^2 / tau.
    """
    if not (math.isfinite(observed_rate) and observed_rate > 0.0):
        raise NonPositiveRate(f"observed rate must be > 0, got {observed_rate}")
    return (_prefactor(g) / observed_rate) ** 2 / g.coherence_tau


def classify_regime(g: ApparatusGeometry, observed_rate: float) -> Regime:
    """Deviation expected iff the observed rate is strictly below threshold.

    Equality classifies as the quantum regime: the bound is a strict
    inequality.
    """
    if not (math.isfinite(observed_rate) and observed_rate >= 0.0):
        raise NonPositiveRate(f"observed rate must be >= 0, got {observed_rate}")
    if observed_rate < threshold_rate(g):
        return Regime.DEVIATION_EXPECTED
    return Regime.QUANTUM_REGIME

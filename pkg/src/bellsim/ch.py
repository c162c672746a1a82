"""Clauser-Horne sum, expected count rates and counting statistics.

The inequality combines four coincidence rates and two singles rates,

    CH = N(t1,t2) - N(t1,t2') + N(t1',t2) + N(t1',t2') - N(t1') - N(t2),

and is nonpositive in every local realistic theory.  Two variants are
computed:

* true singles - the singles terms carry one detector efficiency each
  (the loophole-free form);
* coincidence substituted - the singles are replaced by the
  polarizer-removed coincidence rates N(t1', inf) and N(inf, t2), which is
  what low-efficiency experiments actually record.  With unit efficiency
  the two coincide; below it the substituted form can go positive where
  the true form cannot, which is the detection loophole.

All rate arithmetic is done in counts per second; counts stay integers.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np

from .errors import DuplicateSetting, MissingSetting, ZeroDuration
from .state import (
    EntangledState,
    PolarizerSetting,
    _pair_prob,
    _single_prob,
    pass_absent_probability,
    single_pass_probability,
)

__all__ = [
    "SETTING_LABELS",
    "SETTING_SIGNS",
    "CHMode",
    "AngleQuad",
    "EfficiencyModel",
    "CountRecord",
    "CHResult",
    "ch_true",
    "ch_exp",
    "expected_count_rates",
    "estimate_ch",
]

# Canonical measurement settings, in protocol order, with their signs in
# the CH sum.  t1pinf / inft2 are the polarizer-removed singles stand-ins.
SETTING_LABELS: tuple[str, ...] = (
    "t1t2", "t1t2p", "t1pt2", "t1pt2p", "t1pinf", "inft2",
)
SETTING_SIGNS: dict[str, int] = {
    "t1t2": +1, "t1t2p": -1, "t1pt2": +1, "t1pt2p": +1,
    "t1pinf": -1, "inft2": -1,
}


class CHMode(enum.Enum):
    TRUE_SINGLES = "true-singles"
    COINCIDENCE_SUBSTITUTED = "coincidence-substituted"


@dataclass(frozen=True)
class AngleQuad:
    """The four analyzer angles (radians, wrapped into [0, pi))."""

    theta1: float
    theta2: float
    theta1p: float
    theta2p: float

    def __post_init__(self):
        for name, value in self.__dict__.items():
            if not math.isfinite(value):
                raise ValueError(f"{name} must be finite, got {value}")
            object.__setattr__(self, name, float(value) % math.pi)

    @classmethod
    def from_degrees(cls, theta1: float, theta2: float, theta1p: float,
                     theta2p: float) -> "AngleQuad":
        return cls(*(math.radians(v) for v in (theta1, theta2, theta1p, theta2p)))

    def as_tuple(self) -> tuple[float, float, float, float]:
        return (self.theta1, self.theta2, self.theta1p, self.theta2p)

    def to_degrees(self) -> tuple[float, float, float, float]:
        return tuple(math.degrees(v) for v in self.as_tuple())


@dataclass(frozen=True)
class EfficiencyModel:
    """Detector efficiencies, pair rate and background rates."""

    eta1: float = 1.0
    eta2: float = 1.0
    pair_rate: float = 1.0
    background1: float = 0.0
    background2: float = 0.0

    def __post_init__(self):
        if not (0.0 <= self.eta1 <= 1.0 and 0.0 <= self.eta2 <= 1.0):
            raise ValueError("detector efficiencies must lie in [0, 1]")
        if self.pair_rate < 0.0:
            raise ValueError("pair_rate must be >= 0")
        if self.background1 < 0.0 or self.background2 < 0.0:
            raise ValueError("background rates must be >= 0")


@dataclass(frozen=True)
class CountRecord:
    """Counts accumulated at one setting over one accumulation time."""

    setting: str
    counts: int
    duration: float

    def __post_init__(self):
        if self.setting not in SETTING_LABELS:
            raise ValueError(
                f"unknown setting {self.setting!r}; expected one of "
                f"{', '.join(SETTING_LABELS)}"
            )
        if self.counts < 0:
            raise ValueError(f"counts must be >= 0, got {self.counts}")
        if not self.duration > 0.0:
            raise ZeroDuration(
                f"duration must be > 0 s, got {self.duration} for "
                f"{self.setting!r}"
            )

    @property
    def rate(self) -> float:
        return self.counts / self.duration


@dataclass(frozen=True)
class CHResult:
    """CH estimate with Poisson uncertainty and significance."""

    value: float
    std_error: float
    significance: float
    mode: CHMode


def _resolved_pols(quad: AngleQuad, pols: tuple[PolarizerSetting, PolarizerSetting]):
    """Polarizer settings for the four coincidence configurations."""
    pol1, pol2 = pols
    return {
        "t1t2": (pol1.at(quad.theta1), pol2.at(quad.theta2)),
        "t1t2p": (pol1.at(quad.theta1), pol2.at(quad.theta2p)),
        "t1pt2": (pol1.at(quad.theta1p), pol2.at(quad.theta2)),
        "t1pt2p": (pol1.at(quad.theta1p), pol2.at(quad.theta2p)),
    }


def _coincidence_bracket(state: EntangledState, quad: AngleQuad,
                         pols: tuple[PolarizerSetting, PolarizerSetting]) -> float:
    pairs = _resolved_pols(quad, pols)
    f2, re2f = state.f_abs2, 2.0 * state.f_re
    total = 0.0
    for label, (p1, p2) in pairs.items():
        p = _pair_prob(f2, re2f, p1.theta, p2.theta,
                       p1.eps_par, p1.eps_perp, p2.eps_par, p2.eps_perp)
        total += SETTING_SIGNS[label] * float(p)
    return total


def ch_true(state: EntangledState, quad: AngleQuad,
            pols: tuple[PolarizerSetting, PolarizerSetting],
            eff: EfficiencyModel) -> float:
    """CH rate (per second) with genuine singles terms.

    Coincidences carry eta1*eta2; each singles term carries only its own
    detector's efficiency, which is what makes this form loophole-free.
    """
    pol1, pol2 = pols
    bracket = _coincidence_bracket(state, quad, pols)
    s1 = single_pass_probability(state, pol1.at(quad.theta1p), 1)
    s2 = single_pass_probability(state, pol2.at(quad.theta2), 2)
    r = eff.pair_rate
    return (r * eff.eta1 * eff.eta2 * bracket
            - r * eff.eta1 * s1 - r * eff.eta2 * s2)


def ch_exp(state: EntangledState, quad: AngleQuad,
           pols: tuple[PolarizerSetting, PolarizerSetting],
           eff: EfficiencyModel) -> float:
    """CH rate (per second) with polarizer-removed coincidences as singles.

    The substituted terms N(t1', inf) and N(inf, t2) are coincidence rates,
    so they carry eta1*eta2 like the other four.
    """
    pol1, pol2 = pols
    bracket = _coincidence_bracket(state, quad, pols)
    a1 = pass_absent_probability(state, pol1.at(quad.theta1p), 1)
    a2 = pass_absent_probability(state, pol2.at(quad.theta2), 2)
    return eff.pair_rate * eff.eta1 * eff.eta2 * (bracket - a1 - a2)


def expected_count_rates(state: EntangledState, quad: AngleQuad,
                         pols: tuple[PolarizerSetting, PolarizerSetting],
                         eff: EfficiencyModel,
                         window: float | None = None) -> dict[str, float]:
    """Expected coincidence rate (per second) at each of the six settings.

    When a coincidence window is given, uncorrelated-event accidentals
    R1 * R2 * w are added to each setting, with R1/R2 the per-detector
    singles rates there (signal plus background).  Backgrounds enter only
    through that accidental term.
    """
    pol1, pol2 = pols
    f2, re2f = state.f_abs2, 2.0 * state.f_re
    r, e1, e2 = eff.pair_rate, eff.eta1, eff.eta2

    def one_arm(pol, theta):
        # per-pair pass probability and detector singles rate for one arm;
        # theta None means the polarizer is removed (everything passes)
        if theta is None:
            return 1.0
        p = pol.at(theta)
        return float(_single_prob(f2, p.theta, p.eps_par, p.eps_perp))

    placements = {
        "t1t2": (quad.theta1, quad.theta2),
        "t1t2p": (quad.theta1, quad.theta2p),
        "t1pt2": (quad.theta1p, quad.theta2),
        "t1pt2p": (quad.theta1p, quad.theta2p),
        "t1pinf": (quad.theta1p, None),
        "inft2": (None, quad.theta2),
    }
    rates: dict[str, float] = {}
    for label, (t1, t2) in placements.items():
        if t1 is None:
            signal = e1 * e2 * r * one_arm(pol2, t2)
        elif t2 is None:
            signal = e1 * e2 * r * one_arm(pol1, t1)
        else:
            p1, p2 = pol1.at(t1), pol2.at(t2)
            signal = e1 * e2 * r * float(
                _pair_prob(f2, re2f, p1.theta, p2.theta,
                           p1.eps_par, p1.eps_perp, p2.eps_par, p2.eps_perp)
            )
        if window is not None:
            r1 = e1 * r * one_arm(pol1, t1) + eff.background1
            r2 = e2 * r * one_arm(pol2, t2) + eff.background2
            signal += r1 * r2 * window
        rates[label] = signal
    return rates


def estimate_ch(records: list[CountRecord] | tuple[CountRecord, ...],
                mode: CHMode = CHMode.COINCIDENCE_SUBSTITUTED) -> CHResult:
    """CH estimate from the six canonical count records.

    value      = sum of signed rates counts_i / duration_i
    std_error  = sqrt(sum counts_i / duration_i^2)   (independent Poisson)
    significance = value / std_error, defined as 0 when std_error is 0.
    """
    by_setting: dict[str, CountRecord] = {}
    for rec in records:
        if rec.setting in by_setting:
            raise DuplicateSetting(f"setting {rec.setting!r} appears twice")
        by_setting[rec.setting] = rec
    missing = [s for s in SETTING_LABELS if s not in by_setting]
    if missing:
        raise MissingSetting(f"missing settings: {', '.join(missing)}")

    value = 0.0
    variance = 0.0
    for label in SETTING_LABELS:
        rec = by_setting[label]
        value += SETTING_SIGNS[label] * rec.rate
        variance += rec.counts / (rec.duration * rec.duration)
    std_error = math.sqrt(variance)
    significance = value / std_error if std_error > 0.0 else 0.0
    return CHResult(value=value, std_error=std_error,
                    significance=significance, mode=mode)


def ch_tensor(state: EntangledState,
              pols: tuple[PolarizerSetting, PolarizerSetting],
              eff: EfficiencyModel, mode: CHMode,
              theta1: np.ndarray, theta2: np.ndarray,
              theta1p: np.ndarray, theta2p: np.ndarray) -> np.ndarray:
    """CH rates on the outer product of four angle axes.

    Returns an array of shape (len(theta1), len(theta2), len(theta1p),
    len(theta2p)); used for landscape sampling and grid verification.
    """
    pol1, pol2 = pols
    f2, re2f = state.f_abs2, 2.0 * state.f_re
    e = (pol1.eps_par, pol1.eps_perp, pol2.eps_par, pol2.eps_perp)
    t1 = np.asarray(theta1, dtype=float)
    t2 = np.asarray(theta2, dtype=float)
    t1p = np.asarray(theta1p, dtype=float)
    t2p = np.asarray(theta2p, dtype=float)

    c_12 = _pair_prob(f2, re2f, t1[:, None], t2[None, :], *e)
    c_12p = _pair_prob(f2, re2f, t1[:, None], t2p[None, :], *e)
    c_1p2 = _pair_prob(f2, re2f, t1p[:, None], t2[None, :], *e)
    c_1p2p = _pair_prob(f2, re2f, t1p[:, None], t2p[None, :], *e)

    # assemble on axes (i, j, k, l) = (t1, t2, t1p, t2p)
    bracket = (c_12[:, :, None, None]
               - c_12p[:, None, None, :]
               + c_1p2.T[None, :, :, None]
               + c_1p2p[None, None, :, :])

    r, e1, e2 = eff.pair_rate, eff.eta1, eff.eta2
    if mode is CHMode.TRUE_SINGLES:
        s1 = _single_prob(f2, t1p, pol1.eps_par, pol1.eps_perp)
        s2 = _single_prob(f2, t2, pol2.eps_par, pol2.eps_perp)
        return (r * e1 * e2 * bracket
                - r * e1 * s1[None, None, :, None]
                - r * e2 * s2[None, :, None, None])
    a1 = _single_prob(f2, t1p, pol1.eps_par, pol1.eps_perp)
    a2 = _single_prob(f2, t2, pol2.eps_par, pol2.eps_perp)
    return r * e1 * e2 * (bracket - a1[None, None, :, None]
                          - a2[None, :, None, None])

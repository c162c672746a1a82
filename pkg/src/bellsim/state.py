"""Two-photon polarization state and analyzer pass probabilities.

The source emits photon pairs in the non-maximally entangled state

    |psi> = (|HH> + f |VV>) / sqrt(1 + |f|^2)

which is maximally entangled at f = 1 and a product state at f = 0.

Angle convention (used by every module in this package): analyzer angles
are measured from the vertical (V) axis, so an analyzer at theta = 0
transmits V and blocks H, and the |HH> component passes an analyzer with
amplitude-squared sin^2(theta).

A lossy analyzer transmits the field component along its axis with
probability eps_par and the orthogonal component with probability
eps_perp.  The two transmission paths of each analyzer add incoherently
(the analyzer acts as a two-outcome POVM on its photon), which keeps every
joint and marginal probability inside [0, 1] for arbitrary per-arm
transmissions.  The interference between the |HH> and |VV> amplitudes
survives with the coefficient

    (f + f*) (e1_par e2_par + e1_perp e2_perp - e1_par e2_perp - e1_perp e2_par)

multiplying sin(t1) cos(t1) sin(t2) cos(t2).  Only Re f enters, so a
complex entanglement parameter is supported throughout.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import (
    DegenerateCurve,
    EntanglementOutOfRange,
    NonFiniteInput,
    PolarizerAbsent,
)

__all__ = [
    "EntangledState",
    "PolarizerSetting",
    "JointOutcomeDistribution",
    "validate_state",
    "joint_pass_probability",
    "joint_outcome_distribution",
    "single_pass_probability",
    "pass_absent_probability",
    "visibility",
    "visibility_scan",
]


@dataclass(frozen=True)
class EntangledState:
    """Entanglement parameter f of the |HH> + f|VV> state.

    Instances are always valid: construction rejects non-finite values and
    |f| > 1 (such states are a relabeled H/V basis, not new physics).
    """

    f_re: float
    f_im: float = 0.0

    def __post_init__(self):
        if not (math.isfinite(self.f_re) and math.isfinite(self.f_im)):
            raise NonFiniteInput(
                f"entanglement parameter must be finite, got "
                f"({self.f_re}, {self.f_im})"
            )
        if math.hypot(self.f_re, self.f_im) > 1.0:
            raise EntanglementOutOfRange(
                f"|f| = {math.hypot(self.f_re, self.f_im):.6g} > 1; swap the "
                "H/V labels and use 1/f instead"
            )

    @property
    def f(self) -> complex:
        return complex(self.f_re, self.f_im)

    @property
    def f_abs2(self) -> float:
        """|f|^2."""
        return self.f_re * self.f_re + self.f_im * self.f_im

    @property
    def normalization(self) -> float:
        """Probability normalization 1 / (1 + |f|^2)."""
        return 1.0 / (1.0 + self.f_abs2)


def validate_state(f_re: float, f_im: float = 0.0) -> EntangledState:
    """Build an EntangledState from raw components, enforcing invariants."""
    return EntangledState(float(f_re), float(f_im))


_ABSENT_SENTINEL = object()


@dataclass(frozen=True)
class PolarizerSetting:
    """One analyzer: either present at an angle or removed from the beam.

    theta is in radians from the vertical axis.  eps_par / eps_perp are the
    intensity transmissions for light polarized along / orthogonal to the
    analyzer axis, with 0 <= eps_perp <= eps_par <= 1.  The removed
    ("infinity") variant carries no angle or transmissions.
    """

    theta: float | None = None
    eps_par: float | None = None
    eps_perp: float | None = None

    def __post_init__(self):
        if self.theta is None:
            if self.eps_par is not None or self.eps_perp is not None:
                raise ValueError("a removed polarizer carries no transmissions")
            return
        if not math.isfinite(self.theta):
            raise NonFiniteInput(f"polarizer angle must be finite, got {self.theta}")
        if self.eps_par is None or self.eps_perp is None:
            raise ValueError("a present polarizer needs both transmissions")
        if not (0.0 <= self.eps_perp <= self.eps_par <= 1.0):
            raise ValueError(
                f"transmissions must satisfy 0 <= eps_perp <= eps_par <= 1, "
                f"got eps_par={self.eps_par}, eps_perp={self.eps_perp}"
            )

    @classmethod
    def present(cls, theta: float, eps_par: float = 1.0,
                eps_perp: float = 0.0) -> "PolarizerSetting":
        return cls(float(theta), float(eps_par), float(eps_perp))

    @classmethod
    def absent(cls) -> "PolarizerSetting":
        return cls()

    @property
    def is_present(self) -> bool:
        return self.theta is not None

    def at(self, theta: float) -> "PolarizerSetting":
        """Same transmissions, rotated to a new angle."""
        if not self.is_present:
            raise PolarizerAbsent("cannot rotate a removed polarizer")
        return PolarizerSetting(float(theta), self.eps_par, self.eps_perp)


@dataclass(frozen=True)
class JointOutcomeDistribution:
    """Probabilities of the four (pass/block, pass/block) outcomes per pair."""

    p_pp: float
    p_pb: float
    p_bp: float
    p_bb: float

    def as_tuple(self) -> tuple[float, float, float, float]:
        return (self.p_pp, self.p_pb, self.p_bp, self.p_bb)

    @property
    def total(self) -> float:
        return self.p_pp + self.p_pb + self.p_bp + self.p_bb


def _require_present(pol: PolarizerSetting, which: str) -> None:
    if not pol.is_present:
        raise PolarizerAbsent(
            f"{which} polarizer is removed; use pass_absent_probability for "
            "the wide-open arm"
        )


def _pair_prob(f_abs2, re2f, t1, t2, e1p, e1x, e2p, e2x):
    """Joint pass probability; accepts scalars or numpy arrays for angles.

    Incoherent sum over the four (aligned/orthogonal) transmission paths of
    the two analyzers, with the HH/VV interference carried by the
    path-weight difference.  Normalized by 1 + |f|^2.
    """
    s1 = np.sin(t1) ** 2
    c1 = np.cos(t1) ** 2
    s2 = np.sin(t2) ** 2
    c2 = np.cos(t2) ** 2
    cross = np.sin(t1) * np.cos(t1) * np.sin(t2) * np.cos(t2)
    hh = (e1p * s1 + e1x * c1) * (e2p * s2 + e2x * c2)
    vv = (e1p * c1 + e1x * s1) * (e2p * c2 + e2x * s2)
    interference = (e1p * e2p + e1x * e2x - e1p * e2x - e1x * e2p) * cross
    return (hh + f_abs2 * vv + re2f * interference) / (1.0 + f_abs2)


def _single_prob(f_abs2, t, ep, ex):
    """Marginal pass probability of one arm (scalar or array angles)."""
    s = np.sin(t) ** 2
    c = np.cos(t) ** 2
    return (ep * (s + f_abs2 * c) + ex * (c + f_abs2 * s)) / (1.0 + f_abs2)


def joint_pass_probability(state: EntangledState, pol1: PolarizerSetting,
                           pol2: PolarizerSetting) -> float:
    """Probability per emitted pair that both photons pass their analyzers."""
    _require_present(pol1, "arm-1")
    _require_present(pol2, "arm-2")
    return float(
        _pair_prob(state.f_abs2, 2.0 * state.f_re, pol1.theta, pol2.theta,
                   pol1.eps_par, pol1.eps_perp, pol2.eps_par, pol2.eps_perp)
    )


def single_pass_probability(state: EntangledState, pol: PolarizerSetting,
                            arm: int = 1) -> float:
    """Probability per emitted pair that the photon on one arm passes.

    The state is symmetric under arm exchange, so the arm index only
    selects which polarizer the caller is describing.
    """
    if arm not in (1, 2):
        raise ValueError(f"arm must be 1 or 2, got {arm}")
    _require_present(pol, f"arm-{arm}")
    return float(_single_prob(state.f_abs2, pol.theta, pol.eps_par, pol.eps_perp))


def pass_absent_probability(state: EntangledState, pol: PolarizerSetting,
                            arm: int = 1) -> float:
    """Pass probability on one arm while the opposite arm is wide open.

    Removing the other polarizer transmits that photon unconditionally, so
    per emitted pair this equals the single-arm marginal.  Detector
    efficiencies are applied downstream.
    """
    return single_pass_probability(state, pol, arm)


def joint_outcome_distribution(state: EntangledState, pol1: PolarizerSetting,
                               pol2: PolarizerSetting) -> JointOutcomeDistribution:
    """Full (pass/block) x (pass/block) distribution per emitted pair."""
    p_pp = joint_pass_probability(state, pol1, pol2)
    p1 = single_pass_probability(state, pol1, 1)
    p2 = single_pass_probability(state, pol2, 2)
    return JointOutcomeDistribution(
        p_pp=p_pp,
        p_pb=p1 - p_pp,
        p_bp=p2 - p_pp,
        p_bb=1.0 - p1 - p2 + p_pp,
    )


def _curve_coefficients(state: EntangledState, pol1: PolarizerSetting,
                        eps2_par: float, eps2_perp: float):
    """Coefficients (a, b, c) of the arm-2 scan curve.

    As theta2 varies the coincidence probability is the quadratic form
    a sin^2 + b cos^2 + c sin cos, recovered exactly from three angles.
    """
    _require_present(pol1, "arm-1")
    args = (state.f_abs2, 2.0 * state.f_re, pol1.theta)
    eps = (pol1.eps_par, pol1.eps_perp, eps2_par, eps2_perp)
    b = _pair_prob(args[0], args[1], args[2], 0.0, *eps)
    a = _pair_prob(args[0], args[1], args[2], 0.5 * np.pi, *eps)
    n45 = _pair_prob(args[0], args[1], args[2], 0.25 * np.pi, *eps)
    c = 2.0 * n45 - a - b
    return float(a), float(b), float(c)


def visibility(state: EntangledState, pol1: PolarizerSetting,
               eps2_par: float, eps2_perp: float) -> float:
    """Visibility (Nmax - Nmin) / (Nmax + Nmin) of the arm-2 scan curve.

    The curve is the quadratic form a sin^2 + b cos^2 + c sin cos in
    theta2; its extrema over the scan are the eigenvalues of the 2x2 form,
    so Nmax + Nmin = a + b and Nmax - Nmin = sqrt((a - b)^2 + c^2).
    """
    a, b, c = _curve_coefficients(state, pol1, eps2_par, eps2_perp)
    total = a + b
    if total <= 0.0:
        raise DegenerateCurve(
            "coincidence curve is identically zero (Nmax + Nmin = 0)"
        )
    v = math.hypot(a - b, c) / total
    return min(max(v, 0.0), 1.0)


def visibility_scan(state: EntangledState, pol1: PolarizerSetting,
                    eps2_par: float, eps2_perp: float,
                    points: int = 10_000) -> float:
    """Dense-grid fallback for `visibility` (independent of the analytic
    extremization; used as a cross-check)."""
    _require_present(pol1, "arm-1")
    theta2 = np.linspace(0.0, np.pi, points, endpoint=False)
    curve = _pair_prob(state.f_abs2, 2.0 * state.f_re, pol1.theta, theta2,
                       pol1.eps_par, pol1.eps_perp, eps2_par, eps2_perp)
    top = float(curve.max())
    bottom = float(curve.min())
    if top + bottom <= 0.0:
        raise DegenerateCurve(
            "coincidence curve is identically zero (Nmax + Nmin = 0)"
        )
    return (top - bottom) / (top + bottom)

"""Analyzer-angle optimization and critical detection efficiency.

The CH landscape over the four angles is smooth, cheap to evaluate and has
several symmetry-related global maxima, so the search is a multistart
derivative-free one: a coarse 5^4 screening lattice plus seeded random
starts, each polished by Nelder-Mead, followed by one tight re-polish of
the winner.  Results are reported in a canonical fundamental domain so
identical physics always prints identical angles.

Symmetries quotiented by the canonical form:
* every angle is defined mod pi (a polarizer axis is a line);
* the global reflection theta -> pi - theta of all four angles;
* for |f| = 1 only, a rigid rotation of all four angles (the maximally
  entangled state is isotropic, so only angle differences matter); the
  canonical representative is shifted so theta2' = 0.
The representative returned is the image minimizing the tuple
(theta2', theta1', theta2, theta1) lexicographically.
"""

from __future__ import annotations

import math

import numpy as np
from scipy.optimize import minimize

from .ch import AngleQuad, CHMode, EfficiencyModel, ch_tensor
from .errors import NoViolationAtUnitEfficiency
from .state import EntangledState, PolarizerSetting

__all__ = [
    "maximize_ch",
    "critical_efficiency",
    "ch_landscape",
    "canonicalize_quad",
    "VIOLATION_THRESHOLD",
]

# CH above this counts as a violation; separable states evaluate to zero up
# to roundoff, genuinely violating ones to >= 1e-4 per pair.
VIOLATION_THRESHOLD = 1e-9

_TIE_TOLERANCE = 1e-10


def _evaluator(state, pols, eff, mode):
    """Closure computing CH from raw angles; hot path of the search.

    Inlines the probability formulas (plain math, no dataclasses) because
    Nelder-Mead evaluates it ~10^5 times per maximization.  Agrees with
    ch_true / ch_exp to machine precision.
    """
    pol1, pol2 = pols
    f2, re2f = state.f_abs2, 2.0 * state.f_re
    e1p, e1x = pol1.eps_par, pol1.eps_perp
    e2p, e2x = pol2.eps_par, pol2.eps_perp
    norm = 1.0 / (1.0 + f2)
    icoef = re2f * (e1p * e2p + e1x * e2x - e1p * e2x - e1x * e2p)
    r, eta1, eta2 = eff.pair_rate, eff.eta1, eff.eta2
    sin, cos = math.sin, math.cos

    def pair(t1, t2):
        s1, c1, s2, c2 = sin(t1), cos(t1), sin(t2), cos(t2)
        s1q, c1q, s2q, c2q = s1 * s1, c1 * c1, s2 * s2, c2 * c2
        hh = (e1p * s1q + e1x * c1q) * (e2p * s2q + e2x * c2q)
        vv = (e1p * c1q + e1x * s1q) * (e2p * c2q + e2x * s2q)
        return (hh + f2 * vv + icoef * s1 * c1 * s2 * c2) * norm

    def single(t, ep, ex):
        sq = sin(t) ** 2
        cq = 1.0 - sq
        return (ep * (sq + f2 * cq) + ex * (cq + f2 * sq)) * norm

    if mode is CHMode.TRUE_SINGLES:
        def evaluate(q):
            t1, t2, t1p, t2p = q
            bracket = pair(t1, t2) - pair(t1, t2p) + pair(t1p, t2) + pair(t1p, t2p)
            return (r * eta1 * eta2 * bracket
                    - r * eta1 * single(t1p, e1p, e1x)
                    - r * eta2 * single(t2, e2p, e2x))
    else:
        def evaluate(q):
            t1, t2, t1p, t2p = q
            bracket = pair(t1, t2) - pair(t1, t2p) + pair(t1p, t2) + pair(t1p, t2p)
            return r * eta1 * eta2 * (bracket - single(t1p, e1p, e1x)
                                      - single(t2, e2p, e2x))

    return evaluate


_HALF_PI = 0.5 * math.pi


def _symmetry_level(state: EntangledState,
                    pols: tuple[PolarizerSetting, PolarizerSetting] | None):
    """Which invariances of the CH functional apply to this configuration.

    On the doubled-angle circle u = (cos 2t, sin 2t) the CH rate is
    a1*a2*2 + b1*b2*[u1.D(u2 - u2') + u1'.D(u2 + u2')] plus linear terms
    proportional to lam*(1 - 2*a), with a = (eps_par + eps_perp)/2,
    b = (eps_par - eps_perp)/2, D = diag(1, mu), lam = (1-|f|^2)/(1+|f|^2)
    and mu = 2 Re f / (1+|f|^2).  The global reflection always holds; the
    quarter-turn and primed/unprimed swaps additionally need the linear
    terms to vanish (lam = 0 or complementary transmissions); a rigid
    rotation of all angles needs mu = 1 as well.
    """
    f2 = state.f_abs2
    lam = (1.0 - f2) / (1.0 + f2)
    mu = 2.0 * state.f_re / (1.0 + f2)
    if pols is None:
        complementary1 = complementary2 = True
        b1 = b2 = 0.5
    else:
        pol1, pol2 = pols
        complementary1 = abs(pol1.eps_par + pol1.eps_perp - 1.0) < 1e-12
        complementary2 = abs(pol2.eps_par + pol2.eps_perp - 1.0) < 1e-12
        b1 = 0.5 * (pol1.eps_par - pol1.eps_perp)
        b2 = 0.5 * (pol2.eps_par - pol2.eps_perp)
    linear_vanishes = (abs(lam) < 1e-12
                       or ((complementary1 or abs(lam * b2) < 1e-12)
                           and (complementary2 or abs(lam * b1) < 1e-12)))
    rotational = linear_vanishes and abs(mu - 1.0) < 1e-9
    return linear_vanishes, rotational


def _orbit(angles: np.ndarray, swaps: bool, rotational: bool) -> list[np.ndarray]:
    """All images of a quad under the applicable symmetry subgroup."""

    def reflect(q):
        return (-q) % math.pi

    def quarter(q):
        return (q + _HALF_PI) % math.pi

    def swap2(q):  # exchange t2 <-> t2' and advance t2, t1', t2' a quarter turn
        return np.array([q[0], q[3] + _HALF_PI, q[2] + _HALF_PI,
                         q[1] + _HALF_PI]) % math.pi

    def swap1(q):  # exchange t1 <-> t1' and advance t2' a quarter turn
        return np.array([q[2], q[1], q[0], q[3] + _HALF_PI]) % math.pi

    generators = [reflect]
    if swaps:
        generators += [quarter, swap2, swap1]
    seen = {tuple(np.round(angles % math.pi, 12))}
    frontier = [angles % math.pi]
    images = [angles % math.pi]
    while frontier:
        q = frontier.pop()
        for g in generators:
            img = g(q)
            key = tuple(np.round(img, 12))
            if key not in seen:
                seen.add(key)
                frontier.append(img)
                images.append(img)
    if rotational:
        # a rigid rotation is a symmetry; anchor every image at t2' = 0
        images = [(img - img[3]) % math.pi for img in images]
    return images


def _canonical_key(img: np.ndarray) -> tuple:
    # primed angles first (the published quads anchor t2' at zero); keys are
    # quantized well below the inter-image spacing but above polish noise,
    # so equivalent candidates compare equal and list order (deterministic
    # starts first) breaks the tie identically for every seed
    rounded = np.round(img, 3)
    return (rounded[3], rounded[2], rounded[1], rounded[0])


def canonicalize_quad(quad: AngleQuad, state: EntangledState,
                      pols: tuple[PolarizerSetting, PolarizerSetting] | None = None,
                      ) -> AngleQuad:
    """Canonical representative of a quad under the documented symmetries.

    The representative minimizes (theta2', theta1', theta2, theta1)
    lexicographically over the orbit.  Quads related by a symmetry of the
    configuration canonicalize to the same angles, so reports and tests
    are deterministic.
    """
    swaps, rotational = _symmetry_level(state, pols)
    images = _orbit(np.array(quad.as_tuple(), dtype=float), swaps, rotational)
    best = min(images, key=_canonical_key)
    return AngleQuad(*best)


def _reduced_parameters(state, pols, eff, mode):
    pol1, pol2 = pols
    f2 = state.f_abs2
    lam = (1.0 - f2) / (1.0 + f2)
    mu = 2.0 * state.f_re / (1.0 + f2)
    a1 = 0.5 * (pol1.eps_par + pol1.eps_perp)
    b1 = 0.5 * (pol1.eps_par - pol1.eps_perp)
    a2 = 0.5 * (pol2.eps_par + pol2.eps_perp)
    b2 = 0.5 * (pol2.eps_par - pol2.eps_perp)
    e1, e2 = eff.eta1, eff.eta2
    bilinear = e1 * e2 * b1 * b2
    if mode is CHMode.TRUE_SINGLES:
        const = 2.0 * e1 * e2 * a1 * a2 - e1 * a1 - e2 * a2
        m_x_offset = e1 * lam * b1 * (1.0 - 2.0 * e2 * a2)
        c2_coef = e2 * lam * b2 * (1.0 - 2.0 * e1 * a1)
    else:
        const = e1 * e2 * (2.0 * a1 * a2 - a1 - a2)
        m_x_offset = e1 * e2 * lam * b1 * (1.0 - 2.0 * a2)
        c2_coef = e1 * e2 * lam * b2 * (1.0 - 2.0 * a1)
    return lam, mu, bilinear, const, m_x_offset, c2_coef


def _structured_start(state, pols, eff, mode, grid: int = 360) -> np.ndarray:
    """Deterministic start from the exact two-angle reduction.

    On the doubled-angle circle u(t) = (cos 2t, sin 2t) the CH rate is
    linear in u1 and u1', so for fixed (t2, t2') the optimal arm-1 vectors
    are closed-form and the search collapses to two dimensions.  A dense
    grid plus one local polish over (t2, t2') then pins the global optimum
    structure even when its attraction basin is tiny (weakly entangled
    states near the critical efficiency), where blind multistart misses it.
    """
    lam, mu, bilinear, const, m_x_offset, c2_coef = _reduced_parameters(
        state, pols, eff, mode)
    rate = eff.pair_rate

    def reduced_value(t2, t2p):
        c2, s2 = np.cos(2.0 * t2), np.sin(2.0 * t2)
        c2p, s2p = np.cos(2.0 * t2p), np.sin(2.0 * t2p)
        dv = np.hypot(c2 - c2p, mu * (s2 - s2p))
        m_x = bilinear * (c2 + c2p) + m_x_offset
        m_y = bilinear * mu * (s2 + s2p)
        return rate * (const + bilinear * dv + np.hypot(m_x, m_y)
                       + c2_coef * c2)

    axis = np.linspace(0.0, math.pi, grid, endpoint=False)
    t2g, t2pg = np.meshgrid(axis, axis, indexing="ij")
    values = reduced_value(t2g, t2pg)
    i, j = np.unravel_index(np.argmax(values), values.shape)
    res = minimize(lambda q: -reduced_value(q[0], q[1]),
                   np.array([axis[i], axis[j]]), method="Nelder-Mead",
                   options={"xatol": 1e-10, "fatol": 1e-14,
                            "maxiter": 2000, "maxfev": 4000})
    t2, t2p = res.x

    c2, s2 = math.cos(2.0 * t2), math.sin(2.0 * t2)
    c2p, s2p = math.cos(2.0 * t2p), math.sin(2.0 * t2p)
    v = (c2 - c2p, mu * (s2 - s2p))
    m = (bilinear * (c2 + c2p) + m_x_offset, bilinear * mu * (s2 + s2p))

    def angle_from(vec):
        if math.hypot(*vec) < 1e-15:
            return 0.0
        return 0.5 * math.atan2(vec[1], vec[0]) % math.pi

    return np.array([angle_from(v), t2 % math.pi,
                     angle_from(m), t2p % math.pi])


def _polish(evaluate, start: np.ndarray) -> tuple[float, np.ndarray]:
    res = minimize(lambda q: -evaluate(q), start, method="Nelder-Mead",
                   options={"xatol": 1e-8, "fatol": 1e-12,
                            "maxiter": 2000, "maxfev": 4000})
    return -res.fun, res.x


def _polish_tight(evaluate, start: np.ndarray) -> tuple[float, np.ndarray]:
    # final stage: fresh simplex, tolerances at the double-precision floor
    # (the maximum is quartically flat along one direction, so value
    # resolution is what pins the angles)
    res = minimize(lambda q: -evaluate(q), start, method="Nelder-Mead",
                   options={"xatol": 1e-12, "fatol": 1e-16,
                            "maxiter": 8000, "maxfev": 16000})
    return -res.fun, res.x


def maximize_ch(state: EntangledState,
                pols: tuple[PolarizerSetting, PolarizerSetting],
                eff: EfficiencyModel, mode: CHMode = CHMode.TRUE_SINGLES,
                seed: int = 0, random_starts: int = 24,
                extra_starts: list[tuple[float, float, float, float]] | None = None,
                ) -> tuple[AngleQuad, float]:
    """Global maximum of the CH rate over the four analyzer angles.

    Deterministic for a fixed seed.  The seeded random starts only replace
    the deterministic lattice winner when they beat it by more than the tie
    tolerance, so different seeds agree on the canonical quad whenever they
    find the same optimum.
    """
    evaluate = _evaluator(state, pols, eff, mode)

    axis = np.arange(5) * (math.pi / 5.0)
    lattice = ch_tensor(state, pols, eff, mode, axis, axis, axis, axis)
    flat = lattice.ravel()
    order = np.argsort(flat)[::-1][:40]
    starts = [_structured_start(state, pols, eff, mode)]
    starts += [np.array([axis[i] for i in np.unravel_index(k, lattice.shape)])
               for k in order]

    rng = np.random.default_rng(seed)
    if extra_starts:
        starts.extend(np.array(q, dtype=float) for q in extra_starts)
    starts.extend(rng.uniform(0.0, math.pi, 4) for _ in range(random_starts))

    candidates: list[tuple[float, np.ndarray]] = []
    for start in starts:
        candidates.append(_polish(evaluate, start))

    best_value = max(c[0] for c in candidates)
    # Near-tied candidates are numerically indistinguishable images of the
    # same optimum (the maximum is quartically flat along one direction),
    # so the winner is chosen by canonical angles, not by float noise: this
    # keeps the result identical across seeds.
    tied = [c for c in candidates if c[0] >= best_value - _TIE_TOLERANCE]
    canonical = [
        canonicalize_quad(AngleQuad(*angles), state, pols) for _, angles in tied
    ]
    winner = min(canonical,
                 key=lambda q: _canonical_key(np.array(q.as_tuple())))

    value, angles = _polish_tight(evaluate, np.array(winner.as_tuple()))
    quad = canonicalize_quad(AngleQuad(*angles), state, pols)
    # report the value at the canonical representative (identical up to
    # symmetry; re-evaluating avoids returning a stale objective)
    return quad, evaluate(np.array(quad.as_tuple()))


def critical_efficiency(state: EntangledState,
                        pols: tuple[PolarizerSetting, PolarizerSetting] | None = None,
                        resolution: float = 1e-4, seed: int = 0) -> float:
    """Smallest equal detector efficiency with a true-singles violation.

    Bisects eta in [0, 1] on the predicate max CH > 0, which is monotone in
    eta: the coincidence terms scale as eta^2 and the singles only as eta,
    so raising eta can only help the positive part.  The quad maximizing
    the previous bisection step seeds the next one.
    """
    if pols is None:
        ideal = PolarizerSetting.present(0.0)
        pols = (ideal, ideal)

    def max_ch_at(eta: float, warm: list | None):
        eff = EfficiencyModel(eta1=eta, eta2=eta, pair_rate=1.0)
        quad, value = maximize_ch(state, pols, eff, CHMode.TRUE_SINGLES,
                                  seed=seed, extra_starts=warm)
        return value, quad

    value, quad = max_ch_at(1.0, None)
    if value <= VIOLATION_THRESHOLD:
        raise NoViolationAtUnitEfficiency(
            f"state f = {state.f} has no violating angles even at eta = 1"
        )

    warm = [quad.as_tuple()]
    lo, hi = 0.0, 1.0
    while hi - lo > resolution:
        mid = 0.5 * (lo + hi)
        value, quad = max_ch_at(mid, warm)
        if value > VIOLATION_THRESHOLD:
            hi = mid
            warm = [quad.as_tuple()]
        else:
            lo = mid
    return 0.5 * (lo + hi)


def ch_landscape(state: EntangledState,
                 pols: tuple[PolarizerSetting, PolarizerSetting],
                 eff: EfficiencyModel, mode: CHMode, grid_density: int,
                 theta1p: float, theta2p: float) -> tuple[np.ndarray, np.ndarray]:
    """CH sampled on a (theta1, theta2) grid with theta1', theta2' fixed.

    Returns (axis, values) with values[i, j] = CH(axis[i], axis[j],
    theta1p, theta2p), row-major.  Intended as plot-ready diagnostic data.
    """
    if grid_density < 2:
        raise ValueError(f"grid_density must be >= 2, got {grid_density}")
    axis = np.linspace(0.0, math.pi, grid_density, endpoint=False)
    values = ch_tensor(state, pols, eff, mode, axis, axis,
                       np.array([theta1p]), np.array([theta2p]))[:, :, 0, 0]
    return axis, values

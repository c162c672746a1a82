"""Event-level simulation of the coincidence-counting experiment.

Pairs are emitted as a homogeneous Poisson process; each pair draws its
(pass/block, pass/block) outcome from the closed-form joint distribution;
passing photons are thinned by detector efficiency, optionally jittered,
merged with Poisson dark counts and timestamped; coincidences are then
counted by a greedy one-shot nearest-in-time matcher emulating a
start-stop TAC chain.

Window convention: CoincidenceLogic.window is the full width w of the
acceptance window, so two events coincide when |t1 - t2| <= w/2 and
uncorrelated streams produce accidentals at the textbook rate R1*R2*w.

Reproducibility: every run is driven by numpy Generators derived from the
master seed; the six protocol settings use the spawned children of
numpy.random.SeedSequence(seed) in protocol order, so settings are
statistically independent yet bit-reproducible.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import kernels
from .ch import AngleQuad, CountRecord, SETTING_LABELS
from .errors import UnsortedStream
from .state import (
    EntangledState,
    PolarizerSetting,
    joint_outcome_distribution,
    single_pass_probability,
)

__all__ = [
    "DetectorModel",
    "CoincidenceLogic",
    "EventStream",
    "ProtocolResult",
    "simulate_pair_emissions",
    "apply_measurement",
    "apply_detection",
    "match_coincidences",
    "run_protocol",
    "export_streams",
]


@dataclass(frozen=True)
class DetectorModel:
    """Quantum efficiency, dark-count rate and Gaussian timing jitter."""

    eta: float = 1.0
    dark_rate: float = 0.0
    jitter_sigma: float = 0.0

    def __post_init__(self):
        if not 0.0 <= self.eta <= 1.0:
            raise ValueError(f"eta must lie in [0, 1], got {self.eta}")
        if self.dark_rate < 0.0:
            raise ValueError(f"dark_rate must be >= 0, got {self.dark_rate}")
        if self.jitter_sigma < 0.0:
            raise ValueError(f"jitter_sigma must be >= 0, got {self.jitter_sigma}")


@dataclass(frozen=True)
class CoincidenceLogic:
    """Full window width (seconds) of the one-shot start-stop matcher."""

    window: float = 1e-8

    def __post_init__(self):
        if not self.window > 0.0:
            raise ValueError(f"window must be > 0 s, got {self.window}")


@dataclass(frozen=True)
class EventStream:
    """Sorted detection timestamps of one channel over one run."""

    channel: int
    timestamps: np.ndarray
    duration: float

    def __post_init__(self):
        if self.channel not in (1, 2):
            raise ValueError(f"channel must be 1 or 2, got {self.channel}")
        ts = np.asarray(self.timestamps, dtype=np.float64)
        object.__setattr__(self, "timestamps", ts)
        if ts.size and (np.any(np.diff(ts) < 0.0)):
            raise UnsortedStream(f"channel-{self.channel} timestamps not sorted")
        if ts.size and (ts[0] < 0.0 or ts[-1] > self.duration):
            raise ValueError("timestamps outside [0, duration]")

    def __len__(self) -> int:
        return int(self.timestamps.size)


@dataclass(frozen=True)
class ProtocolResult:
    """Coincidence records plus per-channel singles for the six settings."""

    records: tuple[CountRecord, ...]
    singles: dict[str, tuple[int, int]]
    streams: dict[str, tuple[EventStream, EventStream]] | None = None


def simulate_pair_emissions(pair_rate: float, duration: float, seed) -> np.ndarray:
    """Emission times of a homogeneous Poisson pair process.

    Conditional-uniform sampling: N ~ Poisson(rate * duration), times are N
    sorted uniforms.  Deterministic for a fixed seed.
    """
    if pair_rate < 0.0:
        raise ValueError(f"pair_rate must be >= 0, got {pair_rate}")
    if not duration > 0.0:
        raise ValueError(f"duration must be > 0, got {duration}")
    rng = np.random.default_rng(seed)
    n = rng.poisson(pair_rate * duration)
    return np.sort(rng.uniform(0.0, duration, n))


def apply_measurement(state: EntangledState, pol1: PolarizerSetting,
                      pol2: PolarizerSetting, emissions: np.ndarray,
                      seed) -> tuple[np.ndarray, np.ndarray]:
    """Per-pair (pass, pass) outcomes, i.i.d. from the joint distribution.

    A removed polarizer passes its photon unconditionally.  Returns two
    boolean arrays aligned with the emission times.
    """
    rng = np.random.default_rng(seed)
    n = len(emissions)
    if pol1.is_present and pol2.is_present:
        dist = joint_outcome_distribution(state, pol1, pol2).as_tuple()
    elif pol1.is_present:
        p1 = _marginal(state, pol1)
        dist = (p1, 0.0, 1.0 - p1, 0.0)
    elif pol2.is_present:
        p2 = _marginal(state, pol2)
        dist = (p2, 1.0 - p2, 0.0, 0.0)
    else:
        dist = (1.0, 0.0, 0.0, 0.0)
    edges = np.cumsum(dist)
    outcome = np.searchsorted(edges, rng.random(n), side="right")
    outcome = np.minimum(outcome, 3)  # guard the cumsum != 1.0 roundoff edge
    return outcome < 2, (outcome % 2) == 0


def _marginal(state: EntangledState, pol: PolarizerSetting) -> float:
    return single_pass_probability(state, pol, 1)


def _detect_one(times: np.ndarray, passed: np.ndarray, det: DetectorModel,
                duration: float, channel: int, rng) -> EventStream:
    photon_times = times[passed]
    kept = photon_times[rng.random(photon_times.size) < det.eta]
    if det.jitter_sigma > 0.0 and kept.size:
        kept = kept + rng.normal(0.0, det.jitter_sigma, kept.size)
        kept = np.clip(kept, 0.0, duration)
    n_dark = rng.poisson(det.dark_rate * duration)
    dark = rng.uniform(0.0, duration, n_dark)
    return EventStream(channel, np.sort(np.concatenate([kept, dark])), duration)


def apply_detection(times: np.ndarray, pass1: np.ndarray, pass2: np.ndarray,
                    det1: DetectorModel, det2: DetectorModel,
                    duration: float, seed) -> tuple[EventStream, EventStream]:
    """Thin passing photons by efficiency, add jitter and dark counts.

    Draw order (arm 1 fully, then arm 2) is part of the determinism
    contract.  Jittered timestamps are clipped to [0, duration].
    """
    rng = np.random.default_rng(seed)
    s1 = _detect_one(times, pass1, det1, duration, 1, rng)
    s2 = _detect_one(times, pass2, det2, duration, 2, rng)
    return s1, s2


def match_coincidences(s1: EventStream, s2: EventStream,
                       logic: CoincidenceLogic) -> int:
    """Greedy one-shot pairing count between the two channels.

    Scans both streams in time order; events pair when their separation is
    within half the window width, and each event participates in at most
    one coincidence (start-stop behaviour).  Deterministic.
    """
    t1 = np.asarray(s1.timestamps, dtype=np.float64)
    t2 = np.asarray(s2.timestamps, dtype=np.float64)
    if t1.size and np.any(np.diff(t1) < 0.0):
        raise UnsortedStream("channel-1 stream is not sorted")
    if t2.size and np.any(np.diff(t2) < 0.0):
        raise UnsortedStream("channel-2 stream is not sorted")
    return kernels.match_sorted(t1, t2, 0.5 * logic.window)


def run_protocol(state: EntangledState, quad: AngleQuad,
                 pols: tuple[PolarizerSetting, PolarizerSetting],
                 det1: DetectorModel, det2: DetectorModel,
                 pair_rate: float, duration_per_setting: float,
                 logic: CoincidenceLogic, seed,
                 keep_streams: bool = False) -> ProtocolResult:
    """Simulate the six canonical settings sequentially with equal times.

    Settings run in SETTING_LABELS order, each on its own child of
    SeedSequence(seed), so per-setting results are independent and the
    whole protocol is reproducible bit-for-bit.
    """
    pol1, pol2 = pols
    placements: dict[str, tuple[PolarizerSetting, PolarizerSetting]] = {
        "t1t2": (pol1.at(quad.theta1), pol2.at(quad.theta2)),
        "t1t2p": (pol1.at(quad.theta1), pol2.at(quad.theta2p)),
        "t1pt2": (pol1.at(quad.theta1p), pol2.at(quad.theta2)),
        "t1pt2p": (pol1.at(quad.theta1p), pol2.at(quad.theta2p)),
        "t1pinf": (pol1.at(quad.theta1p), PolarizerSetting.absent()),
        "inft2": (PolarizerSetting.absent(), pol2.at(quad.theta2)),
    }
    children = np.random.SeedSequence(seed).spawn(len(SETTING_LABELS))

    records: list[CountRecord] = []
    singles: dict[str, tuple[int, int]] = {}
    streams: dict[str, tuple[EventStream, EventStream]] = {}
    for label, child in zip(SETTING_LABELS, children):
        p1, p2 = placements[label]
        grandchildren = child.spawn(3)
        times = simulate_pair_emissions(pair_rate, duration_per_setting,
                                        grandchildren[0])
        pass1, pass2 = apply_measurement(state, p1, p2, times, grandchildren[1])
        s1, s2 = apply_detection(times, pass1, pass2, det1, det2,
                                 duration_per_setting, grandchildren[2])
        counts = match_coincidences(s1, s2, logic)
        records.append(CountRecord(label, counts, duration_per_setting))
        singles[label] = (len(s1), len(s2))
        if keep_streams:
            streams[label] = (s1, s2)
    return ProtocolResult(records=tuple(records), singles=singles,
                          streams=streams if keep_streams else None)


def export_streams(streams: tuple[EventStream, EventStream],
                   path: str | Path) -> None:
    """Write both channels as two-column text: channel, timestamp (12
    significant digits), one event per line in time order per channel."""
    with open(path, "w") as fh:
        for stream in streams:
            for t in stream.timestamps:
                fh.write(f"{stream.channel} {t:.12g}\n")

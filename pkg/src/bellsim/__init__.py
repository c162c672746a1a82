"""Toolkit for polarization-entangled two-photon Bell tests.

Closed-form coincidence/singles predictions for the |HH> + f|VV> state
with lossy analyzers, Clauser-Horne analysis in true-singles and
coincidence-substituted form, analyzer-angle optimization, the
Wigner-model detection-rate threshold, and an event-level Monte Carlo of
the full counting experiment.
"""

__version__ = "0.1.0"

from .ch import (
    AngleQuad,
    CHMode,
    CHResult,
    CountRecord,
    EfficiencyModel,
    SETTING_LABELS,
    ch_exp,
    ch_true,
    estimate_ch,
    expected_count_rates,
)
from .errors import BellSimError
from .kernels import KERNEL_BACKEND
from .lhv import (
    ApparatusGeometry,
    Regime,
    classify_regime,
    critical_absorption_time,
    threshold_rate,
)
from .montecarlo import (
    CoincidenceLogic,
    DetectorModel,
    EventStream,
    ProtocolResult,
    apply_detection,
    apply_measurement,
    export_streams,
    match_coincidences,
    run_protocol,
    simulate_pair_emissions,
)
from .optimize import (
    canonicalize_quad,
    ch_landscape,
    critical_efficiency,
    maximize_ch,
)
from .state import (
    EntangledState,
    JointOutcomeDistribution,
    PolarizerSetting,
    joint_outcome_distribution,
    joint_pass_probability,
    pass_absent_probability,
    single_pass_probability,
    validate_state,
    visibility,
    visibility_scan,
)

__all__ = [
    "__version__",
    "AngleQuad", "CHMode", "CHResult", "CountRecord", "EfficiencyModel",
    "SETTING_LABELS", "ch_exp", "ch_true", "estimate_ch",
    "expected_count_rates",
    "BellSimError", "KERNEL_BACKEND",
    "ApparatusGeometry", "Regime", "classify_regime",
    "critical_absorption_time", "threshold_rate",
    "CoincidenceLogic", "DetectorModel", "EventStream", "ProtocolResult",
    "apply_detection", "apply_measurement", "export_streams",
    "match_coincidences", "run_protocol", "simulate_pair_emissions",
    "canonicalize_quad", "ch_landscape", "critical_efficiency", "maximize_ch",
    "EntangledState", "JointOutcomeDistribution", "PolarizerSetting",
    "joint_outcome_distribution", "joint_pass_probability",
    "pass_absent_probability", "single_pass_probability", "validate_state",
    "visibility", "visibility_scan",
]

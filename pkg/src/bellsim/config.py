"""Configuration schema, unit parsing and the reference parameter set.

A run is described by one JSON document with sections state / polarizers /
detectors / protocol / geometry.  Angles cross this boundary in degrees
(radians internally); geometry and time fields accept either bare SI
numbers or strings with a unit suffix ("0.9 cm", "10 ns").
"""

from __future__ import annotations

import hashlib
import json
import math
from dataclasses import dataclass
from pathlib import Path

from .ch import AngleQuad, CHMode, EfficiencyModel, ch_exp
from .errors import ConfigError
from .lhv import ApparatusGeometry
from .montecarlo import CoincidenceLogic, DetectorModel
from .state import EntangledState, PolarizerSetting

__all__ = [
    "RunConfig",
    "parse_quantity",
    "load_config",
    "validate_config",
    "reference_defaults",
    "config_hash",
    "merge_config",
]

_LENGTH_UNITS = {
    "m": 1.0, "cm": 1e-2, "mm": 1e-3, "um": 1e-6, "µm": 1e-6, "nm": 1e-9,
}
_TIME_UNITS = {
    "s": 1.0, "ms": 1e-3, "us": 1e-6, "µs": 1e-6, "ns": 1e-9,
    "ps": 1e-12, "fs": 1e-15,
}


def parse_quantity(value, kind: str, field: str) -> float:
    """Convert a bare SI number or a "number unit" string to SI."""
    units = _LENGTH_UNITS if kind == "length" else _TIME_UNITS
    if isinstance(value, (int, float)) and not isinstance(value, bool):
        return float(value)
    if isinstance(value, str):
        parts = value.split()
        try:
            if len(parts) == 1:
                return float(parts[0])
            if len(parts) == 2 and parts[1] in units:
                return float(parts[0]) * units[parts[1]]
        except ValueError:
            pass
        raise ConfigError(
            f"{field}: cannot parse {value!r} as a {kind} "
            f"(known units: {', '.join(units)})"
        )
    raise ConfigError(f"{field}: expected a number or 'number unit' string")


@dataclass(frozen=True)
class RunConfig:
    """Validated, SI-normalized view of one configuration document."""

    state: EntangledState
    pols: tuple[PolarizerSetting, PolarizerSetting]
    quad: AngleQuad
    eff: EfficiencyModel
    det1: DetectorModel
    det2: DetectorModel
    logic: CoincidenceLogic
    duration_per_setting: float
    accidental_correction: bool
    geometry: ApparatusGeometry | None
    observed_singles_rate: float | None
    raw: dict


def _get(section: dict, field: str, path: str, default=None, required=False):
    if field not in section:
        if required:
            raise ConfigError(f"{path}.{field}: required field is missing")
        return default
    return section[field]


def _number(section: dict, field: str, path: str, lo=None, hi=None,
            default=None, required=False) -> float | None:
    value = _get(section, field, path, default=default, required=required)
    if value is None:
        return None
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ConfigError(f"{path}.{field}: expected a number, got {value!r}")
    value = float(value)
    if not math.isfinite(value):
        raise ConfigError(f"{path}.{field}: must be finite")
    if lo is not None and value < lo:
        raise ConfigError(f"{path}.{field}: must be >= {lo}, got {value}")
    if hi is not None and value > hi:
        raise ConfigError(f"{path}.{field}: must be <= {hi}, got {value}")
    return value


def validate_config(doc: dict) -> RunConfig:
    """Validate a configuration dict, naming the offending field on error."""
    if not isinstance(doc, dict):
        raise ConfigError("top level: expected a JSON object")
    known = {"state", "polarizers", "detectors", "protocol", "geometry"}
    for section in doc:
        if section not in known:
            raise ConfigError(f"{section}: unknown section")

    st = doc.get("state", {})
    try:
        state = EntangledState(
            _number(st, "f_re", "state", default=0.4),
            _number(st, "f_im", "state", default=0.0),
        )
    except ValueError as exc:
        raise ConfigError(f"state: {exc}") from exc

    pol_section = doc.get("polarizers", {})
    pols = []
    for arm in ("arm1", "arm2"):
        sub = pol_section.get(arm, {})
        if not isinstance(sub, dict):
            raise ConfigError(f"polarizers.{arm}: expected an object")
        par = _number(sub, "eps_par", f"polarizers.{arm}", lo=0.0, hi=1.0,
                      default=1.0)
        perp = _number(sub, "eps_perp", f"polarizers.{arm}", lo=0.0, hi=1.0,
                       default=0.0)
        if perp > par:
            raise ConfigError(
                f"polarizers.{arm}.eps_perp: must be <= eps_par "
                f"({perp} > {par})"
            )
        pols.append(PolarizerSetting.present(0.0, par, perp))

    det = doc.get("detectors", {})
    eta1 = _number(det, "eta1", "detectors", lo=0.0, hi=1.0, default=1.0)
    eta2 = _number(det, "eta2", "detectors", lo=0.0, hi=1.0, default=1.0)
    dark1 = _number(det, "dark_rate1", "detectors", lo=0.0, default=0.0)
    dark2 = _number(det, "dark_rate2", "detectors", lo=0.0, default=0.0)
    jitter1 = _number(det, "jitter_sigma1", "detectors", lo=0.0, default=0.0)
    jitter2 = _number(det, "jitter_sigma2", "detectors", lo=0.0, default=0.0)

    proto = doc.get("protocol", {})
    angles = _get(proto, "angles_deg", "protocol", default={})
    if not isinstance(angles, dict):
        raise ConfigError("protocol.angles_deg: expected an object")
    quad_deg = [
        _number(angles, "theta1", "protocol.angles_deg", default=72.24),
        _number(angles, "theta2", "protocol.angles_deg", default=45.0),
        _number(angles, "theta1p", "protocol.angles_deg", default=17.76),
        _number(angles, "theta2p", "protocol.angles_deg", default=0.0),
    ]
    quad = AngleQuad.from_degrees(*quad_deg)
    pair_rate = _number(proto, "pair_rate", "protocol", lo=0.0, default=1.0)
    duration = _number(proto, "duration_per_setting", "protocol", default=1.0)
    if not duration > 0.0:
        raise ConfigError(
            f"protocol.duration_per_setting: must be > 0, got {duration}"
        )
    window = parse_quantity(_get(proto, "coincidence_window", "protocol",
                                 default=1e-8),
                            "time", "protocol.coincidence_window")
    if not window > 0.0:
        raise ConfigError(
            f"protocol.coincidence_window: must be > 0, got {window}"
        )
    accidental = _get(proto, "accidental_correction", "protocol", default=False)
    if not isinstance(accidental, bool):
        raise ConfigError("protocol.accidental_correction: expected a boolean")

    geometry = None
    observed_rate = None
    if "geometry" in doc:
        geo = doc["geometry"]
        if not isinstance(geo, dict):
            raise ConfigError("geometry: expected an object")

        def geo_quantity(field, kind):
            value = _get(geo, field, "geometry", required=True)
            quantity = parse_quantity(value, kind, f"geometry.{field}")
            if not quantity > 0.0:
                raise ConfigError(f"geometry.{field}: must be > 0")
            return quantity

        try:
            geometry = ApparatusGeometry(
                eta=_number(geo, "eta", "geometry", lo=0.0, hi=1.0,
                            required=True),
                focal_F=geo_quantity("focal", "length"),
                active_radius_Rc=geo_quantity("active_radius", "length"),
                distance_d=geo_quantity("distance", "length"),
                wavelength_lambda=geo_quantity("wavelength", "length"),
                coherence_tau=geo_quantity("coherence_time", "time"),
                depth_L=geo_quantity("detector_depth", "length"),
                absorb_T=geo_quantity("absorption_time", "time"),
            )
        except ValueError as exc:
            raise ConfigError(f"geometry: {exc}") from exc
        observed_rate = _number(geo, "observed_singles_rate", "geometry",
                                lo=0.0, default=None)

    return RunConfig(
        state=state,
        pols=(pols[0], pols[1]),
        quad=quad,
        eff=EfficiencyModel(eta1=eta1, eta2=eta2, pair_rate=pair_rate,
                            background1=dark1, background2=dark2),
        det1=DetectorModel(eta=eta1, dark_rate=dark1, jitter_sigma=jitter1),
        det2=DetectorModel(eta=eta2, dark_rate=dark2, jitter_sigma=jitter2),
        logic=CoincidenceLogic(window=window),
        duration_per_setting=duration,
        accidental_correction=accidental,
        geometry=geometry,
        observed_singles_rate=observed_rate,
        raw=doc,
    )


def load_config(path: str | Path) -> RunConfig:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: invalid JSON ({exc})") from exc
    return validate_config(doc)


def merge_config(base: dict, overlay: dict) -> dict:
    """Field-wise deep merge; overlay wins on scalar conflicts."""
    merged = dict(base)
    for key, value in overlay.items():
        if isinstance(value, dict) and isinstance(merged.get(key), dict):
            merged[key] = merge_config(merged[key], value)
        else:
            merged[key] = value
    return merged


# Published coincidence-substituted CH rate the reference pair rate is
# calibrated against (counts per second).
REFERENCE_CH_RATE = 513.0


def reference_defaults() -> dict:
    """Full parameter set of the reference apparatus this model targets.

    f = 0.4 state, eta = 0.51 detectors with <= 50/s dark counts, the
    published analyzer quadruple and the collection geometry.  The pair
    rate is calibrated so the analytic coincidence-substituted CH rate
    equals REFERENCE_CH_RATE, making predictions directly comparable with
    the published counts per second.
    """
    state = EntangledState(0.4, 0.0)
    quad = AngleQuad.from_degrees(72.24, 45.0, 17.76, 0.0)
    ideal = PolarizerSetting.present(0.0)
    per_pair = ch_exp(state, quad, (ideal, ideal),
                      EfficiencyModel(eta1=0.51, eta2=0.51, pair_rate=1.0))
    pair_rate = REFERENCE_CH_RATE / per_pair
    return {
        "state": {"f_re": 0.4, "f_im": 0.0},
        "polarizers": {
            "arm1": {"eps_par": 1.0, "eps_perp": 0.0},
            "arm2": {"eps_par": 1.0, "eps_perp": 0.0},
        },
        "detectors": {
            "eta1": 0.51, "eta2": 0.51,
            "dark_rate1": 50.0, "dark_rate2": 50.0,
            "jitter_sigma1": 0.0, "jitter_sigma2": 0.0,
        },
        "protocol": {
            "angles_deg": {"theta1": 72.24, "theta2": 45.0,
                           "theta1p": 17.76, "theta2p": 0.0},
            "pair_rate": pair_rate,
            "duration_per_setting": 20.0,
            "coincidence_window": "10 ns",
            "accidental_correction": False,
        },
        "geometry": {
            "eta": 0.51,
            "focal": "0.9 cm",
            "active_radius": "1 mm",
            "distance": "0.75 m",
            "wavelength": "711 nm",
            "coherence_time": "420 fs",
            "detector_depth": "30 um",
            "absorption_time": "10 ns",
            "observed_singles_rate": 1e5,
        },
    }


def config_hash(doc: dict) -> str:
    """SHA-256 of the canonical (sorted, compact) JSON encoding."""
    canonical = json.dumps(doc, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(canonical.encode()).hexdigest()

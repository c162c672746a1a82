"""Command-line front end: predict | optimize | threshold | simulate | analyze.

Exit codes: 0 success, 2 configuration error, 3 model/runtime error.
Angles are printed in degrees; all SI values carry their unit in the
header or label.  Machine-readable output is available with
--format json/csv, human tables are the default.
"""

from __future__ import annotations

import argparse
import csv
import datetime as _dt
import io
import json
import sys
from pathlib import Path

from . import __version__
from .ch import (
    CHMode,
    CountRecord,
    SETTING_LABELS,
    ch_exp,
    ch_true,
    estimate_ch,
    expected_count_rates,
)
from .config import (
    RunConfig,
    config_hash,
    load_config,
    merge_config,
    reference_defaults,
    validate_config,
)
from .errors import BellSimError, ConfigError
from .kernels import KERNEL_BACKEND
from .lhv import Regime, classify_regime, critical_absorption_time, threshold_rate
from .montecarlo import export_streams, run_protocol
from .optimize import VIOLATION_THRESHOLD, critical_efficiency, maximize_ch
from .state import visibility

_MODES = {"true": CHMode.TRUE_SINGLES, "exp": CHMode.COINCIDENCE_SUBSTITUTED}


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="bellsim",
        description="Two-photon Bell-test prediction, optimization and "
                    "event-level simulation",
    )
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p: argparse.ArgumentParser, needs_seed: bool = False):
        p.add_argument("--config", type=Path, default=None,
                       help="JSON configuration file")
        p.add_argument("--reference-defaults", action="store_true",
                       help="start from the bundled reference apparatus "
                            "parameter set (a --config overlays it)")
        p.add_argument("--out", type=Path, default=None,
                       help="output file (directory for simulate)")
        p.add_argument("--format", choices=("table", "csv", "json"),
                       default="table")
        if needs_seed:
            p.add_argument("--seed", type=int, default=0)

    p = sub.add_parser("predict", help="expected rates and CH values")
    common(p)

    p = sub.add_parser("optimize", help="CH-maximizing analyzer angles")
    common(p, needs_seed=True)
    p.add_argument("--mode", choices=sorted(_MODES), default="true",
                   help="true: genuine singles terms; exp: polarizer-removed "
                        "coincidences as singles")
    p.add_argument("--critical-efficiency", action="store_true",
                   help="also bisect the smallest violating detector "
                        "efficiency")

    p = sub.add_parser("threshold", help="single-rate bound of the "
                                         "Wigner-model and regime verdict")
    common(p)

    p = sub.add_parser("simulate", help="run the six-setting counting "
                                        "protocol and estimate CH")
    common(p, needs_seed=True)
    p.add_argument("--export-streams", action="store_true",
                   help="also write raw per-setting time tags (needs --out)")

    p = sub.add_parser("analyze", help="CH estimate from a records CSV")
    p.add_argument("records", type=Path, help="CSV with header "
                                              "setting,counts,duration_s")
    p.add_argument("--mode", choices=sorted(_MODES), default="exp")
    p.add_argument("--out", type=Path, default=None)
    p.add_argument("--format", choices=("table", "csv", "json"),
                   default="table")
    return parser


def _load(args) -> tuple[RunConfig, dict]:
    doc: dict = {}
    if getattr(args, "reference_defaults", False):
        doc = reference_defaults()
    if getattr(args, "config", None) is not None:
        try:
            text = Path(args.config).read_text()
        except OSError as exc:
            raise ConfigError(f"cannot read config {args.config}: {exc}")
        try:
            overlay = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ConfigError(f"{args.config}: invalid JSON ({exc})")
        doc = merge_config(doc, overlay) if doc else overlay
    if not doc:
        raise ConfigError("provide --config and/or --reference-defaults")
    return validate_config(doc), doc


def _emit(text: str, out: Path | None) -> None:
    if out is None:
        sys.stdout.write(text if text.endswith("\n") else text + "\n")
    else:
        Path(out).write_text(text if text.endswith("\n") else text + "\n")


def _records_csv(records) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["setting", "counts", "duration_s"])
    for rec in records:
        writer.writerow([rec.setting, rec.counts, rec.duration])
    return buf.getvalue()


def cmd_predict(args) -> int:
    cfg, _ = _load(args)
    window = cfg.logic.window if cfg.accidental_correction else None
    rates = expected_count_rates(cfg.state, cfg.quad, cfg.pols, cfg.eff, window)
    true_value = ch_true(cfg.state, cfg.quad, cfg.pols, cfg.eff)
    exp_value = ch_exp(cfg.state, cfg.quad, cfg.pols, cfg.eff)
    vis = visibility(cfg.state, cfg.pols[0].at(cfg.quad.theta1),
                     cfg.pols[1].eps_par, cfg.pols[1].eps_perp)
    payload = {
        "rates_per_s": rates,
        "ch_true_per_s": true_value,
        "ch_exp_per_s": exp_value,
        "visibility": vis,
        "accidental_correction": cfg.accidental_correction,
    }
    if args.format == "json":
        _emit(json.dumps(payload, indent=2, sort_keys=True), args.out)
    elif args.format == "csv":
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(["setting", "rate_per_s"])
        for label in SETTING_LABELS:
            writer.writerow([label, repr(rates[label])])
        _emit(buf.getvalue(), args.out)
    else:
        lines = ["setting    expected rate (/s)", "-" * 30]
        lines += [f"{label:<10} {rates[label]:14.4f}" for label in SETTING_LABELS]
        lines += [
            "-" * 30,
            f"CH (true singles)   {true_value:12.4f} /s",
            f"CH (substituted)    {exp_value:12.4f} /s",
            f"visibility          {vis:12.6f}",
        ]
        _emit("\n".join(lines), args.out)
    return 0


def cmd_optimize(args) -> int:
    cfg, _ = _load(args)
    mode = _MODES[args.mode]
    quad, value = maximize_ch(cfg.state, cfg.pols, cfg.eff, mode,
                              seed=args.seed)
    violating = value > VIOLATION_THRESHOLD
    eta_crit = None
    if args.critical_efficiency:
        eta_crit = critical_efficiency(cfg.state, cfg.pols, seed=args.seed)
    degrees = quad.to_degrees()
    payload = {
        "quad_deg": dict(zip(("theta1", "theta2", "theta1p", "theta2p"),
                             degrees)),
        "ch_per_s": value,
        "mode": mode.value,
        "violation": violating,
    }
    if eta_crit is not None:
        payload["critical_efficiency"] = eta_crit
    if args.format == "json":
        _emit(json.dumps(payload, indent=2, sort_keys=True), args.out)
    else:
        lines = []
        if violating:
            lines.append(" ".join(f"{d:.2f}" for d in degrees))
            lines.append(f"CH ({mode.value}) = {value:.6g} /s")
        else:
            lines.append("no violation (CH <= 0 at every angle setting)")
        if eta_crit is not None:
            lines.append(f"critical efficiency = {eta_crit:.4f}")
        _emit("\n".join(lines), args.out)
    return 0


def cmd_threshold(args) -> int:
    cfg, _ = _load(args)
    if cfg.geometry is None:
        raise ConfigError("geometry: section is required for threshold")
    if cfg.observed_singles_rate is None:
        raise ConfigError("geometry.observed_singles_rate: required for "
                          "threshold")
    g = cfg.geometry
    rate = threshold_rate(g)
    t_star = critical_absorption_time(g, cfg.observed_singles_rate)
    regime = classify_regime(g, cfg.observed_singles_rate)
    payload = {
        "threshold_rate_per_s": rate,
        "critical_absorption_time_s": t_star,
        "configured_absorption_time_s": g.absorb_T,
        "observed_singles_rate_per_s": cfg.observed_singles_rate,
        "regime": regime.value,
    }
    if args.format == "json":
        _emit(json.dumps(payload, indent=2, sort_keys=True), args.out)
    else:
        _emit("\n".join([
            f"threshold singles rate   {rate:.6g} /s",
            f"observed singles rate    {cfg.observed_singles_rate:.6g} /s",
            f"configured T             {g.absorb_T:.6g} s "
            f"({g.absorb_T * 1e9:.6g} ns)",
            f"critical T*              {t_star:.6g} s "
            f"({t_star * 1e9:.6g} ns)",
            f"verdict                  {regime.value}",
        ]), args.out)
    return 0


def cmd_simulate(args) -> int:
    cfg, doc = _load(args)
    result = run_protocol(cfg.state, cfg.quad, cfg.pols, cfg.det1, cfg.det2,
                          cfg.eff.pair_rate, cfg.duration_per_setting,
                          cfg.logic, args.seed,
                          keep_streams=bool(args.export_streams))
    estimate = estimate_ch(result.records, CHMode.COINCIDENCE_SUBSTITUTED)
    payload = {
        "records": [
            {"setting": r.setting, "counts": r.counts, "duration_s": r.duration}
            for r in result.records
        ],
        "singles": {k: list(v) for k, v in result.singles.items()},
        "ch": {
            "value_per_s": estimate.value,
            "std_error_per_s": estimate.std_error,
            "significance": estimate.significance,
            "mode": estimate.mode.value,
        },
        "seed": args.seed,
    }
    if args.out is not None:
        outdir = Path(args.out)
        outdir.mkdir(parents=True, exist_ok=True)
        (outdir / "records.csv").write_text(_records_csv(result.records))
        (outdir / "result.json").write_text(
            json.dumps(payload, indent=2, sort_keys=True) + "\n")
        manifest = {
            "tool": "bellsim",
            "version": __version__,
            "created": _dt.datetime.now(_dt.timezone.utc).isoformat(),
            "seed": args.seed,
            "config_sha256": config_hash(doc),
            "kernel_backend": KERNEL_BACKEND,
            "outputs": ["records.csv", "result.json"],
        }
        if args.export_streams and result.streams is not None:
            for label, streams in result.streams.items():
                name = f"streams_{label}.txt"
                export_streams(streams, outdir / name)
                manifest["outputs"].append(name)
        (outdir / "manifest.json").write_text(
            json.dumps(manifest, indent=2, sort_keys=True) + "\n")
    if args.format == "json":
        _emit(json.dumps(payload, indent=2, sort_keys=True), None)
    elif args.format == "csv":
        _emit(_records_csv(result.records), None)
    else:
        lines = ["setting    counts      duration (s)", "-" * 38]
        lines += [f"{r.setting:<10} {r.counts:<11d} {r.duration:g}"
                  for r in result.records]
        lines += [
            "-" * 38,
            f"CH = {estimate.value:.2f} +/- {estimate.std_error:.2f} /s "
            f"({estimate.significance:.2f} sigma)",
        ]
        _emit("\n".join(lines), None)
    return 0


def _read_records(path: Path) -> list[CountRecord]:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read records {path}: {exc}")
    reader = csv.DictReader(io.StringIO(text))
    required = {"setting", "counts", "duration_s"}
    if reader.fieldnames is None or not required.issubset(reader.fieldnames):
        raise ConfigError(
            f"{path}: expected CSV header setting,counts,duration_s"
        )
    records = []
    for lineno, row in enumerate(reader, start=2):
        try:
            records.append(CountRecord(
                setting=row["setting"],
                counts=int(row["counts"]),
                duration=float(row["duration_s"]),
            ))
        except (TypeError, ValueError) as exc:
            if isinstance(exc, BellSimError):
                raise
            raise ConfigError(f"{path}:{lineno}: {exc}")
    return records


def cmd_analyze(args) -> int:
    records = _read_records(args.records)
    estimate = estimate_ch(records, _MODES[args.mode])
    payload = {
        "value_per_s": estimate.value,
        "std_error_per_s": estimate.std_error,
        "significance": estimate.significance,
        "mode": estimate.mode.value,
    }
    if args.format == "json":
        _emit(json.dumps(payload, indent=2, sort_keys=True), args.out)
    else:
        _emit(f"CH = {estimate.value:.6g} +/- {estimate.std_error:.6g} /s "
              f"({estimate.significance:.2f} sigma, {estimate.mode.value})",
              args.out)
    return 0


_COMMANDS = {
    "predict": cmd_predict,
    "optimize": cmd_optimize,
    "threshold": cmd_threshold,
    "simulate": cmd_simulate,
    "analyze": cmd_analyze,
}


def main(argv: list[str] | None = None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        return _COMMANDS[args.command](args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except BellSimError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())

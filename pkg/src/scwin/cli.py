"""Command-line front end: config ingestion and subcommands.

A run config is one JSON document binding every module's parameters.
Validation happens before any run and every complaint names the field
path that caused it.  Subcommands: `rate` (design-rate report),
`simulate` (campaign -> metrics.csv), `errdist` (per-block error
histograms of propagation frames), `validate` (config check only).

Exit codes: 0 success, 2 config error, 3 runtime error.  The
SCWIN_WORKERS environment variable sets the default worker count;
workers change wall time only, never output bytes.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from dataclasses import dataclass

from .decoder import WindowConfig
from .errors import ConfigError, NoMatchingFrames
from .lifting import LiftSpec
from .protograph import (
    DopingSpec,
    build_chain,
    design_rate,
    validate_edge_spreading,
)
from .simulator import (
    BurstSpec,
    CampaignConfig,
    errdist_csv,
    errdist_report,
    metrics_csv,
    run_campaign,
    trace_csv,
)

WORKERS_ENV_VAR = "SCWIN_WORKERS"

_MISSING = object()


def _check_type(value, kind, path):
    if kind is float:
        ok = isinstance(value, (int, float)) and not isinstance(value, bool)
    elif kind is int:
        ok = isinstance(value, int) and not isinstance(value, bool)
    else:
        ok = isinstance(value, kind)
    if not ok:
        raise ConfigError(path, f"expected {kind.__name__}, got {type(value).__name__}")
    return kind(value) if kind in (int, float) else value


def _field(doc, key, path, kind, default=_MISSING):
    where = f"{path}.{key}" if path else key
    if key not in doc:
        if default is _MISSING:
            raise ConfigError(where, "missing required field")
        return default
    if doc[key] is None and default is not _MISSING:
        return default
    return _check_type(doc[key], kind, where)


def _reject_unknown(doc, known, path):
    for key in doc:
        if key not in known:
            where = f"{path}.{key}" if path else key
            raise ConfigError(where, "unknown field")


def _optional_int(doc, key, path, default):
    """Integer field where JSON null means 'disabled'."""
    if key not in doc:
        return default
    if doc[key] is None:
        return None
    return _check_type(doc[key], int, f"{path}.{key}")


@dataclass(frozen=True)
class RunConfig:
    """Validated run configuration wrapping the campaign parameters."""

    campaign: CampaignConfig

    def to_document(self) -> dict:
        """Canonical JSON-ready echo; re-ingesting it reproduces self."""
        c = self.campaign
        w = c.window
        burst = None
        if c.burst is not None:
            burst = {
                "start_block": c.burst.start_block,
                "length": c.burst.length,
                "mode": c.burst.mode,
            }
        return {
            "base": c.spreading.base.entries.tolist(),
            "spreading": [comp.tolist() for comp in c.spreading.components],
            "frame_len": c.frame_len,
            "doping": {"kind": c.doping.kind, "positions": list(c.doping.positions)},
            "terminated": c.terminated,
            "lift": {
                "factor": c.lift.factor,
                "method": c.lift.method,
                "seed": c.lift.seed,
            },
            "window": {
                "w_init": w.w_init,
                "w_max": w.w_max,
                "tau": w.tau,
                "theta": w.theta,
                "i_max": w.i_max,
                "update_rule": w.update_rule,
                "min_sum_scale": w.min_sum_scale,
                "early_stop": w.early_stop,
                "llr_clamp": w.llr_clamp,
                "llr_sat": w.llr_sat,
            },
            "campaign": {
                "snr_points_db": list(c.snr_points_db),
                "frames_per_point": c.frames_per_point,
                "master_seed": c.master_seed,
                "max_block_errors": c.max_block_errors,
                "ep_run_threshold": c.ep_run_threshold,
                "rate_override": c.rate_override,
                "burst": burst,
            },
        }


_TOP_FIELDS = (
    "base", "spreading", "frame_len", "doping", "terminated", "lift",
    "window", "campaign",
)
_WINDOW_FIELDS = (
    "w_init", "w_max", "tau", "theta", "i_max", "update_rule",
    "min_sum_scale", "early_stop", "llr_clamp", "llr_sat",
)
_CAMPAIGN_FIELDS = (
    "snr_points_db", "frames_per_point", "master_seed", "max_block_errors",
    "ep_run_threshold", "rate_override", "burst",
)


def _parse_spreading(document):
    base = _field(document, "base", "", list)
    comps = _field(document, "spreading", "", list)
    try:
        return validate_edge_spreading(base, comps)
    except Exception as exc:
        raise ConfigError("spreading", str(exc)) from exc


def _parse_doping(document):
    doc = _field(document, "doping", "", dict, default=None)
    if doc is None:
        return DopingSpec()
    _reject_unknown(doc, ("kind", "positions"), "doping")
    kind = _field(doc, "kind", "doping", str)
    positions = _field(doc, "positions", "doping", list, default=[])
    try:
        return DopingSpec(kind, tuple(positions))
    except ValueError as exc:
        raise ConfigError("doping", str(exc)) from exc


def _parse_lift(document):
    doc = _field(document, "lift", "", dict)
    _reject_unknown(doc, ("factor", "method", "seed"), "lift")
    try:
        return LiftSpec(
            factor=_field(doc, "factor", "lift", int),
            method=_field(doc, "method", "lift", str, default="random_permutation"),
            seed=_field(doc, "seed", "lift", int, default=0),
        )
    except ConfigError:
        raise
    except ValueError as exc:
        raise ConfigError("lift", str(exc)) from exc


def _parse_window(document):
    doc = _field(document, "window", "", dict)
    _reject_unknown(doc, _WINDOW_FIELDS, "window")
    kwargs = dict(w_init=_field(doc, "w_init", "window", int))
    w_max = _optional_int(doc, "w_max", "window", None)
    if w_max is not None:
        kwargs["w_max"] = w_max
    for key, kind in (
        ("tau", int), ("theta", float), ("i_max", int), ("update_rule", str),
        ("min_sum_scale", float), ("early_stop", bool), ("llr_clamp", float),
        ("llr_sat", float),
    ):
        value = _field(doc, key, "window", kind, default=None)
        if value is not None:
            kwargs[key] = value
    try:
        return WindowConfig(**kwargs)
    except ValueError as exc:
        raise ConfigError("window", str(exc)) from exc


def _parse_burst(doc):
    if doc is None:
        return None
    _reject_unknown(doc, ("start_block", "length", "mode"), "campaign.burst")
    try:
        return BurstSpec(
            start_block=_field(doc, "start_block", "campaign.burst", int),
            length=_field(doc, "length", "campaign.burst", int),
            mode=_field(doc, "mode", "campaign.burst", str, default="erase"),
        )
    except ConfigError:
        raise
    except ValueError as exc:
        raise ConfigError("campaign.burst", str(exc)) from exc


def _parse_campaign(document, spreading, doping, lift, window):
    doc = _field(document, "campaign", "", dict)
    _reject_unknown(doc, _CAMPAIGN_FIELDS, "campaign")
    snr = _field(doc, "snr_points_db", "campaign", list)
    for i, s in enumerate(snr):
        _check_type(s, float, f"campaign.snr_points_db[{i}]")
    rate_override = doc.get("rate_override")
    if rate_override is not None:
        rate_override = _check_type(rate_override, float, "campaign.rate_override")
    burst_doc = _field(doc, "burst", "campaign", dict, default=None)
    try:
        return CampaignConfig(
            spreading=spreading,
            frame_len=_field(document, "frame_len", "", int),
            lift=lift,
            window=window,
            snr_points_db=tuple(snr),
            frames_per_point=_field(doc, "frames_per_point", "campaign", int),
            master_seed=_field(doc, "master_seed", "campaign", int, default=0),
            doping=doping,
            terminated=_field(document, "terminated", "", bool, default=True),
            max_block_errors=_optional_int(doc, "max_block_errors", "campaign", 200),
            burst=_parse_burst(burst_doc),
            ep_run_threshold=_field(doc, "ep_run_threshold", "campaign", int, default=5),
            rate_override=rate_override,
        )
    except ConfigError:
        raise
    except ValueError as exc:
        raise ConfigError("campaign", str(exc)) from exc


def parse_run_config(document: dict) -> RunConfig:
    """Validate a config document, naming the offending field on error.

    Raises
    ------
    ConfigError
        Any missing, unknown, ill-typed, or cross-field-invalid entry.
    """
    if not isinstance(document, dict):
        raise ConfigError("<root>", "config document must be a JSON object")
    _reject_unknown(document, _TOP_FIELDS, "")
    spreading = _parse_spreading(document)
    doping = _parse_doping(document)
    lift = _parse_lift(document)
    window = _parse_window(document)
    campaign = _parse_campaign(document, spreading, doping, lift, window)
    try:
        build_chain(spreading, campaign.frame_len, doping=doping,
                    terminated=campaign.terminated)
    except Exception as exc:
        raise ConfigError("doping.positions", str(exc)) from exc
    return RunConfig(campaign=campaign)


def load_run_config(path: str) -> RunConfig:
    try:
        with open(path, "r", encoding="utf-8") as handle:
            document = json.load(handle)
    except OSError as exc:
        raise ConfigError(path, f"cannot read config: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(path, f"invalid JSON: {exc}") from exc
    return parse_run_config(document)


def _apply_overrides(document: dict, args) -> dict:
    campaign = dict(document.get("campaign", {}))
    if args.snr is not None:
        campaign["snr_points_db"] = list(args.snr)
    if args.frames is not None:
        campaign["frames_per_point"] = args.frames
    if args.seed is not None:
        campaign["master_seed"] = args.seed
    out = dict(document)
    out["campaign"] = campaign
    return out


def _resolve_workers(args) -> int:
    if args.workers is not None:
        return args.workers
    raw = os.environ.get(WORKERS_ENV_VAR)
    if raw is None:
        return 1
    try:
        return max(1, int(raw))
    except ValueError as exc:
        raise ConfigError(WORKERS_ENV_VAR, f"not an integer: {raw!r}") from exc


def _rate_lines(config: RunConfig):
    campaign = config.campaign
    chain = build_chain(
        campaign.spreading, campaign.frame_len,
        doping=campaign.doping, terminated=campaign.terminated,
    )
    rates = design_rate(chain)
    rows = (
        ("uncoupled base", rates.uncoupled),
        ("coupled chain", rates.undoped),
        ("with doping", rates.doped),
    )
    lines = [
        f"{label:<15} {str(value):>10} = {float(value):.6f}"
        for label, value in rows
    ]
    lines.append(
        f"doping: {campaign.doping.kind}, d={campaign.doping.count}, "
        f"L={campaign.frame_len}"
    )
    return lines


def cmd_rate(config: RunConfig, args) -> int:
    for line in _rate_lines(config):
        print(line)
    return 0


def _summary_table(metrics) -> str:
    header = (
        f"{'snr_db':>8} {'ber':>12} {'bler':>12} {'fer':>12} "
        f"{'mean_win':>9} {'blk_errs':>9} {'frames':>7}"
    )
    lines = [header]
    for p in metrics.points:
        lines.append(
            f"{p.snr_db:>8.3g} {p.ber:>12.4e} {p.bler:>12.4e} "
            f"{p.frame_error_rate:>12.4e} {p.mean_window_size:>9.3f} "
            f"{p.block_errors:>9} {p.frames:>7}"
        )
    return "\n".join(lines)


def cmd_simulate(config: RunConfig, args) -> int:
    workers = _resolve_workers(args)
    collect = bool(args.trace)
    metrics = run_campaign(config.campaign, workers=workers, collect_frames=collect)
    os.makedirs(args.out, exist_ok=True)
    path = os.path.join(args.out, "metrics.csv")
    with open(path, "w", encoding="utf-8") as handle:
        handle.write(metrics_csv(metrics))
    written = [path]
    if collect:
        for (si, fi), result in sorted(metrics.frame_results.items()):
            if not result.block_error_flags.any():
                continue
            name = f"trace_{si}_{fi}.csv"
            tpath = os.path.join(args.out, name)
            with open(tpath, "w", encoding="utf-8") as handle:
                handle.write(trace_csv(f"{si}_{fi}", result))
            written.append(tpath)
    print(_summary_table(metrics))
    for path in written:
        print(f"wrote {path}")
    return 0


def cmd_errdist(config: RunConfig, args) -> int:
    workers = _resolve_workers(args)
    metrics = run_campaign(config.campaign, workers=workers, collect_frames=True)
    report = errdist_report(
        metrics.frame_results, propagation_only=not args.all_frames
    )
    os.makedirs(args.out, exist_ok=True)
    for (si, fi), rows in sorted(report.items()):
        path = os.path.join(args.out, f"errdist_{si}_{fi}.csv")
        with open(path, "w", encoding="utf-8") as handle:
            handle.write(errdist_csv(rows))
        print(f"wrote {path} ({len(rows)} rows)")
    return 0


def cmd_validate(config: RunConfig, args) -> int:
    campaign = config.campaign
    print(
        f"config ok: L={campaign.frame_len}, M={campaign.lift.factor}, "
        f"doping={campaign.doping.kind}/{campaign.doping.count}, "
        f"w_init={campaign.window.w_init}, "
        f"{len(campaign.snr_points_db)} SNR point(s)"
    )
    return 0


_COMMANDS = {
    "rate": cmd_rate,
    "simulate": cmd_simulate,
    "errdist": cmd_errdist,
    "validate": cmd_validate,
}


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("config", help="path to a JSON run config")
    common.add_argument("--snr", type=float, nargs="+", metavar="DB",
                        help="override campaign.snr_points_db")
    common.add_argument("--frames", type=int, metavar="N",
                        help="override campaign.frames_per_point")
    common.add_argument("--seed", type=int, metavar="S",
                        help="override campaign.master_seed")
    common.add_argument("--out", default=".", metavar="DIR",
                        help="output directory for CSV files")
    common.add_argument("--workers", type=int, metavar="K",
                        help=f"worker processes (default ${WORKERS_ENV_VAR} or 1)")
    common.add_argument("--print-config", action="store_true",
                        help="echo the validated config as JSON and exit")

    parser = argparse.ArgumentParser(
        prog="scwin",
        description="Spatially coupled LDPC construction, window decoding, "
                    "and Monte Carlo campaigns.",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    sub.add_parser("rate", parents=[common],
                   help="print the design-rate report")
    simulate = sub.add_parser("simulate", parents=[common],
                              help="run the campaign and write metrics.csv")
    simulate.add_argument("--trace", action="store_true",
                          help="also write per-block traces of erroneous frames")
    errdist = sub.add_parser("errdist", parents=[common],
                             help="write per-block error histograms")
    errdist.add_argument("--all-frames", action="store_true",
                         help="keep every frame, not just error-propagation ones")
    sub.add_parser("validate", parents=[common],
                   help="validate the config and exit")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        with open(args.config, "r", encoding="utf-8") as handle:
            document = json.load(handle)
    except (OSError, json.JSONDecodeError) as exc:
        print(f"config error: {args.config}: {exc}", file=sys.stderr)
        return 2
    try:
        document = _apply_overrides(document, args)
        config = parse_run_config(document)
        if args.print_config:
            print(json.dumps(config.to_document(), indent=2))
            return 0
        return _COMMANDS[args.command](config, args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except NoMatchingFrames as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3
    except OSError as exc:
        print(f"io error: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())

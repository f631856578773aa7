"""Command-line front end: ``predict``, ``simulate``, ``oracle`` and ``figure``.

Every output file embeds the effective configuration, so any CSV or JSON
written by this tool can be passed back through ``--config`` to reproduce it.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from . import analytics, moments, oracle
from ._version import __version__
from .errors import (
    CalibrationError,
    EnsembleQualityError,
    InvalidParameterError,
    OracleResourceError,
    QSpeckleError,
    TruncationError,
    UndefinedCorrelationError,
)
from .montecarlo import convergence_report, run_ensemble
from .scattering import EnsembleKind, EnsembleSpec, draw_realization
from .states import InputState, StateKind

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_RANGE = 3
EXIT_IO = 4
EXIT_ENSEMBLE_QUALITY = 5
EXIT_CALIBRATION = 6
EXIT_ORACLE = 7

SUBCOMMANDS = ("predict", "simulate", "oracle", "figure")
FORMATS = ("csv", "json")
PREDICT_COLUMNS = ["quantity", "state", "mean_photons", "ell_over_L", "g", "value"]
SIMULATE_COLUMNS = PREDICT_COLUMNS + ["estimate", "stderr", "analytic", "pull"]
ORACLE_COLUMNS = ["quantity", "state", "mean_photons", "channel0", "channel1",
                  "oracle", "engine", "difference", "bound"]

CONFIG_PREFIX = "# config: "


class UsageError(QSpeckleError):
    pass


@dataclass
class RunConfig:
    """Effective configuration of one invocation.

    ``ensemble`` is used by ``simulate`` and, for the network it feeds to the
    oracle, by ``oracle``. ``sweep`` holds ``figure`` or an explicit
    ``ell_over_L`` list with a conductance ``g`` (``None`` meaning infinite).
    """

    subcommand: str
    state: Optional[InputState] = None
    ensemble: Optional[EnsembleSpec] = None
    sweep: dict = field(default_factory=dict)
    input_mode: int = 0
    probe_pairs: Optional[list] = None
    workers: int = 1
    output_path: Optional[str] = None
    format: str = "csv"

    def to_dict(self) -> dict:
        return {
            "subcommand": self.subcommand,
            "state": self.state.to_dict() if self.state else None,
            "ensemble": self.ensemble.to_dict() if self.ensemble else None,
            "sweep": dict(self.sweep),
            "input_mode": self.input_mode,
            "probe_pairs": [list(p) for p in self.probe_pairs] if self.probe_pairs is not None else None,
            "workers": self.workers,
            "output_path": self.output_path,
            "format": self.format,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "RunConfig":
        state = data.get("state")
        ensemble = data.get("ensemble")
        pairs = data.get("probe_pairs")
        return cls(
            subcommand=data["subcommand"],
            state=InputState.from_dict(state) if state else None,
            ensemble=EnsembleSpec.from_dict(ensemble) if ensemble else None,
            sweep=dict(data.get("sweep") or {}),
            input_mode=int(data.get("input_mode", 0)),
            probe_pairs=[tuple(p) for p in pairs] if pairs is not None else None,
            workers=int(data.get("workers", 1)),
            output_path=data.get("output_path"),
            format=data.get("format", "csv"),
        )


# ---------------------------------------------------------------- parsing


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def _pair_list(text: str):
    pairs = []
    for chunk in text.split(","):
        try:
            b0, b1 = chunk.split(":")
            pairs.append((int(b0), int(b1)))
        except ValueError:
            raise argparse.ArgumentTypeError(f"expected pairs like 0:1,2:5, got {text!r}")
    return pairs


def _state_flags(p):
    p.add_argument("--state", choices=[k.value for k in StateKind], help="input state kind")
    p.add_argument("--mean", type=float, help="mean photon number")
    p.add_argument("--n", type=int, help="photon number of a Fock input (same as --mean)")


def _ensemble_flags(p):
    p.add_argument("--modes", type=int, help="transverse modes per side N")
    p.add_argument("--ell-over-l", dest="ell_over_L", type=float, help="mean free path over thickness")
    p.add_argument("--ensemble", dest="kind", choices=[k.value for k in EnsembleKind])
    p.add_argument("--seed", dest="master_seed", type=int)
    p.add_argument("--input-mode", type=int)


def build_parser() -> argparse.ArgumentParser:
    # Defaults are suppressed so that only flags actually given override the config file.
    parser = _Parser(prog="qspeckle", argument_default=argparse.SUPPRESS,
                     description="Quantum photon statistics of multiply scattered light.")
    parser.add_argument("--version", action="version", version=f"qspeckle {__version__}")
    sub = parser.add_subparsers(dest="subcommand", parser_class=_Parser)

    def common(p):
        p.add_argument("--config", help="JSON config, or any output file of this tool")
        p.add_argument("-o", "--output", dest="output_path", help="output path (stdout if omitted)")
        p.add_argument("--format", choices=FORMATS)

    p = sub.add_parser("predict", help="closed-form predictions", argument_default=argparse.SUPPRESS)
    common(p)
    _state_flags(p)
    p.add_argument("--figure", choices=[f.value for f in analytics.Figure])
    p.add_argument("--ell-over-l", dest="ell_over_L", type=float, nargs="+")
    p.add_argument("--g", type=float, help="conductance; omit for the g -> infinity limit")

    p = sub.add_parser("figure", help="prediction table behind a figure", argument_default=argparse.SUPPRESS)
    common(p)
    _state_flags(p)
    p.add_argument("figure", nargs="?", choices=[f.value for f in analytics.Figure])

    p = sub.add_parser("simulate", help="Monte Carlo ensemble average", argument_default=argparse.SUPPRESS)
    common(p)
    _state_flags(p)
    _ensemble_flags(p)
    p.add_argument("--realizations", type=int)
    p.add_argument("--slices-per-mfp", type=int)
    p.add_argument("--calibration-realizations", type=int)
    p.add_argument("--pairs", dest="probe_pairs", type=_pair_list, help="probe pairs, e.g. 0:1,3:7")
    p.add_argument("--workers", type=int)

    p = sub.add_parser("oracle", help="cross-check the moment engine against the Fock-space oracle",
                       argument_default=argparse.SUPPRESS)
    common(p)
    _state_flags(p)
    _ensemble_flags(p)
    return parser


_ENSEMBLE_KEYS = ("modes", "ell_over_L", "kind", "master_seed", "realizations",
                  "slices_per_mfp", "calibration_realizations")
_ORACLE_DEFAULTS = {"n_modes": 3, "ell_over_L": 0.75, "realizations": 1}
_SIMULATE_DEFAULTS = {"n_modes": 32, "ell_over_L": 0.5}


def _load_config_file(path: str) -> dict:
    with open(path, encoding="utf-8") as fh:
        text = fh.read()
    for line in text.splitlines():
        if line.startswith(CONFIG_PREFIX):
            return json.loads(line[len(CONFIG_PREFIX):])
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise UsageError(f"config file {path} is not JSON: {exc}")
    # Output documents carry their config under a key of that name.
    return doc.get("config", doc) if isinstance(doc, dict) else {}


def _merge_state(base: Optional[dict], flags: dict) -> Optional[dict]:
    kind = flags.get("state", base["kind"] if base else None)
    mean = flags.get("mean")
    if "n" in flags:
        if mean is not None and mean != flags["n"]:
            raise UsageError("--n and --mean disagree")
        mean = flags["n"]
    if mean is None and base is not None:
        mean = base["mean_photons"]
    if kind is None:
        if mean is not None:
            raise UsageError("--mean needs --state")
        return None
    if mean is None:
        mean = 1
    return {"kind": kind, "mean_photons": mean}


def parse_config(argv=None, config_file: Optional[str] = None) -> RunConfig:
    """Build the effective :class:`RunConfig` from flags over an optional config file.

    Raises :class:`UsageError` for malformed invocations and
    :class:`InvalidParameterError` (naming the field) for out-of-range values.
    """
    args = vars(build_parser().parse_args(argv))
    subcommand = args.pop("subcommand", None)
    config_file = args.pop("config", config_file)
    base = _load_config_file(config_file) if config_file else {}
    subcommand = subcommand or base.get("subcommand")
    if subcommand not in SUBCOMMANDS:
        raise UsageError(f"choose a subcommand from {', '.join(SUBCOMMANDS)}")
    if base.get("subcommand", subcommand) != subcommand:
        base = {k: v for k, v in base.items() if k in ("state", "output_path", "format")}

    data = {"subcommand": subcommand}
    data["state"] = _merge_state(base.get("state"), args)
    if data["state"] is None and subcommand in ("predict", "simulate", "oracle"):
        raise UsageError(f"{subcommand} needs --state")
    data["output_path"] = args.get("output_path", base.get("output_path"))
    data["format"] = args.get("format", base.get("format", "csv"))

    if subcommand in ("predict", "figure"):
        sweep = dict(base.get("sweep") or {})
        for key in ("figure", "ell_over_L", "g"):
            if key in args:
                sweep[key] = args[key]
        if subcommand == "figure" and not sweep.get("figure"):
            raise UsageError("figure needs a figure name")
        if sweep.get("g") is not None and math.isinf(sweep["g"]):
            sweep["g"] = None
        data["sweep"] = sweep
    else:
        defaults = _SIMULATE_DEFAULTS if subcommand == "simulate" else _ORACLE_DEFAULTS
        ens = dict(defaults)
        ens.update(base.get("ensemble") or {})
        for key in _ENSEMBLE_KEYS:
            if key in args:
                ens["n_modes" if key == "modes" else key] = args[key]
        if subcommand == "oracle":
            ens["realizations"] = 1
        data["ensemble"] = ens
        data["input_mode"] = args.get("input_mode", base.get("input_mode", 0))
        data["workers"] = args.get("workers", base.get("workers", 1))
        data["probe_pairs"] = args.get("probe_pairs", base.get("probe_pairs"))
    return RunConfig.from_dict(data)


# ---------------------------------------------------------------- output


def format_float(x) -> str:
    """12 digits after the leading one, trailing zeros kept."""
    if x is None:
        return ""
    x = float(x)
    if math.isnan(x):
        return "nan"
    if math.isinf(x):
        return "inf" if x > 0 else "-inf"
    return f"{x:#.13g}"


def _config_echo(config: Optional[RunConfig]) -> list[str]:
    lines = [f"# tool: qspeckle {__version__}"]
    if config is not None:
        lines.append(CONFIG_PREFIX + json.dumps(config.to_dict(), sort_keys=False))
    return lines


def _open_output(path):
    if path is None or path == "-":
        return _Stdout()
    return open(path, "w", encoding="utf-8", newline="")


class _Stdout:
    def __enter__(self):
        return sys.stdout

    def __exit__(self, *exc):
        sys.stdout.flush()
        return False


def emit_csv(rows, path, columns=PREDICT_COLUMNS, config: Optional[RunConfig] = None):
    """Write ``rows`` (mappings keyed by ``columns``) below a config echo and a header."""
    buf = io.StringIO()
    for line in _config_echo(config):
        buf.write(line + "\n")
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(columns)
    for row in rows:
        writer.writerow([format_float(row[c]) if isinstance(row[c], (float, np.floating)) or row[c] is None
                         else row[c] for c in columns])
    with _open_output(path) as fh:
        fh.write(buf.getvalue())


def _finite(obj):
    if isinstance(obj, dict):
        return {k: _finite(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_finite(v) for v in obj]
    if isinstance(obj, (float, np.floating)):
        return float(obj) if math.isfinite(obj) else None
    if isinstance(obj, np.integer):
        return int(obj)
    return obj


def emit_json(document, path, config: Optional[RunConfig] = None):
    """Write one JSON document with a fixed key order.

    ``document`` is an :class:`~qspeckle.montecarlo.EnsembleResult` or a
    plain mapping. Non-finite numbers are written as ``null``.
    """
    body = document.to_dict() if hasattr(document, "to_dict") else dict(document)
    doc = {"tool": "qspeckle", "version": __version__,
           "config": config.to_dict() if config else None}
    doc.update({k: v for k, v in body.items() if k not in doc})
    text = json.dumps(_finite(doc), indent=2, allow_nan=False) + "\n"
    with _open_output(path) as fh:
        fh.write(text)


# ---------------------------------------------------------------- commands


def _point_row(point: analytics.PredictionPoint) -> dict:
    return {
        "quantity": point.quantity.value,
        "state": point.state.kind.value,
        "mean_photons": float(point.state.mean_photons),
        "ell_over_L": None if point.ell_over_L is None else float(point.ell_over_L),
        "g": float(point.g),
        "value": float(point.value),
    }


def predict_points(config: RunConfig) -> list[analytics.PredictionPoint]:
    sweep = config.sweep
    if sweep.get("figure"):
        states = [config.state] if config.state else None
        return analytics.figure_sweep(sweep["figure"], states)
    state = config.state
    g = sweep.get("g")
    g = math.inf if g is None else float(g)
    ells = sweep.get("ell_over_L")
    ells = analytics.ELL_OVER_L_GRID if ells is None else ells
    Q = analytics.Quantity
    points = []
    for ell in ells:
        ell = float(ell)
        points.append(analytics.PredictionPoint(Q.TOTAL_TRANSMISSION_VARIANCE_RATIO, state, ell, g,
                                                analytics.predict_total_transmission_variance(state, ell, g)))
        points.append(analytics.PredictionPoint(Q.TOTAL_REFLECTION_VARIANCE_RATIO, state, ell, math.inf,
                                                analytics.predict_total_reflection_variance(state, ell)))
    if state.mean_photons > 0:
        points.append(analytics.PredictionPoint(Q.TWO_POINT_CORRELATION, state, None, math.inf,
                                                analytics.predict_two_point_correlation(state)))
    return points


def _cmd_predict(config: RunConfig):
    rows = [_point_row(p) for p in predict_points(config)]
    if config.format == "json":
        emit_json({"rows": rows}, config.output_path, config)
    else:
        emit_csv(rows, config.output_path, PREDICT_COLUMNS, config)


def simulate_rows(result) -> list[dict]:
    spec, state = result.spec, result.state
    rows = []
    for rep in convergence_report(result):
        rows.append({
            "quantity": rep.quantity,
            "state": state.kind.value,
            "mean_photons": float(state.mean_photons),
            "ell_over_L": float(spec.ell_over_L),
            "g": float(spec.g),
            "value": rep.value,
            "estimate": rep.value,
            "stderr": rep.stderr,
            "analytic": rep.analytic,
            "pull": rep.pull,
        })
    return rows


def _cmd_simulate(config: RunConfig):
    result = run_ensemble(config.ensemble, config.state, config.input_mode,
                          config.probe_pairs, config.workers)
    if config.format == "json":
        emit_json(result, config.output_path, config)
    else:
        emit_csv(simulate_rows(result), config.output_path, SIMULATE_COLUMNS, config)
    return result


def oracle_rows(config: RunConfig) -> list[dict]:
    """Oracle and moment-engine values side by side for one drawn realization."""
    spec, state, a = config.ensemble, config.state, config.input_mode
    n = spec.n_modes
    if not 0 <= a < n:
        raise InvalidParameterError("input_mode", f"{a} out of range for {n} modes")
    s = draw_realization(spec, 0)
    cfg = oracle.OracleConfig(n_modes=n)
    if state.kind is StateKind.FOCK:
        ref = oracle.oracle_fock(s, a, int(state.mean_photons), cfg)
    elif state.kind is StateKind.COHERENT:
        ref = oracle.oracle_coherent(s, a, state.mean_photons)
    else:
        ref = oracle.oracle_thermal(s, a, state.mean_photons, cfg)
    # Channel order matches the oracle: reflected (left) modes, then transmitted.
    p = np.concatenate([np.abs(s.r_left[a]) ** 2, np.abs(s.t[a]) ** 2])
    means, cov = moments.output_moments(p, state)
    labels = [f"r{k}" for k in range(n)] + [f"t{k}" for k in range(n)]
    base = {"state": state.kind.value, "mean_photons": float(state.mean_photons)}
    bound = ref.truncation_bound
    rows = []

    def add(quantity, c0, c1, ref_value, engine_value, err):
        rows.append({**base, "quantity": quantity, "channel0": c0, "channel1": c1,
                     "oracle": float(ref_value), "engine": float(engine_value),
                     "difference": float(engine_value - ref_value), "bound": float(err)})

    ref_cov = ref.covariance
    for k, label in enumerate(labels):
        add("mode_mean", label, "", ref.means[k], means[k], bound)
        add("mode_variance", label, "", ref_cov[k, k], cov[k, k], bound)
    for k in range(2 * n):
        for l in range(k + 1, 2 * n):
            add("cross_covariance", labels[k], labels[l], ref_cov[k, l], cov[k, l], bound)
    for name, idx in (("transmitted", range(n, 2 * n)), ("reflected", range(n))):
        ref_mean, ref_var = ref.subset(idx)
        eng_mean, eng_var = moments.subset_total(p[list(idx)], state)
        add(f"{name}_total_mean", name, "", ref_mean, eng_mean, ref.subset_bound(idx))
        add(f"{name}_total_variance", name, "", ref_var, eng_var, ref.subset_bound(idx))
    return rows


def _cmd_oracle(config: RunConfig):
    rows = oracle_rows(config)
    if config.format == "json":
        emit_json({"rows": rows}, config.output_path, config)
    else:
        emit_csv(rows, config.output_path, ORACLE_COLUMNS, config)


_COMMANDS = {"predict": _cmd_predict, "figure": _cmd_predict,
             "simulate": _cmd_simulate, "oracle": _cmd_oracle}


def main(argv=None) -> int:
    try:
        config = parse_config(argv)
        _COMMANDS[config.subcommand](config)
    except UsageError as exc:
        print(f"qspeckle: usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (InvalidParameterError, UndefinedCorrelationError) as exc:
        print(f"qspeckle: range error: {exc}", file=sys.stderr)
        return EXIT_RANGE
    except OSError as exc:
        print(f"qspeckle: I/O error: {exc}", file=sys.stderr)
        return EXIT_IO
    except EnsembleQualityError as exc:
        print(f"qspeckle: ensemble quality error: {exc}", file=sys.stderr)
        return EXIT_ENSEMBLE_QUALITY
    except CalibrationError as exc:
        print(f"qspeckle: calibration error: {exc}", file=sys.stderr)
        return EXIT_CALIBRATION
    except (OracleResourceError, TruncationError) as exc:
        print(f"qspeckle: oracle error: {exc}", file=sys.stderr)
        return EXIT_ORACLE
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())

"""Command-line front end: ``cvbell {eval,sample,sweep,npt,experiment}``.

Every command reads one TOML file, prints an aligned table and writes
``<command>.csv`` plus ``<command>.json`` into the output directory
(``--out``, else ``$CVBELL_OUT``, else the working directory).  A sidecar
``<command>.manifest.json`` records the resolved configuration, seed, tool
version, output paths and wall-clock time.  CSV files start with a single
``#`` comment naming that manifest and carry no timestamps, so identical
configurations and seeds reproduce them byte for byte.
"""

from __future__ import annotations

import argparse
import csv
import json
import os
import sys
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import replace
from datetime import datetime, timezone
from pathlib import Path

import numpy as np

from . import __version__
from .config import (
    RunConfig,
    load_config,
    parse_eval,
    parse_experiment,
    parse_npt,
    parse_sample,
    parse_sweep,
)
from .errors import ConfigError, InsufficientSamplesError, NumericalError
from .experiment import LoopholeReport, run_experiment
from .fock import apply_loss_all
from .inequalities import FAMILIES, evaluate, format_float
from .npt import pt_moment_check, pt_report
from .sampling import quadrature_pdf, sample_counts, sample_quadrature
from .states import StateSpec, build

COMMANDS = ("eval", "sample", "sweep", "npt", "experiment")
OUT_ENV = "CVBELL_OUT"

EXIT_OK, EXIT_CONFIG, EXIT_NUMERICAL, EXIT_SAMPLES = 0, 2, 3, 4

EVAL_COLUMNS = ["family", "N", "k", "lhs", "rhs", "ratio", "violated", "sigma", "source"]
NPT_COLUMNS = ["k", "partition", "min_eig", "negativity", "is_npt", "gap_first", "gap_second"]
EXPERIMENT_COLUMNS = [
    "family", "trials", "lhs", "lhs_se", "naive_rhs", "naive_rhs_se", "corrected_rhs",
    "corrected_rhs_se", "ratio", "violated_naive", "sigma_naive", "violated_corrected",
    "sigma_corrected", "sigma_threshold", "p_d_observed_1", "p_d_observed_2",
    "detected_mean_1", "detected_mean_2",
]

# sweep axis -> state parameter it overrides
_STATE_AXES = {"r": "r", "theta": "theta", "phi": "phi", "p_S": "p_s"}


# ---------------------------------------------------------------- formatting

def _cell(value) -> str:
    """CSV text for one value; floats use ``repr`` so they round-trip."""
    if value is None:
        return ""
    if isinstance(value, (bool, np.bool_)):
        return "true" if value else "false"
    if isinstance(value, (float, np.floating)):
        value = format_float(float(value))
        return value if isinstance(value, str) else repr(value)
    if isinstance(value, (list, tuple)):
        return " ".join(_cell(v) for v in value)
    return str(value)


def _short(value) -> str:
    if isinstance(value, (float, np.floating)) and not isinstance(value, bool):
        value = format_float(float(value))
        return value if isinstance(value, str) else f"{value:.6g}"
    return _cell(value)


def format_table(rows: list[dict], columns: list[str]) -> str:
    cells = [columns] + [[_short(row.get(c)) for c in columns] for row in rows]
    widths = [max(len(r[i]) for r in cells) for i in range(len(columns))]
    lines = ["  ".join(c.rjust(w) for c, w in zip(r, widths)) for r in cells]
    lines.insert(1, "  ".join("-" * w for w in widths))
    return "\n".join(lines)


def jsonable(obj):
    """Plain JSON types; non-finite floats become ``"inf"``/``"nan"`` strings."""
    if isinstance(obj, dict):
        return {str(k): jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [jsonable(v) for v in obj]
    if isinstance(obj, (np.bool_, bool)):
        return bool(obj)
    if isinstance(obj, (np.integer, int)):
        return int(obj)
    if isinstance(obj, (np.floating, float)):
        return format_float(float(obj))
    if isinstance(obj, (complex, np.complexfloating)):
        return [float(obj.real), float(obj.imag)]
    if isinstance(obj, Path):
        return str(obj)
    return obj


class Output:
    """Writes a command's files and its manifest."""

    def __init__(self, command: str, directory: Path):
        self.command = command
        self.directory = directory
        self.paths: list[Path] = []
        directory.mkdir(parents=True, exist_ok=True)

    @property
    def manifest_name(self) -> str:
        return f"{self.command}.manifest.json"

    def path(self, suffix: str) -> Path:
        p = self.directory / f"{self.command}{suffix}"
        self.paths.append(p)
        return p

    def header(self) -> str:
        return f"# cvbell {__version__} {self.command}; manifest: {self.manifest_name}\n"

    def write_csv(self, rows: list[dict], columns: list[str], suffix: str = ".csv") -> Path:
        p = self.path(suffix)
        with open(p, "w", newline="") as fh:
            fh.write(self.header())
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(columns)
            for row in rows:
                w.writerow([_cell(row.get(c)) for c in columns])
        return p

    def write_json(self, payload, suffix: str = ".json") -> Path:
        p = self.path(suffix)
        with open(p, "w") as fh:
            json.dump(jsonable({"manifest": self.manifest_name, **payload}), fh, indent=2)
            fh.write("\n")
        return p

    def write_manifest(self, config: RunConfig, resolved: dict, seed, started: float) -> Path:
        p = self.directory / self.manifest_name
        manifest = {
            "command": self.command,
            "config_path": str(config.path) if config.path else None,
            "resolved": resolved,
            "seed": seed,
            "outputs": [str(q) for q in self.paths],
            "version": __version__,
            "created": datetime.now(timezone.utc).isoformat(timespec="seconds"),
            "wall_clock_s": round(time.perf_counter() - started, 3),
        }
        with open(p, "w") as fh:
            json.dump(jsonable(manifest), fh, indent=2)
            fh.write("\n")
        return p


# ---------------------------------------------------------------- commands

def _lossy(state, eta: float):
    return state if eta == 1.0 else apply_loss_all(state, eta)


def _eval_rows(state, families, ks, tol) -> list[dict]:
    ks = ks or range(1, state.num_modes)
    return [evaluate(state, f, k, tol).to_dict() for f in families for k in ks]


def cmd_eval(cfg: RunConfig, args, out: Output):
    opts = parse_eval(cfg.section("eval"))
    state = _lossy(build(cfg.state), opts["eta"])
    rows = _eval_rows(state, opts["families"], opts["k"], opts["tol"])
    out.write_csv(rows, EVAL_COLUMNS)
    out.write_json({"state": cfg.state.to_dict(), "eta": opts["eta"], "reports": rows})
    print(format_table(rows, EVAL_COLUMNS))
    return {"state": cfg.state.to_dict(), "eval": opts}, None


def cmd_npt(cfg: RunConfig, args, out: Output):
    opts = parse_npt(cfg.section("npt"))
    state = build(cfg.state)
    n = state.num_modes
    rows = []
    if opts["modes"] is not None:
        rows.append({"k": None, **pt_report(state, opts["modes"]).to_dict()})
    else:
        for k in range(1, n):
            row = {"k": k, **pt_report(state, range(k + 1, n + 1)).to_dict()}
            for family in FAMILIES:
                row[f"gap_{family}"] = pt_moment_check(state, family, k)
            rows.append(row)
    out.write_csv(rows, NPT_COLUMNS)
    out.write_json({"state": cfg.state.to_dict(), "negativity_note": "negativity is an extension; verdicts use min_eig only", "reports": rows})
    print(format_table(rows, NPT_COLUMNS))
    return {"state": cfg.state.to_dict(), "npt": opts}, None


def _experiment_row(report: LoopholeReport) -> dict:
    d = report.to_dict()
    d["ratio"] = report.ratio
    for j in (1, 2):
        d[f"p_d_observed_{j}"] = report.p_d_observed[j - 1]
        d[f"detected_mean_{j}"] = report.detected_mean[j - 1]
    return d


def cmd_experiment(cfg: RunConfig, args, out: Output):
    config = parse_experiment(cfg.section("experiment"), cfg.state, args.seed)
    report = run_experiment(config, workers=args.workers, keep_trials=args.save_trials)
    row = _experiment_row(report)
    out.write_csv([row], EXPERIMENT_COLUMNS)
    if report.trial_log is not None:
        p = out.path(".trials.csv")
        with open(p, "w", newline="") as fh:
            fh.write(out.header())
            report.trial_log.to_csv(fh)
    out.write_json({"config": config.to_dict(), "report": report.to_dict()})
    print(format_table([row], ["lhs", "lhs_se", "naive_rhs", "corrected_rhs", "sigma_naive", "sigma_corrected", "violated_corrected"]))
    if report.note:
        print(report.note)
    return {"experiment": config.to_dict()}, config.seed


def cmd_sample(cfg: RunConfig, args, out: Output):
    opts = parse_sample(cfg.section("sample"), args.seed)
    state = build(cfg.state)
    if opts["measurement"] == "counts":
        batch = sample_counts(state, opts["eta"], opts["trials"], opts["seed"], opts["stream"])
    else:
        state = _lossy(state, opts["eta"])
        modes = opts["modes"] or list(range(1, min(state.num_modes, 2) + 1))
        if len(opts["thetas"]) != len(modes):
            raise ConfigError(f"[sample].thetas needs one phase per sampled mode {modes}")
        pdf = quadrature_pdf(state, opts["thetas"], modes, opts["points"], opts["half_width"])
        batch = sample_quadrature(pdf, opts["trials"], opts["seed"], opts["stream"])
    p = out.path(".csv")
    with open(p, "w", newline="") as fh:
        fh.write(out.header())
        batch.to_csv(fh)
    summary = [
        {"mode": j + 1, "setting": batch.settings[0, j], "mean": batch.outcomes[:, j].mean(), "variance": batch.outcomes[:, j].var(ddof=1)}
        for j in range(batch.num_modes)
    ]
    out.write_json({"state": cfg.state.to_dict(), "sample": opts, "summary": summary})
    print(format_table(summary, ["mode", "setting", "mean", "variance"]))
    return {"state": cfg.state.to_dict(), "sample": opts}, opts["seed"]


def _sweep_point(cfg: RunConfig, opts: dict, value, experiment_cfg):
    axis = opts["axis"]
    spec = cfg.state
    if axis in _STATE_AXES:
        spec = _override_state(spec, _STATE_AXES[axis], value)
    if experiment_cfg is not None:
        changes = {"state": spec}
        if axis == "eta":
            changes["eta"] = value
        elif axis == "p_D":
            changes["p_d"] = value
        elif axis == "k":
            raise ConfigError("the k axis is not available for experiment sweeps (two modes only)")
        try:
            config = replace(experiment_cfg, **changes)
        except ValueError as exc:
            raise ConfigError(f"[sweep] value {value!r}: {exc}") from None
        return [{axis: value, **_experiment_row(run_experiment(config))}]
    eta = value if axis == "eta" else opts["eta"]
    if not 0 <= eta <= 1:
        raise ConfigError(f"[sweep] eta value {eta} outside [0, 1]")
    state = _lossy(build(spec), eta)
    ks = [value] if axis == "k" else None
    return [{axis: value, **row} for row in _eval_rows(state, opts["families"], ks, opts["tol"])]


def _override_state(spec: StateSpec, name: str, value) -> StateSpec:
    try:
        return spec.with_params(**{name: value})
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"[sweep] cannot set {name}={value!r} on variant {spec.variant!r}: {exc}") from None


def cmd_sweep(cfg: RunConfig, args, out: Output):
    opts = parse_sweep(cfg.section("sweep"))
    experiment_cfg = None
    if opts["axis"] == "p_D" or "experiment" in cfg.sections:
        experiment_cfg = parse_experiment(cfg.section("experiment"), cfg.state, args.seed)
    # validate every point's state before spending time on any of them
    if opts["axis"] in _STATE_AXES:
        for v in opts["values"]:
            _override_state(cfg.state, _STATE_AXES[opts["axis"]], v)
    with ThreadPoolExecutor(max_workers=max(1, args.workers)) as pool:
        chunks = list(pool.map(lambda v: _sweep_point(cfg, opts, v, experiment_cfg), opts["values"]))
    rows = [row for chunk in chunks for row in chunk]
    columns = [opts["axis"]] + (EXPERIMENT_COLUMNS if experiment_cfg else EVAL_COLUMNS)
    out.write_csv(rows, columns)
    out.write_json({"state": cfg.state.to_dict(), "sweep": opts, "rows": rows})
    print(format_table(rows, columns))
    resolved = {"state": cfg.state.to_dict(), "sweep": opts}
    if experiment_cfg:
        resolved["experiment"] = experiment_cfg.to_dict()
    return resolved, experiment_cfg.seed if experiment_cfg else None


HANDLERS = {
    "eval": cmd_eval,
    "sample": cmd_sample,
    "sweep": cmd_sweep,
    "npt": cmd_npt,
    "experiment": cmd_experiment,
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="cvbell", description="Wave/particle Bell inequalities in truncated Fock space.")
    parser.add_argument("--version", action="version", version=f"cvbell {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        p = sub.add_parser(name)
        p.add_argument("--config", required=True, type=Path, help="TOML run configuration")
        p.add_argument("--seed", type=int, default=None, help="override the seed of sampled commands")
        p.add_argument("--out", type=Path, default=None, help=f"output directory (default ${OUT_ENV} or .)")
        p.add_argument("--workers", type=int, default=1, help="threads for sweeps and experiment shards")
        if name == "experiment":
            p.add_argument("--save-trials", action="store_true", help="also write the per-trial CSV")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    if not hasattr(args, "save_trials"):
        args.save_trials = False
    started = time.perf_counter()
    try:
        if args.workers < 1:
            raise ConfigError("--workers must be at least 1")
        cfg = load_config(args.config)
        out_dir = args.out or Path(os.environ.get(OUT_ENV, "."))
        out = Output(args.command, out_dir)
        resolved, seed = HANDLERS[args.command](cfg, args, out)
        out.write_manifest(cfg, resolved, seed, started)
    except InsufficientSamplesError as exc:
        print(f"cvbell: insufficient samples: {exc}", file=sys.stderr)
        return EXIT_SAMPLES
    except NumericalError as exc:
        print(f"cvbell: numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except (ConfigError, ValueError, TypeError) as exc:
        print(f"cvbell: configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())

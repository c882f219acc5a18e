"""Command-line front end.

Subcommands::

    crpsdesign synthesize   --data FILE --seed N --out FILE
    crpsdesign run          --data FILE [--config FILE] [--criterion NAME] [--reps N] [--seed N] --out DIR
    crpsdesign sweep        --data FILE [--config FILE] --sigma-list 10,33,60 --out FILE
    crpsdesign kernel-table --data FILE [--fractions 0.1,0.2,0.3] [--splits 30] --out FILE

Outputs are plain CSV (UTF-8, LF) ready for plotting elsewhere.
"""
from __future__ import annotations

import argparse
import csv
import hashlib
import json
import logging
import math
import sys
import time
from dataclasses import fields, replace
from pathlib import Path

from . import __version__
from .acquisition import CRITERIA, CriterionSpec
from .experiment import (
    ExperimentConfig,
    kernel_comparison,
    kernel_template,
    load_dataset,
    make_synthetic,
    run_repetitions,
    save_dataset,
    sigma_sweep,
)

logger = logging.getLogger("crpsdesign")

_CRITERION_KEYS = ("criterion", "zeta", "mc_samples")
_BOOL = {"true": True, "false": False, "1": True, "0": False, "yes": True, "no": False}


class ConfigError(ValueError):
    pass


def _parse_value(key, raw):
    raw = raw.strip()
    try:
        if key in ("n_init", "n_add", "m_validation", "repetitions", "seed", "mc_samples"):
            return int(raw)
        if key in ("t_quantile", "zeta"):
            return float(raw)
        if key == "threshold":
            return None if raw.lower() in ("", "none") else float(raw)
        if key == "sigma_gamma":
            return raw if raw == "half-std" else float(raw)
        if key in ("refit_each_step", "redraw_noise"):
            return _BOOL[raw.lower()]
        if key == "fit_noise":
            return None if raw.lower() in ("", "auto", "none") else _BOOL[raw.lower()]
    except (ValueError, KeyError):
        raise ConfigError(f"invalid value {raw!r} for config key {key!r}") from None
    return raw


def _config_keys():
    return tuple(f.name for f in fields(ExperimentConfig) if f.name != "criterion") + _CRITERION_KEYS


def read_config(path) -> dict:
    """Parse a flat ``key=value`` file into typed values."""
    values = {}
    valid = _config_keys()
    for lineno, line in enumerate(Path(path).read_text(encoding="utf-8").splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, raw = line.partition("=")
        key = key.strip()
        if not sep:
            raise ConfigError(f"{path}:{lineno}: expected key=value")
        if key not in valid:
            raise ConfigError(f"{path}:{lineno}: unknown config key {key!r} (valid keys: {', '.join(valid)})")
        values[key] = _parse_value(key, raw)
    return values


def build_config(values: dict) -> ExperimentConfig:
    values = dict(values)
    crit = CriterionSpec(
        values.pop("criterion", "random"),
        zeta=values.pop("zeta", 0.0),
        mc_samples=values.pop("mc_samples", 512),
    )
    return ExperimentConfig(criterion=crit, **values)


def config_echo(cfg: ExperimentConfig) -> dict:
    """``key -> text`` form of ``cfg`` that :func:`read_config` parses back to it."""
    out = {}
    for f in fields(ExperimentConfig):
        if f.name == "criterion":
            continue
        v = getattr(cfg, f.name)
        if isinstance(v, bool):
            v = str(v).lower()
        elif v is None:
            v = "auto" if f.name == "fit_noise" else "none"
        elif isinstance(v, float):
            v = repr(v)
        out[f.name] = str(v)
    out["criterion"] = cfg.criterion.kind
    out["zeta"] = repr(cfg.criterion.zeta)
    out["mc_samples"] = str(cfg.criterion.mc_samples)
    return out


def _fmt(v):
    if v is None:
        return ""
    if isinstance(v, float):
        return "" if math.isnan(v) else repr(v)
    return str(v)


def _sha256(path):
    return hashlib.sha256(Path(path).read_bytes()).hexdigest()


def _float_list(text):
    try:
        vals = [float(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a comma-separated list of numbers: {text!r}") from None
    if not vals:
        raise argparse.ArgumentTypeError("empty list")
    return vals


def _write_csv(path, header, rows):
    with Path(path).open("w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for r in rows:
            w.writerow([_fmt(v) for v in r])


def cmd_synthesize(args) -> int:
    data = load_dataset(args.data)
    synth = make_synthetic(data, kernel_template(args.kernel), args.seed)
    save_dataset(synth, args.out)
    logger.info("wrote synthetic dataset (%d items, noise variance %.6g) to %s", synth.n, synth.noise_var, args.out)
    return 0


def _experiment_config(args) -> ExperimentConfig:
    values = read_config(args.config) if args.config else {}
    if getattr(args, "criterion", None) is not None:
        values["criterion"] = args.criterion
    if args.reps is not None:
        values["repetitions"] = args.reps
    if args.seed is not None:
        values["seed"] = args.seed
    if values.get("criterion", "random") not in CRITERIA:
        raise ConfigError(f"unknown criterion {values['criterion']!r}; valid names: {', '.join(CRITERIA)}")
    return build_config(values)


def cmd_run(args) -> int:
    timings = {}
    t0 = time.perf_counter()
    cfg = _experiment_config(args)
    data = load_dataset(args.data)
    timings["load"] = time.perf_counter() - t0

    t0 = time.perf_counter()
    result = run_repetitions(cfg, data, workers=args.threads)
    timings["run"] = time.perf_counter() - t0

    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    _write_csv(out / "steps.csv", ["rep", "step", "criterion", "metric", "value"], result.long_rows())
    summary_rows = []
    for step, per_metric in enumerate(result.summary):
        for metric, s in per_metric.items():
            summary_rows.append(
                [step, cfg.criterion.kind, metric, s.n, s.mean, s.median, s.q1, s.q3,
                 s.lower_fence, s.upper_fence, s.whisker_low, s.whisker_high, len(s.outliers)]
            )
    _write_csv(
        out / "summary.csv",
        ["step", "criterion", "metric", "n", "mean", "median", "q1", "q3",
         "lower_fence", "upper_fence", "whisker_low", "whisker_high", "n_outliers"],
        summary_rows,
    )
    echo = config_echo(cfg)
    (out / "config_echo.txt").write_text("".join(f"{k}={v}\n" for k, v in echo.items()), encoding="utf-8")
    manifest = {
        "software": "crpsdesign",
        "version": __version__,
        "config": echo,
        "dataset": {"path": str(args.data), "sha256": _sha256(args.data), "n": data.n, "d": data.d,
                    "synthetic": data.synthetic},
        "wall_clock_seconds": timings,
        "repetitions": cfg.repetitions,
        "failures": len(result.failures),
        "failure_messages": [{"rep": r, "error": m.splitlines()[0]} for r, m in result.failures],
    }
    (out / "manifest.json").write_text(json.dumps(manifest, indent=2) + "\n", encoding="utf-8")
    if result.failures:
        logger.error("%d of %d repetitions failed", len(result.failures), cfg.repetitions)
        return 1
    return 0


def cmd_sweep(args) -> int:
    sigmas = []
    for s in args.sigma_list:
        if s <= 0:
            raise ConfigError(f"sigma_gamma values must be > 0, got {s}")
        if s in sigmas:
            logger.warning("duplicate sigma_gamma %s ignored", s)
            continue
        sigmas.append(s)
    cfg = _experiment_config(args)
    data = load_dataset(args.data)
    rows, failures = sigma_sweep(cfg, data, sigmas, workers=args.threads)
    keys = ["sigma_gamma", "criterion", "metric", "n", "mean", "median", "q1", "q3"]
    _write_csv(args.out, keys, ([r[k] for k in keys] for r in rows))
    if failures:
        logger.error("%d repetitions failed", len(failures))
        return 1
    return 0


def cmd_kernel_table(args) -> int:
    for f in args.fractions:
        if not 0 < f < 1:
            raise ConfigError(f"training fraction {f} not in (0, 1)")
    data = load_dataset(args.data)
    rows = kernel_comparison(data, args.fractions, args.splits, args.seed)
    cols = [(r["kernel"], r["fraction"]) for r in rows]
    cols.sort(key=lambda c: (c[1], ("tanimoto", "exponential", "gaussian").index(c[0])))
    lookup = {(r["kernel"], r["fraction"]): r for r in rows}
    header = ["metric"] + [f"{k}@{f:g}" for k, f in cols]
    _write_csv(
        args.out,
        header,
        [["RMSE"] + [lookup[c]["rmse"] for c in cols], ["CRPS"] + [lookup[c]["crps"] for c in cols]],
    )
    return 0


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="crpsdesign", description=__doc__.split("\n\n")[0])
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("synthesize", help="build a synthetic dataset with known ground truth")
    s.add_argument("--data", required=True)
    s.add_argument("--seed", type=int, required=True)
    s.add_argument("--out", required=True)
    s.add_argument("--kernel", default="tanimoto", choices=("tanimoto", "gaussian", "exponential"))
    s.set_defaults(func=cmd_synthesize)

    def common(sp):
        sp.add_argument("--data", required=True)
        sp.add_argument("--config")
        sp.add_argument("--reps", type=int)
        sp.add_argument("--seed", type=int)
        sp.add_argument("--threads", type=int, default=1, help="worker processes for repetitions")

    r = sub.add_parser("run", help="run repeated sequential designs with one criterion")
    common(r)
    r.add_argument("--criterion", help=f"one of: {', '.join(CRITERIA)}")
    r.add_argument("--out", required=True, help="output directory")
    r.set_defaults(func=cmd_run)

    w = sub.add_parser("sweep", help="sigma_gamma sweep of the Gaussian-weight criteria")
    common(w)
    w.add_argument("--sigma-list", type=_float_list, required=True)
    w.add_argument("--out", required=True, help="output CSV")
    w.set_defaults(func=cmd_sweep)

    k = sub.add_parser("kernel-table", help="held-out RMSE/CRPS per kernel and training fraction")
    k.add_argument("--data", required=True)
    k.add_argument("--fractions", type=_float_list, default=[0.1, 0.2, 0.3])
    k.add_argument("--splits", type=int, default=30)
    k.add_argument("--seed", type=int, default=0)
    k.add_argument("--out", required=True)
    k.set_defaults(func=cmd_kernel_table)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s: %(message)s")
    try:
        return args.func(args)
    except (OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except Exception as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())

"""Command-line entry point: ``qsvmbench <command> [--config cfg.json] ...``.

Exit codes: 0 success, 2 configuration error, 3 data error, 4 numerical
failure.
"""
from __future__ import annotations

import argparse
import csv
import json
import logging
import sys
from pathlib import Path

import numpy as np

from .errors import ConfigError, DataError, NumericalError
from .metrics import paired_bootstrap
from .runner import ExperimentConfig, Runner

log = logging.getLogger("qsvmbench")

DEFAULT_CONFIG = {
    "embedding_paths": {"synthetic": {"seed_0": "bundled:synthetic_n500_d32.csv"}},
    "qubit_list": [4, 8],
}

PROTOCOLS = {
    "tier1": "run_tier1",
    "tier2": "run_tier2",
    "sweep": "run_sweep",
    "rankmatch": "run_rank_matched",
    "projected": "run_projected",
}


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="ExperimentConfig JSON (default: bundled synthetic set, q=4,8)")
    common.add_argument("--out", help="output directory (overrides output_dir)")
    common.add_argument("--threads", type=int, help="worker threads for kernels and bootstrap")
    common.add_argument("--seed", type=int, help="split seed (overrides split_seed)")
    common.add_argument("-v", "--verbose", action="store_true")

    p = argparse.ArgumentParser(prog="qsvmbench", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)
    sub.add_parser("kernel", parents=[common], help="write train/test quantum kernels as .qkmx")
    sub.add_parser("train", parents=[common], help="train QSVM models and write them as JSON")
    sub.add_parser("tier1", parents=[common], help="QSVM vs linear SVC, both untuned")
    sub.add_parser("tier2", parents=[common], help="untuned QSVM vs RBF SVC with C tuned on validation F1")
    sub.add_parser("sweep", parents=[common], help="qubit count and reps/dof/normalization variants")
    sub.add_parser("rankmatch", parents=[common], help="RBF with bandwidth matched to the quantum effective rank")
    sub.add_parser("projected", parents=[common], help="projected (Pauli-Z) quantum kernel with grid search")
    sp = sub.add_parser("spectrum", parents=[common], help="eigenspectra and kernel variance statistics")
    sp.add_argument("--subsample", type=int, default=200)
    bp = sub.add_parser("bootstrap", parents=[common], help="paired bootstrap on a predictions CSV")
    bp.add_argument("--preds", required=True, help="CSV with columns y_true,pred_a,pred_b")
    bp.add_argument("--resamples", type=int)
    bp.add_argument("--metric", choices=("f1", "accuracy"), default="f1")
    return p


def load_config(args) -> ExperimentConfig:
    if args.config:
        doc = _read_json(args.config)
    else:
        doc = dict(DEFAULT_CONFIG)
    if args.out:
        doc["output_dir"] = args.out
    if args.threads is not None:
        if args.threads < 1:
            raise ConfigError("--threads must be >= 1")
        doc["threads"] = args.threads
    if args.seed is not None:
        if args.seed < 0:
            raise ConfigError("--seed must be a non-negative integer")
        doc["split_seed"] = args.seed
    return ExperimentConfig.from_dict(doc)


def _read_json(path) -> dict:
    try:
        doc = json.loads(Path(path).read_text())
    except FileNotFoundError:
        raise ConfigError(f"config file not found: {path}") from None
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: {exc}") from None
    if not isinstance(doc, dict):
        raise ConfigError("config must be a JSON object")
    return doc


def read_predictions(path):
    path = Path(path)
    if not path.exists():
        raise DataError(f"predictions file not found: {path}")
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        need = {"y_true", "pred_a", "pred_b"}
        if reader.fieldnames is None or not need <= set(reader.fieldnames):
            raise DataError(f"{path}: needs columns y_true,pred_a,pred_b")
        rows = list(reader)
    try:
        cols = {k: np.array([int(r[k]) for r in rows], dtype=np.int64) for k in need}
    except ValueError as exc:
        raise DataError(f"{path}: {exc}") from None
    return cols["y_true"], cols["pred_a"], cols["pred_b"]


def run_bootstrap(args) -> None:
    if args.config:
        cfg_doc = _read_json(args.config).get("bootstrap", {})
    else:
        cfg_doc = {}
    resamples = args.resamples or int(cfg_doc.get("resamples", 10_000))
    seed = args.seed if args.seed is not None else int(cfg_doc.get("seed", 42))
    y, a, b = read_predictions(args.preds)
    res = paired_bootstrap(y, a, b, resamples, seed, metric=args.metric, threads=args.threads or 1)
    text = json.dumps(res.to_dict(), indent=2, sort_keys=True)
    if args.out:
        out = Path(args.out)
        out.mkdir(parents=True, exist_ok=True)
        (out / "bootstrap.json").write_text(text)
    print(text)


def dispatch(args) -> None:
    if args.command == "bootstrap":
        run_bootstrap(args)
        return
    cfg = load_config(args)
    if args.command == "kernel":
        runner = Runner(cfg, cache_to_disk=True)
        for p in runner.write_kernels():
            print(p)
    elif args.command == "train":
        runner = Runner(cfg)
        for p in runner.write_models():
            print(p)
    elif args.command == "spectrum":
        runner = Runner(cfg)
        for row in runner.write_spectra(args.subsample):
            print(f"{row['model_tag']} {row['seed_tag']} q={row['q']} {row['kernel']}: "
                  f"n_positive={row['n_positive']} eff_rank={row['eff_rank']:.4f}")
    else:
        runner = Runner(cfg)
        records, summary = getattr(runner, PROTOCOLS[args.command])()
        path = runner.write(records, summary)
        for c in summary.get("configs", []):
            print(f"{c['model_tag']} q={c['q']}: delta_f1={c['delta_f1']:+.4f} {c['verdict']} "
                  f"p={c['pooled_bootstrap']['p_value']:.4g}")
        print(path)


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        dispatch(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except DataError as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return 3
    except NumericalError as exc:
        print(f"numerical error: {exc}", file=sys.stderr)
        return 4
    return 0

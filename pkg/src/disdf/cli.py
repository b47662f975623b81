"""Command-line interface: train, predict, and bench subcommands.

Exit codes: 0 ok, 1 internal error, 2 I/O or data-file error, 3 validation
error.  The DISDF_THREADS environment variable sets the default worker count;
--threads overrides it.
"""

from __future__ import annotations

import argparse
import dataclasses
import os
import sys
from pathlib import Path

from .cascade import predict_batch, train_cascade
from .config import TrainConfig
from .data import load_csv, load_features
from .errors import (
    ConfigError,
    DataError,
    DegeneratePairsError,
    DimensionError,
    DisdfError,
    ModelFormatError,
)
from .evaluation import ExperimentGrid, run_grid
from .serialize import load_model, save_model

EXIT_OK = 0
EXIT_INTERNAL = 1
EXIT_IO = 2
EXIT_VALIDATION = 3

_INT_OR_NONE_FIELDS = {"pair_budget", "max_depth"}


def _parse_label_col(text: str):
    stripped = text.strip()
    if stripped.lstrip("-").isdigit():
        return int(stripped)
    return stripped


def _parse_int_list(text: str) -> tuple[int, ...]:
    try:
        return tuple(int(tok) for tok in text.split(",") if tok.strip())
    except ValueError:
        raise ConfigError(f"expected a comma-separated integer list, got {text!r}")


def _coerce(field: dataclasses.Field, raw: str):
    text = raw.strip()
    if field.name in _INT_OR_NONE_FIELDS:
        return None if text.lower() in ("none", "") else int(text)
    if field.type in ("int", int):
        return int(text)
    if field.type in ("float", float):
        return float(text)
    if field.type in ("bool", bool):
        if text.lower() in ("1", "true", "yes", "on"):
            return True
        if text.lower() in ("0", "false", "no", "off"):
            return False
        raise ConfigError(f"{field.name}: expected a boolean, got {raw!r}")
    return text


def _read_config_file(path) -> dict:
    fields = {f.name: f for f in dataclasses.fields(TrainConfig)}
    out = {}
    try:
        lines = Path(path).read_text().splitlines()
    except OSError as exc:
        raise DataError(f"cannot read config file {path}: {exc}") from exc
    for line_no, line in enumerate(lines, 1):
        stripped = line.strip()
        if not stripped or stripped.startswith("#"):
            continue
        key, eq, value = stripped.partition("=")
        key = key.strip()
        if not eq or key not in fields:
            raise ConfigError(f"{path}:{line_no}: expected '<field>=<value>', got {line!r}")
        try:
            out[key] = _coerce(fields[key], value)
        except ValueError:
            raise ConfigError(f"{path}:{line_no}: bad value for {key}: {value!r}") from None
    return out


def _build_config(args) -> TrainConfig:
    values = {}
    if getattr(args, "config", None):
        values.update(_read_config_file(args.config))
    flag_to_field = {
        "mode": "mode",
        "trees": "trees_per_forest",
        "forests": "forests_per_level",
        "max_levels": "max_levels",
        "patience": "patience",
        "folds": "folds",
        "tau": "tau",
        "lam": "lam",
        "fw_iterations": "fw_iterations",
        "pair_budget": "pair_budget",
        "seed": "seed",
        "min_leaf": "min_leaf",
        "max_depth": "max_depth",
    }
    for flag, field in flag_to_field.items():
        value = getattr(args, flag, None)
        if value is not None:
            values[field] = value
    if getattr(args, "stratify", False):
        values["stratify"] = True
    return TrainConfig(**values).validate()


def _add_config_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", help="key=value config file; flags override it")
    p.add_argument("--mode", choices=("disdf", "baseline"))
    p.add_argument("--trees", type=int, help="trees per forest")
    p.add_argument("--forests", type=int, help="forests per level")
    p.add_argument("--max-levels", dest="max_levels", type=int)
    p.add_argument("--patience", type=int)
    p.add_argument("--folds", type=int)
    p.add_argument("--tau", type=float, help="contrastive margin")
    p.add_argument("--lambda", dest="lam", type=float, help="regularization strength")
    p.add_argument("--fw-iterations", dest="fw_iterations", type=int)
    p.add_argument("--pair-budget", dest="pair_budget", type=int)
    p.add_argument("--seed", type=int)
    p.add_argument("--min-leaf", dest="min_leaf", type=int)
    p.add_argument("--max-depth", dest="max_depth", type=int)
    p.add_argument("--stratify", action="store_true", default=False)


def _threads(args) -> int:
    if args.threads is not None:
        return max(1, args.threads)
    env = os.environ.get("DISDF_THREADS")
    if env:
        try:
            return max(1, int(env))
        except ValueError:
            raise ConfigError(f"DISDF_THREADS must be an integer, got {env!r}")
    return 1


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="disdf",
        description="Cascade forest classifier with metric-learned tree weights.",
    )
    parser.add_argument("--threads", type=int, default=None, help="worker process cap")
    sub = parser.add_subparsers(dest="command", required=True)

    p_train = sub.add_parser("train", help="train a model and write it to disk")
    p_train.add_argument("--data", required=True, help="labeled CSV file")
    p_train.add_argument("--label-col", required=True, type=_parse_label_col)
    p_train.add_argument("--out", required=True, help="output model path")
    _add_config_flags(p_train)

    p_pred = sub.add_parser("predict", help="predict class indices for a feature CSV")
    p_pred.add_argument("--model", required=True)
    p_pred.add_argument("--data", required=True, help="feature CSV (no label column)")
    p_pred.add_argument(
        "--label-col",
        type=_parse_label_col,
        default=None,
        help="if given, drop this column from the input before predicting",
    )
    p_pred.add_argument("--out", required=True, help="output CSV of class indices")

    p_bench = sub.add_parser("bench", help="run the N-by-T comparison grid")
    p_bench.add_argument("--data", required=True)
    p_bench.add_argument("--label-col", required=True, type=_parse_label_col)
    p_bench.add_argument("--N-list", dest="n_list", required=True)
    p_bench.add_argument("--T-list", dest="t_list", required=True)
    p_bench.add_argument("--reps", type=int, default=100)
    p_bench.add_argument("--out-dir", dest="out_dir", default="bench-results")
    p_bench.add_argument("--name", default=None, help="dataset name for reports")
    _add_config_flags(p_bench)

    return parser


def cmd_train(args) -> int:
    cfg = _build_config(args)
    ds = load_csv(args.data, args.label_col)
    model = train_cascade(ds, cfg, workers=_threads(args))
    save_model(model, args.out)
    scores = ", ".join(f"{s:.4f}" for s in model.level_scores)
    print(
        f"trained {model.n_levels} level(s) on {ds.n} rows "
        f"({ds.feature_dim} features, {ds.num_classes} classes)"
    )
    print(f"level scores: [{scores}]; model written to {args.out}")
    return EXIT_OK


def cmd_predict(args) -> int:
    model = load_model(args.model)
    if args.label_col is None:
        X = load_features(args.data)
    else:
        ds = load_csv(args.data, args.label_col)
        X = ds.features
    if X.shape[0] == 0:
        Path(args.out).write_text("")
        print(f"0 predictions written to {args.out}")
        return EXIT_OK
    if X.shape[1] != model.base_dim:
        raise DimensionError(
            f"input has {X.shape[1]} feature columns, model expects {model.base_dim}"
        )
    preds = predict_batch(model, X)
    Path(args.out).write_text("".join(f"{p}\n" for p in preds))
    print(f"{len(preds)} predictions written to {args.out}")
    return EXIT_OK


def cmd_bench(args) -> int:
    cfg = _build_config(args)
    ds = load_csv(args.data, args.label_col)
    grid = ExperimentGrid(
        train_sizes=_parse_int_list(args.n_list),
        tree_counts=_parse_int_list(args.t_list),
        reps=args.reps,
        base_config=cfg,
    )
    name = args.name or Path(args.data).stem
    result = run_grid(ds, grid, workers=_threads(args), dataset_name=name)
    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    per_rep = out_dir / f"{name}_accuracies.csv"
    summary = out_dir / f"{name}_summary.csv"
    result.write_csv(per_rep)
    result.write_summary_csv(summary)
    print(result.format_table())
    print(f"per-rep results: {per_rep}")
    print(f"summary: {summary}")
    return EXIT_OK


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        if args.command == "train":
            return cmd_train(args)
        if args.command == "predict":
            return cmd_predict(args)
        if args.command == "bench":
            return cmd_bench(args)
        parser.error(f"unknown command {args.command}")
    except (ConfigError, DimensionError, DegeneratePairsError) as exc:
        print(f"disdf: error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except (DataError, ModelFormatError, OSError) as exc:
        print(f"disdf: error: {exc}", file=sys.stderr)
        return EXIT_IO
    except DisdfError as exc:
        print(f"disdf: error: {exc}", file=sys.stderr)
        return EXIT_INTERNAL
    return EXIT_INTERNAL


if __name__ == "__main__":
    sys.exit(main())

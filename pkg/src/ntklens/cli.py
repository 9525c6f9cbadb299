"""Command-line front end.

Every subcommand accepts ``--config FILE`` with flat ``key=value`` lines;
any key can be overridden by the flag of the same name.  Each run writes its
result files plus a ``run_meta.json`` carrying the effective configuration,
content hashes of the input data files, and library versions.
"""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import asdict
from pathlib import Path

import numpy as np

from . import presets as presets_mod
from .experiments import (
    ComparisonConfig,
    CorrelationConfig,
    run_correlation_experiment,
    run_rnd_comparison,
    write_comparison_csv,
    write_correlation_json,
    write_records_csv,
    write_run_meta,
)
from .kernel import collective_variables, compute_ntk, dump_matrix_csv, dump_report_json, spectrum_report
from .network import AdamConfig, init_network
from .seeding import derive_seed
from .selection import RndConfig, dump_selection_json, select_random, select_rnd
from .training import TrainConfig, train


def _parse_bool(text: str) -> bool:
    lowered = text.strip().lower()
    if lowered in ("1", "true", "yes", "on"):
        return True
    if lowered in ("0", "false", "no", "off"):
        return False
    raise argparse.ArgumentTypeError(f"not a boolean: {text!r}")


def _parse_sizes(text: str) -> tuple[int, ...]:
    try:
        return tuple(int(part) for part in text.split(",") if part.strip())
    except ValueError:
        raise argparse.ArgumentTypeError(f"sizes must be comma-separated integers, got {text!r}")


def parse_config_file(path) -> dict[str, str]:
    values = {}
    for lineno, raw in enumerate(Path(path).read_text().splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise ValueError(f"{path}:{lineno}: expected key=value, got {line!r}")
        key, _, value = line.partition("=")
        values[key.strip().replace("-", "_")] = value.strip()
    return values


class _Command:
    """A subcommand with typed options that a config file can also set."""

    def __init__(self, subparsers, name: str, help_text: str):
        self.parser = subparsers.add_parser(name, help=help_text)
        self.parser.add_argument("--config", default=None, help="key=value config file")
        self.types: dict[str, object] = {}

    def opt(self, name: str, typ, default=None, help=""):
        flag = "--" + name.replace("_", "-")
        self.parser.add_argument(flag, dest=name, type=typ, default=None, help=help)
        self.types[name] = (typ, default)
        return self

    def resolve(self, args) -> dict:
        """flag > config file > default."""
        from_file = parse_config_file(args.config) if args.config else {}
        out = {}
        for name, (typ, default) in self.types.items():
            value = getattr(args, name)
            if value is None and name in from_file:
                value = typ(from_file[name])
            if value is None:
                value = default
            out[name] = value
        unknown = set(from_file) - set(self.types)
        if unknown:
            raise ValueError(f"unknown config keys: {sorted(unknown)}")
        return out


def _out_dir(path) -> Path:
    out = Path(path)
    out.mkdir(parents=True, exist_ok=True)
    return out


def _preset_input_files(preset: str) -> list:
    files = {
        "fuel": ["fuel.csv"],
        "gait": ["gait.csv"],
        "concrete": ["concrete.csv"],
        "mnist": ["digits8x8.npz"],
    }.get(preset, [])
    return [presets_mod.data_path(f) for f in files]


def _build_parser():
    parser = argparse.ArgumentParser(prog="ntklens", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)
    commands = {}

    c = _Command(sub, "ntk", "tangent kernel and collective variables on a data subset")
    c.opt("preset", str, "fuel").opt("subset_size", int, 32).opt("seed", int, 0)
    c.opt("parametrization", str, "lecun").opt("data_dir", str, None)
    c.opt("out", str, "runs/ntk")
    commands["ntk"] = c

    c = _Command(sub, "select", "choose a training subset by rnd or random")
    c.opt("preset", str, "fuel").opt("method", str, "rnd").opt("size", int, 8).opt("seed", int, 0)
    c.opt("retrain_epochs", int, None).opt("retrain_lr", float, None).opt("data_dir", str, None)
    c.opt("out", str, "runs/select")
    commands["select"] = c

    c = _Command(sub, "train", "single seeded training run")
    c.opt("preset", str, "fuel").opt("size", int, 0, help="training subset size, 0 = full pool")
    c.opt("seed", int, 0).opt("epochs", int, None).opt("batch_size", int, None)
    c.opt("learning_rate", float, None).opt("parametrization", str, "lecun")
    c.opt("data_dir", str, None).opt("out", str, "runs/train")
    commands["train"] = c

    c = _Command(sub, "exp-correlation", "collective variables vs outcome over an ensemble")
    c.opt("preset", str, "fuel").opt("runs", int, 200).opt("size_min", int, 16).opt("size_max", int, 200)
    c.opt("parametrization", str, "lecun").opt("master_seed", int, 0).opt("split_seed", int, 0)
    c.opt("ntk_cap", int, 512).opt("workers", int, 1).opt("epochs", int, None)
    c.opt("batch_size", int, None).opt("learning_rate", float, None).opt("eval_every", int, 1)
    c.opt("data_dir", str, None).opt("out", str, "runs/exp-correlation")
    commands["exp-correlation"] = c

    c = _Command(sub, "exp-rnd-compare", "rnd vs random selection across sizes")
    c.opt("preset", str, "fuel").opt("sizes", _parse_sizes, (8, 16, 32)).opt("ensemble", int, 20)
    c.opt("master_seed", int, 0).opt("split_seed", int, 0).opt("workers", int, 1)
    c.opt("epochs", int, None).opt("batch_size", int, None).opt("learning_rate", float, None)
    c.opt("retrain_epochs", int, None).opt("retrain_lr", float, None).opt("eval_every", int, 1)
    c.opt("data_dir", str, None).opt("out", str, "runs/exp-rnd-compare")
    commands["exp-rnd-compare"] = c

    c = _Command(sub, "presets", "inspect the named presets")
    c.parser.add_argument("action", choices=["list"])
    commands["presets"] = c

    return parser, commands


def _cmd_ntk(opts) -> int:
    preset = presets_mod.PRESETS[opts["preset"]]
    pool, _, _ = presets_mod.load_split(opts["preset"], data_dir=opts["data_dir"], split_seed=opts["seed"])
    if opts["subset_size"] > pool.n_samples:
        raise ValueError(f"subset_size {opts['subset_size']} exceeds pool of {pool.n_samples}")
    rng = np.random.default_rng(derive_seed(opts["seed"], 0))
    subset = pool.take(rng.choice(pool.n_samples, size=opts["subset_size"], replace=False))
    state = init_network(
        preset.correlation_spec(pool.n_features, opts["parametrization"]), derive_seed(opts["seed"], 1)
    )
    matrix = compute_ntk(state, subset.inputs)
    report = spectrum_report(matrix)
    out = _out_dir(opts["out"])
    dump_matrix_csv(matrix, out / "ntk_matrix.csv")
    dump_report_json(report, out / "spectrum.json")
    write_run_meta(opts, _preset_input_files(opts["preset"]), out / "run_meta.json")
    print(f"n={matrix.n} trace={report.trace:.6g} entropy={report.entropy:.6g} "
          f"max_eig_ratio={report.max_eig_ratio:.6g}")
    print(f"wrote {out}/ntk_matrix.csv, spectrum.json")
    return 0


def _cmd_select(opts) -> int:
    if opts["method"] not in ("rnd", "random"):
        raise ValueError(f"method must be rnd or random, got {opts['method']!r}")
    preset = presets_mod.PRESETS[opts["preset"]]
    pool, _, _ = presets_mod.load_split(opts["preset"], data_dir=opts["data_dir"], split_seed=opts["seed"])
    if opts["size"] > pool.n_samples:
        raise ValueError(f"size {opts['size']} exceeds pool of {pool.n_samples}")
    cfg = None
    if opts["method"] == "rnd":
        cfg = RndConfig(
            embedding_spec=preset.selection_spec(pool.n_features),
            target_size=opts["size"],
            retrain_epochs=opts["retrain_epochs"] or preset.retrain_epochs,
            retrain_lr=opts["retrain_lr"] or preset.retrain_lr,
            seed=opts["seed"],
        )
        result = select_rnd(pool, cfg)
    else:
        result = select_random(pool, opts["size"], seed=opts["seed"])
    out = _out_dir(opts["out"])
    dump_selection_json(result, cfg, out / "selection.json")
    write_run_meta(opts, _preset_input_files(opts["preset"]), out / "run_meta.json")
    print(f"chose {len(result.chosen_indices)} indices by {result.method}: {result.chosen_indices}")
    return 0


def _cmd_train(opts) -> int:
    preset = presets_mod.PRESETS[opts["preset"]]
    pool, test, _ = presets_mod.load_split(opts["preset"], data_dir=opts["data_dir"], split_seed=opts["seed"])
    size = opts["size"] or pool.n_samples
    if size > pool.n_samples:
        raise ValueError(f"size {size} exceeds pool of {pool.n_samples}")
    rng = np.random.default_rng(derive_seed(opts["seed"], 0))
    subset = pool.take(rng.choice(pool.n_samples, size=size, replace=False))
    state = init_network(
        preset.correlation_spec(pool.n_features, opts["parametrization"]), derive_seed(opts["seed"], 1)
    )
    cfg = TrainConfig(
        epochs=opts["epochs"] if opts["epochs"] is not None else preset.correlation_epochs,
        batch_size=opts["batch_size"] if opts["batch_size"] is not None else preset.correlation_batch,
        adam=AdamConfig(learning_rate=opts["learning_rate"] or preset.correlation_lr),
        loss=preset.loss,
        seed=derive_seed(opts["seed"], 2),
    )
    _, outcome = train(state, subset, test, cfg)
    out = _out_dir(opts["out"])
    with open(out / "train_outcome.json", "w") as fh:
        json.dump(outcome.to_dict(), fh, indent=2, sort_keys=True)
        fh.write("\n")
    write_run_meta(opts, _preset_input_files(opts["preset"]), out / "run_meta.json")
    acc = "" if outcome.max_accuracy is None else f" max_accuracy={outcome.max_accuracy:.2f}%"
    print(f"min_test_loss={outcome.min_test_loss:.6g} final_test_loss={outcome.final_test_loss:.6g}{acc}")
    return 0


def _cmd_exp_correlation(opts) -> int:
    out = _out_dir(opts.pop("out"))
    cfg = CorrelationConfig(**opts)
    outcome = run_correlation_experiment(cfg)
    write_records_csv(outcome.records, out / "records.csv")
    write_correlation_json(outcome, out / "correlation.json")
    write_run_meta(asdict(cfg), _preset_input_files(cfg.preset), out / "run_meta.json")
    if outcome.matrix is None:
        print(f"no correlation matrix: {outcome.note}")
    else:
        names = outcome.matrix.variable_names
        print("pearson matrix over", names)
        for name, row in zip(names, outcome.matrix.entries):
            print("  " + name.ljust(18) + " ".join(f"{v:+.3f}" for v in row))
    print(f"wrote {out}/records.csv, correlation.json ({outcome.n_diverged} diverged)")
    return 0


def _cmd_exp_rnd_compare(opts) -> int:
    out = _out_dir(opts.pop("out"))
    cfg = ComparisonConfig(**opts)
    outcome = run_rnd_comparison(cfg)
    write_comparison_csv(outcome.points, out / "comparison.csv")
    write_records_csv(outcome.records, out / "records.csv")
    write_run_meta(asdict(cfg), _preset_input_files(cfg.preset), out / "run_meta.json")
    for p in outcome.points:
        print(
            f"size={p.dataset_size:<4d} {p.method:<6s} min_test_loss={p.min_test_loss_mean:.4f}"
            f"+-{p.min_test_loss_se:.4f} entropy={p.starting_entropy_mean:.4f} trace={p.starting_trace_mean:.4g}"
        )
    print(f"wrote {out}/comparison.csv, records.csv")
    return 0


def main(argv=None) -> int:
    parser, commands = _build_parser()
    args = parser.parse_args(argv)
    try:
        if args.command == "presets":
            for line in presets_mod.describe_presets():
                print(line)
            return 0
        opts = commands[args.command].resolve(args)
        handler = {
            "ntk": _cmd_ntk,
            "select": _cmd_select,
            "train": _cmd_train,
            "exp-correlation": _cmd_exp_correlation,
            "exp-rnd-compare": _cmd_exp_rnd_compare,
        }[args.command]
        return handler(opts)
    except (ValueError, OSError, KeyError) as err:
        print(f"error: {err}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())

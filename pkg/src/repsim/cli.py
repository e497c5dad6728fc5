"""Command-line entry point: ``repsim <command> [options]``.

Exit codes: 0 success, 1 runtime error, 2 usage error. Parameter precedence
is flags, then ``--config`` file values, then recipe defaults. Runtime errors
are printed to stderr as a JSON record and also written to
``<output-dir>/error.json``.
"""
from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from . import fileio
from .errors import InvalidArgument, RepSimError
from .recipes import RECIPES, ExperimentSpec, run_recipe

# command -> (recipe, [(flag, parameter, argparse kwargs)])
COMMANDS = {
    "compare": (
        "compare",
        [
            ("files", "files", dict(nargs=2, metavar="FILE", help="two activation files (NPY v1.0 or CSV)")),
            ("--metric", "metric", dict(choices=["pwcca", "mean_cca", "svcca", "bartlett_cca", "cosine", "euclidean"])),
            ("--transpose", "transpose", dict(action="store_true", default=None, help="files are datapoints x neurons")),
        ],
    ),
    "pairwise": (
        "pairwise",
        [
            ("files", "files", dict(nargs="+", metavar="FILE")),
            ("--metric", "metric", dict(choices=["pwcca", "mean_cca", "svcca", "bartlett_cca", "cosine", "euclidean"])),
            ("--transpose", "transpose", dict(action="store_true", default=None)),
            ("--cluster", "cluster", dict(action="store_true", default=None, help="also cluster the matrix")),
            ("--k", "k", dict(type=int, help="number of clusters (default: largest merge-height gap)")),
        ],
    ),
    "snr-sweep": (
        "snr_sweep",
        [
            ("--k-values", "k_values", dict(help="comma-separated signal dimensions")),
            ("--total-dims", "total_dims", dict(type=int)),
            ("--datapoints", "datapoints", dict(type=int)),
            ("--noise-std", "noise_std", dict(type=float)),
        ],
    ),
    "rnn-toy": (
        "rnn_toy",
        [
            ("--hidden-dim", "hidden_dim", dict(type=int)),
            ("--steps", "steps", dict(type=int)),
            ("--runs", "runs", dict(type=int)),
            ("--alpha", "alpha", dict(type=float, help="weight of the sigmoid term (0 = pure rotation)")),
            ("--metrics", "metrics", dict(help="comma-separated metrics")),
        ],
    ),
    "train-group": (
        None,
        [
            ("--kind", None, dict(choices=["gen_mem", "width_sweep", "lr_sweep"], default="gen_mem")),
            ("--widths", "widths", dict(help="comma-separated layer widths, input first")),
            ("--activation", "activation", dict(choices=["relu", "tanh"])),
            ("--learning-rate", "learning_rate", dict(type=float)),
            ("--epochs", "epochs", dict(type=int)),
            ("--group-size", "group_size", dict(type=int)),
            ("--metric", "metric", dict(choices=["pwcca", "mean_cca", "svcca", "cosine", "euclidean"])),
        ],
    ),
    "convergence": (
        "convergence",
        [
            ("--checkpoint-dir", "checkpoint_dir", dict(help="directory with manifest.json; omit to train a toy net")),
            ("--metrics", "metrics", dict(help="comma-separated metrics; the first sets crossing steps")),
            ("--threshold", "threshold", dict(type=float)),
        ],
    ),
    "stability": (
        "stability_split",
        [
            ("--checkpoint-dir", "checkpoint_dir", dict()),
            ("--layer", "layer", dict(help="layer name (default: last)")),
            ("--t-early-index", "t_early_index", dict(type=int)),
            ("--m", "m", dict(type=int, help="vectors per set (default: min(100, c // 2))")),
            ("--side", "side", dict(choices=["early", "mid"])),
        ],
    ),
    "cluster": (
        "cluster",
        [
            ("matrix", "matrix", dict(help="matrix JSON written by 'pairwise'")),
            ("--k", "k", dict(type=int)),
        ],
    ),
}


class _Parser(argparse.ArgumentParser):
    def __init__(self, *args, **kwargs):
        kwargs.setdefault("formatter_class", lambda prog: argparse.HelpFormatter(prog, width=100))
        super().__init__(*args, **kwargs)


def _add_common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", help="JSON file with 'parameters', 'seeds', 'output_dir'")
    p.add_argument("--seeds", help="comma-separated integer seeds")
    p.add_argument("--output-dir", help="directory for artifacts")
    p.add_argument("--param", action="append", default=[], metavar="KEY=VALUE",
                   help="set any recipe parameter")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="repsim", description="CCA-based representational similarity experiments.")
    sub = parser.add_subparsers(dest="command", metavar="COMMAND")
    sub.required = True
    for name, (recipe_name, flags) in COMMANDS.items():
        help_text = RECIPES[recipe_name].help if recipe_name else "train toy network groups (gen_mem, width_sweep, lr_sweep)"
        p = sub.add_parser(name, help=help_text, description=help_text)
        for flag, dest, kwargs in flags:
            if flag.startswith("--"):
                p.add_argument(flag, dest=dest or flag[2:].replace("-", "_"), **kwargs)
            else:
                p.add_argument(flag, **kwargs)
        _add_common(p)
    run = sub.add_parser("run", help="run a recipe described entirely by a config file",
                         description="Recipes: " + ", ".join(sorted(RECIPES)))
    run.add_argument("config_file", help="JSON with 'recipe', 'parameters', 'seeds', 'output_dir'")
    return parser


def full_help() -> str:
    """Help text of the top-level parser and of every subcommand."""
    parser = build_parser()
    parts = [parser.format_help()]
    sub = next(a for a in parser._actions if isinstance(a, argparse._SubParsersAction))
    for name, p in sub.choices.items():
        parts.append(f"==> repsim {name} --help\n" + p.format_help())
    return "\n".join(parts)


def _read_config(path) -> dict:
    if not path:
        return {}
    body = fileio.read_json(path)
    if not isinstance(body, dict):
        raise InvalidArgument("config file must hold a JSON object")
    return body


def spec_from_args(args: argparse.Namespace) -> ExperimentSpec:
    if args.command == "run":
        cfg = _read_config(args.config_file)
        if "recipe" not in cfg:
            raise InvalidArgument("config file needs a 'recipe' key")
        return ExperimentSpec(cfg["recipe"], dict(cfg.get("parameters", {})),
                              list(cfg.get("seeds", [0])), cfg.get("output_dir", "repsim_out"))
    recipe_name, flags = COMMANDS[args.command]
    if recipe_name is None:
        recipe_name = args.kind
    cfg = _read_config(args.config)
    params = dict(cfg.get("parameters", {}))
    for flag, dest, _ in flags:
        if dest is None:
            continue
        value = getattr(args, dest if flag.startswith("--") else flag)
        if value is not None:
            params[dest] = value
    for item in args.param:
        key, sep, value = item.partition("=")
        if not sep:
            raise InvalidArgument(f"--param expects KEY=VALUE, got {item!r}")
        params[key] = value
    seeds = cfg.get("seeds", [0])
    if args.seeds:
        seeds = [int(s) for s in args.seeds.split(",") if s]
    output_dir = args.output_dir or cfg.get("output_dir") or f"repsim_out/{recipe_name}"
    return ExperimentSpec(recipe_name, params, seeds, output_dir)


def _error_record(exc: Exception, output_dir) -> dict:
    record = {"error": type(exc).__name__, "message": str(exc)}
    print(json.dumps(record), file=sys.stderr)
    if output_dir:
        try:
            fileio.write_json(Path(output_dir) / "error.json", record)
        except RepSimError:
            pass
    return record


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        spec = spec_from_args(args).resolved()
    except (InvalidArgument, RepSimError) as exc:
        parser.print_usage(sys.stderr)
        _error_record(exc, None)
        return 2
    try:
        outcome = run_recipe(spec)
    except (RepSimError, OSError, ValueError) as exc:
        _error_record(exc, spec.output_dir)
        return 1
    if spec.recipe == "compare":
        print(repr(outcome.result["distance"]))
    else:
        for path in outcome.artifacts:
            print(path)
    return outcome.exit_code


if __name__ == "__main__":
    sys.exit(main())

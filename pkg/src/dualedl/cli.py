"""Command-line entry point.

Commands: gen-data, train, ablate, sweep, analyze.  Every command takes an
optional JSON config (defaults reproduce the reference benchmark), echoes the
effective config into the output directory, and writes CSV tables with
figures rendered alongside.  Exit codes: 0 success, 2 numeric failure,
64 usage or config error.
"""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import replace
from pathlib import Path

import numpy as np

from . import analysis, figures
from .config import ExperimentConfig, config_from_dict, dump_config, load_config
from .data import generate, load_dataset, realized_imbalance_ratio, save_dataset
from .metrics import write_metrics_csv, write_pairs_csv
from .trainer import NonFiniteLossError, load_state, save_state, train

EXIT_OK = 0
EXIT_NUMERIC = 2
EXIT_USAGE = 64

_POLICY_MODES = {
    "on": (True, True),
    "off": (False, False),
    "eu-only": (True, False),
}


class _Parser(argparse.ArgumentParser):
    """argparse with the scriptable usage-error exit code."""

    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _add_common(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--config", type=str, default=None,
                        help="JSON experiment config (defaults: reference benchmark)")
    parser.add_argument("--seed", type=int, default=None,
                        help="override the data and training seed")
    parser.add_argument("--out", type=str, default=None,
                        help="override the config's output directory")
    parser.add_argument("--jobs", type=int, default=1,
                        help="parallel runs for ablate/sweep (default serial)")
    parser.add_argument("--policy", choices=sorted(_POLICY_MODES), default=None,
                        help="force the training policy on, off, or eu-only")


def build_parser() -> _Parser:
    parser = _Parser(prog="dualedl",
                     description="evidential uncertainty training toolkit")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("gen-data", help="generate the synthetic dataset")
    _add_common(p)

    p = sub.add_parser("train", help="train one model and write metrics + state")
    _add_common(p)
    p.add_argument("--data", type=str, default=None,
                   help="directory with gen-data output (default: generate inline)")

    p = sub.add_parser("ablate", help="run the edl / +eu / +eu+au ablation")
    _add_common(p)
    p.add_argument("--seeds", type=str, required=True,
                   help="comma-separated seed list, at least 3")

    p = sub.add_parser("sweep", help="sweep sigma or epsilon with the full policy")
    _add_common(p)
    p.add_argument("--param", choices=analysis.SWEEP_PARAMETERS, required=True)
    p.add_argument("--values", type=str, required=True,
                   help="comma-separated values to sweep")
    p.add_argument("--seeds", type=str, default="1,2,3",
                   help="comma-separated seed list")

    p = sub.add_parser("analyze", help="vacuity vs entropy-EU correlation study")
    _add_common(p)
    p.add_argument("--synthetic", action="store_true",
                   help="use the synthetic Dirichlet sampler")
    p.add_argument("--state", type=str, default=None,
                   help="trained state file to analyze instead")
    p.add_argument("-n", type=int, default=2000, help="number of pairs")

    return parser


def _load_effective_config(args) -> ExperimentConfig:
    config = load_config(args.config) if args.config else ExperimentConfig.default()
    if args.seed is not None:
        config = config.with_seed(args.seed)
    if args.out is not None:
        config = replace(config, output_dir=args.out)
    if args.policy is not None:
        reweight, smoothing = _POLICY_MODES[args.policy]
        config = replace(config, policy=replace(
            config.policy, reweight_enabled=reweight, smoothing_enabled=smoothing))
    return config


def _prepare_out(config: ExperimentConfig) -> Path:
    out = Path(config.output_dir)
    out.mkdir(parents=True, exist_ok=True)
    dump_config(config, out / "config.json")
    return out


def cmd_gen_data(args) -> int:
    config = _load_effective_config(args)
    out = _prepare_out(config)
    train_data, test_data, partition = generate(config.data)
    save_dataset(out, config.data, train_data, test_data, partition)
    counts = np.bincount(train_data.clean_labels, minlength=config.data.k)
    print(f"wrote {out / 'train.csv'} ({len(train_data)} samples) and "
          f"{out / 'test.csv'} ({len(test_data)} samples)")
    print(f"per-class train counts: {counts.tolist()}")
    print(f"realized imbalance ratio: {realized_imbalance_ratio(train_data):.3f} "
          f"(requested {config.data.imbalance_ratio:g})")
    return EXIT_OK


def cmd_train(args) -> int:
    config = _load_effective_config(args)
    out = _prepare_out(config)
    if args.data:
        spec, train_data, test_data, partition = load_dataset(args.data)
        if spec.k != config.data.k or spec.feature_dim != config.data.feature_dim:
            raise ValueError("--data directory does not match the config's data spec")
    else:
        train_data, test_data, partition = generate(config.data)
    state, final = train(train_data, test_data, partition, config.network_spec(),
                         config.train, config.policy, config.schedule)
    write_metrics_csv(out / "metrics.csv", state.history)
    save_state(state, out / "state.npz",
               extra_json=(out / "config.json").read_text())
    figures.render_metrics(state.history, out / "metrics.png")
    print(f"wrote {out / 'metrics.csv'}, {out / 'state.npz'}, {out / 'metrics.png'}")
    print(f"final: overall {final.overall_acc:.2f}%  avg {final.avg_class_acc:.2f}%  "
          f"head {final.head_acc:.2f}%  tail {final.tail_acc:.2f}%")
    return EXIT_OK


def _parse_int_list(raw: str, what: str) -> list[int]:
    try:
        return [int(v) for v in raw.split(",") if v.strip() != ""]
    except ValueError as exc:
        raise ValueError(f"could not parse {what} list '{raw}'") from exc


def cmd_ablate(args) -> int:
    config = _load_effective_config(args)
    seeds = _parse_int_list(args.seeds, "seed")
    out = _prepare_out(config)
    results, runs = analysis.ablate(config, seeds, jobs=args.jobs)
    analysis.write_ablation_csv(out / "ablation.csv", results, runs)
    figures.render_ablation(results, out / "ablation.png")
    print(f"wrote {out / 'ablation.csv'} and {out / 'ablation.png'}")
    for res in results:
        print(f"{res.variant:9s} overall {res.mean.overall_acc:6.2f} ± {res.std.overall_acc:5.2f}   "
              f"avg {res.mean.avg_class_acc:6.2f} ± {res.std.avg_class_acc:5.2f}   "
              f"tail {res.mean.tail_acc:6.2f} ± {res.std.tail_acc:5.2f}")
    return EXIT_OK


def cmd_sweep(args) -> int:
    config = _load_effective_config(args)
    seeds = _parse_int_list(args.seeds, "seed")
    try:
        values = [float(v) for v in args.values.split(",") if v.strip() != ""]
    except ValueError as exc:
        raise ValueError(f"could not parse values list '{args.values}'") from exc
    out = _prepare_out(config)
    table = analysis.sweep(args.param, values, config, seeds, jobs=args.jobs)
    csv_path = out / f"sweep_{args.param}.csv"
    analysis.write_sweep_csv(csv_path, args.param, table)
    figures.render_sweep(args.param, table, out / f"sweep_{args.param}.png")
    print(f"wrote {csv_path}")
    for value, agg, _ in table:
        print(f"{args.param} = {value:g}: overall {agg.mean.overall_acc:6.2f}  "
              f"avg {agg.mean.avg_class_acc:6.2f}")
    return EXIT_OK


def cmd_analyze(args) -> int:
    if bool(args.synthetic) == (args.state is not None):
        raise ValueError("analyze needs exactly one of --synthetic or --state")
    state = embedded = None
    if args.state is not None:
        state, extra = load_state(args.state)
        if args.config is None and extra:
            # fall back to the config the training run echoed into its state
            embedded = config_from_dict(json.loads(extra))
    config = embedded if embedded is not None else None
    if config is None:
        config = _load_effective_config(args)
    else:
        if args.seed is not None:
            config = config.with_seed(args.seed)
        if args.out is not None:
            config = replace(config, output_dir=args.out)
    out = _prepare_out(config)
    seed = config.train.seed
    if args.synthetic:
        rho, pairs = analysis.correlation_study("synthetic", args.n, seed,
                                                k=config.data.k)
    else:
        _, test_data, _ = generate(config.data)
        n = min(args.n, len(test_data))
        rho, pairs = analysis.correlation_study((state.network, test_data.features),
                                                n, seed)
    write_pairs_csv(out / "correlation.csv", pairs)
    figures.render_correlation(pairs, rho, out / "correlation.png")
    print(f"wrote {out / 'correlation.csv'} and {out / 'correlation.png'}")
    print(f"spearman(vacuity, entropy_eu) = {rho:.6f} over {len(pairs)} pairs")
    return EXIT_OK


_COMMANDS = {
    "gen-data": cmd_gen_data,
    "train": cmd_train,
    "ablate": cmd_ablate,
    "sweep": cmd_sweep,
    "analyze": cmd_analyze,
}


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return _COMMANDS[args.command](args)
    except NonFiniteLossError as exc:
        print(f"numeric failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except (ValueError, FileNotFoundError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())

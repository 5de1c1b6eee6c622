"""Command-line entry point: ``elicitsim {run,compare,plot,inspect}``."""

import argparse
import datetime
import hashlib
import json
import logging
import os
import statistics
import sys

from . import __version__, dataset, plotting, simulator
from .errors import ElicitError
from .hybrid import HybridConfig
from .recsys import TrainConfig
from .simulator import SimulationConfig

log = logging.getLogger("elicitsim")

FREE_CHOICES = ("off", "features", "features+embeddings")


class UsageError(Exception):
    pass


def _common_options():
    p = argparse.ArgumentParser(add_help=False)
    g = p.add_argument_group("data")
    g.add_argument("--data", help="ratings file (MovieLens ratings.dat or user,item,rating CSV)")
    g.add_argument("--format", choices=("movielens_1m", "csv"), help="ratings format (default: by extension)")
    g.add_argument("--features", help="item feature file (item_id<TAB>tokens) or movies.dat")
    g.add_argument("--min-count", type=int, default=100)
    g.add_argument("--subsample-users", type=int, help="keep this many users after filtering")
    g.add_argument("--config", help="key = value file; command-line flags take precedence")
    return p


def _experiment_options():
    p = argparse.ArgumentParser(add_help=False)
    g = p.add_argument_group("protocol")
    g.add_argument("--k-per-user", type=int, default=1)
    g.add_argument("--t-per-user", type=int, default=30)
    g.add_argument("--iters", type=int, default=25)
    g.add_argument("--batch", type=int, default=10)
    g.add_argument("--seed", type=int, default=0)
    g = p.add_argument_group("strategy")
    g.add_argument("--alpha", type=float, default=2.0)
    g.add_argument("--np-shortlist-size", type=int)
    g.add_argument("--helf-classic", action="store_true")
    g.add_argument("--iknn-k", type=int, default=40)
    g.add_argument("--free-ratings", choices=FREE_CHOICES, default="off")
    g.add_argument("--free-per-item", type=int, default=1)
    g.add_argument("--no-block-norm", action="store_true")
    g = p.add_argument_group("base recommender")
    g.add_argument("--factors", type=int, default=50)
    g.add_argument("--lr", type=float, default=0.005)
    g.add_argument("--reg", type=float, default=0.02)
    g.add_argument("--epochs", type=int, default=20)
    g = p.add_argument_group("output")
    g.add_argument("--out-dir", default=".")
    g.add_argument("--timings", action="store_true", help="fill the seconds column of the report")
    g.add_argument("--manifest", help="reuse the configuration recorded in a previous manifest")
    return p


def build_parser():
    parser = argparse.ArgumentParser(prog="elicitsim", description=__doc__)
    parser.add_argument("--version", action="version", version=f"elicitsim {__version__}")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)
    common, experiment = _common_options(), _experiment_options()

    p = sub.add_parser("run", parents=[common, experiment], help="simulate one strategy")
    p.add_argument("--strategy", default=simulator.HYBRID, choices=simulator.STRATEGIES)

    p = sub.add_parser("compare", parents=[common, experiment], help="simulate several strategies")
    p.add_argument("--strategies", default="pop_entropy,binary,adaptive_hybrid",
                   help="comma list; append +features or +features+embeddings for free ratings")

    p = sub.add_parser("plot", help="render report CSVs as an SVG chart")
    p.add_argument("reports", nargs="+")
    p.add_argument("-o", "--output", default="mae.svg")
    p.add_argument("--title", default="MAE per elicitation round")

    sub.add_parser("inspect", parents=[common], help="print dataset statistics after filtering")
    return parser


def _subparser(parser, command):
    for action in parser._actions:
        if isinstance(action, argparse._SubParsersAction):
            return action.choices[command]
    raise KeyError(command)


def _option_tokens(subparser, values):
    """argv tokens reproducing ``{dest: value}`` on ``subparser``."""
    by_dest = {a.dest: a for a in subparser._actions if a.option_strings}
    tokens = []
    for key, value in values.items():
        dest = key.replace("-", "_")
        action = by_dest.get(dest)
        if action is None:
            raise UsageError(f"unknown configuration key {key!r}")
        flag = max(action.option_strings, key=len)
        if isinstance(action, argparse._StoreTrueAction):
            if str(value).lower() in ("1", "true", "yes", "on"):
                tokens.append(flag)
        elif value is not None:
            tokens.extend([flag, str(value)])
    return tokens


def read_config_file(path):
    values = {}
    with open(path) as fh:
        for number, line in enumerate(fh, start=1):
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            key, sep, value = line.partition("=")
            if not sep:
                raise UsageError(f"{path}:{number}: expected 'key = value'")
            values[key.strip()] = value.strip()
    return values


def parse_args(argv):
    """Parse ``argv``, layering defaults < manifest < config file < flags."""
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.command == "plot":
        return parser, args
    sub = _subparser(parser, args.command)
    prefix = []
    try:
        if getattr(args, "manifest", None):
            with open(args.manifest) as fh:
                manifest = json.load(fh)
            if manifest.get("command") != args.command:
                raise UsageError(f"manifest was written by {manifest.get('command')!r}, "
                                 f"not {args.command!r}")
            prefix += _option_tokens(sub, manifest["options"])
        if args.config:
            prefix += _option_tokens(sub, read_config_file(args.config))
    except (OSError, UsageError, KeyError, ValueError) as exc:
        parser.error(str(exc))
    if prefix:
        rest = argv[argv.index(args.command) + 1:]
        args = parser.parse_args(argv[:argv.index(args.command) + 1] + prefix + rest)
    return parser, args


def _sha256(path):
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 20), b""):
            h.update(chunk)
    return h.hexdigest()


def _ratings_format(args):
    if args.format:
        return args.format
    return "csv" if args.data.lower().endswith(".csv") else "movielens_1m"


def _validate(parser, args):
    if not args.data:
        parser.error("--data is required")
    for name in ("data", "features"):
        path = getattr(args, name, None)
        if path and not os.path.isfile(path):
            parser.error(f"--{name}: no such file {path!r}")
    free_modes = [getattr(args, "free_ratings", "off")]
    if args.command == "compare":
        free_modes += [_parse_strategy(s)[1] for s in _strategy_list(args)]
    if any(m != "off" for m in free_modes) and not args.features:
        parser.error("free ratings need --features")
    if args.command == "compare":
        for name in _strategy_list(args):
            strategy, mode = _parse_strategy(name)
            if strategy not in simulator.STRATEGIES or mode not in FREE_CHOICES:
                parser.error(f"unknown strategy {name!r}")


def _strategy_list(args):
    return [s.strip() for s in args.strategies.split(",") if s.strip()]


def _parse_strategy(name):
    strategy, _, mode = name.partition("+")
    return strategy, (mode or "off")


def load_inputs(args):
    ratings = dataset.load_ratings(args.data, _ratings_format(args))
    filtered = dataset.filter_dense(ratings, args.min_count)
    if args.subsample_users:
        filtered = dataset.subsample_users(filtered, args.subsample_users, seed=getattr(args, "seed", 0))
    features = dataset.load_item_features(args.features) if args.features else None
    return ratings, filtered, features


def simulation_configs(args):
    train = TrainConfig(d=args.factors, learning_rate=args.lr, regularization=args.reg,
                        epochs=args.epochs)
    base = SimulationConfig(
        total_iter=args.iters, batch_size=args.batch,
        hybrid=HybridConfig(alpha=args.alpha, np_shortlist_size=args.np_shortlist_size),
        free_budget=args.free_per_item, block_norm=not args.no_block_norm, train=train,
        iknn_k=args.iknn_k, helf_classic=args.helf_classic, master_seed=args.seed)
    if args.command == "run":
        return [base.replace(strategy=args.strategy, free_mode=args.free_ratings)]
    configs = []
    for name in _strategy_list(args):
        strategy, mode = _parse_strategy(name)
        configs.append(base.replace(strategy=strategy, free_mode=mode, label=name))
    return configs


def _manifest(args, sub, filtered, split):
    options = {}
    for action in sub._actions:
        if action.option_strings and action.dest not in ("help", "manifest", "config", "out_dir"):
            options[action.dest] = getattr(args, action.dest)
    inputs = {name: {"path": os.path.abspath(getattr(args, name)), "sha256": _sha256(getattr(args, name))}
              for name in ("data", "features") if getattr(args, name)}
    return {
        "tool": "elicitsim",
        "version": __version__,
        "command": args.command,
        "options": options,
        "inputs": inputs,
        "dataset": {"users": len({t.user for t in filtered}), "items": len({t.item for t in filtered}),
                    "ratings": len(filtered), "K": len(split.K), "X": len(split.X), "T": len(split.T)},
        "timestamp": datetime.datetime.now(datetime.timezone.utc).isoformat(timespec="seconds"),
    }


def cmd_experiment(parser, args):
    _validate(parser, args)
    configs = simulation_configs(args)
    _, filtered, features = load_inputs(args)
    split = dataset.split(filtered, args.k_per_user, args.t_per_user, seed=args.seed)
    results = simulator.compare_strategies(configs, split, features)
    for result in results:
        if result.truncated:
            log.warning("%s stopped early after %d rounds", result.strategy, len(result) - 1)

    os.makedirs(args.out_dir, exist_ok=True)
    simulator.write_reports(results, os.path.join(args.out_dir, "report.csv"), timings=args.timings)
    simulator.write_events(results, os.path.join(args.out_dir, "events.csv"))
    manifest = _manifest(args, _subparser(parser, args.command), filtered, split)
    with open(os.path.join(args.out_dir, "manifest.json"), "w") as fh:
        json.dump(manifest, fh, indent=2, sort_keys=True)
        fh.write("\n")
    for result in results:
        print(f"{result.strategy}: MAE {result.reports[0].mae:.4f} -> {result.reports[-1].mae:.4f} "
              f"over {len(result) - 1} rounds")
    return 0


def cmd_plot(parser, args):
    series = {}
    for path in args.reports:
        if not os.path.isfile(path):
            parser.error(f"no such report {path!r}")
        for name, points in simulator.read_reports(path).items():
            series.setdefault(name, []).extend(points)
    svg = plotting.line_chart(series, title=args.title)
    with open(args.output, "w") as fh:
        fh.write(svg)
    print(f"wrote {args.output} ({len(series)} series)")
    return 0


def cmd_inspect(parser, args):
    _validate(parser, args)
    ratings, filtered, features = load_inputs(args)
    per_user = list(_counts(filtered, 0).values())
    per_item = list(_counts(filtered, 1).values())
    print(f"raw:      {len(ratings)} ratings, {len(_counts(ratings, 0))} users, "
          f"{len(_counts(ratings, 1))} items")
    print(f"filtered: {len(filtered)} ratings, {len(per_user)} users, {len(per_item)} items "
          f"(min count {args.min_count})")
    if per_user:
        print(f"ratings per user: min {min(per_user)}, median {statistics.median(per_user):g}, "
              f"max {max(per_user)}")
        print(f"ratings per item: min {min(per_item)}, median {statistics.median(per_item):g}, "
              f"max {max(per_item)}")
    if features is not None:
        blocks = ", ".join(f"{k} {b - a}" for k, (a, b) in features.blocks.items())
        print(f"features: {len(features)} items, dimension {features.dim} ({blocks})")
    return 0


def _counts(triples, field):
    counts = {}
    for t in triples:
        counts[t[field]] = counts.get(t[field], 0) + 1
    return counts


def main(argv=None):
    argv = list(sys.argv[1:] if argv is None else argv)
    parser, args = parse_args(argv)
    logging.basicConfig(level=logging.INFO if getattr(args, "verbose", False) else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    handler = {"run": cmd_experiment, "compare": cmd_experiment,
               "plot": cmd_plot, "inspect": cmd_inspect}[args.command]
    try:
        return handler(parser, args)
    except ElicitError as exc:
        print(f"elicitsim: error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())

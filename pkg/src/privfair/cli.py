"""Command-line entry point for auditors.

Subcommands: fit (train and store a tree), audit (estimate statistical
parity through a curator), experiment (run the comparison grids),
curator-serve (host the wire protocol). Exit codes: 0 ok, 2 usage, 3 data
error, 4 budget refusal, 5 protocol error.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .curator import Curator, CuratorServer, InProcessClient, WireClient
from .data import (
    DATASET_ENCODINGS,
    EncodingSpec,
    encode_sensitive,
    load_adult,
    load_compas,
    load_csv_with_schema,
    load_german,
    stratified_split,
)
from .errors import (
    BudgetRefusal,
    DataError,
    DegenerateEstimateError,
    MetricError,
    ParameterError,
    ProtocolError,
    RoutingError,
)
from .estimator import InvalidPolicy, estimate_sp
from .experiments import (
    ExperimentConfig,
    desk_scale_exp1,
    desk_scale_exp2,
    paper_scale_exp1,
    paper_scale_exp2,
    run_experiment_1,
    run_experiment_2,
    run_experiment_2_1,
    save_heatmap,
)
from .metrics import PredictionSet, balanced_accuracy
from .tree import (
    LearnerConfig,
    fit,
    load_tree,
    predict_dataset,
    prune_redundant,
    query_count_bounds,
    save_tree,
    to_text,
)

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_DATA = 3
EXIT_BUDGET = 4
EXIT_PROTOCOL = 5

OUT_DIR_ENV = "PRIVFAIR_OUT"


def _out_dir(value: str | None) -> Path:
    return Path(value or os.environ.get(OUT_DIR_ENV, "."))


def _add_dataset_args(parser: argparse.ArgumentParser):
    parser.add_argument(
        "--dataset", required=True,
        help="adult | compas | german | csv:<schema.json>",
    )
    parser.add_argument("--train", help="training-split file (adult, csv)")
    parser.add_argument("--test", help="test-split file (adult, csv)")
    parser.add_argument("--data", help="single data file (compas, german)")
    parser.add_argument("--split-seed", type=int, default=0, help="seed for 2:1 splits")


def _load_dataset(args):
    """Returns (family, (train_ds, train_sens), (test_ds, test_sens))."""
    name = args.dataset
    if name == "adult":
        if not args.train or not args.test:
            raise DataError("adult needs --train and --test")
        train, test = load_adult(args.train, args.test)
        return "adult", train, test
    if name == "compas":
        if not args.data:
            raise DataError("compas needs --data")
        train, test = load_compas(args.data, seed=args.split_seed)
        return "compas", train, test
    if name == "german":
        if not args.data:
            raise DataError("german needs --data")
        train, test = load_german(args.data, seed=args.split_seed)
        return "german", train, test
    if name.startswith("csv:"):
        schema_path = name[len("csv:"):]
        with open(schema_path, "r", encoding="utf-8") as fh:
            schema = json.load(fh)
        if not args.train:
            raise DataError("csv datasets need --train (and optionally --test)")
        train = load_csv_with_schema(args.train, schema)
        if args.test:
            test = load_csv_with_schema(args.test, schema)
        else:
            ds, sens = train
            tr_idx, te_idx = stratified_split(ds.labels, seed=args.split_seed)
            train = (ds.take(tr_idx), sens.take(tr_idx))
            test = (ds.take(te_idx), sens.take(te_idx))
        return "csv", train, test
    raise DataError(f"unknown dataset {name!r}")


def _encoding_spec(family: str, sensitive: str) -> EncodingSpec:
    table = DATASET_ENCODINGS.get("adult" if family == "csv" else family, {})
    if sensitive in table:
        return table[sensitive]
    # generic form: raw:<attr> or a privileged definition like attr=value
    if sensitive.startswith("raw:"):
        return EncodingSpec("raw", sensitive[len("raw:"):])
    if "=" in sensitive:
        mode = "quaternary-intersection" if "&" in sensitive else "binary-privilege"
        return EncodingSpec(mode, sensitive)
    raise DataError(f"unknown sensitive encoding {sensitive!r}")


def _parse_policy(text: str) -> InvalidPolicy:
    parts = [p.strip() for p in text.split(",")]
    if len(parts) != 2:
        raise ParameterError("--policy takes <negative-rule>,<too-large-rule>")
    return InvalidPolicy(parts[0], parts[1])


def _parse_curator_mode(text: str) -> tuple[str, str | None]:
    if text == "inproc":
        return "inproc", None
    for prefix in ("connect=", "serve="):
        if text.startswith(prefix):
            return prefix[:-1], text[len(prefix):]
    raise ParameterError(f"--curator must be inproc, connect=ADDR or serve=ADDR, got {text!r}")


def _parse_addr(addr: str) -> tuple[str, int]:
    host, _, port = addr.rpartition(":")
    if not host or not port.isdigit():
        raise ParameterError(f"address must be HOST:PORT, got {addr!r}")
    return host, int(port)


def cmd_fit(args) -> int:
    _, (train_ds, _), (test_ds, _) = _load_dataset(args)
    config = LearnerConfig(
        max_height=args.max_height,
        minleaf_fraction=args.minleaf,
        max_leaves=args.max_leaves,
        feature_subsample=args.features,
        criterion=args.criterion,
        seed=args.seed,
    )
    tree = fit(train_ds, config)
    out = Path(args.out) if args.out else _out_dir(None) / "tree.json"
    save_tree(tree, out)
    train_bacc = balanced_accuracy(
        PredictionSet(train_ds.labels, predict_dataset(tree, train_ds), np.zeros(train_ds.n, int), 1)
    )
    test_bacc = balanced_accuracy(
        PredictionSet(test_ds.labels, predict_dataset(tree, test_ds), np.zeros(test_ds.n, int), 1)
    )
    print(f"tree written to {out}")
    print(f"height={tree.height} leaves={tree.n_leaves}")
    print(f"balanced accuracy: train={train_bacc:.4f} test={test_bacc:.4f}")
    if args.show:
        print(to_text(tree), end="")
    return EXIT_OK


def cmd_audit(args) -> int:
    family, _, (test_ds, test_sens) = _load_dataset(args)
    tree = prune_redundant(load_tree(args.tree))
    spec = _encoding_spec(family, args.sensitive)
    sens_table = encode_sensitive(test_sens, spec)
    policy = _parse_policy(args.policy)
    mode, addr = _parse_curator_mode(args.curator)

    if mode == "serve":
        raise ParameterError("audit uses --curator inproc or connect=ADDR")
    if mode == "inproc":
        curator = Curator(
            test_ds, sens_table, total_epsilon=args.budget or args.epsilon,
            seed=args.seed, allow_exact=args.allow_exact_stub,
        )
        client = InProcessClient(curator)
        closer = lambda: None  # noqa: E731
    else:
        host, port = _parse_addr(addr)
        client = WireClient(host, port)
        closer = client.close

    try:
        est = estimate_sp(
            tree, client, args.epsilon, population=test_ds.n,
            mechanism=args.mechanism, policy=policy, delta=args.delta,
        )
    finally:
        closer()

    height = max(tree.height, 1)
    lo, hi = query_count_bounds(height)
    verdict = est.sp >= 0.8
    report = {
        "sp_estimate": est.sp,
        "accept_rates": list(est.accept_rates),
        "query_count": est.query_count,
        "query_bound_height": height,
        "query_bound": [lo, hi],
        "invalid_cells": est.invalid_cells,
        "total_cells": est.total_cells,
        "invalid_ratio": est.invalid_ratio,
        "epsilon_spent": est.epsilon_spent,
        "eighty_percent_rule": bool(verdict),
        "mechanism": args.mechanism,
        "sensitive": args.sensitive,
        "seed": args.seed,
    }
    print(f"statistical parity estimate: {est.sp:.6f}")
    print(f"queries used: {est.query_count} (height-{height} bound: [{lo}, {hi}])")
    print(f"invalid answers: {est.invalid_cells}/{est.total_cells} ({est.invalid_ratio:.3f})")
    print(f"privacy budget spent: {est.epsilon_spent:g}")
    print(f"80%-rule on the estimate: {'PASS' if verdict else 'FAIL'}")
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            json.dump(report, fh, sort_keys=True, indent=1)
            fh.write("\n")
        print(f"report written to {args.out}")
    return EXIT_OK


def cmd_curator_serve(args) -> int:
    family, _, (test_ds, test_sens) = _load_dataset(args)
    spec = _encoding_spec(family, args.sensitive)
    sens_table = encode_sensitive(test_sens, spec)
    mode, addr = _parse_curator_mode(args.curator)
    if mode != "serve":
        raise ParameterError("curator-serve needs --curator serve=ADDR")
    host, port = _parse_addr(addr)
    curator = Curator(test_ds, sens_table, total_epsilon=args.budget, seed=args.seed)
    try:
        server = CuratorServer(curator, host, port)
    except OSError as exc:
        print(f"bind failed: {exc}", file=sys.stderr)
        return EXIT_PROTOCOL
    print(f"curator serving on {server.address[0]}:{server.address[1]}", file=sys.stderr)
    try:
        server.serve_forever()
    except KeyboardInterrupt:
        pass
    finally:
        server.shutdown()
        server.server_close()
    return EXIT_OK


def cmd_experiment(args) -> int:
    if args.manifest:
        with open(args.manifest, "r", encoding="utf-8") as fh:
            manifest = json.load(fh)
        stored = manifest["config"]
        config = ExperimentConfig(
            epsilons=tuple(stored["epsilons"]),
            runs=stored["runs"],
            mechanisms=tuple(stored["mechanisms"]),
            policy=InvalidPolicy(*stored["policy"]),
            seed=stored["seed"],
            minleafs=tuple(stored["minleafs"]),
            exp2_max_height=stored["exp2_max_height"],
            exp2_feature_mode=stored["exp2_feature_mode"],
            delta=stored["delta"],
        )
        which = {"experiment1": "1", "experiment2": "2"}.get(manifest["experiment"], args.which)
    else:
        which = args.which
        if which == "1":
            config = paper_scale_exp1(args.seed) if args.paper_scale else desk_scale_exp1(args.seed)
        else:
            config = paper_scale_exp2(args.seed) if args.paper_scale else desk_scale_exp2(args.seed)
        if args.runs:
            config = ExperimentConfig(
                epsilons=config.epsilons, runs=args.runs, mechanisms=config.mechanisms,
                policy=config.policy, seed=config.seed, minleafs=config.minleafs,
                exp2_max_height=config.exp2_max_height, exp2_feature_mode=config.exp2_feature_mode,
                delta=config.delta,
            )

    family, (train_ds, _), (test_ds, test_sens) = _load_dataset(args)
    spec = _encoding_spec(family, args.sensitive)
    sens_table = encode_sensitive(test_sens, spec)
    out_dir = _out_dir(args.out)

    if which == "1":
        result = run_experiment_1(train_ds, test_ds, sens_table, config, progress=True)
        paths = result.save(out_dir)
    else:
        result = run_experiment_2(train_ds, test_ds, sens_table, config, progress=True)
        paths = result.save(out_dir)
        if which == "2.1":
            grid, notes = run_experiment_2_1(result)
            heat = save_heatmap(grid, out_dir / "experiment2_1_heatmap.csv")
            paths["heatmap"] = heat
            for note in notes:
                print(note, file=sys.stderr)
    for kind, path in paths.items():
        print(f"{kind}: {path}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="privfair",
        description="Estimate decision-tree statistical parity through DP histogram queries.",
    )
    parser.add_argument("--version", action="version", version=f"privfair {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p_fit = sub.add_parser("fit", help="train a decision tree and store it")
    _add_dataset_args(p_fit)
    p_fit.add_argument("--max-height", type=int, default=3)
    p_fit.add_argument("--max-leaves", type=int, default=None)
    p_fit.add_argument("--minleaf", type=float, default=0.01)
    p_fit.add_argument("--features", choices=("sqrt", "all", "log2"), default="all")
    p_fit.add_argument("--criterion", choices=("entropy", "gini"), default="entropy")
    p_fit.add_argument("--seed", type=int, default=0)
    p_fit.add_argument("--out", help="tree file path (default $PRIVFAIR_OUT/tree.json)")
    p_fit.add_argument("--show", action="store_true", help="print the tree in text form")
    p_fit.set_defaults(func=cmd_fit)

    p_audit = sub.add_parser("audit", help="estimate statistical parity of a stored tree")
    _add_dataset_args(p_audit)
    p_audit.add_argument("--tree", required=True, help="tree file from `fit`")
    p_audit.add_argument("--sensitive", required=True,
                         help="ethnicity | sex | sex-ethnicity | raw:<attr> | attr=value[&attr=value]")
    p_audit.add_argument("--epsilon", type=float, required=True)
    p_audit.add_argument("--delta", type=float, default=0.0)
    p_audit.add_argument("--mechanism", choices=("laplace", "exponential", "gaussian", "exact"),
                         default="laplace")
    p_audit.add_argument("--policy", default="uniform,uniform",
                         help="<negative-rule>,<too-large-rule>")
    p_audit.add_argument("--curator", default="inproc", help="inproc | connect=HOST:PORT")
    p_audit.add_argument("--budget", type=float, default=None,
                         help="curator budget for inproc mode (default: epsilon)")
    p_audit.add_argument("--seed", type=int, default=0)
    p_audit.add_argument("--out", help="machine-readable report path")
    p_audit.add_argument("--allow-exact-stub", action="store_true",
                         help="allow the noiseless test stub on the in-process curator")
    p_audit.set_defaults(func=cmd_audit)

    p_serve = sub.add_parser("curator-serve", help="host the curator wire protocol")
    _add_dataset_args(p_serve)
    p_serve.add_argument("--sensitive", required=True)
    p_serve.add_argument("--budget", type=float, required=True)
    p_serve.add_argument("--seed", type=int, default=0)
    p_serve.add_argument("--curator", required=True, help="serve=HOST:PORT")
    p_serve.set_defaults(func=cmd_curator_serve)

    p_exp = sub.add_parser("experiment", help="run the comparison experiments")
    _add_dataset_args(p_exp)
    p_exp.add_argument("--which", choices=("1", "2", "2.1"), default="1")
    p_exp.add_argument("--sensitive", required=True)
    p_exp.add_argument("--seed", type=int, default=0)
    p_exp.add_argument("--runs", type=int, default=None, help="override runs per cell")
    p_exp.add_argument("--paper-scale", action="store_true",
                       help="full grids and 50 runs per cell instead of desk scale")
    p_exp.add_argument("--manifest", help="rerun from a stored manifest")
    p_exp.add_argument("--out", help=f"output directory (default ${OUT_DIR_ENV} or .)")
    p_exp.set_defaults(func=cmd_experiment)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except BudgetRefusal as exc:
        print(f"budget refused: {exc}", file=sys.stderr)
        return EXIT_BUDGET
    except (ProtocolError, ConnectionError) as exc:
        print(f"protocol error: {exc}", file=sys.stderr)
        return EXIT_PROTOCOL
    except (DataError, ParameterError, MetricError, DegenerateEstimateError, RoutingError,
            FileNotFoundError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except KeyboardInterrupt:
        return 130


if __name__ == "__main__":
    sys.exit(main())

#!/usr/bin/env python3
"""Desk-scale mechanism comparison on the bundled Adult-like surrogate.

Audits one fixed tree repeatedly per (mechanism, epsilon) cell and writes
records/aggregates/manifest CSVs. Pass --paper-scale for the full grid
(40 epsilon values, 50 runs); pass --dataset/--data flags through the
`privfair experiment` CLI instead if you have the real benchmark files.

Usage: python scripts/run_mechanism_comparison.py [--out DIR] [--seed N]
       [--paper-scale] [--encoding ethnicity|sex|sex-ethnicity]
"""

import argparse
import sys
from pathlib import Path

sys.path.insert(0, str(Path(__file__).resolve().parent.parent / "src"))

from privfair.data import DATASET_ENCODINGS, encode_sensitive, stratified_split
from privfair.experiments import desk_scale_exp1, paper_scale_exp1, run_experiment_1
from privfair.synth import make_adult_surrogate


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--out", default="results/experiment1")
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument("--rows", type=int, default=30162)
    parser.add_argument("--encoding", default="ethnicity",
                        choices=("ethnicity", "sex", "sex-ethnicity"))
    parser.add_argument("--paper-scale", action="store_true")
    args = parser.parse_args()

    ds, sens = make_adult_surrogate(args.rows, seed=args.seed)
    train_idx, test_idx = stratified_split(ds.labels, seed=args.seed)
    train, test = ds.take(train_idx), ds.take(test_idx)
    table = encode_sensitive(sens.take(test_idx), DATASET_ENCODINGS["adult"][args.encoding])

    config = (paper_scale_exp1 if args.paper_scale else desk_scale_exp1)(seed=args.seed)
    result = run_experiment_1(train, test, table, config, progress=True)
    paths = result.save(args.out)
    for kind, path in paths.items():
        print(f"{kind}: {path}")


if __name__ == "__main__":
    main()

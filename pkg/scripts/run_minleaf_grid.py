#!/usr/bin/env python3
"""Desk-scale minleaf/epsilon grid against the random baseline, plus the
compliance-detection heatmap, on the bundled Adult-like surrogate.

Writes experiment-2 records/aggregates/manifest plus the UAR-AASPE heatmap
matrix. Pass --paper-scale for 80 minleaf values and 50 runs per cell.

Usage: python scripts/run_minleaf_grid.py [--out DIR] [--seed N]
       [--paper-scale] [--encoding ethnicity|sex|sex-ethnicity]
"""

import argparse
import sys
from pathlib import Path

sys.path.insert(0, str(Path(__file__).resolve().parent.parent / "src"))

from privfair.data import DATASET_ENCODINGS, encode_sensitive, stratified_split
from privfair.experiments import (
    desk_scale_exp2,
    paper_scale_exp2,
    run_experiment_2,
    run_experiment_2_1,
    save_heatmap,
)
from privfair.synth import make_adult_surrogate


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--out", default="results/experiment2")
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

    config = (paper_scale_exp2 if args.paper_scale else desk_scale_exp2)(seed=args.seed)
    result = run_experiment_2(train, test, table, config, progress=True)
    paths = result.save(args.out)
    grid, notes = run_experiment_2_1(result)
    paths["heatmap"] = save_heatmap(grid, Path(args.out) / "experiment2_1_heatmap.csv")
    for note in notes:
        print(note, file=sys.stderr)
    for kind, path in paths.items():
        print(f"{kind}: {path}")


if __name__ == "__main__":
    main()

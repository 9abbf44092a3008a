#!/usr/bin/env python3
"""Regenerate the CI fixtures: canonical-format 200-row files plus the
preprocessed goldens the tests byte-compare against.

Run from the repo root: python scripts/make_fixtures.py
"""

import sys
from pathlib import Path

sys.path.insert(0, str(Path(__file__).resolve().parent.parent / "src"))

from privfair.data import load_adult, load_compas, load_german, save_dataset
from privfair.synth import write_adult_fixtures, write_compas_fixture, write_german_fixture

FIXTURES = Path(__file__).resolve().parent.parent / "tests" / "fixtures"


def main() -> None:
    FIXTURES.mkdir(parents=True, exist_ok=True)
    write_adult_fixtures(FIXTURES / "adult.data", FIXTURES / "adult.test", 200, 100, seed=7)
    write_compas_fixture(FIXTURES / "compas.csv", 220, seed=7)
    write_german_fixture(FIXTURES / "german.data", 200, seed=7)

    (train, train_sens), _ = load_adult(FIXTURES / "adult.data", FIXTURES / "adult.test")
    save_dataset(train, train_sens, FIXTURES / "adult_train_golden.csv",
                 FIXTURES / "adult_train_golden.meta")
    (ctrain, csens), _ = load_compas(FIXTURES / "compas.csv")
    save_dataset(ctrain, csens, FIXTURES / "compas_train_golden.csv",
                 FIXTURES / "compas_train_golden.meta")
    (gtrain, gsens), _ = load_german(FIXTURES / "german.data")
    save_dataset(gtrain, gsens, FIXTURES / "german_train_golden.csv",
                 FIXTURES / "german_train_golden.meta")
    print(f"fixtures written under {FIXTURES}")


if __name__ == "__main__":
    main()

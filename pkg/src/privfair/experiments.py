"""Experiment harness: mechanism comparison, minleaf/epsilon grids, exports.

Experiment 1 audits one grid-searched tree repeatedly per (mechanism,
epsilon) cell. Experiment 2 refits a tree per run (varying the
feature-subsample seed) over a minleaf grid with binned numeric features and
compares audit errors against a uniform-random baseline. Experiment 2.1
turns experiment-2 records into a UAR-AASPE heatmap. All randomness flows
from one master seed via documented per-cell, per-run stream splitting, so
reruns reproduce every record bit for bit.
"""

from __future__ import annotations

import csv
import itertools
import json
import math
import sys
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from scipy import stats as _scipy_stats

from . import __version__ as _version
from .binning import apply_binning, bin_numeric_features
from .curator import Curator, InProcessClient
from .data import Dataset, SensitiveTable
from .errors import DegenerateEstimateError, MetricError, ParameterError
from .estimator import InvalidPolicy, estimate_sp
from .mechanisms import EXPONENTIAL, LAPLACE
from .metrics import PredictionSet, aaspe, balanced_accuracy, sp_ratio_kary, uar_minus_aaspe
from .tree import DecisionTree, LearnerConfig, fit, predict_dataset, prune_redundant


def welch_t_test(sample_a, sample_b, alternative: str = "two-sided") -> tuple[float, float]:
    """Welch t statistic with Welch-Satterthwaite degrees of freedom.

    alternative "less" tests mean(a) < mean(b), "greater" the reverse.
    """
    a = np.asarray(sample_a, dtype=float)
    b = np.asarray(sample_b, dtype=float)
    if len(a) < 2 or len(b) < 2:
        raise MetricError("welch_t_test needs at least 2 values per sample")
    va, vb = float(np.var(a, ddof=1)), float(np.var(b, ddof=1))
    if va == 0.0 and vb == 0.0:
        raise MetricError("welch_t_test degenerate: both samples have zero variance")
    na, nb = len(a), len(b)
    se2 = va / na + vb / nb
    t = (float(np.mean(a)) - float(np.mean(b))) / math.sqrt(se2)
    df = se2**2 / ((va / na) ** 2 / (na - 1) + (vb / nb) ** 2 / (nb - 1))
    if alternative == "two-sided":
        p = 2.0 * float(_scipy_stats.t.sf(abs(t), df))
    elif alternative == "less":
        p = float(_scipy_stats.t.cdf(t, df))
    elif alternative == "greater":
        p = float(_scipy_stats.t.sf(t, df))
    else:
        raise ParameterError(f"unknown alternative {alternative!r}")
    return t, p


# ---------------------------------------------------------------------------
# Grid search

@dataclass(frozen=True)
class TreeSearchSpace:
    """The (height, leaf count, feature mode) grid used for model selection."""

    heights: tuple[int, ...] = (2, 3, 4)
    leaf_counts: tuple[int, ...] = (3, 4, 5, 6, 7, 8, 9, 10, 11, 12)
    feature_modes: tuple[str, ...] = ("sqrt", "all", "log2")
    minleaf_fraction: float = 0.01
    criterion: str = "entropy"

    def tuples(self) -> list[tuple[int, int, str]]:
        return list(itertools.product(self.heights, self.leaf_counts, self.feature_modes))


@dataclass(frozen=True)
class GridSearchReport:
    evaluated: tuple[tuple, ...]  # (params, mean balanced accuracy or None, note)
    chosen: tuple[int, int, str]
    cv_score: float


def stratified_folds(labels: np.ndarray, n_folds: int, seed: int) -> list[tuple[np.ndarray, np.ndarray]]:
    rng = np.random.Generator(np.random.PCG64(np.random.SeedSequence([seed, 0xF0])))
    assignment = np.empty(len(labels), dtype=np.int64)
    for c in np.unique(labels):
        idx = np.flatnonzero(labels == c)
        rng.shuffle(idx)
        assignment[idx] = np.arange(len(idx)) % n_folds
    folds = []
    for f in range(n_folds):
        val = np.flatnonzero(assignment == f)
        train = np.flatnonzero(assignment != f)
        folds.append((train, val))
    return folds


def grid_search_tree(
    data: Dataset,
    space: TreeSearchSpace = TreeSearchSpace(),
    folds: int = 5,
    seed: int = 0,
) -> tuple[DecisionTree, GridSearchReport]:
    """Pick the tuple with the best cross-validated balanced accuracy and
    refit it on the full split. Deterministic under the seed."""
    fold_idx = stratified_folds(data.labels, folds, seed)
    evaluated = []
    best: tuple[float, tuple[int, int, str]] | None = None
    for params in space.tuples():
        height, leaves, mode = params
        scores = []
        note = ""
        for fold_no, (train_idx, val_idx) in enumerate(fold_idx):
            train = data.take(train_idx)
            if space.minleaf_fraction * train.n < 1:
                note = "fold smaller than the minleaf requirement"
                break
            config = LearnerConfig(
                max_height=height, minleaf_fraction=space.minleaf_fraction, max_leaves=leaves,
                feature_subsample=mode, criterion=space.criterion,
                seed=seed * 1009 + fold_no,
            )
            tree = fit(train, config)
            val = data.take(val_idx)
            preds = PredictionSet(val.labels, predict_dataset(tree, val), np.zeros(val.n, int), 1)
            try:
                scores.append(balanced_accuracy(preds))
            except MetricError:
                continue  # single-class validation fold
        if note or not scores:
            evaluated.append((params, None, note or "no scorable folds"))
            continue
        mean_score = float(np.mean(scores))
        evaluated.append((params, mean_score, ""))
        if best is None or mean_score > best[0]:
            best = (mean_score, params)
    if best is None:
        raise ParameterError("no grid tuple could be evaluated")
    score, (height, leaves, mode) = best
    final = fit(
        data,
        LearnerConfig(
            max_height=height, minleaf_fraction=space.minleaf_fraction, max_leaves=leaves,
            feature_subsample=mode, criterion=space.criterion, seed=seed,
        ),
    )
    return final, GridSearchReport(tuple(evaluated), (height, leaves, mode), score)


# ---------------------------------------------------------------------------
# Experiment configuration and records

def desk_epsilon_grid() -> tuple[float, ...]:
    return tuple(k / 20.0 for k in range(1, 11))


def paper_epsilon_grid() -> tuple[float, ...]:
    return tuple(k / 80.0 for k in range(1, 41))


def desk_minleaf_grid() -> tuple[float, ...]:
    return tuple(k / 100.0 for k in range(1, 21))


def paper_minleaf_grid() -> tuple[float, ...]:
    return tuple(k / 400.0 for k in range(1, 81))


EXP2_EPSILONS = tuple(k / 20.0 for k in range(1, 6))


@dataclass(frozen=True)
class ExperimentConfig:
    epsilons: tuple[float, ...]
    runs: int = 25
    mechanisms: tuple[str, ...] = (LAPLACE, EXPONENTIAL)
    policy: InvalidPolicy = field(default_factory=InvalidPolicy)
    seed: int = 0
    minleafs: tuple[float, ...] = ()
    exp2_max_height: int = 10
    exp2_feature_mode: str = "sqrt"
    delta: float = 0.0

    def __post_init__(self):
        if not self.epsilons:
            raise ParameterError("epsilon grid must be nonempty")
        if self.runs < 2:
            raise ParameterError("need at least 2 runs per cell for any t-test")


def desk_scale_exp1(seed: int = 0, mechanisms=(LAPLACE, EXPONENTIAL)) -> ExperimentConfig:
    return ExperimentConfig(epsilons=desk_epsilon_grid(), runs=25, mechanisms=tuple(mechanisms), seed=seed)


def paper_scale_exp1(seed: int = 0, mechanisms=(LAPLACE, EXPONENTIAL)) -> ExperimentConfig:
    return ExperimentConfig(epsilons=paper_epsilon_grid(), runs=50, mechanisms=tuple(mechanisms), seed=seed)


def desk_scale_exp2(seed: int = 0, mechanism=LAPLACE) -> ExperimentConfig:
    return ExperimentConfig(
        epsilons=EXP2_EPSILONS, runs=25, mechanisms=(mechanism,), seed=seed,
        minleafs=desk_minleaf_grid(),
    )


def paper_scale_exp2(seed: int = 0, mechanism=LAPLACE) -> ExperimentConfig:
    return ExperimentConfig(
        epsilons=EXP2_EPSILONS, runs=50, mechanisms=(mechanism,), seed=seed,
        minleafs=paper_minleaf_grid(),
    )


RECORD_FIELDS = (
    "experiment", "mechanism", "epsilon", "minleaf", "run", "sp_true", "sp_est",
    "abs_error", "invalid_cells", "total_cells", "invalid_ratio", "query_count",
    "baseline", "baseline_error", "failed",
)


@dataclass
class ExperimentResult:
    experiment: str
    records: list[dict]
    aggregates: list[dict]
    manifest: dict

    def cell_records(self, **keys) -> list[dict]:
        out = []
        for r in self.records:
            if all(r[k] == v for k, v in keys.items()) and not r["failed"]:
                out.append(r)
        return out

    def save(self, out_dir) -> dict[str, Path]:
        out_dir = Path(out_dir)
        out_dir.mkdir(parents=True, exist_ok=True)
        paths = {
            "records": out_dir / f"{self.experiment}_records.csv",
            "aggregates": out_dir / f"{self.experiment}_aggregates.csv",
            "manifest": out_dir / f"{self.experiment}_manifest.json",
        }
        with open(paths["records"], "w", encoding="utf-8", newline="") as fh:
            writer = csv.DictWriter(fh, fieldnames=RECORD_FIELDS, lineterminator="\n")
            writer.writeheader()
            for record in self.records:
                writer.writerow({k: _csv_cell(record.get(k)) for k in RECORD_FIELDS})
        if self.aggregates:
            agg_fields = list(self.aggregates[0])
            with open(paths["aggregates"], "w", encoding="utf-8", newline="") as fh:
                writer = csv.DictWriter(fh, fieldnames=agg_fields, lineterminator="\n")
                writer.writeheader()
                for row in self.aggregates:
                    writer.writerow({k: _csv_cell(row.get(k)) for k in agg_fields})
        with open(paths["manifest"], "w", encoding="utf-8") as fh:
            json.dump(self.manifest, fh, sort_keys=True, indent=1)
            fh.write("\n")
        return paths


def _csv_cell(value):
    if isinstance(value, float):
        return repr(value)
    return value


def _config_manifest(experiment: str, config: ExperimentConfig, extra: dict | None = None) -> dict:
    manifest = {
        "experiment": experiment,
        "version": _version,
        "config": {
            "epsilons": list(config.epsilons),
            "runs": config.runs,
            "mechanisms": list(config.mechanisms),
            "policy": [config.policy.negative_rule, config.policy.too_large_rule],
            "seed": config.seed,
            "minleafs": list(config.minleafs),
            "exp2_max_height": config.exp2_max_height,
            "exp2_feature_mode": config.exp2_feature_mode,
            "delta": config.delta,
        },
    }
    if extra:
        manifest.update(extra)
    return manifest


def _curator_seed(master: int, *keys: int) -> int:
    entropy = np.random.SeedSequence([master, *keys]).generate_state(1)[0]
    return int(entropy)


def _progress(message: str, enabled: bool):
    if enabled:
        print(message, file=sys.stderr)


# ---------------------------------------------------------------------------
# Experiment 1: mechanism comparison on one fixed tree

def run_experiment_1(
    train: Dataset,
    test: Dataset,
    test_sensitive: SensitiveTable,
    config: ExperimentConfig,
    tree: DecisionTree | None = None,
    search_space: TreeSearchSpace = TreeSearchSpace(),
    progress: bool = False,
) -> ExperimentResult:
    """Per (mechanism, epsilon): repeated audits of one fixed tree, out of sample."""
    if tree is None:
        tree, _ = grid_search_tree(train, search_space, seed=config.seed)
    tree = prune_redundant(tree)
    y_pred = predict_dataset(tree, test)
    preds = PredictionSet(test.labels, y_pred, test_sensitive.groups, test_sensitive.k)
    sp_true = sp_ratio_kary(preds)  # undefined parity of the audited tree is a config error

    records: list[dict] = []
    for mech_i, mechanism in enumerate(config.mechanisms):
        for eps_i, epsilon in enumerate(config.epsilons):
            _progress(f"experiment1 {mechanism} eps={epsilon:g}", progress)
            for run in range(config.runs):
                seed = _curator_seed(config.seed, 1, mech_i, eps_i, run)
                curator = Curator(
                    test, test_sensitive, total_epsilon=epsilon, seed=seed,
                    allow_exact=(mechanism == "exact"),
                )
                record = {
                    "experiment": "experiment1", "mechanism": mechanism, "epsilon": epsilon,
                    "minleaf": math.nan, "run": run, "sp_true": sp_true,
                    "baseline": math.nan, "baseline_error": math.nan,
                }
                try:
                    est = estimate_sp(
                        tree, InProcessClient(curator), epsilon, population=test.n,
                        mechanism=mechanism, policy=config.policy, delta=config.delta,
                    )
                    record.update(
                        sp_est=est.sp, abs_error=abs(sp_true - est.sp),
                        invalid_cells=est.invalid_cells, total_cells=est.total_cells,
                        invalid_ratio=est.invalid_ratio, query_count=est.query_count,
                        failed=False,
                    )
                except DegenerateEstimateError:
                    record.update(
                        sp_est=math.nan, abs_error=math.nan, invalid_cells=0,
                        total_cells=0, invalid_ratio=math.nan, query_count=0, failed=True,
                    )
                records.append(record)

    aggregates = []
    for eps_i, epsilon in enumerate(config.epsilons):
        by_mech = {}
        for mechanism in config.mechanisms:
            errs = [r["abs_error"] for r in records
                    if r["mechanism"] == mechanism and r["epsilon"] == epsilon and not r["failed"]]
            inv = [r["invalid_ratio"] for r in records
                   if r["mechanism"] == mechanism and r["epsilon"] == epsilon and not r["failed"]]
            by_mech[mechanism] = errs
            aggregates.append({
                "epsilon": epsilon, "mechanism": mechanism, "n_runs": len(errs),
                "aaspe": float(np.mean(errs)) if errs else math.nan,
                "mean_invalid_ratio": float(np.mean(inv)) if inv else math.nan,
                "t_stat": math.nan, "p_value": math.nan, "comparison": "",
            })
        if LAPLACE in by_mech and EXPONENTIAL in by_mech:
            a, b = by_mech[LAPLACE], by_mech[EXPONENTIAL]
            if len(a) >= 2 and len(b) >= 2:
                try:
                    t, p = welch_t_test(a, b, "two-sided")
                except MetricError:
                    t, p = math.nan, math.nan
                aggregates.append({
                    "epsilon": epsilon, "mechanism": "laplace-vs-exponential",
                    "n_runs": len(a) + len(b), "aaspe": math.nan, "mean_invalid_ratio": math.nan,
                    "t_stat": t, "p_value": p, "comparison": "two-sided",
                })
    manifest = _config_manifest("experiment1", config, {"sp_true": sp_true})
    return ExperimentResult("experiment1", records, aggregates, manifest)


# ---------------------------------------------------------------------------
# Experiment 2: minleaf x epsilon grid against a random baseline

def run_experiment_2(
    train: Dataset,
    test: Dataset,
    test_sensitive: SensitiveTable,
    config: ExperimentConfig,
    progress: bool = False,
) -> ExperimentResult:
    """Per (minleaf, epsilon): audits of per-run refit trees on binned data,
    with a one-sided test of the audit errors against a random baseline."""
    if not config.minleafs:
        raise ParameterError("experiment 2 needs a minleaf grid")
    mechanism = config.mechanisms[0]
    binned_train, report = bin_numeric_features(train, seed=_curator_seed(config.seed, 2, 0))
    binned_test = apply_binning(test, report)

    records: list[dict] = []
    for ml_i, minleaf in enumerate(config.minleafs):
        for eps_i, epsilon in enumerate(config.epsilons):
            _progress(f"experiment2 minleaf={minleaf:g} eps={epsilon:g}", progress)
            baseline_rng = np.random.Generator(
                np.random.PCG64(np.random.SeedSequence([config.seed, 0xBA5E, ml_i, eps_i]))
            )
            for run in range(config.runs):
                # the baseline stream never sees the tree, only the run index;
                # draw first so failed runs do not desynchronize it
                baseline = float(baseline_rng.random())
                learner = LearnerConfig(
                    max_height=config.exp2_max_height,
                    minleaf_fraction=minleaf,
                    feature_subsample=config.exp2_feature_mode,
                    seed=_curator_seed(config.seed, 2, ml_i, eps_i, run, 0),
                )
                tree = prune_redundant(fit(binned_train, learner))
                record = {
                    "experiment": "experiment2", "mechanism": mechanism, "epsilon": epsilon,
                    "minleaf": minleaf, "run": run, "baseline": baseline,
                }
                try:
                    y_pred = predict_dataset(tree, binned_test)
                    preds = PredictionSet(
                        binned_test.labels, y_pred, test_sensitive.groups, test_sensitive.k
                    )
                    sp_true = sp_ratio_kary(preds)  # all-unfavorable trees have no parity
                    curator = Curator(
                        binned_test, test_sensitive, total_epsilon=epsilon,
                        seed=_curator_seed(config.seed, 2, ml_i, eps_i, run, 1),
                        allow_exact=(mechanism == "exact"),
                    )
                    est = estimate_sp(
                        tree, InProcessClient(curator), epsilon, population=binned_test.n,
                        mechanism=mechanism, policy=config.policy, delta=config.delta,
                    )
                    record.update(
                        sp_true=sp_true, baseline_error=abs(sp_true - baseline),
                        sp_est=est.sp, abs_error=abs(sp_true - est.sp),
                        invalid_cells=est.invalid_cells, total_cells=est.total_cells,
                        invalid_ratio=est.invalid_ratio, query_count=est.query_count,
                        failed=False,
                    )
                except (MetricError, DegenerateEstimateError):
                    record.update(
                        sp_true=math.nan, baseline_error=math.nan, sp_est=math.nan,
                        abs_error=math.nan, invalid_cells=0, total_cells=0,
                        invalid_ratio=math.nan, query_count=0, failed=True,
                    )
                records.append(record)

    aggregates = []
    for minleaf in config.minleafs:
        for epsilon in config.epsilons:
            ok = [r for r in records
                  if r["minleaf"] == minleaf and r["epsilon"] == epsilon and not r["failed"]]
            errs = [r["abs_error"] for r in ok]
            base = [r["baseline_error"] for r in ok]
            t, p = math.nan, math.nan
            if len(errs) >= 2:
                try:
                    t, p = welch_t_test(errs, base, "less")
                except MetricError:
                    pass
            aggregates.append({
                "minleaf": minleaf, "epsilon": epsilon, "n_runs": len(errs),
                "aaspe": float(np.mean(errs)) if errs else math.nan,
                "mean_invalid_ratio": float(np.mean([r["invalid_ratio"] for r in ok])) if ok else math.nan,
                "t_stat": t, "p_value": p, "comparison": "audit-less-than-baseline",
            })
    manifest = _config_manifest("experiment2", config, {"mechanism": mechanism})
    return ExperimentResult("experiment2", records, aggregates, manifest)


# ---------------------------------------------------------------------------
# Experiment 2.1: compliance-detection heatmap from experiment-2 records

def run_experiment_2_1(result: ExperimentResult) -> tuple[dict, list[str]]:
    """UAR - AASPE per (minleaf, epsilon) cell of an experiment-2 result.

    Returns (grid, notes); cells with fewer than 2 successful runs are
    excluded with a note.
    """
    if result.experiment != "experiment2":
        raise ParameterError("experiment 2.1 consumes an experiment-2 result")
    minleafs = sorted({r["minleaf"] for r in result.records})
    epsilons = sorted({r["epsilon"] for r in result.records})
    grid: dict[tuple[float, float], float] = {}
    notes: list[str] = []
    for minleaf in minleafs:
        for epsilon in epsilons:
            ok = [r for r in result.records
                  if r["minleaf"] == minleaf and r["epsilon"] == epsilon and not r["failed"]]
            if len(ok) < 2:
                notes.append(f"cell minleaf={minleaf:g} epsilon={epsilon:g} excluded (<2 runs)")
                continue
            true_sps = [r["sp_true"] for r in ok]
            est_sps = [r["sp_est"] for r in ok]
            grid[(minleaf, epsilon)] = uar_minus_aaspe(true_sps, est_sps)
    return grid, notes


def save_heatmap(grid: dict, out_path) -> Path:
    """Comma-separated matrix: first row epsilons, first column minleafs."""
    out_path = Path(out_path)
    minleafs = sorted({m for m, _ in grid})
    epsilons = sorted({e for _, e in grid})
    with open(out_path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["minleaf\\epsilon", *[repr(e) for e in epsilons]])
        for m in minleafs:
            row = [repr(m)]
            for e in epsilons:
                row.append(repr(grid[(m, e)]) if (m, e) in grid else "")
            writer.writerow(row)
    return out_path

"""Exact (non-private) group fairness and evaluation metrics.

These are the ground-truth counterparts of the private estimates: acceptance
rates are computed directly from predictions and group labels. Binary-group
metrics follow the convention that group 1 is the privileged group.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import MetricError


@dataclass(frozen=True)
class PredictionSet:
    """Predictions, labels and group membership for one evaluation split."""

    y_true: np.ndarray
    y_pred: np.ndarray
    groups: np.ndarray
    k: int

    def __post_init__(self):
        y_true = np.asarray(self.y_true, dtype=int)
        y_pred = np.asarray(self.y_pred, dtype=int)
        groups = np.asarray(self.groups, dtype=int)
        if not (len(y_true) == len(y_pred) == len(groups)):
            raise MetricError("y_true, y_pred and groups must have equal length")
        if groups.size and (groups.min() < 0 or groups.max() >= self.k):
            raise MetricError(f"group indices must lie in [0, {self.k})")
        object.__setattr__(self, "y_true", y_true)
        object.__setattr__(self, "y_pred", y_pred)
        object.__setattr__(self, "groups", groups)


def acceptance_rates(preds: PredictionSet) -> np.ndarray:
    """Per-group favorable-prediction rates; every group must be nonempty."""
    sizes = np.bincount(preds.groups, minlength=preds.k).astype(float)
    if (sizes == 0).any():
        empty = int(np.flatnonzero(sizes == 0)[0])
        raise MetricError(f"group {empty} is empty; acceptance rate undefined")
    favorable = np.bincount(preds.groups, weights=preds.y_pred, minlength=preds.k)
    return favorable / sizes


def sp_ratio_kary(preds: PredictionSet) -> float:
    """Statistical parity as min/max of the K acceptance rates, in [0, 1]."""
    rates = acceptance_rates(preds)
    top = float(rates.max())
    if top == 0.0:
        raise MetricError("all acceptance rates are zero; ratio degenerate")
    return float(rates.min()) / top


def sp_difference(preds: PredictionSet) -> float:
    """Acceptance-rate difference, privileged (group 1) minus unprivileged."""
    if preds.k != 2:
        raise MetricError(f"sp_difference needs K=2, got K={preds.k}")
    rates = acceptance_rates(preds)
    return float(rates[1] - rates[0])


def eighty_percent_rule(preds: PredictionSet) -> bool:
    """True iff the privileged/unprivileged rate ratio lies in [0.8, 1.25]."""
    if preds.k != 2:
        raise MetricError(f"eighty_percent_rule needs K=2, got K={preds.k}")
    rates = acceptance_rates(preds)
    if rates[0] == 0.0 or rates[1] == 0.0:
        raise MetricError("zero acceptance rate; 80%-rule ratio degenerate")
    ratio = float(rates[1] / rates[0])
    return 0.8 <= ratio <= 1.25


def _conditional_rates(preds: PredictionSet, y: int) -> np.ndarray:
    mask = preds.y_true == y
    sizes = np.bincount(preds.groups[mask], minlength=preds.k).astype(float)
    if (sizes == 0).any():
        raise MetricError(f"empty (group, y={y}) cell; metric undefined")
    fav = np.bincount(preds.groups[mask], weights=preds.y_pred[mask], minlength=preds.k)
    return fav / sizes


def equalized_odds(preds: PredictionSet) -> tuple[float, float]:
    """Per-outcome gaps p(pred=1|y,A=1) - p(pred=1|y,A=0) for y = 0 and y = 1."""
    if preds.k != 2:
        raise MetricError(f"equalized_odds needs K=2, got K={preds.k}")
    gaps = []
    for y in (0, 1):
        r = _conditional_rates(preds, y)
        gaps.append(float(r[1] - r[0]))
    return gaps[0], gaps[1]


def equality_of_opportunity(preds: PredictionSet) -> float:
    """The y=1 gap of equalized_odds."""
    return equalized_odds(preds)[1]


def aaspe(true_sps, est_sps) -> float:
    """Mean absolute difference between true and estimated parity values."""
    a = np.asarray(true_sps, dtype=float)
    b = np.asarray(est_sps, dtype=float)
    if a.shape != b.shape or a.size == 0:
        raise MetricError("true and estimated vectors must be nonempty and equal-length")
    return float(np.mean(np.abs(a - b)))


def decile_class(value: float) -> int:
    """First-decimal class of a parity value; 1.0 joins class 9.

    round() guards against float artifacts like 0.7*10 == 6.999...9 so that
    values stated to one decimal land in the intended class.
    """
    return min(9, int(math.floor(round(value * 10.0, 9))))


def uar(true_sps, est_sps) -> float:
    """Unweighted average recall over the decile classes present in the truth."""
    a = np.asarray(true_sps, dtype=float)
    b = np.asarray(est_sps, dtype=float)
    if a.shape != b.shape or a.size == 0:
        raise MetricError("true and estimated vectors must be nonempty and equal-length")
    tc = np.array([decile_class(v) for v in a])
    ec = np.array([decile_class(v) for v in b])
    recalls = []
    for c in sorted(set(tc.tolist())):
        mask = tc == c
        recalls.append(float(np.mean(ec[mask] == c)))
    return float(np.mean(recalls))


def uar_minus_aaspe(true_sps, est_sps) -> float:
    return uar(true_sps, est_sps) - aaspe(true_sps, est_sps)


def balanced_accuracy(preds: PredictionSet) -> float:
    """Mean of the per-class recalls of the binary labels."""
    recalls = []
    for y in (0, 1):
        mask = preds.y_true == y
        if not mask.any():
            raise MetricError(f"class {y} absent from y_true; balanced accuracy undefined")
        recalls.append(float(np.mean(preds.y_pred[mask] == y)))
    return float(np.mean(recalls))

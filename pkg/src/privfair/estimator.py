"""Statistical-parity estimation for a tree through DP histogram queries.

The audit asks the curator one tautology query (the overall group
composition) at half the budget, then one half-budget query per favorable
rule as a parallel batch of disjoint predicates, so the total spend is
exactly the given epsilon. Per-group acceptance rates accumulate as
repaired-rule-histogram over tautology-histogram, elementwise; the estimate
is their min/max ratio. Invalid cells (negative, or larger than the public
row count) are counted before the repair policy maps them to valid values.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass

import numpy as np

from .curator import PARALLEL, SEQUENTIAL, CuratorQuery
from .errors import DegenerateEstimateError, ParameterError
from .tree import DecisionTree, favorable_rules, prune_redundant

NEGATIVE_POLICIES = ("zero", "one", "uniform", "total-minus-valid")
TOO_LARGE_POLICIES = ("uniform", "total-minus-valid")

VALID = "valid"
NEGATIVE = "negative"
TOO_LARGE = "too-large"


@dataclass(frozen=True)
class InvalidPolicy:
    """How to map invalid histogram cells back into the valid range."""

    negative_rule: str = "uniform"
    too_large_rule: str = "uniform"

    def __post_init__(self):
        if self.negative_rule not in NEGATIVE_POLICIES:
            raise ParameterError(f"negative_rule must be one of {NEGATIVE_POLICIES}")
        if self.too_large_rule not in TOO_LARGE_POLICIES:
            raise ParameterError(f"too_large_rule must be one of {TOO_LARGE_POLICIES}")


@dataclass(frozen=True)
class SpEstimate:
    sp: float
    accept_rates: tuple[float, ...]
    query_count: int
    invalid_cells: int
    total_cells: int
    epsilon_spent: float

    @property
    def invalid_ratio(self) -> float:
        return self.invalid_cells / self.total_cells if self.total_cells else 0.0


def exceeds_validity(cell: float, dataset_total: int) -> str:
    """Validity flag of one noisy cell against the public row count.

    A count may exceed its node's population without being invalid; only
    negative values or values above the dataset total are.
    """
    if cell < 0:
        return NEGATIVE
    if cell > dataset_total:
        return TOO_LARGE
    return VALID


def repair_cell(counts: np.ndarray, index: int, policy: InvalidPolicy,
                dataset_total: int, uniform_total: float) -> float:
    """Map one cell of a noisy histogram to a valid value under the policy.

    uniform_total is the histogram's population estimate: the public row
    count for the tautology query, the noisy rule total (sum of the noisy
    cells) for a rule query. total-minus-valid subtracts the valid sibling
    cells from the dataset total and is usable only when every sibling is
    valid, falling back to uniform otherwise. Valid cells pass through.
    """
    counts = np.asarray(counts, dtype=float)
    cell = float(counts[index])
    flag = exceeds_validity(cell, dataset_total)
    if flag == VALID:
        return cell
    rule = policy.negative_rule if flag == NEGATIVE else policy.too_large_rule
    uniform_value = max(0.0, uniform_total / len(counts))
    if rule == "zero":
        return 0.0
    if rule == "one":
        return 1.0
    if rule == "uniform":
        return uniform_value
    siblings_valid = all(
        exceeds_validity(float(counts[j]), dataset_total) == VALID
        for j in range(len(counts))
        if j != index
    )
    if not siblings_valid:
        return uniform_value
    # a repaired count cannot go below the empty-node count of zero
    return max(0.0, float(dataset_total) - float(counts.sum() - cell))


def repair_histogram(counts: np.ndarray, policy: InvalidPolicy, dataset_total: int,
                     uniform_total: float) -> tuple[np.ndarray, int]:
    """Repair every invalid cell of one histogram; returns (repaired, n_invalid)."""
    counts = np.asarray(counts, dtype=float)
    flags = [exceeds_validity(float(c), dataset_total) for c in counts]
    n_invalid = sum(1 for f in flags if f != VALID)
    if n_invalid == 0:
        return counts.copy(), 0
    repaired = np.array(
        [repair_cell(counts, i, policy, dataset_total, uniform_total) for i in range(len(counts))]
    )
    return repaired, n_invalid


def estimate_sp(
    tree: DecisionTree,
    client,
    epsilon: float,
    population: int,
    mechanism: str = "laplace",
    policy: InvalidPolicy = InvalidPolicy(),
    delta: float = 0.0,
    batch_id: str | None = None,
) -> SpEstimate:
    """Estimate the K-ary statistical parity of a tree's favorable decisions.

    population is the public row count of the audited split (used for
    validity flags and repairs, never as a denominator of exact counts).
    Raises BudgetRefusal if the curator refuses, DegenerateEstimateError if
    a denominator cell is nonpositive after repair or every acceptance rate
    is zero.
    """
    if epsilon <= 0:
        raise ParameterError("epsilon must be positive")
    pruned = prune_redundant(tree)
    rules = favorable_rules(pruned)
    half = epsilon / 2.0

    taut_query = CuratorQuery((), half, mechanism, delta, SEQUENTIAL)
    taut_answer = client.ask(taut_query)
    k = taut_answer.k

    if batch_id is None:
        seed = hashlib.sha256(
            (taut_query.digest() + f":{len(rules)}").encode("utf-8")
        ).hexdigest()[:12]
        batch_id = f"rules-{seed}"

    rule_answers = []
    for rule in rules:
        query = CuratorQuery(rule.clauses, half, mechanism, delta, PARALLEL, batch_id)
        rule_answers.append(client.ask(query))

    invalid = 0
    totals, taut_invalid = repair_histogram(taut_answer.counts, policy, population, float(population))
    invalid += taut_invalid
    if (totals <= 0).any():
        raise DegenerateEstimateError(
            "tautology histogram has a nonpositive group total after repair",
            accept_rates=tuple(np.zeros(k)),
        )

    accept_rates = np.zeros(k, dtype=float)
    for answer in rule_answers:
        noisy = np.asarray(answer.counts, dtype=float)
        repaired, n_inv = repair_histogram(noisy, policy, population, float(noisy.sum()))
        invalid += n_inv
        accept_rates += repaired / totals

    top = float(accept_rates.max()) if k else 0.0
    if top <= 0.0:
        raise DegenerateEstimateError(
            "all acceptance rates are zero after repair", accept_rates=tuple(accept_rates)
        )
    sp = float(accept_rates.min()) / top
    return SpEstimate(
        sp=sp,
        accept_rates=tuple(float(r) for r in accept_rates),
        query_count=1 + len(rules),
        invalid_cells=invalid,
        total_cells=(1 + len(rules)) * k,
        epsilon_spent=half + half,
    )

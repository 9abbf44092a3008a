"""Greedy binary decision trees and the rule machinery built on them.

Trees grow best-first (largest impurity decrease expanded first), which is
what makes a leaf-count budget well defined. Every leaf keeps its training
count; rules are root-to-leaf clause conjunctions with negation flags on
right branches, so the rule set of a tree is exhaustive and mutually
exclusive over the instance space.
"""

from __future__ import annotations

import heapq
import json
import math
from dataclasses import dataclass

import numpy as np

from .data import CATEGORICAL, NUMERIC, Dataset
from .errors import DataError, ParameterError, RoutingError

_GAIN_TOL = 1e-12


@dataclass(frozen=True)
class SplitClause:
    """One branching condition: numeric `feature < value` or categorical
    `feature = value`."""

    feature: str
    kind: str  # NUMERIC | CATEGORICAL
    value: float | str

    def holds(self, instance) -> bool:
        if self.feature not in instance:
            raise RoutingError(self.feature)
        if self.kind == NUMERIC:
            return float(instance[self.feature]) < self.value
        return instance[self.feature] == self.value

    def mask(self, data: Dataset, idx: np.ndarray | None = None) -> np.ndarray:
        if self.feature not in data.columns:
            raise RoutingError(self.feature)
        col = data.columns[self.feature]
        if idx is not None:
            col = col[idx]
        return (col < self.value) if self.kind == NUMERIC else (col == self.value)


@dataclass(frozen=True)
class RuleClause:
    clause: SplitClause
    negated: bool = False

    def holds(self, instance) -> bool:
        return self.clause.holds(instance) != self.negated

    def mask(self, data: Dataset) -> np.ndarray:
        m = self.clause.mask(data)
        return ~m if self.negated else m


@dataclass(frozen=True)
class RulePredicate:
    """Conjunction of path clauses plus the leaf's decision class."""

    clauses: tuple[RuleClause, ...]
    decision: int

    def matches(self, instance) -> bool:
        return all(c.holds(instance) for c in self.clauses)


def rule_mask(clauses, data: Dataset) -> np.ndarray:
    """Boolean membership mask of a clause conjunction over a dataset."""
    out = np.ones(data.n, dtype=bool)
    for rc in clauses:
        out &= rc.mask(data)
    return out


@dataclass(frozen=True)
class Leaf:
    klass: int
    count: int
    class_counts: tuple[int, int]


@dataclass(frozen=True)
class Branch:
    clause: SplitClause
    left: "Leaf | Branch"  # clause true
    right: "Leaf | Branch"  # clause false
    count: int


@dataclass(frozen=True)
class MultiwayBranch:
    """k-way node: child i on the first clause that holds, last child otherwise."""

    clauses: tuple[SplitClause, ...]
    children: tuple

    def __post_init__(self):
        if len(self.children) != len(self.clauses) + 1:
            raise ParameterError("multiway node needs len(clauses)+1 children")


@dataclass(frozen=True)
class DecisionTree:
    root: Leaf | Branch
    feature_kinds: dict[str, str]
    n_train: int

    @property
    def height(self) -> int:
        def h(node):
            return 0 if isinstance(node, Leaf) else 1 + max(h(node.left), h(node.right))

        return h(self.root)

    @property
    def n_leaves(self) -> int:
        def c(node):
            return 1 if isinstance(node, Leaf) else c(node.left) + c(node.right)

        return c(self.root)


@dataclass(frozen=True)
class LearnerConfig:
    max_height: int
    minleaf_fraction: float
    max_leaves: int | None = None
    feature_subsample: str = "all"  # sqrt | all | log2
    criterion: str = "entropy"  # entropy | gini
    seed: int = 0

    def __post_init__(self):
        if self.max_height < 1:
            raise ParameterError(f"max_height must be >= 1, got {self.max_height}")
        if not (0 < self.minleaf_fraction < 0.5):
            raise ParameterError(f"minleaf_fraction must be in (0, 0.5), got {self.minleaf_fraction}")
        if self.max_leaves is not None and self.max_leaves < 1:
            raise ParameterError("max_leaves must be >= 1")
        if self.feature_subsample not in ("sqrt", "all", "log2"):
            raise ParameterError(f"unknown feature_subsample {self.feature_subsample!r}")
        if self.criterion not in ("entropy", "gini"):
            raise ParameterError(f"unknown criterion {self.criterion!r}")


def _impurity(p1: np.ndarray, criterion: str) -> np.ndarray:
    p1 = np.clip(p1, 0.0, 1.0)
    if criterion == "gini":
        return 2.0 * p1 * (1.0 - p1)
    out = np.zeros_like(p1, dtype=float)
    for p in (p1, 1.0 - p1):
        nz = p > 0
        out[nz] -= p[nz] * np.log2(p[nz])
    return out


class _BuildNode:
    __slots__ = ("idx", "depth", "ones", "best")

    def __init__(self, idx, depth, ones):
        self.idx = idx
        self.depth = depth
        self.ones = ones
        self.best = None  # (gain, feature, clause, left_local_mask)


def _best_split(node, data, y, minleaf, config, rng, n_total):
    m = len(node.idx)
    if node.depth >= config.max_height or m < 2 * minleaf:
        return None
    if node.ones == 0 or node.ones == m:
        return None  # pure
    ysub = y[node.idx].astype(float)
    parent_imp = float(_impurity(np.array([node.ones / m]), config.criterion)[0]) * m

    n_feat = len(data.feature_names)
    if config.feature_subsample == "all":
        feat_ids = range(n_feat)
    else:
        k = max(1, int(math.sqrt(n_feat)) if config.feature_subsample == "sqrt" else int(math.log2(n_feat)))
        feat_ids = sorted(rng.choice(n_feat, size=min(k, n_feat), replace=False).tolist())

    best = None  # (gain, clause, left_local_mask)
    for fi in feat_ids:
        name = data.feature_names[fi]
        col = data.columns[name][node.idx]
        if data.feature_kinds[name] == NUMERIC:
            order = np.argsort(col, kind="stable")
            sv = col[order]
            sy = ysub[order]
            cuts = np.flatnonzero(sv[:-1] != sv[1:])
            if cuts.size == 0:
                continue
            n_left = cuts + 1
            n_right = m - n_left
            ok = (n_left >= minleaf) & (n_right >= minleaf)
            if not ok.any():
                continue
            cum1 = np.cumsum(sy)
            l1 = cum1[cuts]
            r1 = node.ones - l1
            child = n_left * _impurity(l1 / n_left, config.criterion) + n_right * _impurity(
                r1 / n_right, config.criterion
            )
            gains = np.where(ok, parent_imp - child, -np.inf)
            j = int(np.argmax(gains))
            if not np.isfinite(gains[j]):
                continue
            gain = float(gains[j]) / n_total
            if best is None or gain > best[0] + _GAIN_TOL:
                thr = float((sv[cuts[j]] + sv[cuts[j] + 1]) / 2.0)
                clause = SplitClause(name, NUMERIC, thr)
                best = (gain, clause, col < thr)
        else:
            cats, codes = np.unique(col, return_inverse=True)
            if len(cats) < 2:
                continue
            sizes = np.bincount(codes).astype(float)
            ones = np.bincount(codes, weights=ysub)
            n_left = sizes
            n_right = m - sizes
            ok = (n_left >= minleaf) & (n_right >= minleaf)
            if not ok.any():
                continue
            l1 = ones
            r1 = node.ones - ones
            child = n_left * _impurity(
                np.divide(l1, n_left, out=np.zeros_like(l1), where=n_left > 0),
                config.criterion,
            ) + n_right * _impurity(
                np.divide(r1, n_right, out=np.zeros_like(r1), where=n_right > 0),
                config.criterion,
            )
            gains = np.where(ok, parent_imp - child, -np.inf)
            j = int(np.argmax(gains))
            if not np.isfinite(gains[j]):
                continue
            gain = float(gains[j]) / n_total
            if best is None or gain > best[0] + _GAIN_TOL:
                clause = SplitClause(name, CATEGORICAL, str(cats[j]))
                best = (gain, clause, codes == j)
    if best is None:
        return None
    gain, clause, left_mask = best
    # Zero-gain splits are allowed only as a fallback for impure nodes (e.g.
    # the first cut of an XOR pattern); they rank last in the best-first queue.
    return (max(gain, 0.0), clause, left_mask)


def fit(data: Dataset, config: LearnerConfig) -> DecisionTree:
    """Grow a tree best-first under the height/leaf/minleaf constraints.

    Tie-breaking is deterministic (lowest feature index, then lowest
    threshold or first category); feature candidates per split are drawn
    from the config seed.
    """
    n = data.n
    if n == 0:
        raise DataError("cannot fit a tree on an empty dataset")
    if config.minleaf_fraction * n < 1:
        raise ParameterError(
            f"minleaf_fraction {config.minleaf_fraction} yields an empty minimum leaf on n={n}"
        )
    minleaf = int(math.ceil(config.minleaf_fraction * n))
    y = np.asarray(data.labels)
    rng = np.random.Generator(np.random.PCG64(np.random.SeedSequence([config.seed])))

    root = _BuildNode(np.arange(n), 0, int(y.sum()))
    root.best = _best_split(root, data, y, minleaf, config, rng, n)
    heap = []
    seq = 0
    if root.best is not None:
        heapq.heappush(heap, (-root.best[0], seq, root))
        seq += 1
    n_leaves = 1
    children: dict[int, tuple] = {}

    while heap:
        if config.max_leaves is not None and n_leaves >= config.max_leaves:
            break
        _, _, node = heapq.heappop(heap)
        gain, clause, left_mask = node.best
        left = _BuildNode(node.idx[left_mask], node.depth + 1, int(y[node.idx[left_mask]].sum()))
        right = _BuildNode(node.idx[~left_mask], node.depth + 1, int(y[node.idx[~left_mask]].sum()))
        children[id(node)] = (clause, left, right)
        n_leaves += 1
        for child in (left, right):
            child.best = _best_split(child, data, y, minleaf, config, rng, n)
            if child.best is not None:
                heapq.heappush(heap, (-child.best[0], seq, child))
                seq += 1

    def build(node) -> Leaf | Branch:
        if id(node) in children:
            clause, left, right = children[id(node)]
            return Branch(clause, build(left), build(right), len(node.idx))
        m = len(node.idx)
        ones = node.ones
        return Leaf(1 if ones > m - ones else 0, m, (m - ones, ones))

    return DecisionTree(build(root), dict(data.feature_kinds), n)


def predict(tree: DecisionTree, instance) -> int:
    """Route one instance (a feature->value mapping) to its leaf class."""
    node = tree.root
    while isinstance(node, Branch):
        node = node.left if node.clause.holds(instance) else node.right
    return node.klass


def predict_dataset(tree: DecisionTree, data: Dataset) -> np.ndarray:
    """Vectorized leaf routing for a whole dataset."""
    out = np.empty(data.n, dtype=np.int64)

    def rec(node, idx):
        if isinstance(node, Leaf):
            out[idx] = node.klass
            return
        m = node.clause.mask(data, idx)
        rec(node.left, idx[m])
        rec(node.right, idx[~m])

    rec(tree.root, np.arange(data.n))
    return out


def extract_rules(tree: DecisionTree) -> list[RulePredicate]:
    """One rule per leaf; right branches contribute negated clauses.

    A single-leaf tree yields one empty-conjunction rule that applies to
    everyone.
    """
    rules: list[RulePredicate] = []

    def walk(node, path):
        if isinstance(node, Leaf):
            rules.append(RulePredicate(tuple(path), node.klass))
            return
        walk(node.left, path + [RuleClause(node.clause, False)])
        walk(node.right, path + [RuleClause(node.clause, True)])

    walk(tree.root, [])
    return rules


def favorable_rules(tree: DecisionTree) -> list[RulePredicate]:
    return [r for r in extract_rules(tree) if r.decision == 1]


def prune_redundant(tree: DecisionTree) -> DecisionTree:
    """Merge sibling leaves that predict the same class, bottom-up to fixpoint.

    Predictions are unchanged for every possible input; only the number of
    rules (and hence queries) shrinks.
    """

    def prune(node):
        if isinstance(node, Leaf):
            return node
        left = prune(node.left)
        right = prune(node.right)
        if isinstance(left, Leaf) and isinstance(right, Leaf) and left.klass == right.klass:
            counts = (
                left.class_counts[0] + right.class_counts[0],
                left.class_counts[1] + right.class_counts[1],
            )
            return Leaf(left.klass, left.count + right.count, counts)
        return Branch(node.clause, left, right, node.count)

    return DecisionTree(prune(tree.root), dict(tree.feature_kinds), tree.n_train)


def multiway_predict(node, instance) -> int:
    """Reference semantics for trees that still contain k-way nodes."""
    while not isinstance(node, Leaf):
        if isinstance(node, Branch):
            node = node.left if node.clause.holds(instance) else node.right
            continue
        for clause, child in zip(node.clauses, node.children):
            if clause.holds(instance):
                node = child
                break
        else:
            node = node.children[-1]
    return node.klass


def to_binary(root, feature_kinds: dict[str, str] | None = None, n_train: int = 0) -> DecisionTree:
    """Convert k-way nodes into chains of binary clause/negation nodes.

    A k-way split over clauses A, B, ... becomes A/not-A with the not-A
    branch chained to B/not-B and so on; semantics are preserved. A tree
    that is already binary comes back structurally identical.
    """
    if isinstance(root, DecisionTree):
        return to_binary(root.root, dict(root.feature_kinds), root.n_train)

    def leaf_total(node):
        if isinstance(node, Leaf):
            return node.count
        if isinstance(node, Branch):
            return leaf_total(node.left) + leaf_total(node.right)
        return sum(leaf_total(c) for c in node.children)

    def conv(node):
        if isinstance(node, Leaf):
            return node
        if isinstance(node, Branch):
            return Branch(node.clause, conv(node.left), conv(node.right), node.count)
        tail = conv(node.children[-1])
        for clause, child in zip(reversed(node.clauses), reversed(node.children[:-1])):
            left = conv(child)
            tail = Branch(clause, left, tail, leaf_total(left) + leaf_total(tail))
        return tail

    kinds = feature_kinds or {}
    return DecisionTree(conv(root), dict(kinds), n_train or leaf_total(root))


def query_count_bounds(height: int) -> tuple[int, int]:
    """Lower/upper bound on the number of histogram queries an audit needs."""
    if height < 1:
        raise ParameterError(f"height must be >= 1, got {height}")
    return 2, 2 ** (height - 1) + 1


# ---------------------------------------------------------------------------
# Serialization: nested-record machine format and an indented text format.

def to_record(tree: DecisionTree) -> dict:
    def rec(node):
        if isinstance(node, Leaf):
            return {
                "type": "leaf",
                "class": node.klass,
                "count": node.count,
                "class_counts": list(node.class_counts),
            }
        return {
            "type": "split",
            "feature": node.clause.feature,
            "op": "<" if node.clause.kind == NUMERIC else "=",
            "value": node.clause.value,
            "count": node.count,
            "left": rec(node.left),
            "right": rec(node.right),
        }

    return {"n_train": tree.n_train, "feature_kinds": dict(tree.feature_kinds), "root": rec(tree.root)}


def from_record(record: dict) -> DecisionTree:
    def rec(d):
        if d["type"] == "leaf":
            c0, c1 = d["class_counts"]
            return Leaf(int(d["class"]), int(d["count"]), (int(c0), int(c1)))
        kind = NUMERIC if d["op"] == "<" else CATEGORICAL
        value = float(d["value"]) if kind == NUMERIC else str(d["value"])
        return Branch(SplitClause(d["feature"], kind, value), rec(d["left"]), rec(d["right"]), int(d["count"]))

    return DecisionTree(rec(record["root"]), dict(record["feature_kinds"]), int(record["n_train"]))


def save_tree(tree: DecisionTree, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(to_record(tree), fh, sort_keys=True, indent=1)
        fh.write("\n")


def load_tree(path) -> DecisionTree:
    with open(path, "r", encoding="utf-8") as fh:
        return from_record(json.load(fh))


def to_text(tree: DecisionTree) -> str:
    """Human-readable one-node-per-line form; parses back via from_text."""
    lines = [f"tree n_train={tree.n_train} features={json.dumps(tree.feature_kinds, sort_keys=True)}"]

    def rec(node, depth):
        pad = "  " * depth
        if isinstance(node, Leaf):
            lines.append(
                f"{pad}leaf class={node.klass} n={node.count} "
                f"counts={node.class_counts[0]}/{node.class_counts[1]}"
            )
            return
        op = "<" if node.clause.kind == NUMERIC else "="
        value = json.dumps(node.clause.value)
        lines.append(f"{pad}split {node.clause.feature} {op} {value} n={node.count}")
        rec(node.left, depth + 1)
        rec(node.right, depth + 1)

    rec(tree.root, 0)
    return "\n".join(lines) + "\n"


def from_text(text: str) -> DecisionTree:
    lines = [ln for ln in text.splitlines() if ln.strip()]
    header = lines[0]
    if not header.startswith("tree "):
        raise DataError("tree text must start with a 'tree' header line")
    n_train = int(header.split("n_train=", 1)[1].split(" ", 1)[0])
    kinds = json.loads(header.split("features=", 1)[1])

    entries = []
    for ln in lines[1:]:
        depth = (len(ln) - len(ln.lstrip(" "))) // 2
        entries.append((depth, ln.strip()))

    pos = 0

    def parse(depth):
        nonlocal pos
        d, body = entries[pos]
        if d != depth:
            raise DataError(f"bad indentation at node {pos}")
        pos += 1
        if body.startswith("leaf "):
            parts = dict(p.split("=", 1) for p in body[len("leaf "):].split(" "))
            c0, c1 = parts["counts"].split("/")
            return Leaf(int(parts["class"]), int(parts["n"]), (int(c0), int(c1)))
        head, count_part = body.rsplit(" n=", 1)
        rest = head[len("split "):]
        feature, op_and_value = rest.split(" ", 1)
        op, value_text = op_and_value.split(" ", 1)
        kind = NUMERIC if op == "<" else CATEGORICAL
        value = json.loads(value_text)
        clause = SplitClause(feature, kind, float(value) if kind == NUMERIC else str(value))
        left = parse(depth + 1)
        right = parse(depth + 1)
        return Branch(clause, left, right, int(count_part))

    root = parse(0)
    if pos != len(entries):
        raise DataError("trailing nodes after tree root parse")
    return DecisionTree(root, kinds, n_train)

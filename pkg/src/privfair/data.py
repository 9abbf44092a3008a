"""Benchmark dataset loading and sensitive-attribute handling.

Loaders separate sensitive attributes from the training features, apply each
dataset's documented preprocessing rules and return immutable tables. The
canonical files are fetched by the user; 200-row synthetic fixtures with the
same schemas ship with the repo for CI.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass

import numpy as np

from .errors import DataError

NUMERIC = "numeric"
CATEGORICAL = "categorical"

DEFAULT_SPLIT_SEED = 0


def _freeze(arr: np.ndarray) -> np.ndarray:
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True)
class Dataset:
    """Feature table plus binary labels; sensitive columns never appear here."""

    instance_ids: np.ndarray
    feature_names: tuple[str, ...]
    feature_kinds: dict[str, str]
    columns: dict[str, np.ndarray]
    labels: np.ndarray

    def __post_init__(self):
        n = len(self.instance_ids)
        if set(self.feature_names) != set(self.columns):
            raise DataError("feature_names and columns disagree")
        for name, col in self.columns.items():
            if len(col) != n:
                raise DataError(f"column {name!r} has length {len(col)}, expected {n}")
            _freeze(col)
        if len(self.labels) != n:
            raise DataError("labels length mismatch")
        if n and not np.isin(self.labels, (0, 1)).all():
            raise DataError("labels must be 0/1")
        _freeze(np.asarray(self.instance_ids))
        _freeze(np.asarray(self.labels))

    @property
    def n(self) -> int:
        return len(self.instance_ids)

    def numeric_features(self) -> tuple[str, ...]:
        return tuple(f for f in self.feature_names if self.feature_kinds[f] == NUMERIC)

    def take(self, idx: np.ndarray) -> "Dataset":
        return Dataset(
            instance_ids=self.instance_ids[idx].copy(),
            feature_names=self.feature_names,
            feature_kinds=dict(self.feature_kinds),
            columns={name: col[idx].copy() for name, col in self.columns.items()},
            labels=self.labels[idx].copy(),
        )


@dataclass(frozen=True)
class SensitiveTable:
    """Group assignment for one encoded sensitive attribute."""

    instance_ids: np.ndarray
    attribute_name: str
    groups: np.ndarray
    group_names: tuple[str, ...]

    def __post_init__(self):
        if len(self.groups) != len(self.instance_ids):
            raise DataError("groups length mismatch")
        if self.k < 2:
            raise DataError(f"need at least 2 groups, got {self.k}")
        if len(self.groups) and (self.groups.min() < 0 or self.groups.max() >= self.k):
            raise DataError("group index out of range")
        _freeze(np.asarray(self.groups))
        _freeze(np.asarray(self.instance_ids))

    @property
    def k(self) -> int:
        return len(self.group_names)


@dataclass(frozen=True)
class SensitiveSet:
    """All raw sensitive columns split off by a loader, id-aligned with a Dataset."""

    instance_ids: np.ndarray
    raw: dict[str, np.ndarray]

    def __post_init__(self):
        for name, col in self.raw.items():
            if len(col) != len(self.instance_ids):
                raise DataError(f"sensitive column {name!r} length mismatch")
            _freeze(col)
        _freeze(np.asarray(self.instance_ids))

    @property
    def names(self) -> tuple[str, ...]:
        return tuple(self.raw)

    def take(self, idx: np.ndarray) -> "SensitiveSet":
        return SensitiveSet(
            instance_ids=self.instance_ids[idx].copy(),
            raw={name: col[idx].copy() for name, col in self.raw.items()},
        )


@dataclass(frozen=True)
class EncodingSpec:
    """How to turn raw sensitive columns into group indices.

    privileged_definition is predicate text: "race=White" for binary
    privilege, "race=White&sex=Male" for the quaternary intersection, or a
    bare attribute name for raw mode.
    """

    mode: str  # binary-privilege | quaternary-intersection | raw
    privileged_definition: str

    def __post_init__(self):
        if self.mode not in ("binary-privilege", "quaternary-intersection", "raw"):
            raise DataError(f"unknown encoding mode {self.mode!r}")


def _parse_definition(definition: str) -> list[tuple[str, str]]:
    clauses = []
    for part in definition.split("&"):
        part = part.strip()
        if "=" not in part:
            raise DataError(f"privileged clause {part!r} is not of the form attr=value")
        attr, value = part.split("=", 1)
        clauses.append((attr.strip(), value.strip()))
    return clauses


def encode_sensitive(sens: SensitiveSet, spec: EncodingSpec) -> SensitiveTable:
    """Encode raw sensitive columns into a single grouped attribute.

    binary-privilege gives K=2 with the privileged group at index 1;
    quaternary-intersection gives K=4 indexed as 2*(first clause matches) +
    (second clause matches), so the fully privileged group is index 3. raw
    factorizes the named column as-is.
    """
    if spec.mode == "raw":
        attr = spec.privileged_definition.strip()
        if attr not in sens.raw:
            raise DataError(f"sensitive attribute {attr!r} not available")
        names, codes = np.unique(sens.raw[attr], return_inverse=True)
        return SensitiveTable(
            instance_ids=sens.instance_ids.copy(),
            attribute_name=attr,
            groups=codes.astype(np.int64),
            group_names=tuple(str(v) for v in names),
        )

    clauses = _parse_definition(spec.privileged_definition)
    for attr, _ in clauses:
        if attr not in sens.raw:
            raise DataError(f"sensitive attribute {attr!r} not available")
    if spec.mode == "binary-privilege":
        if len(clauses) != 1:
            raise DataError("binary-privilege takes exactly one attr=value clause")
        attr, value = clauses[0]
        match = sens.raw[attr] == value
        return SensitiveTable(
            instance_ids=sens.instance_ids.copy(),
            attribute_name=attr,
            groups=match.astype(np.int64),
            group_names=(f"non-{value}", value),
        )
    if len(clauses) != 2:
        raise DataError("quaternary-intersection takes exactly two attr=value clauses")
    (a1, v1), (a2, v2) = clauses
    m1 = sens.raw[a1] == v1
    m2 = sens.raw[a2] == v2
    return SensitiveTable(
        instance_ids=sens.instance_ids.copy(),
        attribute_name=f"{a1}x{a2}",
        groups=(2 * m1.astype(np.int64) + m2.astype(np.int64)),
        group_names=(
            f"non-{v1}&non-{v2}",
            f"non-{v1}&{v2}",
            f"{v1}&non-{v2}",
            f"{v1}&{v2}",
        ),
    )


def stratified_split(
    labels: np.ndarray, test_fraction: float = 1.0 / 3.0, seed: int = DEFAULT_SPLIT_SEED
) -> tuple[np.ndarray, np.ndarray]:
    """Label-stratified split; test gets floor(n * test_fraction) rows.

    Per-class test counts are floor shares topped up by largest remainder,
    which reproduces the documented 4115/2057 and 667/333 splits.
    """
    labels = np.asarray(labels)
    n = len(labels)
    n_test = int(math.floor(n * test_fraction))
    rng = np.random.Generator(np.random.PCG64(np.random.SeedSequence([seed])))
    classes = np.unique(labels)
    exact = {c: (labels == c).sum() * test_fraction for c in classes}
    base = {c: int(math.floor(exact[c])) for c in classes}
    leftover = n_test - sum(base.values())
    for c in sorted(classes, key=lambda c: (-(exact[c] - base[c]), c)):
        if leftover <= 0:
            break
        base[c] += 1
        leftover -= 1
    test_parts = []
    for c in classes:
        idx = np.flatnonzero(labels == c)
        rng.shuffle(idx)
        test_parts.append(idx[: base[c]])
    test_idx = np.sort(np.concatenate(test_parts))
    mask = np.ones(n, dtype=bool)
    mask[test_idx] = False
    return np.flatnonzero(mask), test_idx


# ---------------------------------------------------------------------------
# Adult

ADULT_COLUMNS = (
    "age", "workclass", "fnlwgt", "education", "education-num", "marital-status",
    "occupation", "relationship", "race", "sex", "capital-gain", "capital-loss",
    "hours-per-week", "native-country", "income",
)
ADULT_NUMERIC = {"age", "fnlwgt", "education-num", "capital-gain", "capital-loss", "hours-per-week"}
ADULT_SENSITIVE = ("race", "sex", "age", "native-country")
ADULT_FEATURES = (
    "workclass", "education", "education-num", "marital-status", "occupation",
    "relationship", "capital-gain", "capital-loss", "hours-per-week",
)


def _parse_number(text: str, line_no: int, column: str) -> float:
    try:
        return float(text)
    except ValueError:
        raise DataError(f"line {line_no}: column {column!r} has non-numeric value {text!r}") from None


def _read_adult_file(path) -> tuple[list[list[str]], list[int]]:
    rows, lines = [], []
    with open(path, "r", encoding="utf-8") as fh:
        for line_no, line in enumerate(fh, start=1):
            line = line.strip()
            if not line or line.startswith("|"):
                continue
            fields = [f.strip() for f in line.split(",")]
            if len(fields) != len(ADULT_COLUMNS):
                raise DataError(
                    f"line {line_no}: expected {len(ADULT_COLUMNS)} fields, got {len(fields)}"
                )
            rows.append(fields)
            lines.append(line_no)
    return rows, lines


def _adult_split(path) -> tuple[Dataset, SensitiveSet]:
    rows, lines = _read_adult_file(path)
    kept, kept_lines = [], []
    for fields, line_no in zip(rows, lines):
        if "?" in fields:
            continue  # missing-value rows are removed
        kept.append(fields)
        kept_lines.append(line_no)
    cols = {name: [] for name in ADULT_COLUMNS}
    labels = []
    for fields, line_no in zip(kept, kept_lines):
        record = dict(zip(ADULT_COLUMNS, fields))
        raw_label = record.pop("income").rstrip(".")
        if raw_label == ">50K":
            labels.append(1)
        elif raw_label == "<=50K":
            labels.append(0)
        else:
            raise DataError(f"line {line_no}: unknown income label {raw_label!r}")
        for name, value in record.items():
            if name in ADULT_NUMERIC:
                cols[name].append(_parse_number(value, line_no, name))
            else:
                cols[name].append(value)
    n = len(labels)
    ids = np.arange(n, dtype=np.int64)
    features = {}
    kinds = {}
    for name in ADULT_FEATURES:
        if name in ADULT_NUMERIC:
            features[name] = np.array(cols[name], dtype=float)
            kinds[name] = NUMERIC
        else:
            features[name] = np.array(cols[name], dtype=str)
            kinds[name] = CATEGORICAL
    ds = Dataset(ids, ADULT_FEATURES, kinds, features, np.array(labels, dtype=np.int64))
    sens = SensitiveSet(
        ids.copy(),
        {
            "race": np.array(cols["race"], dtype=str),
            "sex": np.array(cols["sex"], dtype=str),
            "age": np.array(cols["age"], dtype=float),
            "native-country": np.array(cols["native-country"], dtype=str),
        },
    )
    return ds, sens


def load_adult(train_path, test_path):
    """Load the two Adult files; drops missing-value rows and `fnlwgt`.

    race, sex, age and native-country are separated as sensitive (age stays
    raw, it is never binarized). Returns ((train_ds, train_sens),
    (test_ds, test_sens)); on the canonical files the splits have 30162 and
    15060 rows.
    """
    return _adult_split(train_path), _adult_split(test_path)


# ---------------------------------------------------------------------------
# COMPAS

COMPAS_REQUIRED = (
    "age", "c_charge_degree", "race", "age_cat", "score_text", "sex", "priors_count",
    "days_b_screening_arrest", "decile_score", "is_recid", "two_year_recid",
    "c_jail_in", "c_jail_out",
)
COMPAS_FEATURES = (
    "c_charge_degree", "score_text", "priors_count", "days_b_screening_arrest",
    "decile_score", "c_jail_in", "c_jail_out",
)
COMPAS_NUMERIC = {
    "priors_count", "days_b_screening_arrest", "decile_score", "c_jail_in", "c_jail_out",
}
COMPAS_SENSITIVE = ("race", "sex", "age")


def _year_of(text: str, line_no: int, column: str) -> float:
    if text == "":
        return math.nan
    head = text.strip()[:4]
    if not head.isdigit():
        raise DataError(f"line {line_no}: column {column!r} has malformed date {text!r}")
    return float(head)  # dates are truncated to the year, rounded down


def load_compas(path, seed: int = DEFAULT_SPLIT_SEED):
    """Load the general-recidivism COMPAS file and split it 2:1.

    Applies the source article's row filters (|screening - arrest| <= 30
    days plus its companion validity filters, leaving 6172 rows on the
    canonical file), truncates jail dates to years, imputes remaining
    numeric gaps with the post-filter column median, and keeps race, sex
    and age as sensitive. The favorable label (1) is no recidivism within
    two years.
    """
    with open(path, "r", encoding="utf-8", newline="") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames is None:
            raise DataError("empty COMPAS file")
        missing = [c for c in COMPAS_REQUIRED if c not in reader.fieldnames]
        if missing:
            raise DataError(f"COMPAS file lacks expected columns: {missing}")
        rows = []
        for line_no, record in enumerate(reader, start=2):
            gap = record["days_b_screening_arrest"].strip()
            if gap == "":
                continue
            gap_v = _parse_number(gap, line_no, "days_b_screening_arrest")
            if abs(gap_v) > 30:
                continue
            if record["is_recid"].strip() == "-1":
                continue
            if record["c_charge_degree"].strip() == "O":
                continue
            if record["score_text"].strip() in ("N/A", ""):
                continue
            rows.append((line_no, record))

    n = len(rows)
    cols: dict[str, list] = {name: [] for name in COMPAS_FEATURES}
    sens_cols: dict[str, list] = {name: [] for name in COMPAS_SENSITIVE}
    labels = []
    for line_no, record in rows:
        for name in ("c_charge_degree", "score_text"):
            cols[name].append(record[name].strip())
        for name in ("priors_count", "days_b_screening_arrest", "decile_score"):
            value = record[name].strip()
            cols[name].append(math.nan if value == "" else _parse_number(value, line_no, name))
        for name in ("c_jail_in", "c_jail_out"):
            cols[name].append(_year_of(record[name].strip(), line_no, name))
        sens_cols["race"].append(record["race"].strip())
        sens_cols["sex"].append(record["sex"].strip())
        age = record["age"].strip()
        sens_cols["age"].append(math.nan if age == "" else _parse_number(age, line_no, "age"))
        labels.append(1 - int(record["two_year_recid"].strip()))

    features = {}
    kinds = {}
    for name in COMPAS_FEATURES:
        if name in COMPAS_NUMERIC:
            col = np.array(cols[name], dtype=float)
            if np.isnan(col).any():
                med = float(np.nanmedian(col))
                col = np.where(np.isnan(col), med, col)
            features[name] = col
            kinds[name] = NUMERIC
        else:
            features[name] = np.array(cols[name], dtype=str)
            kinds[name] = CATEGORICAL
    ids = np.arange(n, dtype=np.int64)
    ds = Dataset(ids, COMPAS_FEATURES, kinds, features, np.array(labels, dtype=np.int64))
    sens = SensitiveSet(
        ids.copy(),
        {
            "race": np.array(sens_cols["race"], dtype=str),
            "sex": np.array(sens_cols["sex"], dtype=str),
            "age": np.array(sens_cols["age"], dtype=float),
        },
    )
    train_idx, test_idx = stratified_split(ds.labels, seed=seed)
    return (ds.take(train_idx), sens.take(train_idx)), (ds.take(test_idx), sens.take(test_idx))


# ---------------------------------------------------------------------------
# German credit

GERMAN_COLUMNS = (
    "status", "duration", "credit_history", "purpose", "credit_amount", "savings",
    "employment_since", "installment_rate", "personal_status_sex", "other_debtors",
    "residence_since", "property", "age", "other_installment_plans", "housing",
    "existing_credits", "job", "people_liable", "telephone", "foreign_worker",
    "credit_risk",
)
GERMAN_NUMERIC = {
    "duration", "credit_amount", "installment_rate", "residence_since", "age",
    "existing_credits", "people_liable",
}
# Codebook: A91 male divorced/separated, A92 female divorced/separated/married,
# A93 male single, A94 male married/widowed, A95 female single.
GERMAN_GENDER = {"A91": "male", "A92": "female", "A93": "male", "A94": "male", "A95": "female"}
GERMAN_FEATURES = tuple(
    c for c in GERMAN_COLUMNS
    if c not in ("personal_status_sex", "age", "foreign_worker", "credit_risk")
)
GERMAN_SENSITIVE = ("gender", "age", "foreign_worker")


def load_german(path, seed: int = DEFAULT_SPLIT_SEED):
    """Load the German credit file and split it 2:1 (667/333 on the canonical file).

    Gender is decoded out of the marital-status codes into its own
    sensitive column; the marital residue is dropped (it would still leak
    gender). age and foreign_worker are also sensitive. Favorable label (1)
    is good credit. No imputation is needed.
    """
    rows, lines = [], []
    with open(path, "r", encoding="utf-8") as fh:
        for line_no, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            fields = [f.strip() for f in (line.split(",") if "," in line else line.split())]
            if len(fields) != len(GERMAN_COLUMNS):
                raise DataError(
                    f"line {line_no}: expected {len(GERMAN_COLUMNS)} fields, got {len(fields)}"
                )
            rows.append(fields)
            lines.append(line_no)

    cols = {name: [] for name in GERMAN_COLUMNS}
    gender, labels = [], []
    for fields, line_no in zip(rows, lines):
        record = dict(zip(GERMAN_COLUMNS, fields))
        code = record["personal_status_sex"]
        if code not in GERMAN_GENDER:
            raise DataError(f"line {line_no}: unknown marital-status code {code!r}")
        gender.append(GERMAN_GENDER[code])
        risk = record["credit_risk"]
        if risk not in ("1", "2"):
            raise DataError(f"line {line_no}: unknown credit label {risk!r}")
        labels.append(1 if risk == "1" else 0)
        for name in GERMAN_COLUMNS:
            if name in GERMAN_NUMERIC:
                cols[name].append(_parse_number(record[name], line_no, name))
            else:
                cols[name].append(record[name])

    n = len(labels)
    ids = np.arange(n, dtype=np.int64)
    features = {}
    kinds = {}
    for name in GERMAN_FEATURES:
        if name in GERMAN_NUMERIC:
            features[name] = np.array(cols[name], dtype=float)
            kinds[name] = NUMERIC
        else:
            features[name] = np.array(cols[name], dtype=str)
            kinds[name] = CATEGORICAL
    ds = Dataset(ids, GERMAN_FEATURES, kinds, features, np.array(labels, dtype=np.int64))
    sens = SensitiveSet(
        ids.copy(),
        {
            "gender": np.array(gender, dtype=str),
            "age": np.array(cols["age"], dtype=float),
            "foreign_worker": np.array(cols["foreign_worker"], dtype=str),
        },
    )
    train_idx, test_idx = stratified_split(ds.labels, seed=seed)
    return (ds.take(train_idx), sens.take(train_idx)), (ds.take(test_idx), sens.take(test_idx))


# ---------------------------------------------------------------------------
# Generic schema-described CSV

def load_csv_with_schema(path, schema: dict):
    """Load a header-row CSV described by a schema dict.

    Schema keys: "label" (column name), "positive_label" (string value that
    maps to 1), "features" {name: "numeric"|"categorical"}, "sensitive"
    {name: "numeric"|"categorical"}.
    """
    label_col = schema["label"]
    positive = str(schema.get("positive_label", "1"))
    feat_kinds = dict(schema["features"])
    sens_kinds = dict(schema.get("sensitive", {}))
    with open(path, "r", encoding="utf-8", newline="") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames is None:
            raise DataError("empty CSV file")
        expected = [label_col, *feat_kinds, *sens_kinds]
        missing = [c for c in expected if c not in reader.fieldnames]
        if missing:
            raise DataError(f"CSV lacks expected columns: {missing}")
        cols: dict[str, list] = {c: [] for c in [*feat_kinds, *sens_kinds]}
        labels = []
        for line_no, record in enumerate(reader, start=2):
            labels.append(1 if record[label_col].strip() == positive else 0)
            for name in cols:
                value = record[name].strip()
                kind = feat_kinds.get(name, sens_kinds.get(name))
                cols[name].append(_parse_number(value, line_no, name) if kind == NUMERIC else value)
    n = len(labels)
    ids = np.arange(n, dtype=np.int64)
    features = {
        name: (np.array(vals, dtype=float) if feat_kinds[name] == NUMERIC else np.array(vals, dtype=str))
        for name, vals in cols.items() if name in feat_kinds
    }
    ds = Dataset(ids, tuple(feat_kinds), feat_kinds, features, np.array(labels, dtype=np.int64))
    sens = SensitiveSet(
        ids.copy(),
        {
            name: (np.array(vals, dtype=float) if sens_kinds[name] == NUMERIC else np.array(vals, dtype=str))
            for name, vals in cols.items() if name in sens_kinds
        },
    )
    return ds, sens


# ---------------------------------------------------------------------------
# Canonical preprocessed form: CSV + key-value sidecar

def _format_cell(value, kind: str) -> str:
    return repr(float(value)) if kind == NUMERIC else str(value)


def save_dataset(ds: Dataset, sens: SensitiveSet, csv_path, meta_path) -> None:
    """Write the preprocessed table as CSV plus a key-value sidecar."""
    sens_kinds = {
        name: (NUMERIC if np.issubdtype(col.dtype, np.number) else CATEGORICAL)
        for name, col in sens.raw.items()
    }
    with open(csv_path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["id", *ds.feature_names, *sens.names, "label"])
        for i in range(ds.n):
            row = [str(int(ds.instance_ids[i]))]
            row += [_format_cell(ds.columns[f][i], ds.feature_kinds[f]) for f in ds.feature_names]
            row += [_format_cell(sens.raw[s][i], sens_kinds[s]) for s in sens.names]
            row.append(str(int(ds.labels[i])))
            writer.writerow(row)
    with open(meta_path, "w", encoding="utf-8") as fh:
        fh.write(f"n={ds.n}\n")
        fh.write("label=label\n")
        for name in ds.feature_names:
            fh.write(f"feature.{name}={ds.feature_kinds[name]}\n")
        for name in sens.names:
            fh.write(f"sensitive.{name}={sens_kinds[name]}\n")


def load_saved(csv_path, meta_path) -> tuple[Dataset, SensitiveSet]:
    """Reload a table written by save_dataset; round-trips exactly."""
    feat_kinds: dict[str, str] = {}
    sens_kinds: dict[str, str] = {}
    with open(meta_path, "r", encoding="utf-8") as fh:
        for line in fh:
            line = line.strip()
            if not line or "=" not in line:
                continue
            key, value = line.split("=", 1)
            if key.startswith("feature."):
                feat_kinds[key[len("feature."):]] = value
            elif key.startswith("sensitive."):
                sens_kinds[key[len("sensitive."):]] = value
    with open(csv_path, "r", encoding="utf-8", newline="") as fh:
        reader = csv.DictReader(fh)
        ids, labels = [], []
        cols: dict[str, list] = {name: [] for name in (*feat_kinds, *sens_kinds)}
        for line_no, record in enumerate(reader, start=2):
            ids.append(int(record["id"]))
            labels.append(int(record["label"]))
            for name in cols:
                kind = feat_kinds.get(name, sens_kinds.get(name))
                value = record[name]
                cols[name].append(_parse_number(value, line_no, name) if kind == NUMERIC else value)
    ids_arr = np.array(ids, dtype=np.int64)
    ds = Dataset(
        ids_arr,
        tuple(feat_kinds),
        feat_kinds,
        {
            name: (np.array(v, dtype=float) if feat_kinds[name] == NUMERIC else np.array(v, dtype=str))
            for name, v in cols.items() if name in feat_kinds
        },
        np.array(labels, dtype=np.int64),
    )
    sens = SensitiveSet(
        ids_arr.copy(),
        {
            name: (np.array(v, dtype=float) if sens_kinds[name] == NUMERIC else np.array(v, dtype=str))
            for name, v in cols.items() if name in sens_kinds
        },
    )
    return ds, sens


# Named encodings used by the CLI and experiments, per dataset family.
DATASET_ENCODINGS: dict[str, dict[str, EncodingSpec]] = {
    "adult": {
        "ethnicity": EncodingSpec("binary-privilege", "race=White"),
        "sex": EncodingSpec("binary-privilege", "sex=Male"),
        "sex-ethnicity": EncodingSpec("quaternary-intersection", "race=White&sex=Male"),
    },
    "compas": {
        "ethnicity": EncodingSpec("binary-privilege", "race=Caucasian"),
        "sex": EncodingSpec("binary-privilege", "sex=Male"),
        "sex-ethnicity": EncodingSpec("quaternary-intersection", "race=Caucasian&sex=Male"),
    },
    "german": {
        # privileged = lives in the original country of birth (not a foreign worker)
        "ethnicity": EncodingSpec("binary-privilege", "foreign_worker=A202"),
        "sex": EncodingSpec("binary-privilege", "gender=male"),
        "sex-ethnicity": EncodingSpec("quaternary-intersection", "foreign_worker=A202&gender=male"),
    },
}

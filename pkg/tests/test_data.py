import numpy as np
import pytest

from privfair import binning as B
from privfair import data as D
from privfair.errors import DataError

CANONICAL_ADULT = __import__("pathlib").Path("data/adult.data")


# ---------------------------------------------------------------------------
# Adult loader

def test_load_adult_fixture_counts(fixtures_dir):
    (train, train_sens), (test, test_sens) = D.load_adult(
        fixtures_dir / "adult.data", fixtures_dir / "adult.test"
    )
    # fixture rows minus the seeded '?' rows
    assert train.n == 188
    assert test.n == 93
    assert "fnlwgt" not in train.feature_names
    for name in ("race", "sex", "age", "native-country"):
        assert name in train_sens.names
        assert name not in train.feature_names


def test_load_adult_drops_missing_rows(tmp_path):
    path = tmp_path / "adult.data"
    clean = "39, Private, 77516, Bachelors, 13, Never-married, Sales, Not-in-family, White, Male, 2174, 0, 40, United-States, <=50K"
    missing = "28, ?, 338409, Bachelors, 13, Married-civ-spouse, ?, Wife, Black, Female, 0, 0, 40, Cuba, <=50K"
    path.write_text(missing + "\n" + clean + "\n")
    (ds, _), _ = D.load_adult(path, path)
    assert ds.n == 1


def test_load_adult_malformed_row_names_line(tmp_path):
    path = tmp_path / "adult.data"
    path.write_text("1, 2, 3\n")
    with pytest.raises(DataError, match="line 1"):
        D.load_adult(path, path)


def test_load_adult_test_quirks(tmp_path):
    # header line and trailing label periods appear only in the test file
    path = tmp_path / "adult.test"
    path.write_text(
        "|1x3 Cross validator\n"
        "39, Private, 77516, Bachelors, 13, Never-married, Sales, Not-in-family,"
        " White, Male, 2174, 0, 40, United-States, >50K.\n"
    )
    (ds, _), _ = D.load_adult(path, path)
    assert ds.n == 1
    assert ds.labels[0] == 1


@pytest.mark.skipif(not CANONICAL_ADULT.exists(), reason="canonical Adult files not present")
def test_load_adult_canonical_counts():
    (train, _), (test, _) = D.load_adult("data/adult.data", "data/adult.test")
    assert train.n == 30162
    assert test.n == 15060


# ---------------------------------------------------------------------------
# COMPAS loader

def test_load_compas_fixture(fixtures_dir):
    (train, train_sens), (test, test_sens) = D.load_compas(fixtures_dir / "compas.csv")
    total = train.n + test.n
    assert test.n == total // 3
    assert set(train.feature_names) == set(D.COMPAS_FEATURES)
    assert set(train_sens.names) == {"race", "sex", "age"}
    # 11 columns total: 7 features + 3 sensitive + the label
    assert len(train.feature_names) + len(train_sens.names) + 1 == 11
    # jail-date columns became years
    assert train.columns["c_jail_in"].min() >= 2000
    assert float(train.columns["c_jail_in"].max()) < 2030


def test_compas_median_imputation(tmp_path):
    # a priors column of [1, missing, 3] imputes the middle value 2
    header = ("id,age,c_charge_degree,race,age_cat,score_text,sex,priors_count,"
              "days_b_screening_arrest,decile_score,is_recid,two_year_recid,c_jail_in,c_jail_out")
    template = "{i},30,F,Caucasian,25 - 45,Low,Male,{priors},1,3,0,0,2013-01-01 00:00:00,2013-01-02 00:00:00"
    rows = [header,
            template.format(i=1, priors="1"),
            template.format(i=2, priors=""),
            template.format(i=3, priors="3")]
    path = tmp_path / "compas.csv"
    path.write_text("\n".join(rows) + "\n")
    (train, _), (test, _) = D.load_compas(path)
    priors = np.concatenate([train.columns["priors_count"], test.columns["priors_count"]])
    assert sorted(priors.tolist()) == [1.0, 2.0, 3.0]


def test_compas_thirty_day_gap_excluded(tmp_path):
    header = ("id,age,c_charge_degree,race,age_cat,score_text,sex,priors_count,"
              "days_b_screening_arrest,decile_score,is_recid,two_year_recid,c_jail_in,c_jail_out")
    keep = "1,30,F,Caucasian,25 - 45,Low,Male,0,10,3,0,0,2013-01-01 00:00:00,2013-01-02 00:00:00"
    drop = "2,30,F,Caucasian,25 - 45,Low,Male,0,31,3,0,0,2013-01-01 00:00:00,2013-01-02 00:00:00"
    drop2 = "3,30,F,Caucasian,25 - 45,Low,Male,0,-31,3,0,0,2013-01-01 00:00:00,2013-01-02 00:00:00"
    path = tmp_path / "compas.csv"
    path.write_text("\n".join([header, keep, drop, drop2, keep.replace("1,", "4,", 1),
                               keep.replace("1,", "5,", 1)]) + "\n")
    (train, _), (test, _) = D.load_compas(path)
    assert train.n + test.n == 3


def test_compas_missing_column_schema_error(tmp_path):
    path = tmp_path / "compas.csv"
    path.write_text("a,b,c\n1,2,3\n")
    with pytest.raises(DataError, match="columns"):
        D.load_compas(path)


def test_compas_favorable_label_is_no_recidivism(fixtures_dir):
    import csv

    with open(fixtures_dir / "compas.csv") as fh:
        rows = list(csv.DictReader(fh))
    eligible = [
        r for r in rows
        if r["days_b_screening_arrest"]
        and abs(float(r["days_b_screening_arrest"])) <= 30
        and r["is_recid"] != "-1"
        and r["c_charge_degree"] != "O"
        and r["score_text"] not in ("N/A", "")
    ]
    expected_favorable = sum(1 for r in eligible if r["two_year_recid"] == "0")
    (train, _), (test, _) = D.load_compas(fixtures_dir / "compas.csv")
    assert int(train.labels.sum() + test.labels.sum()) == expected_favorable


# ---------------------------------------------------------------------------
# German loader

def test_load_german_fixture(fixtures_dir):
    (train, train_sens), (test, test_sens) = D.load_german(fixtures_dir / "german.data")
    total = train.n + test.n
    assert total == 200
    assert test.n == total // 3
    assert set(train_sens.names) == {"gender", "age", "foreign_worker"}
    assert "personal_status_sex" not in train.feature_names


def test_german_split_sizes_on_1000_rows(fixtures_dir):
    # the canonical file has 1000 rows and splits 667/333; same rule at any n
    labels = np.array([0] * 300 + [1] * 700)
    train_idx, test_idx = D.stratified_split(labels)
    assert len(train_idx) == 667
    assert len(test_idx) == 333


def test_german_gender_decode():
    # codebook: A91 means "male : divorced/separated"
    assert D.GERMAN_GENDER["A91"] == "male"
    assert D.GERMAN_GENDER["A92"] == "female"
    assert D.GERMAN_GENDER["A95"] == "female"


def test_german_unknown_code_errors(tmp_path):
    fields = ["A11", "6", "A34", "A43", "1169", "A65", "A75", "4", "A99", "A101",
              "4", "A121", "67", "A143", "A152", "2", "A173", "1", "A192", "A201", "1"]
    path = tmp_path / "german.data"
    path.write_text(" ".join(fields) + "\n")
    with pytest.raises(DataError, match="A99"):
        D.load_german(path)


# ---------------------------------------------------------------------------
# stratified split

def test_stratified_split_compas_sizes():
    labels = np.array([0] * 3000 + [1] * 3172)
    train_idx, test_idx = D.stratified_split(labels)
    assert len(test_idx) == 2057
    assert len(train_idx) == 4115


def test_stratified_split_preserves_class_shares():
    rng = np.random.Generator(np.random.PCG64(1))
    labels = (rng.random(900) < 0.3).astype(int)
    train_idx, test_idx = D.stratified_split(labels, seed=4)
    assert abs(labels[train_idx].mean() - labels[test_idx].mean()) < 0.01
    assert len(set(train_idx) & set(test_idx)) == 0
    assert len(train_idx) + len(test_idx) == 900


def test_stratified_split_deterministic():
    labels = np.array([0, 1] * 150)
    a = D.stratified_split(labels, seed=9)
    b = D.stratified_split(labels, seed=9)
    assert np.array_equal(a[0], b[0]) and np.array_equal(a[1], b[1])


# ---------------------------------------------------------------------------
# sensitive encoding

def sens_set(**cols):
    n = len(next(iter(cols.values())))
    return D.SensitiveSet(np.arange(n), {k: np.asarray(v) for k, v in cols.items()})


def test_encode_binary_privilege():
    sens = sens_set(race=["White", "Black", "Asian", "White"])
    table = D.encode_sensitive(sens, D.EncodingSpec("binary-privilege", "race=White"))
    assert table.k == 2
    assert list(table.groups) == [1, 0, 0, 1]  # privileged is group 1
    assert table.group_names == ("non-White", "White")


def test_encode_quaternary_intersection():
    sens = sens_set(
        race=["White", "White", "Black", "Black"], sex=["Male", "Female", "Male", "Female"]
    )
    table = D.encode_sensitive(
        sens, D.EncodingSpec("quaternary-intersection", "race=White&sex=Male")
    )
    assert table.k == 4
    assert list(table.groups) == [3, 2, 1, 0]


def test_encode_raw_keeps_arity():
    sens = sens_set(race=["a", "b", "c", "a"])
    table = D.encode_sensitive(sens, D.EncodingSpec("raw", "race"))
    assert table.k == 3
    assert table.group_names == ("a", "b", "c")


def test_encode_absent_attribute_errors():
    sens = sens_set(race=["a", "b"])
    with pytest.raises(DataError, match="nope"):
        D.encode_sensitive(sens, D.EncodingSpec("binary-privilege", "nope=a"))


def test_loader_ids_aligned(fixtures_dir):
    (train, train_sens), (test, test_sens) = D.load_german(fixtures_dir / "german.data")
    assert np.array_equal(train.instance_ids, train_sens.instance_ids)
    assert np.array_equal(test.instance_ids, test_sens.instance_ids)
    assert set(train.instance_ids).isdisjoint(set(test.instance_ids))


# ---------------------------------------------------------------------------
# save / load round trip

def test_save_load_roundtrip(tmp_path, fixtures_dir):
    (train, sens), _ = D.load_adult(fixtures_dir / "adult.data", fixtures_dir / "adult.test")
    csv_path, meta_path = tmp_path / "out.csv", tmp_path / "out.meta"
    D.save_dataset(train, sens, csv_path, meta_path)
    ds2, sens2 = D.load_saved(csv_path, meta_path)
    assert ds2.feature_names == train.feature_names
    for name in train.feature_names:
        assert np.array_equal(ds2.columns[name], train.columns[name])
    assert np.array_equal(ds2.labels, train.labels)
    assert np.array_equal(ds2.instance_ids, train.instance_ids)
    for name in sens.names:
        assert np.array_equal(sens2.raw[name], sens.raw[name])
    # resaving is byte-identical
    csv2, meta2 = tmp_path / "out2.csv", tmp_path / "out2.meta"
    D.save_dataset(ds2, sens2, csv2, meta2)
    assert csv2.read_bytes() == csv_path.read_bytes()
    assert meta2.read_bytes() == meta_path.read_bytes()


def test_fixture_goldens_byte_match(tmp_path, fixtures_dir):
    # the committed goldens are what the loaders produce today
    for name, loader in [
        ("adult", lambda: D.load_adult(fixtures_dir / "adult.data", fixtures_dir / "adult.test")),
        ("compas", lambda: D.load_compas(fixtures_dir / "compas.csv")),
        ("german", lambda: D.load_german(fixtures_dir / "german.data")),
    ]:
        (train, sens), _ = loader()
        csv_path = tmp_path / f"{name}.csv"
        meta_path = tmp_path / f"{name}.meta"
        D.save_dataset(train, sens, csv_path, meta_path)
        assert csv_path.read_bytes() == (fixtures_dir / f"{name}_train_golden.csv").read_bytes()
        assert meta_path.read_bytes() == (fixtures_dir / f"{name}_train_golden.meta").read_bytes()


# ---------------------------------------------------------------------------
# binning

def test_binning_depth_average_rounding():
    # thresholds {29,30,31,30,30} at one depth average to 30
    assert B._round_half_away(float(np.mean([29, 30, 31, 30, 30]))) == 30
    assert B._round_half_away(2.5) == 3
    assert B._round_half_away(-2.5) == -3


def test_binning_respects_max_bins_and_determinism(small_data):
    ds, _ = small_data
    binned1, report1 = B.bin_numeric_features(ds, n_trees=5, max_bins=4, seed=11)
    binned2, report2 = B.bin_numeric_features(ds, n_trees=5, max_bins=4, seed=11)
    assert report1 == report2
    for name in ds.numeric_features():
        fb = report1.per_feature[name]
        if fb.source != "unbinned-constant":
            assert len(fb.cuts) <= 3
            assert len(np.unique(binned1.columns[name])) <= 4
            assert binned1.feature_kinds[name] == "categorical"
        assert np.array_equal(binned1.columns[name], binned2.columns[name])


def test_binning_median_fallback():
    # the signal column separates the labels perfectly, so every bootstrap
    # tree splits on it once and stops with pure children: the never-selected
    # column falls back to a single cut at its rounded median (51 here)
    n = 120
    signal = np.arange(n, dtype=float)
    noise = np.where(np.arange(n) % 2 == 0, 50.0, 52.0)
    y = (signal >= n / 2).astype(int)
    ds = D.Dataset(
        np.arange(n), ("signal", "noise"),
        {"signal": "numeric", "noise": "numeric"},
        {"signal": signal, "noise": noise}, y,
    )
    _, report = B.bin_numeric_features(ds, n_trees=5, max_bins=5, seed=1)
    fb = report.per_feature["noise"]
    assert fb.source == "median-fallback"
    assert fb.cuts == (51,)
    assert report.per_feature["signal"].source == "tree-thresholds"


def test_binning_constant_column_left_unbinned():
    n = 60
    ds = D.Dataset(
        np.arange(n), ("x", "c"), {"x": "numeric", "c": "numeric"},
        {"x": np.arange(n, dtype=float), "c": np.full(n, 7.0)},
        np.array([0, 1] * 30),
    )
    binned, report = B.bin_numeric_features(ds, n_trees=3, max_bins=4, seed=3)
    assert report.per_feature["c"].source == "unbinned-constant"
    assert binned.feature_kinds["c"] == "numeric"
    assert any("constant" in w for w in report.warnings)


def test_binning_cut_selection_keeps_most_frequent():
    # 9 candidate depths, max_bins 7: the 6 most frequent survive
    stats = [(10 - d, d, 100 + d) for d in range(9)]  # freq desc by construction
    stats_sorted = sorted(stats, key=lambda c: (-c[0], c[1]))
    kept = [c for _, _, c in stats_sorted[:6]]
    assert kept == [100, 101, 102, 103, 104, 105]


def test_binning_requires_numeric_column():
    ds = D.Dataset(
        np.arange(4), ("c",), {"c": "categorical"},
        {"c": np.array(["a", "b", "a", "b"])}, np.array([0, 1, 0, 1]),
    )
    with pytest.raises(DataError):
        B.bin_numeric_features(ds)


def test_apply_binning_train_test_consistent(small_data):
    ds, _ = small_data
    binned, report = B.bin_numeric_features(ds, seed=5)
    reapplied = B.apply_binning(ds, report)
    for name in ds.feature_names:
        assert np.array_equal(binned.columns[name], reapplied.columns[name])

import numpy as np
import pytest

from cmkl.dataset import (
    DatasetSchema,
    load_dataset,
    merge_label_spaces,
    split_indices,
    standardize,
)
from cmkl.errors import DataError

SCHEMA = DatasetSchema(utility_column="activity", privacy_column="subject")


def write(path, text):
    path.write_text(text, encoding="utf-8")
    return str(path)


class TestLoadDataset:
    def test_toy_csv(self, tmp_path):
        path = write(
            tmp_path / "toy.csv",
            "f0,f1,activity,subject\n1,2,walk,alice\n3,4,run,bob\n5,6,walk,alice\n",
        )
        ds = load_dataset(path, SCHEMA)
        assert ds.x.shape == (3, 2)
        assert np.array_equal(ds.x, [[1.0, 2.0], [3.0, 4.0], [5.0, 6.0]])
        assert ds.y_utility.tolist() == [0, 1, 0]
        assert ds.y_privacy.tolist() == [0, 1, 0]
        assert ds.utility_classes == ("walk", "run")
        assert ds.privacy_classes == ("alice", "bob")

    def test_wide_har_shaped_file(self, tmp_path, rng):
        n_features = 561
        header = ",".join([f"f{i}" for i in range(n_features)] + ["activity", "subject"])
        rows = []
        for r in range(3):
            vals = rng.standard_normal(n_features)
            rows.append(",".join([f"{v:.6f}" for v in vals] + [str(r % 2), str(r)]))
        path = write(tmp_path / "har.csv", header + "\n" + "\n".join(rows) + "\n")
        ds = load_dataset(path, SCHEMA)
        assert ds.m == 561 and ds.n == 3

    def test_explicit_feature_subset(self, tmp_path):
        path = write(
            tmp_path / "t.csv",
            "a,b,c,activity,subject\n1,2,3,x,y\n4,5,6,x,y\n",
        )
        schema = DatasetSchema(
            utility_column="activity", privacy_column="subject", feature_columns=["c", "a"]
        )
        ds = load_dataset(path, schema)
        assert ds.feature_names == ("c", "a")
        assert np.array_equal(ds.x, [[3.0, 1.0], [6.0, 4.0]])

    def test_missing_column(self, tmp_path):
        path = write(tmp_path / "t.csv", "f0,activity\n1,x\n")
        with pytest.raises(DataError, match="missing column 'subject'"):
            load_dataset(path, SCHEMA)

    def test_non_numeric_cell_reports_coordinates(self, tmp_path):
        path = write(
            tmp_path / "t.csv",
            "f0,f1,activity,subject\n1,2,x,y\n1,oops,x,y\n",
        )
        with pytest.raises(DataError, match="row 3, column 'f1'.*'oops'"):
            load_dataset(path, SCHEMA)

    def test_nan_cell_reports_coordinates(self, tmp_path):
        path = write(
            tmp_path / "t.csv", "f0,f1,activity,subject\nnan,2,x,y\n"
        )
        with pytest.raises(DataError, match="row 2, column 'f0'"):
            load_dataset(path, SCHEMA)

    def test_ragged_row_rejected(self, tmp_path):
        path = write(tmp_path / "t.csv", "f0,f1,activity,subject\n1,2,x\n")
        with pytest.raises(DataError, match="row 2 has 3 cells"):
            load_dataset(path, SCHEMA)

    def test_empty_file_rejected(self, tmp_path):
        path = write(tmp_path / "t.csv", "")
        with pytest.raises(DataError, match="empty"):
            load_dataset(path, SCHEMA)

    def test_quoted_cells(self, tmp_path):
        path = write(
            tmp_path / "t.csv",
            'f0,f1,activity,subject\n"1.5","2",walking, "a"\n"2",3,"run, fast",b\n',
        )
        ds = load_dataset(path, SCHEMA)
        assert ds.x[0, 0] == 1.5
        assert ds.utility_classes == ("walking", "run, fast")


class TestStandardize:
    def test_zero_mean_unit_variance(self, rng):
        x = rng.standard_normal((50, 4)) * 3 + 7
        out = standardize(x)
        assert np.allclose(out.mean(axis=0), 0, atol=1e-12)
        assert np.allclose(out.std(axis=0), 1, atol=1e-12)

    def test_constant_column_divides_by_one(self):
        x = np.column_stack([np.ones(5), np.arange(5.0)])
        out = standardize(x)
        assert np.allclose(out[:, 0], 0.0)
        assert np.all(np.isfinite(out))

    def test_test_rows_use_train_statistics(self, rng):
        train = rng.standard_normal((30, 3)) + 5
        test = rng.standard_normal((10, 3)) + 5
        tr, te = standardize(train, test)
        mean, std = train.mean(axis=0), train.std(axis=0)
        assert np.allclose(te, (test - mean) / std)


class TestSplitIndices:
    def test_stratified_counts(self):
        labels = np.repeat([0, 1, 2], [40, 40, 20])
        tr, te = split_indices(labels, seed=3, test_fraction=0.25)
        assert te.size == 25 and tr.size == 75
        # each class keeps roughly its share
        _, test_counts = np.unique(labels[te], return_counts=True)
        assert test_counts.tolist() == [10, 10, 5]
        assert np.intersect1d(tr, te).size == 0

    def test_deterministic(self):
        labels = np.repeat([0, 1], 25)
        a = split_indices(labels, seed=9, test_size=10)
        b = split_indices(labels, seed=9, test_size=10)
        assert np.array_equal(a[0], b[0]) and np.array_equal(a[1], b[1])

    def test_never_empties_a_class(self):
        labels = np.array([0] * 48 + [1, 1])
        tr, te = split_indices(labels, seed=0, test_fraction=0.4)
        assert np.sum(labels[tr] == 1) >= 1

    def test_requires_exactly_one_size_spec(self):
        with pytest.raises(DataError, match="exactly one"):
            split_indices(np.array([0, 1]), seed=0)

    def test_fraction_bounds(self):
        with pytest.raises(DataError, match="test_fraction"):
            split_indices(np.zeros(10, dtype=int), seed=0, test_fraction=1.5)


class TestMergeLabelSpaces:
    def _pair(self, tmp_path):
        train = write(
            tmp_path / "train.csv",
            "f0,activity,subject\n1,walk,bob\n2,run,alice\n3,walk,alice\n",
        )
        test = write(
            tmp_path / "test.csv",
            "f0,activity,subject\n4,run,carol\n5,walk,bob\n",
        )
        return load_dataset(train, SCHEMA), load_dataset(test, SCHEMA)

    def test_test_labels_remapped_to_train_ids(self, tmp_path):
        train, test = self._pair(tmp_path)
        train, test = merge_label_spaces(train, test)
        assert train.utility_classes == ("walk", "run")
        assert test.y_utility.tolist() == [1, 0]
        # carol is unseen in training and gets a fresh id above the range
        assert test.y_privacy.tolist() == [2, 0]
        assert test.privacy_classes == ("bob", "alice", "carol")

    def test_feature_disagreement_rejected(self, tmp_path):
        train, _ = self._pair(tmp_path)
        other = write(tmp_path / "bad.csv", "g0,activity,subject\n1,walk,bob\n")
        bad = load_dataset(other, SCHEMA)
        with pytest.raises(DataError, match="feature columns"):
            merge_label_spaces(train, bad)

"""CSV ingestion with dual labels, feature standardization, seeded splits."""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass

import numpy as np

from .errors import DataError


@dataclass(frozen=True)
class DatasetSchema:
    """Column layout of an input CSV: which columns are features and labels."""

    utility_column: str
    privacy_column: str
    feature_columns: list[str] | None = None  # None = every non-label column


@dataclass(frozen=True)
class Dataset:
    """Feature rows with two aligned label vectors.

    Labels are contiguous ids in first-appearance order; the original label
    values are kept for reporting.
    """

    x: np.ndarray  # (N, M)
    y_utility: np.ndarray  # (N,) ints in [0, L_u)
    y_privacy: np.ndarray  # (N,) ints in [0, L_p)
    feature_names: tuple[str, ...]
    utility_classes: tuple[str, ...]
    privacy_classes: tuple[str, ...]

    @property
    def n(self) -> int:
        return self.x.shape[0]

    @property
    def m(self) -> int:
        return self.x.shape[1]


class _LabelMapper:
    def __init__(self):
        self.ids: dict[str, int] = {}

    def __call__(self, value: str) -> int:
        if value not in self.ids:
            self.ids[value] = len(self.ids)
        return self.ids[value]

    @property
    def classes(self) -> tuple[str, ...]:
        return tuple(self.ids)


def load_dataset(path: str, schema: DatasetSchema) -> Dataset:
    """Parse a headered CSV into features plus utility/privacy labels.

    Every feature cell must be a finite number; failures are reported with
    their row number (1-based, counting the header) and column name.
    """
    try:
        fh = open(path, newline="", encoding="utf-8")
    except OSError as exc:
        raise DataError(f"cannot open dataset {path}: {exc}") from exc
    with fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise DataError(f"{path} is empty") from None
        col_index = {name: i for i, name in enumerate(header)}
        for col in (schema.utility_column, schema.privacy_column):
            if col not in col_index:
                raise DataError(f"{path}: missing column {col!r}")
        if schema.feature_columns is None:
            feature_names = [
                name
                for name in header
                if name not in (schema.utility_column, schema.privacy_column)
            ]
        else:
            for col in schema.feature_columns:
                if col not in col_index:
                    raise DataError(f"{path}: missing column {col!r}")
            feature_names = list(schema.feature_columns)
        if not feature_names:
            raise DataError(f"{path}: no feature columns")
        feat_idx = [col_index[name] for name in feature_names]
        u_idx = col_index[schema.utility_column]
        p_idx = col_index[schema.privacy_column]

        u_map, p_map = _LabelMapper(), _LabelMapper()
        rows, y_u, y_p = [], [], []
        for lineno, row in enumerate(reader, start=2):
            if len(row) != len(header):
                raise DataError(
                    f"{path}: row {lineno} has {len(row)} cells, expected {len(header)}"
                )
            values = np.empty(len(feat_idx))
            for k, (name, idx) in enumerate(zip(feature_names, feat_idx)):
                cell = row[idx]
                try:
                    val = float(cell)
                except ValueError:
                    raise DataError(
                        f"{path}: row {lineno}, column {name!r}: "
                        f"non-numeric value {cell!r}"
                    ) from None
                if math.isnan(val) or math.isinf(val):
                    raise DataError(
                        f"{path}: row {lineno}, column {name!r}: non-finite value {cell!r}"
                    )
                values[k] = val
            rows.append(values)
            y_u.append(u_map(row[u_idx]))
            y_p.append(p_map(row[p_idx]))
    if not rows:
        raise DataError(f"{path}: no data rows")
    return Dataset(
        x=np.array(rows),
        y_utility=np.array(y_u, dtype=int),
        y_privacy=np.array(y_p, dtype=int),
        feature_names=tuple(feature_names),
        utility_classes=u_map.classes,
        privacy_classes=p_map.classes,
    )


def merge_label_spaces(train: Dataset, test: Dataset) -> tuple[Dataset, Dataset]:
    """Remap a separately loaded test set onto the training label ids.

    Test labels never seen in training get fresh ids above the training range
    (they can only ever count as errors).
    """

    def remap(test_classes, train_classes, y):
        ids = {c: i for i, c in enumerate(train_classes)}
        extra = [c for c in test_classes if c not in ids]
        for c in extra:
            ids[c] = len(ids)
        lookup = np.array([ids[c] for c in test_classes])
        return lookup[y], tuple(list(train_classes) + extra)

    if test.feature_names != train.feature_names:
        raise DataError("train and test files disagree on feature columns")
    y_u, u_classes = remap(test.utility_classes, train.utility_classes, test.y_utility)
    y_p, p_classes = remap(test.privacy_classes, train.privacy_classes, test.y_privacy)
    remapped = Dataset(
        x=test.x,
        y_utility=y_u,
        y_privacy=y_p,
        feature_names=test.feature_names,
        utility_classes=u_classes,
        privacy_classes=p_classes,
    )
    return train, remapped


def standardize(train_x: np.ndarray, *others: np.ndarray):
    """Zero-mean unit-variance scaling fit on the training rows.

    Constant columns divide by 1 instead of 0.  Returns the scaled training
    matrix followed by every other matrix scaled with the same statistics.
    """
    train_x = np.asarray(train_x, dtype=float)
    mean = train_x.mean(axis=0)
    std = train_x.std(axis=0)
    std = np.where(std <= 1e-12, 1.0, std)
    out = [(train_x - mean) / std]
    for arr in others:
        out.append((np.asarray(arr, dtype=float) - mean) / std)
    return out[0] if not others else tuple(out)


def split_indices(
    labels: np.ndarray,
    seed: int,
    test_fraction: float | None = None,
    test_size: int | None = None,
):
    """Deterministic stratified train/test index split.

    Stratification follows ``labels`` (each class contributes its proportional
    share of the test set) so no class disappears from training.
    """
    labels = np.asarray(labels)
    n = labels.size
    if (test_fraction is None) == (test_size is None):
        raise DataError("specify exactly one of test_fraction / test_size")
    if test_fraction is not None:
        if not 0 < test_fraction < 1:
            raise DataError(f"test_fraction must be in (0, 1), got {test_fraction}")
        test_size = int(round(test_fraction * n))
    if not 0 < test_size < n:
        raise DataError(f"test_size {test_size} out of range for {n} samples")
    rng = np.random.default_rng(seed)
    classes, counts = np.unique(labels, return_counts=True)
    # largest-remainder allocation of the test budget across classes
    quota = counts * test_size / n
    take = np.floor(quota).astype(int)
    remainder = quota - take
    short = test_size - take.sum()
    for idx in np.argsort(-remainder, kind="stable")[:short]:
        take[idx] += 1
    take = np.minimum(take, counts - 1)  # never empty a class on the train side
    test_idx = []
    for cls, k in zip(classes, take):
        members = np.flatnonzero(labels == cls)
        members = members[rng.permutation(members.size)]
        test_idx.append(members[:k])
    test_idx = np.sort(np.concatenate(test_idx))
    mask = np.ones(n, dtype=bool)
    mask[test_idx] = False
    return np.flatnonzero(mask), test_idx

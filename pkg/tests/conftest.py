import csv

import numpy as np
import pytest


def make_psd(rng: np.random.Generator, n: int, rank: int | None = None) -> np.ndarray:
    """Random symmetric PSD matrix with controllable rank."""
    r = n if rank is None else rank
    b = rng.standard_normal((n, r))
    return b @ b.T


def make_blobs(
    rng: np.random.Generator,
    n_per_class: int,
    n_features: int,
    n_classes: int,
    separation: float = 4.0,
    noise: float = 1.0,
):
    """Gaussian class blobs with labels 0..n_classes-1, samples as rows."""
    centers = rng.standard_normal((n_classes, n_features)) * separation
    xs, ys = [], []
    for c in range(n_classes):
        xs.append(centers[c] + noise * rng.standard_normal((n_per_class, n_features)))
        ys.append(np.full(n_per_class, c, dtype=int))
    x = np.vstack(xs)
    y = np.concatenate(ys)
    perm = rng.permutation(len(y))
    return x[perm], y[perm]


def make_dual_blobs(
    rng: np.random.Generator,
    n: int,
    n_features: int,
    n_utility: int,
    n_privacy: int,
    utility_dims: slice,
    privacy_dims: slice,
    separation: float = 4.0,
    noise: float = 1.0,
):
    """Samples with two independent labels living in disjoint feature blocks.

    The utility signal occupies ``utility_dims``, the privacy signal
    ``privacy_dims``; everything else is pure noise.
    """
    u_centers = rng.standard_normal((n_utility, utility_dims.stop - utility_dims.start))
    p_centers = rng.standard_normal((n_privacy, privacy_dims.stop - privacy_dims.start))
    y_u = rng.integers(0, n_utility, size=n)
    y_p = rng.integers(0, n_privacy, size=n)
    # guarantee every class appears
    y_u[:n_utility] = np.arange(n_utility)
    y_p[:n_privacy] = np.arange(n_privacy)
    x = noise * rng.standard_normal((n, n_features))
    x[:, utility_dims] += separation * u_centers[y_u]
    x[:, privacy_dims] += separation * p_centers[y_p]
    return x, y_u, y_p


def write_dual_csv(path, x, y_u, y_p, utility="activity", privacy="subject"):
    """Dump features plus two label columns as a headered CSV."""
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow([f"f{i}" for i in range(x.shape[1])] + [utility, privacy])
        for row, u, p in zip(x, y_u, y_p):
            writer.writerow([repr(float(v)) for v in row] + [str(u), str(p)])


@pytest.fixture
def rng() -> np.random.Generator:
    return np.random.default_rng(20260810)

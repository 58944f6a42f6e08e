"""Discriminant component analysis in feature space and in kernel space.

Feature space works on between/within/total scatter matrices; kernel space
works on the centered Gram and its class-structured counterparts, linked by
the fact that every projection direction is a linear combination of training
embeddings.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import numerics
from .errors import NumericalError
from .kernels import CENTERED, NORMALIZED, GramMatrix

#: Denominator / numerator ridge defaults shared by all kernels in a run.
DEFAULT_RHO = 10.0
DEFAULT_RHO_PRIME = 1e-4

#: Relative jitter applied to the kernel-space pencil denominator, which is
#: PSD with an exact null direction (the all-ones vector) by construction.
KDCA_JITTER = 1e-10

INTRINSIC = "intrinsic"
EMPIRICAL = "empirical"


@dataclass(frozen=True)
class ScatterTriple:
    """Between/within/total scatter of labelled feature rows."""

    between: np.ndarray  # (M, M)
    within: np.ndarray  # (M, M)
    total: np.ndarray  # (M, M), centered X'X; equals between + within
    class_counts: np.ndarray  # (L,)
    class_means: np.ndarray  # (L, M)
    grand_mean: np.ndarray  # (M,)


@dataclass(frozen=True)
class EmpiricalScatter:
    """Kernel-space analogue of the scatter triple over a centered Gram."""

    gram: np.ndarray  # (N, N) centered Gram
    between: np.ndarray  # (N, N)
    within: np.ndarray  # (N, N)
    class_counts: np.ndarray  # (L,)
    class_means: np.ndarray  # (L, N) per-class means of centered Gram columns
    grand_mean: np.ndarray  # (N,) grand mean of centered Gram columns (~0)


@dataclass(frozen=True)
class DcaModel:
    """Fitted discriminant projection.

    ``space`` selects the projection semantics: feature rows through an
    (M, Q) matrix after grand-mean centering, or centered kernel columns
    through an (N, Q) coefficient matrix.
    """

    space: str
    projection: np.ndarray
    eigenvalues: np.ndarray  # (Q,), descending
    rho: float
    rho_prime: float
    q: int
    n_classes: int
    train_mean: np.ndarray | None = None  # feature grand mean (intrinsic only)


def _class_indices(y: np.ndarray, n: int) -> list[np.ndarray]:
    y = np.asarray(y)
    if y.shape != (n,):
        raise NumericalError(f"labels have shape {y.shape}, expected ({n},)")
    if y.size == 0:
        raise NumericalError("empty label vector")
    n_classes = int(y.max()) + 1
    if y.min() < 0:
        raise NumericalError("labels must be non-negative class ids")
    groups = [np.flatnonzero(y == c) for c in range(n_classes)]
    for c, idx in enumerate(groups):
        if idx.size == 0:
            raise NumericalError(f"class {c} has no samples")
    return groups


def scatter(x: np.ndarray, y: np.ndarray) -> ScatterTriple:
    """Between/within/total scatter matrices of feature rows ``x`` labelled ``y``."""
    x = np.asarray(x, dtype=float)
    if x.ndim != 2:
        raise NumericalError(f"expected an N x M feature matrix, got shape {x.shape}")
    groups = _class_indices(y, x.shape[0])
    mu = x.mean(axis=0)
    m = x.shape[1]
    between = np.zeros((m, m))
    within = np.zeros((m, m))
    counts, means = [], []
    for idx in groups:
        xc = x[idx]
        mu_c = xc.mean(axis=0)
        diff = mu_c - mu
        between += idx.size * np.outer(diff, diff)
        dev = xc - mu_c
        within += dev.T @ dev
        counts.append(idx.size)
        means.append(mu_c)
    xbar = x - mu
    total = xbar.T @ xbar
    return ScatterTriple(
        between=0.5 * (between + between.T),
        within=0.5 * (within + within.T),
        total=0.5 * (total + total.T),
        class_counts=np.array(counts),
        class_means=np.array(means),
        grand_mean=mu,
    )


def between_class_gram(k_centered: np.ndarray, y: np.ndarray) -> np.ndarray:
    """Between-class matrix of a centered Gram: sum_c N_c m_c m_c' over class
    means m_c of the centered columns (grand-mean corrected)."""
    k = np.asarray(k_centered, dtype=float)
    groups = _class_indices(y, k.shape[0])
    grand = k.mean(axis=1)
    out = np.zeros_like(k)
    for idx in groups:
        m_c = k[:, idx].mean(axis=1) - grand
        out += idx.size * np.outer(m_c, m_c)
    return 0.5 * (out + out.T)


def empirical_scatter(g: GramMatrix, y: np.ndarray) -> EmpiricalScatter:
    """Class-structured decomposition of a centered Gram.

    The between part uses per-class means of the centered columns; the within
    part uses deviations from those means, so gram @ gram = between + within.
    """
    if g.state not in (CENTERED, NORMALIZED):
        raise NumericalError(f"empirical scatter expects a centered Gram, got {g.state}")
    k = g.values
    groups = _class_indices(y, g.n)
    grand = k.mean(axis=1)
    between = np.zeros_like(k)
    within = np.zeros_like(k)
    counts, means = [], []
    for idx in groups:
        m_c = k[:, idx].mean(axis=1)
        diff = m_c - grand
        between += idx.size * np.outer(diff, diff)
        dev = k[:, idx] - m_c[:, None]
        within += dev @ dev.T
        counts.append(idx.size)
        means.append(m_c)
    return EmpiricalScatter(
        gram=k,
        between=0.5 * (between + between.T),
        within=0.5 * (within + within.T),
        class_counts=np.array(counts),
        class_means=np.array(means),
        grand_mean=grand,
    )


def fit_dca(
    x: np.ndarray,
    y: np.ndarray,
    q: int,
    rho: float = DEFAULT_RHO,
    rho_prime: float = DEFAULT_RHO_PRIME,
) -> DcaModel:
    """Feature-space discriminant projection onto the top q directions.

    Solves the pencil (between + rho' I, total + rho I); the returned columns
    satisfy W' (total + rho I) W = I.
    """
    tri = scatter(x, y)
    m = tri.total.shape[0]
    if not 1 <= q <= m:
        raise NumericalError(f"q={q} out of range for feature dimension {m}")
    eye = np.eye(m)
    pair = numerics.generalized_eig(
        tri.between + rho_prime * eye,
        tri.total + rho * eye,
        q,
        h_name="total scatter + rho*I",
    )
    return DcaModel(
        space=INTRINSIC,
        projection=pair.vectors,
        eigenvalues=pair.values,
        rho=rho,
        rho_prime=rho_prime,
        q=q,
        n_classes=len(tri.class_counts),
        train_mean=tri.grand_mean,
    )


def fit_kdca(
    g: GramMatrix,
    y: np.ndarray,
    q: int,
    rho: float = DEFAULT_RHO,
    rho_prime: float = DEFAULT_RHO_PRIME,
) -> DcaModel:
    """Kernel-space discriminant projection with q coefficient columns.

    Solves the pencil (between + rho' K, K^2 + rho K) over a centered Gram K.
    The denominator is only PSD (K annihilates the all-ones vector), so a
    relative jitter of 1e-10 * trace / N is added up front.
    """
    emp = empirical_scatter(g, y)
    n = g.n
    if not 1 <= q <= n:
        raise NumericalError(f"q={q} out of range for {n} training samples")
    k = emp.gram
    denom = k @ k + rho * k
    denom = 0.5 * (denom + denom.T)
    denom += (KDCA_JITTER * max(np.trace(denom), 0.0) / n) * np.eye(n)
    pair = numerics.generalized_eig(
        emp.between + rho_prime * k,
        denom,
        q,
        h_name="centered Gram pencil denominator (K^2 + rho*K)",
    )
    return DcaModel(
        space=EMPIRICAL,
        projection=pair.vectors,
        eigenvalues=pair.values,
        rho=rho,
        rho_prime=rho_prime,
        q=q,
        n_classes=len(emp.class_counts),
    )


def project(model: DcaModel, data: np.ndarray) -> np.ndarray:
    """Reduce samples to q discriminant coordinates.

    Intrinsic models take raw feature rows (centered internally with the
    training mean); empirical models take centered kernel columns against the
    training set, shaped (N_train, n_samples).  Returns (n_samples, q).
    """
    data = np.asarray(data, dtype=float)
    if data.ndim != 2:
        raise NumericalError(f"expected a 2-d array, got shape {data.shape}")
    w = model.projection
    if model.space == INTRINSIC:
        if data.shape[1] != w.shape[0]:
            raise NumericalError(
                f"feature dimension {data.shape[1]} does not match projection rows {w.shape[0]}"
            )
        return (data - model.train_mean) @ w
    if data.shape[0] != w.shape[0]:
        raise NumericalError(
            f"kernel columns have {data.shape[0]} rows, expected {w.shape[0]}"
        )
    return data.T @ w

"""Kernel evaluation, Gram construction, empirical centering and normalization.

Samples are rows (N x M).  Centering keeps the raw row/grand means around so
out-of-sample kernel columns can be centered consistently with the training
Gram.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np
from scipy.spatial.distance import cdist

from .errors import NumericalError

KERNEL_KINDS = ("linear", "polynomial", "rbf", "laplacian", "sigmoid")

RAW = "raw"
CENTERED = "centered"
NORMALIZED = "centered+normalized"


@dataclass(frozen=True)
class KernelSpec:
    """One kernel function: kind plus its shape parameters.

    gamma is ignored for linear; degree applies to polynomial only; coef0 to
    polynomial and sigmoid.
    """

    kind: str
    gamma: float = 1.0
    degree: int = 3
    coef0: float = 0.0

    def __post_init__(self):
        if self.kind not in KERNEL_KINDS:
            raise NumericalError(
                f"unknown kernel kind {self.kind!r}; expected one of {KERNEL_KINDS}"
            )
        if self.kind != "linear" and self.gamma <= 0:
            raise NumericalError(f"gamma must be positive, got {self.gamma}")
        if self.kind == "polynomial" and self.degree < 1:
            raise NumericalError(f"degree must be >= 1, got {self.degree}")

    def label(self) -> str:
        """Short human-readable tag used in reports and figures."""
        if self.kind == "linear":
            return "linear"
        parts = [f"g={self.gamma:g}"]
        if self.kind == "polynomial":
            parts += [f"p={self.degree}", f"c0={self.coef0:g}"]
        elif self.kind == "sigmoid":
            parts.append(f"c0={self.coef0:g}")
        return f"{self.kind}({', '.join(parts)})"


@dataclass(frozen=True)
class CenteringStats:
    """Raw-Gram statistics needed to center out-of-sample kernel columns."""

    row_means: np.ndarray  # (N,) means of the raw training Gram rows
    grand_mean: float


@dataclass(frozen=True)
class GramMatrix:
    """N x N kernel matrix tagged with its centering/normalization state."""

    values: np.ndarray
    state: str = RAW
    stats: CenteringStats | None = field(default=None, compare=False)

    def __post_init__(self):
        v = self.values
        if v.ndim != 2 or v.shape[0] != v.shape[1]:
            raise NumericalError(f"Gram matrix must be square, got shape {v.shape}")
        v.setflags(write=False)

    @property
    def n(self) -> int:
        return self.values.shape[0]


def eval_kernel(spec: KernelSpec, x: np.ndarray, y: np.ndarray) -> float:
    """Kernel value between two feature vectors."""
    x = np.asarray(x, dtype=float).ravel()
    y = np.asarray(y, dtype=float).ravel()
    if x.shape != y.shape:
        raise NumericalError(f"vector dimensions differ: {x.shape} vs {y.shape}")
    if spec.kind == "linear":
        return float(x @ y)
    if spec.kind == "polynomial":
        return float((spec.gamma * (x @ y) + spec.coef0) ** spec.degree)
    if spec.kind == "rbf":
        d = x - y
        return float(np.exp(-spec.gamma * (d @ d)))
    if spec.kind == "laplacian":
        return float(np.exp(-spec.gamma * np.abs(x - y).sum()))
    return float(np.tanh(spec.gamma * (x @ y) + spec.coef0))


def _pairwise(spec: KernelSpec, x: np.ndarray, z: np.ndarray) -> np.ndarray:
    if spec.kind == "linear":
        return x @ z.T
    if spec.kind == "polynomial":
        return (spec.gamma * (x @ z.T) + spec.coef0) ** spec.degree
    if spec.kind == "rbf":
        return np.exp(-spec.gamma * cdist(x, z, "sqeuclidean"))
    if spec.kind == "laplacian":
        return np.exp(-spec.gamma * cdist(x, z, "cityblock"))
    return np.tanh(spec.gamma * (x @ z.T) + spec.coef0)


def gram(spec: KernelSpec, x: np.ndarray) -> GramMatrix:
    """Raw Gram matrix over the rows of ``x``, exactly symmetric by mirroring."""
    x = np.asarray(x, dtype=float)
    if x.ndim != 2 or x.shape[0] < 2:
        raise NumericalError(f"need an (N>=2) x M feature matrix, got shape {x.shape}")
    k = _pairwise(spec, x, x)
    k = np.triu(k) + np.triu(k, 1).T
    return GramMatrix(values=k, state=RAW)


def cross_gram(spec: KernelSpec, x_train: np.ndarray, x_test: np.ndarray) -> np.ndarray:
    """Raw N_train x N_test kernel block between training rows and test rows."""
    x_train = np.asarray(x_train, dtype=float)
    x_test = np.asarray(x_test, dtype=float)
    if x_train.ndim != 2 or x_test.ndim != 2 or x_train.shape[1] != x_test.shape[1]:
        raise NumericalError(
            f"feature dimensions differ: {x_train.shape} vs {x_test.shape}"
        )
    return _pairwise(spec, x_train, x_test)


def center_gram(g: GramMatrix) -> GramMatrix:
    """Double-centered Gram via row/grand mean subtraction.

    Equivalent to sandwiching with I - (1/N) 1 1' on both sides but O(N^2);
    the raw row means and grand mean are kept for out-of-sample centering.
    """
    if g.state != RAW:
        raise NumericalError(f"Gram is already {g.state}; centering applies to raw only")
    k = g.values
    row_means = k.mean(axis=1)
    grand = float(row_means.mean())
    centered = k - row_means[:, None] - row_means[None, :] + grand
    centered = 0.5 * (centered + centered.T)
    return GramMatrix(
        values=centered,
        state=CENTERED,
        stats=CenteringStats(row_means=row_means.copy(), grand_mean=grand),
    )


def center_cross(k_cross: np.ndarray, stats: CenteringStats) -> np.ndarray:
    """Center raw out-of-sample kernel columns against the training Gram.

    Column j maps to k_j - mean(k_j) - row_means + grand_mean, so a training
    point presented as a test point reproduces its centered-Gram column.
    """
    if stats is None:
        raise NumericalError("centering stats missing; center the training Gram first")
    k_cross = np.asarray(k_cross, dtype=float)
    if k_cross.ndim != 2 or k_cross.shape[0] != stats.row_means.shape[0]:
        raise NumericalError(
            f"cross-kernel has {k_cross.shape[0] if k_cross.ndim == 2 else '?'} rows,"
            f" expected {stats.row_means.shape[0]}"
        )
    col_means = k_cross.mean(axis=0)
    return k_cross - col_means[None, :] - stats.row_means[:, None] + stats.grand_mean


def normalize_trace(g: GramMatrix) -> GramMatrix:
    """Scale a centered Gram so its trace is exactly one."""
    if g.state != CENTERED:
        raise NumericalError(f"trace normalization expects a centered Gram, got {g.state}")
    t = float(np.trace(g.values))
    if t <= 1e-14 * g.n:
        raise NumericalError(f"degenerate kernel: trace {t:.3e} is not positive")
    return replace(g, values=g.values / t, state=NORMALIZED)

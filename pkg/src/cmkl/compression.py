"""Rank-reduced kernel release built from kernel-space discriminant projections.

A compressed kernel is the centered Gram sandwiched through a low-rank
coefficient matrix; its rank is bounded by the number of projection columns,
which is the privacy lever of the whole pipeline.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import NumericalError
from .kernels import CENTERED, NORMALIZED, GramMatrix, KernelSpec


@dataclass(frozen=True)
class CompressiveKernel:
    """Lossy kernel release: K_hat = K A A' K for a centered Gram K.

    ``between`` carries the matching sandwich of the Gram's between-class
    matrix so weighting scores can be computed without re-deriving centering.
    ``projected`` caches K @ A, which both reproduces K_hat (= projected @
    projected.T) and maps centered out-of-sample columns into the release.
    ``scale`` is the trace divisor applied when ``normalized`` (1.0 otherwise).
    """

    k_hat: np.ndarray  # (N, N) symmetric PSD, rank <= q
    between: np.ndarray  # (N, N) compressed between-class counterpart
    coeffs: np.ndarray  # (N, Q) projection coefficients
    q: int
    spec: KernelSpec | None = None
    name: str | None = None
    normalized: bool = False
    scale: float = 1.0
    projected: np.ndarray = field(default=None, repr=False, compare=False)
    # (Q, Q) between-class core in coefficient space: between =
    # projected @ between_core @ projected.T; kept because ratio scores are
    # far better conditioned in this reduced space
    between_core: np.ndarray = field(default=None, repr=False, compare=False)

    def __post_init__(self):
        arrays = (self.k_hat, self.between, self.coeffs, self.projected,
                  self.between_core)
        for arr in arrays:
            if arr is not None:
                arr.setflags(write=False)

    @property
    def n(self) -> int:
        return self.k_hat.shape[0]

    def label(self) -> str:
        if self.name:
            return self.name
        return self.spec.label() if self.spec else f"kernel(q={self.q})"


@dataclass(frozen=True)
class RankBudget:
    """Outcome of the released-rank check: total projection rank vs feature dim."""

    total_rank: int
    feature_dim: int
    passed: bool
    margin: int  # feature_dim - total_rank; positive when compliant


def compress(
    g: GramMatrix,
    coeffs: np.ndarray,
    between: np.ndarray,
    spec: KernelSpec | None = None,
    name: str | None = None,
) -> CompressiveKernel:
    """Sandwich a centered Gram and its between-class matrix through ``coeffs``.

    ``coeffs`` must come from a kernel-space discriminant fit on this same
    Gram; ``between`` is that Gram's between-class matrix.  The release is
    PSD by construction (k_hat = (K A)(K A)') for every kernel kind.
    """
    if g.state not in (CENTERED, NORMALIZED):
        raise NumericalError(f"compression expects a centered Gram, got state {g.state}")
    coeffs = np.asarray(coeffs, dtype=float)
    if coeffs.ndim != 2 or coeffs.shape[0] != g.n:
        raise NumericalError(
            f"coefficients shaped {coeffs.shape} do not match Gram of size {g.n}"
        )
    between = np.asarray(between, dtype=float)
    if between.shape != (g.n, g.n):
        raise NumericalError(
            f"between-class matrix shaped {between.shape}, expected {(g.n, g.n)}"
        )
    projected = g.values @ coeffs  # (N, Q)
    k_hat = projected @ projected.T
    core = coeffs.T @ between @ coeffs  # (Q, Q)
    core = 0.5 * (core + core.T)
    k_hat_b = projected @ core @ projected.T
    return CompressiveKernel(
        k_hat=0.5 * (k_hat + k_hat.T),
        between=0.5 * (k_hat_b + k_hat_b.T),
        coeffs=coeffs.copy(),
        q=coeffs.shape[1],
        spec=spec,
        name=name,
        projected=projected,
        between_core=core,
    )


def normalize_compressive(kernel: CompressiveKernel) -> CompressiveKernel:
    """Scale the release to unit trace.

    The between-class counterpart is divided by the squared trace so it stays
    exactly the between-class matrix of the normalized release, and the same
    trace divisor is applied to any cross columns built later.
    """
    if kernel.normalized:
        return kernel
    t = float(np.trace(kernel.k_hat))
    if t <= 1e-14 * kernel.n:
        raise NumericalError(
            f"degenerate compressed kernel {kernel.label()}: trace {t:.3e}"
        )
    return CompressiveKernel(
        k_hat=kernel.k_hat / t,
        between=kernel.between / (t * t),
        coeffs=kernel.coeffs,
        q=kernel.q,
        spec=kernel.spec,
        name=kernel.name,
        normalized=True,
        scale=t,
        projected=kernel.projected / np.sqrt(t),
        between_core=kernel.between_core / t,
    )


def compress_cross(kernel: CompressiveKernel, centered_cols: np.ndarray) -> np.ndarray:
    """Compressed train-vs-test block from centered out-of-sample columns.

    Columns must be centered with the training Gram's statistics;
    normalization applied to the release divides these columns by the same
    trace, so a training point presented as a test point reproduces the
    matching column of ``k_hat``.
    """
    cols = np.asarray(centered_cols, dtype=float)
    if cols.ndim != 2 or cols.shape[0] != kernel.n:
        raise NumericalError(
            f"centered columns shaped {cols.shape} do not match release size {kernel.n}"
        )
    out = kernel.projected @ (kernel.coeffs.T @ cols)
    if kernel.normalized:
        out = out / np.sqrt(kernel.scale)
    return out


def rank_budget_check(qs: list[int], feature_dim: int) -> RankBudget:
    """Released-rank compliance: the sum of per-kernel ranks must stay below
    the raw feature dimension."""
    total = int(sum(qs))
    return RankBudget(
        total_rank=total,
        feature_dim=int(feature_dim),
        passed=total < feature_dim,
        margin=int(feature_dim) - total,
    )

"""Kernel weighting strategies and the weighted combination of releases.

Weights are non-negative; the data-driven strategies return unit-l2 vectors.
Ratio-style scores (signal-to-noise, utility-to-privacy) are evaluated through
the symmetric congruent form of the printed matrix ratio, which is PSD and
well defined for singular denominators; the literal non-symmetric product is
available behind ``form="product"`` for comparison only.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import numerics
from .compression import CompressiveKernel
from .dca import between_class_gram
from .errors import NumericalError
from .kernels import GramMatrix

CONGRUENT = "congruent"
PRODUCT = "product"

STRATEGIES = ("uniform", "snr", "alignment", "upr_qp", "single")
UNIT_NORM_STRATEGIES = ("snr", "alignment", "upr_qp")


@dataclass(frozen=True)
class WeightVector:
    """Non-negative kernel weights tagged with the strategy that produced them."""

    mu: np.ndarray  # (P,)
    strategy: str
    rho: float | None = None  # ridge used by the strategy, if any

    def __post_init__(self):
        mu = np.asarray(self.mu, dtype=float)
        object.__setattr__(self, "mu", mu)
        if self.strategy not in STRATEGIES:
            raise NumericalError(
                f"unknown weight strategy {self.strategy!r}; expected one of {STRATEGIES}"
            )
        if mu.ndim != 1 or mu.size == 0:
            raise NumericalError(f"weights must be a non-empty vector, got shape {mu.shape}")
        if np.any(mu < 0):
            raise NumericalError("weights must be non-negative")
        if self.strategy == "uniform" and not np.allclose(mu, 1.0 / mu.size, atol=1e-12):
            raise NumericalError("uniform weights must all equal 1/P")
        if self.strategy in UNIT_NORM_STRATEGIES:
            norm = np.linalg.norm(mu)
            if abs(norm - 1.0) > 1e-12:
                raise NumericalError(
                    f"{self.strategy} weights must have unit l2 norm, got {norm!r}"
                )
        mu.setflags(write=False)

    @property
    def p(self) -> int:
        return self.mu.size


@dataclass(frozen=True)
class MultiKernel:
    """Weighted sum of compressed releases, with an optional test-side block."""

    k_mu: np.ndarray  # (N, N)
    components: tuple[CompressiveKernel, ...]
    weights: WeightVector
    cross_mu: np.ndarray | None = None  # (N, N_test)

    def __post_init__(self):
        self.k_mu.setflags(write=False)
        if self.cross_mu is not None:
            self.cross_mu.setflags(write=False)

    @property
    def total_rank_budget(self) -> int:
        return int(sum(c.q for c in self.components))


def _as_centered_array(k) -> np.ndarray:
    if isinstance(k, GramMatrix):
        if k.state == "raw":
            raise NumericalError("expected a centered Gram, got a raw one")
        return k.values
    if isinstance(k, CompressiveKernel):
        return k.k_hat
    return numerics.as_symmetric(k, "kernel matrix")


def _ratio_trace_norm(numer: np.ndarray, denom: np.ndarray, form: str) -> float:
    if form == CONGRUENT:
        root = numerics.inv_sqrt_psd(denom)
        mid = root @ numer @ root
        return numerics.trace_norm(0.5 * (mid + mid.T))
    if form == PRODUCT:
        return numerics.trace_norm(numerics.ridge_inverse(denom, ridge=0.0) @ numer)
    raise NumericalError(f"unknown evaluation form {form!r}")


def snr_eigenvalues(kernel: CompressiveKernel, rho_snr: float) -> np.ndarray:
    """Eigenvalues of the whitened between-class matrix of a release.

    These are the generalized eigenvalues of (between, k_hat^2 + rho k_hat),
    descending and padded with zeros to the release's rank budget.  They are
    evaluated in coefficient space, where the pencil reads (core, B'B + rho I)
    for the release factor B: the ridge acts additively there, so weak release
    directions cannot amplify rounding noise the way the N x N whitening
    would.  Values lie in [0, 1] up to rounding and at most L-1 are nonzero.
    """
    if rho_snr < 0:
        raise NumericalError(f"rho_snr must be non-negative, got {rho_snr}")
    b = kernel.projected
    c = b.T @ b
    c = 0.5 * (c + c.T)
    q = c.shape[0]
    # exact-rank factor of the between-class core: only its rank many
    # whitened singular values can ever be nonzero
    w, u = np.linalg.eigh(kernel.between_core)
    keep = w > 1e-12 * max(float(w.max(initial=0.0)), 0.0)
    vals = np.zeros(q)
    if np.any(keep):
        factor = u[:, keep] * np.sqrt(w[keep])
        root = numerics.inv_sqrt_psd(c + rho_snr * np.eye(q))
        sv = np.linalg.svd(root @ factor, compute_uv=False)
        k = min(sv.size, q)
        vals[:k] = (sv[:k]) ** 2
    return vals


def snr_score(kernel: CompressiveKernel, rho_snr: float, form: str = CONGRUENT) -> float:
    """Trace-norm of the ridge-whitened between-class matrix of a release."""
    if form == CONGRUENT:
        return float(snr_eigenvalues(kernel, rho_snr).sum())
    if rho_snr < 0:
        raise NumericalError(f"rho_snr must be non-negative, got {rho_snr}")
    k = kernel.k_hat
    denom = k @ k + rho_snr * k
    return _ratio_trace_norm(kernel.between, 0.5 * (denom + denom.T), form)


def upr_trace(k, y_u: np.ndarray, y_p: np.ndarray, rho_upr: float, form: str = CONGRUENT) -> float:
    """Utility-to-privacy trace score of a centered kernel matrix.

    Whitens the utility between-class matrix by the privacy between-class
    matrix ridged with the kernel itself; accepts a centered Gram, a release,
    or a plain centered symmetric array.
    """
    if rho_upr < 0:
        raise NumericalError(f"rho_upr must be non-negative, got {rho_upr}")
    k = _as_centered_array(k)
    numer = between_class_gram(k, y_u)
    denom = between_class_gram(k, y_p) + rho_upr * k
    return _ratio_trace_norm(numer, 0.5 * (denom + denom.T), form)


def weights_uniform(p: int) -> WeightVector:
    """Equal weights 1/P."""
    if p < 1:
        raise NumericalError(f"need at least one kernel, got P={p}")
    return WeightVector(mu=np.full(p, 1.0 / p), strategy="uniform")


def weights_snr(scores: np.ndarray, rho: float | None = None) -> WeightVector:
    """Unit-l2 weights proportional to per-kernel signal-to-noise scores."""
    scores = np.asarray(scores, dtype=float).ravel()
    if np.any(scores < 0):
        raise NumericalError("SNR scores must be non-negative")
    norm = np.linalg.norm(scores)
    if norm <= 0:
        raise NumericalError("all SNR scores are zero: no discriminant signal in any kernel")
    return WeightVector(mu=scores / norm, strategy="snr", rho=rho)


def class_indicator(y: np.ndarray) -> np.ndarray:
    """{0,1} indicator matrix (N, L) for contiguous class ids."""
    y = np.asarray(y)
    n_classes = int(y.max()) + 1
    out = np.zeros((y.size, n_classes))
    out[np.arange(y.size), y] = 1.0
    return out


def _label_alignment(k: np.ndarray, y: np.ndarray) -> float:
    """Frobenius inner product of a kernel with the class-indicator target."""
    ind = class_indicator(y)
    return float(np.einsum("nc,nm,mc->", ind, k, ind))


def weights_alignment(kernels, y_u: np.ndarray) -> WeightVector:
    """Weights maximizing alignment between the combination and the utility target.

    Solves the non-negative quadratic program with the Gram of the releases
    (Frobenius inner products) against their alignments with the class
    indicator target, then normalizes to unit l2.
    """
    mats = [_as_centered_array(k) for k in kernels]
    p = len(mats)
    if p < 2:
        raise NumericalError(f"alignment weighting needs at least 2 kernels, got {p}")
    m = np.empty((p, p))
    for i in range(p):
        for j in range(i, p):
            m[i, j] = m[j, i] = float(np.tensordot(mats[i], mats[j]))
    a = np.array([_label_alignment(k, y_u) for k in mats])
    v = numerics.nonneg_qp(m, a)
    norm = np.linalg.norm(v)
    if norm <= 0:
        raise NumericalError("alignment program returned zero weights (degenerate target)")
    return WeightVector(mu=v / norm, strategy="alignment")


def weights_upr_qp(kernels, y_u: np.ndarray, y_p: np.ndarray) -> WeightVector:
    """Weights maximizing the utility-to-privacy alignment ratio.

    Builds the per-kernel alignments with the utility and privacy targets and
    solves the rank-one non-negative quadratic program; the privacy alignments
    must be strictly positive for the program to be bounded.
    """
    mats = [_as_centered_array(k) for k in kernels]
    a_u = np.array([_label_alignment(k, y_u) for k in mats])
    a_p = np.array([_label_alignment(k, y_p) for k in mats])
    for idx, val in enumerate(a_p):
        if val <= 0:
            label = kernels[idx].label() if hasattr(kernels[idx], "label") else str(idx)
            raise NumericalError(
                f"privacy alignment of kernel {label} is {val:.3e} (must be "
                "positive; the ratio program would be unbounded)"
            )
    v = numerics.nonneg_qp(np.outer(a_p, a_p), a_u)
    norm = np.linalg.norm(v)
    if norm <= 0:
        raise NumericalError("utility alignments are all zero: degenerate ratio program")
    return WeightVector(mu=v / norm, strategy="upr_qp")


def weighted_sum(mats: list[np.ndarray], mu: np.ndarray) -> np.ndarray:
    """Deterministic index-order weighted sum of equally shaped matrices."""
    mu = np.asarray(mu, dtype=float).ravel()
    if len(mats) != mu.size:
        raise NumericalError(f"{len(mats)} matrices but {mu.size} weights")
    shape = mats[0].shape
    out = np.zeros(shape)
    for w, m in zip(mu, mats):
        if m.shape != shape:
            raise NumericalError(f"matrix shaped {m.shape} does not match {shape}")
        out += w * m
    return out


def combine_cross(cross_blocks: list[np.ndarray], weights: WeightVector) -> np.ndarray:
    """Weighted sum of train-vs-test blocks with the same weights as the
    training combination."""
    return weighted_sum(list(cross_blocks), weights.mu)


def combine(
    kernels,
    weights: WeightVector,
    cross_blocks: list[np.ndarray] | None = None,
) -> MultiKernel:
    """Weighted sum of normalized releases (and, optionally, their test blocks)."""
    kernels = tuple(kernels)
    if weights.p != len(kernels):
        raise NumericalError(f"{len(kernels)} kernels but {weights.p} weights")
    for k in kernels:
        if isinstance(k, CompressiveKernel) and not k.normalized:
            raise NumericalError(
                f"kernel {k.label()} is not trace-normalized; combine requires "
                "normalized releases"
            )
    mats = [_as_centered_array(k) for k in kernels]
    k_mu = weighted_sum(mats, weights.mu)
    cross = None
    if cross_blocks is not None:
        cross = combine_cross(cross_blocks, weights)
    return MultiKernel(
        k_mu=0.5 * (k_mu + k_mu.T),
        components=kernels,
        weights=weights,
        cross_mu=cross,
    )

"""Dense linear-algebra core shared by the kernel, projection and weighting modules.

Everything here is a pure function on immutable inputs: generalized
symmetric-definite eigensolving via Cholesky reduction, SVD-based trace norm,
ridge/pseudo inverses, numerical rank, and a small deterministic non-negative
quadratic program solver.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .errors import NumericalError

# Relative symmetry tolerance enforced when a matrix enters this module.
SYMMETRY_RTOL = 1e-12
# Default relative singular-value cutoff for pseudo-inverse and rank decisions.
PINV_RTOL = 1e-10
# Relative jitter added once when a Cholesky factorization fails.
CHOLESKY_JITTER = 1e-10


def as_symmetric(a: np.ndarray, name: str = "matrix") -> np.ndarray:
    """Validate that ``a`` is square and symmetric; return an exactly symmetric copy.

    Symmetry is checked entrywise against ``SYMMETRY_RTOL * max(1, |a_ij|)``;
    the returned matrix is ``(a + a.T) / 2`` so later algebra sees exact symmetry.
    """
    a = np.asarray(a, dtype=float)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise NumericalError(f"{name} must be square, got shape {a.shape}")
    gap = np.abs(a - a.T)
    tol = SYMMETRY_RTOL * np.maximum(1.0, np.abs(a))
    if not np.all(gap <= tol):
        worst = float(gap.max())
        raise NumericalError(f"{name} is not symmetric (max |a_ij - a_ji| = {worst:.3e})")
    return 0.5 * (a + a.T)


@dataclass(frozen=True)
class EigPair:
    """Top-k eigenpairs of a symmetric(-definite) problem, eigenvalues descending."""

    values: np.ndarray  # (k,)
    vectors: np.ndarray  # (dim, k), columns paired with values


def _fix_column_signs(vectors: np.ndarray) -> np.ndarray:
    """Flip eigenvector columns so the first non-negligible entry is positive."""
    out = vectors.copy()
    for col in range(out.shape[1]):
        v = out[:, col]
        peak = np.abs(v).max()
        if peak == 0.0:
            continue
        lead = np.flatnonzero(np.abs(v) > 1e-12 * peak)[0]
        if v[lead] < 0:
            out[:, col] = -v
    return out


def _cholesky_with_jitter(h: np.ndarray, name: str) -> np.ndarray:
    try:
        return np.linalg.cholesky(h)
    except np.linalg.LinAlgError:
        pass
    jitter = CHOLESKY_JITTER * np.trace(h) / h.shape[0]
    try:
        return np.linalg.cholesky(h + jitter * np.eye(h.shape[0]))
    except np.linalg.LinAlgError:
        raise NumericalError(
            f"{name} is not positive definite (Cholesky failed even after "
            f"jitter {jitter:.3e})"
        ) from None


def generalized_eig(
    g: np.ndarray, h: np.ndarray, k: int, h_name: str = "H"
) -> EigPair:
    """Top-k eigenpairs of the symmetric pencil (g, h) with h positive definite.

    Solved by Cholesky reduction h = L L^T followed by a symmetric
    eigendecomposition of L^-1 g L^-T.  Returned vectors are h-orthonormal
    (vectors.T @ h @ vectors = I) and sign-fixed so the first non-negligible
    coordinate of each is positive; eigenvalue ties keep solver order.
    """
    g = as_symmetric(g, "G")
    h = as_symmetric(h, h_name)
    if g.shape != h.shape:
        raise NumericalError(f"pencil matrices differ in shape: {g.shape} vs {h.shape}")
    dim = g.shape[0]
    if not 1 <= k <= dim:
        raise NumericalError(f"requested k={k} eigenpairs from a dim={dim} pencil")

    lo = _cholesky_with_jitter(h, h_name)
    # c = L^-1 g L^-T via two triangular solves
    y = scipy.linalg.solve_triangular(lo, g, lower=True, check_finite=False)
    c = scipy.linalg.solve_triangular(lo, y.T, lower=True, check_finite=False)
    c = 0.5 * (c + c.T)
    w, u = np.linalg.eigh(c)
    order = np.argsort(-w, kind="stable")
    w = w[order][:k]
    u = u[:, order][:, :k]
    vectors = scipy.linalg.solve_triangular(lo.T, u, lower=False, check_finite=False)
    return EigPair(values=w, vectors=_fix_column_signs(vectors))


def trace_norm(a: np.ndarray) -> float:
    """Sum of singular values of ``a`` (full SVD)."""
    a = np.asarray(a, dtype=float)
    if not np.all(np.isfinite(a)):
        raise NumericalError("trace_norm: input has non-finite entries")
    if a.size == 0:
        return 0.0
    return float(np.linalg.svd(a, compute_uv=False).sum())


def ridge_inverse(a: np.ndarray, ridge: float, tol: float = PINV_RTOL) -> np.ndarray:
    """(a + ridge*I)^-1 for ridge > 0, else Moore-Penrose pseudo-inverse.

    The pseudo-inverse path drops singular values below ``tol * sigma_max``,
    so a singular PSD input is handled without error.
    """
    a = as_symmetric(a, "A")
    if ridge < 0:
        raise NumericalError(f"ridge must be non-negative, got {ridge}")
    if tol <= 0:
        raise NumericalError(f"tol must be positive, got {tol}")
    if ridge > 0:
        inv = np.linalg.inv(a + ridge * np.eye(a.shape[0]))
    else:
        inv = np.linalg.pinv(a, rcond=tol, hermitian=True)
    return 0.5 * (inv + inv.T)


def inv_sqrt_psd(a: np.ndarray, tol: float = PINV_RTOL) -> np.ndarray:
    """Pseudo-inverse square root of a symmetric PSD matrix.

    Eigenvalues below ``tol * max eigenvalue`` are treated as zero, so the
    result whitens only the numerically significant range of ``a``.
    """
    a = as_symmetric(a, "A")
    w, u = np.linalg.eigh(a)
    peak = float(w.max(initial=0.0))
    inv_root = np.zeros_like(w)
    keep = w > tol * max(peak, 0.0)
    inv_root[keep] = 1.0 / np.sqrt(w[keep])
    out = (u * inv_root) @ u.T
    return 0.5 * (out + out.T)


def numerical_rank(a: np.ndarray, tol_rel: float = 1e-8) -> int:
    """Count of singular values above ``tol_rel * sigma_max``."""
    a = np.asarray(a, dtype=float)
    if not np.all(np.isfinite(a)):
        raise NumericalError("numerical_rank: input has non-finite entries")
    if tol_rel <= 0:
        raise NumericalError(f"tol_rel must be positive, got {tol_rel}")
    if a.size == 0:
        return 0
    sv = np.linalg.svd(a, compute_uv=False)
    if sv[0] == 0.0:
        return 0
    return int(np.count_nonzero(sv > tol_rel * sv[0]))


def nonneg_qp(m: np.ndarray, a: np.ndarray, kkt_tol: float = 1e-8) -> np.ndarray:
    """Minimize v^T m v - 2 v^T a over v >= 0 for PSD m.

    Deterministic active-set solver: the passive set is seeded with every
    coordinate and the unconstrained restriction is re-solved (minimum-norm
    least squares) after each boundary hit; re-entering coordinates are picked
    by largest violation with ties broken by lowest index.  An objective ray
    that is feasible and strictly decreasing raises NumericalError
    (unbounded program).
    """
    m = as_symmetric(m, "M")
    a = np.asarray(a, dtype=float).ravel()
    n = a.size
    if m.shape[0] != n:
        raise NumericalError(f"M is {m.shape} but a has length {n}")
    if n == 0:
        return np.zeros(0)
    scale = max(1.0, float(np.abs(a).max()), float(np.abs(m).max()))
    ray_tol = 1e-9 * scale
    enter_tol = max(1e-12 * scale, 0.25 * kkt_tol)

    v = np.zeros(n)
    passive = np.ones(n, dtype=bool)
    for _ in range(10 * n + 20):
        # settle the passive set: stationary point of the restricted problem
        for _ in range(n + 2):
            idx = np.flatnonzero(passive)
            if idx.size == 0:
                break
            msub = m[np.ix_(idx, idx)]
            asub = a[idx]
            z = np.linalg.lstsq(msub, asub, rcond=None)[0]
            resid = asub - msub @ z
            if np.linalg.norm(resid) > ray_tol:
                # a_P not in range(M_PP): unbounded along the residual ray
                # unless the ray leaves the feasible orthant first.
                d = resid
                if np.all(d >= -1e-12 * np.abs(d).max()):
                    raise NumericalError(
                        "quadratic program is unbounded: objective decreases "
                        "without bound along a feasible ray"
                    )
                neg = d < 0
                steps = v[idx][neg] / -d[neg]
                alpha = float(steps.min())
                moved = v[idx] + alpha * d
                moved[np.abs(moved) <= 1e-13 * scale] = 0.0
                v[idx] = np.maximum(moved, 0.0)
                passive[idx[moved <= 0.0]] = False
                continue
            if np.all(z >= 0.0):
                v[:] = 0.0
                v[idx] = z
                break
            # classic backtracking step toward the restricted solution
            cur = v[idx]
            bad = z <= 0.0
            alpha = float(np.min(cur[bad] / (cur[bad] - z[bad])))
            cur = cur + alpha * (z - cur)
            cur[bad & (cur <= 1e-13 * scale)] = 0.0
            v[idx] = np.maximum(cur, 0.0)
            passive[idx[cur <= 0.0]] = False
        # outer optimality over the active (clamped) coordinates
        w = a - m @ v
        active = np.flatnonzero(~passive)
        if active.size == 0 or float(w[active].max()) <= enter_tol:
            return v
        passive[active[np.argmax(w[active])]] = True
    raise NumericalError("nonneg_qp failed to converge (active-set cycling)")

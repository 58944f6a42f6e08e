"""Multiclass SVM over precomputed kernel matrices.

One binary soft-margin problem per class (one-vs-rest), each solved by SMO
with maximal-violating-pair working-set selection on the shared precomputed
Gram.  No randomness anywhere: identical inputs give identical models.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass

import numpy as np

from .errors import DataError, NumericalError

#: KKT stopping tolerance of the SMO loop.
SMO_TOL = 1e-3
#: Guard for a vanishing second-derivative along the working pair.
SMO_TAU = 1e-12


def kernel_fingerprint(k: np.ndarray) -> str:
    """Stable digest of a kernel matrix, used to tie models to their kernel."""
    k = np.ascontiguousarray(k, dtype=float)
    h = hashlib.sha256()
    h.update(str(k.shape).encode())
    h.update(k.tobytes())
    return h.hexdigest()


@dataclass(frozen=True)
class SvmModel:
    """Fitted one-vs-rest kernel SVM.

    ``dual_coef[c]`` holds alpha_i * y_i for the binary problem of class c,
    so decision values are dual_coef @ k_cross + intercept.
    """

    classes: np.ndarray  # (L,)
    dual_coef: np.ndarray  # (L, N)
    intercept: np.ndarray  # (L,)
    c: float
    fingerprint: str

    def __post_init__(self):
        for arr in (self.classes, self.dual_coef, self.intercept):
            arr.setflags(write=False)

    @property
    def n_train(self) -> int:
        return self.dual_coef.shape[1]


def _smo_binary(k: np.ndarray, y: np.ndarray, c: float, tol: float, max_iter: int):
    """Solve min 1/2 a'Qa - e'a, 0 <= a <= C, y'a = 0 with Q = yy' * K.

    Returns (alpha, bias) for the decision function sum_i alpha_i y_i K(x_i, .)
    + bias.  Working pairs are chosen by maximal violation; index ties resolve
    to the lowest index, which makes the solver deterministic.
    """
    n = y.size
    alpha = np.zeros(n)
    grad = -np.ones(n)  # gradient of the dual objective at alpha = 0
    pos = y > 0
    diag = np.diag(k).copy()

    for _ in range(max_iter):
        vals = -y * grad
        up = (pos & (alpha < c)) | (~pos & (alpha > 0))
        low = (pos & (alpha > 0)) | (~pos & (alpha < c))
        i = int(np.where(up, vals, -np.inf).argmax())
        j = int(np.where(low, vals, np.inf).argmin())
        m_up, m_low = vals[i], vals[j]
        if m_up - m_low <= tol:
            free = (alpha > 0) & (alpha < c)
            bias = float(vals[free].mean()) if free.any() else float(0.5 * (m_up + m_low))
            return alpha, bias
        ai_old, aj_old = alpha[i], alpha[j]
        # curvature along the pair is ||phi_i - phi_j||^2 for either label sign
        quad = max(diag[i] + diag[j] - 2.0 * k[i, j], SMO_TAU)
        if y[i] != y[j]:
            delta = (-grad[i] - grad[j]) / quad
            diff = ai_old - aj_old
            ai, aj = ai_old + delta, aj_old + delta
            if diff > 0 and aj < 0:
                ai, aj = diff, 0.0
            elif diff <= 0 and ai < 0:
                ai, aj = 0.0, -diff
            if diff > 0 and ai > c:
                ai, aj = c, c - diff
            elif diff <= 0 and aj > c:
                ai, aj = c + diff, c
        else:
            delta = (grad[i] - grad[j]) / quad
            total = ai_old + aj_old
            ai, aj = ai_old - delta, aj_old + delta
            if total > c and ai > c:
                ai, aj = c, total - c
            elif total <= c and aj < 0:
                ai, aj = total, 0.0
            if total > c and aj > c:
                ai, aj = total - c, c
            elif total <= c and ai < 0:
                ai, aj = 0.0, total
        alpha[i], alpha[j] = ai, aj
        grad += (ai - ai_old) * y[i] * (y * k[:, i]) + (aj - aj_old) * y[j] * (y * k[:, j])
    raise NumericalError(f"SMO did not converge within {max_iter} iterations")


def fit(
    k_train: np.ndarray,
    y: np.ndarray,
    c: float,
    tol: float = SMO_TOL,
    max_iter: int | None = None,
) -> SvmModel:
    """Train one-vs-rest SVMs on a precomputed PSD kernel matrix."""
    k_train = np.asarray(k_train, dtype=float)
    y = np.asarray(y)
    if k_train.ndim != 2 or k_train.shape[0] != k_train.shape[1]:
        raise NumericalError(f"kernel matrix must be square, got {k_train.shape}")
    n = k_train.shape[0]
    if y.shape != (n,):
        raise DataError(f"labels shaped {y.shape} do not match kernel of size {n}")
    if c <= 0:
        raise NumericalError(f"C must be positive, got {c}")
    classes = np.unique(y)
    if classes.size < 2:
        raise DataError("need at least two classes to train a classifier")
    if max_iter is None:
        max_iter = max(200_000, 200 * n)
    dual = np.zeros((classes.size, n))
    bias = np.zeros(classes.size)
    for row, cls in enumerate(classes):
        y_pm = np.where(y == cls, 1.0, -1.0)
        alpha, b = _smo_binary(k_train, y_pm, float(c), tol, max_iter)
        dual[row] = alpha * y_pm
        bias[row] = b
    return SvmModel(
        classes=classes.copy(),
        dual_coef=dual,
        intercept=bias,
        c=float(c),
        fingerprint=kernel_fingerprint(k_train),
    )


def decision_values(model: SvmModel, k_cross: np.ndarray) -> np.ndarray:
    """Per-class decision values, shaped (L, n_test)."""
    k_cross = np.asarray(k_cross, dtype=float)
    if k_cross.ndim != 2 or k_cross.shape[0] != model.n_train:
        raise NumericalError(
            f"cross-kernel shaped {k_cross.shape} does not match {model.n_train} "
            "training samples"
        )
    return model.dual_coef @ k_cross + model.intercept[:, None]


def predict(
    model: SvmModel, k_cross: np.ndarray, fingerprint: str | None = None
) -> np.ndarray:
    """Predicted labels for test columns of a train-vs-test kernel block.

    When a fingerprint of the training kernel that produced ``k_cross`` is
    supplied, it must match the one recorded at fit time; this catches kernels
    from a different release being mixed into prediction.
    """
    if fingerprint is not None and fingerprint != model.fingerprint:
        raise NumericalError(
            "kernel fingerprint mismatch: this model was fit on a different "
            "kernel matrix than the one that produced these test columns"
        )
    values = decision_values(model, k_cross)
    return model.classes[np.argmax(values, axis=0)]


def accuracy(pred: np.ndarray, truth: np.ndarray) -> float:
    """Exact-match rate in [0, 1]."""
    pred = np.asarray(pred)
    truth = np.asarray(truth)
    if pred.shape != truth.shape:
        raise DataError(f"prediction shape {pred.shape} != truth shape {truth.shape}")
    if pred.size == 0:
        raise DataError("cannot score empty label vectors")
    return float(np.mean(pred == truth))

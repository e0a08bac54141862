"""Loss models, exact gradients, and curvature (smoothness/convexity) estimation.

Two dense models are supported:

* ``mse-linear``: mean squared error of a linear predictor,
  ``F(w) = (1/D) * sum_i (<x_i, w> - y_i)^2`` (no 1/2 factor).
* ``multinomial-logistic``: softmax cross-entropy over ``classes`` classes with
  an L2 penalty ``(reg/2) * sum_c ||w_c||^2``.  The parameter vector is the
  row-major flattening of a ``(classes, n_features)`` stack.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

LOSS_KINDS = ("mse-linear", "multinomial-logistic")

# Relative change threshold for the power-iteration eigenvalue estimates.
EIG_TOL = 1e-8
EIG_MAX_ITERS = 10_000


@dataclass(frozen=True)
class LossModel:
    """Which objective the federated problem minimizes.

    ``classes`` and ``reg`` are only meaningful for ``multinomial-logistic``.
    """

    kind: str
    classes: int = 0
    reg: float = 0.0

    def __post_init__(self) -> None:
        if self.kind not in LOSS_KINDS:
            raise ValueError(f"unknown loss kind {self.kind!r}; expected one of {LOSS_KINDS}")
        if self.kind == "multinomial-logistic":
            if self.classes < 2:
                raise ValueError("multinomial-logistic needs classes >= 2")
            if self.reg < 0:
                raise ValueError("reg must be >= 0")

    def dim(self, n_features: int) -> int:
        """Length of the flat parameter vector for ``n_features`` inputs."""
        if self.kind == "mse-linear":
            return n_features
        return self.classes * n_features


@dataclass(frozen=True)
class CurvatureConstants:
    """Smoothness L, strong-convexity beta, and their ratio rho = L / beta."""

    L: float
    beta: float
    rho: float

    def __post_init__(self) -> None:
        if self.L <= 0 or self.beta < 0:
            raise ValueError("need L > 0 and beta >= 0")


def _check_shapes(model: LossModel, w: np.ndarray, features: np.ndarray) -> None:
    if features.ndim != 2:
        raise ValueError(f"features must be 2-D, got shape {features.shape}")
    expect = model.dim(features.shape[1])
    if w.shape != (expect,):
        raise ValueError(f"parameter vector has shape {w.shape}, expected ({expect},)")


def _batch_rows(n_rows: int, batch: np.ndarray | None) -> np.ndarray | slice:
    if batch is None:
        return slice(None)
    idx = np.asarray(batch, dtype=int)
    if idx.size == 0:
        raise ValueError("empty batch")
    if idx.min() < 0 or idx.max() >= n_rows:
        raise ValueError(f"batch indices out of range for {n_rows} rows")
    return idx


def _log_softmax(logits: np.ndarray) -> np.ndarray:
    shifted = logits - logits.max(axis=1, keepdims=True)
    return shifted - np.log(np.exp(shifted).sum(axis=1, keepdims=True))


def loss(model: LossModel, w: np.ndarray, features: np.ndarray, labels: np.ndarray) -> float:
    """Average loss of ``w`` on the given rows (plus L2 term for logistic)."""
    _check_shapes(model, w, features)
    if labels.shape[0] != features.shape[0]:
        raise ValueError("features and labels disagree on the number of rows")
    if features.shape[0] == 0:
        raise ValueError("empty dataset")
    if model.kind == "mse-linear":
        r = features @ w - labels
        with np.errstate(over="ignore"):
            # diverging iterates overflow to inf; the caller reports that, not a warning
            return float(np.mean(r * r))
    wmat = w.reshape(model.classes, features.shape[1])
    ls = _log_softmax(features @ wmat.T)
    y = labels.astype(int)
    if y.min() < 0 or y.max() >= model.classes:
        raise ValueError("class labels out of range")
    nll = -float(np.mean(ls[np.arange(y.size), y]))
    return nll + 0.5 * model.reg * float(np.sum(wmat * wmat))


def grad(
    model: LossModel,
    w: np.ndarray,
    features: np.ndarray,
    labels: np.ndarray,
    batch: np.ndarray | None = None,
) -> np.ndarray:
    """Exact gradient of :func:`loss` on the full data or a row subset.

    ``batch`` is an index array into the rows; the batch gradient averages
    over those rows only (the L2 term is not subsampled).
    """
    _check_shapes(model, w, features)
    rows = _batch_rows(features.shape[0], batch)
    x = features[rows]
    y = labels[rows]
    n = x.shape[0]
    if model.kind == "mse-linear":
        return (2.0 / n) * (x.T @ (x @ w - y))
    wmat = w.reshape(model.classes, x.shape[1])
    logits = x @ wmat.T
    p = np.exp(_log_softmax(logits))
    p[np.arange(n), y.astype(int)] -= 1.0
    g = (p.T @ x) / n + model.reg * wmat
    return g.reshape(-1)


def _power_iteration(mat: np.ndarray, tol: float = EIG_TOL) -> float:
    """Largest eigenvalue of a symmetric PSD matrix by power iteration."""
    d = mat.shape[0]
    if d == 1:
        return float(mat[0, 0])
    rng = np.random.default_rng(np.random.SeedSequence(0x5EED))
    v = rng.standard_normal(d)
    v /= np.linalg.norm(v)
    lam = 0.0
    for _ in range(EIG_MAX_ITERS):
        u = mat @ v
        norm = np.linalg.norm(u)
        if norm == 0.0:
            return 0.0
        v = u / norm
        new = float(v @ (mat @ v))
        if abs(new - lam) <= tol * max(1.0, abs(new)):
            return new
        lam = new
    return lam


def _extreme_eigs(mat: np.ndarray) -> tuple[float, float]:
    """(largest, smallest) eigenvalues of a symmetric PSD matrix.

    The smallest comes from a shifted power iteration on ``lam_max * I - M``,
    which stays matrix-free friendly and avoids factorizations.
    """
    lam_max = _power_iteration(mat)
    if lam_max <= 0.0:
        return 0.0, 0.0
    shifted = lam_max * np.eye(mat.shape[0]) - mat
    lam_min = lam_max - _power_iteration(shifted)
    return lam_max, max(lam_min, 0.0)


def estimate_curvature(model: LossModel, datasets) -> CurvatureConstants:
    """Worst-case curvature over a collection of per-node datasets.

    For ``mse-linear`` the per-node Hessian is ``(2/D) X^T X``; L is the
    largest top eigenvalue across nodes and beta the smallest bottom one.
    For ``multinomial-logistic`` the Hessian is bounded above by
    ``0.5 * lam_max(X^T X / D) + reg`` and below by ``reg``.
    """
    if not datasets:
        raise ValueError("need at least one dataset")
    tops: list[float] = []
    bottoms: list[float] = []
    for ds in datasets:
        x = ds.features
        if x.shape[0] == 0:
            raise ValueError("empty dataset")
        gram = (x.T @ x) / x.shape[0]
        if model.kind == "mse-linear":
            hi, lo = _extreme_eigs(2.0 * gram)
            tops.append(hi)
            bottoms.append(lo)
        else:
            tops.append(0.5 * _power_iteration(gram) + model.reg)
            bottoms.append(model.reg)
    L = max(tops)
    beta = min(bottoms)
    rho = L / beta if beta > 0 else math.inf
    return CurvatureConstants(L=L, beta=beta, rho=rho)

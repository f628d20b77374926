"""Soft-margin SVM on a precomputed kernel, trained in the dual by SMO,
with Platt scaling for probability outputs.
"""
from __future__ import annotations

import math
import warnings

import numpy as np
from scipy.special import expit
from sklearn.base import BaseEstimator, ClassifierMixin
from sklearn.exceptions import ConvergenceWarning
from sklearn.utils.validation import check_array, check_is_fitted

TAU = 1e-12
PSD_RTOL = 1e-6
JITTER = 1e-8
PROBA_EPS = 1e-15


class NotPSDWarning(UserWarning):
    pass


def smo(K, y, C=1.0, tol=1e-4, max_iter=100_000):
    """Solve ``min 1/2 a'Qa - sum(a)`` s.t. ``y'a = 0, 0 <= a <= C``.

    ``Q = (y y') * K``. Pairs are chosen by maximal violation for the first
    index and the second-order gain for the second (Fan, Chen & Lin, 2005).
    Stops once the maximal KKT violation drops below ``tol``.

    Returns ``(alpha, b, n_iter)`` with decision ``f(x) = sum a_i y_i k(x_i, x) + b``.
    """
    K = np.asarray(K, dtype=float)
    y = np.asarray(y, dtype=float)
    n = len(y)
    alpha = np.zeros(n)
    grad = -np.ones(n)
    diag = np.diag(K).copy()
    n_iter = 0
    while True:
        minus_yg = -y * grad
        up = ((y > 0) & (alpha < C)) | ((y < 0) & (alpha > 0))
        low = ((y > 0) & (alpha > 0)) | ((y < 0) & (alpha < C))
        if not up.any() or not low.any():
            break
        i = int(np.flatnonzero(up)[np.argmax(minus_yg[up])])
        g_max = minus_yg[i]
        g_min = minus_yg[low].min()
        if g_max - g_min < tol:
            break
        if n_iter >= max_iter:
            warnings.warn(f"SMO stopped after {max_iter} iterations", ConvergenceWarning)
            break
        cand = low & (minus_yg < g_max)
        b_gain = g_max - minus_yg[cand]
        a_curv = diag[i] + diag[cand] - 2.0 * K[i, cand]
        a_curv = np.where(a_curv > 0, a_curv, TAU)
        idx = np.flatnonzero(cand)
        j = int(idx[np.argmax(b_gain * b_gain / a_curv)])

        # step t >= 0 along alpha_i += y_i t, alpha_j -= y_j t
        curv = diag[i] + diag[j] - 2.0 * K[i, j]
        if curv <= 0:
            curv = TAU
        t = (g_max - minus_yg[j]) / curv
        t = min(t, C - alpha[i] if y[i] > 0 else alpha[i])
        t = min(t, alpha[j] if y[j] > 0 else C - alpha[j])
        d_i, d_j = y[i] * t, -y[j] * t
        alpha[i] += d_i
        alpha[j] += d_j
        # snap to bounds to keep the active sets exact
        for k in (i, j):
            if alpha[k] < 1e-12 * C:
                alpha[k] = 0.0
            elif alpha[k] > C * (1 - 1e-12):
                alpha[k] = C
        grad += y * (y[i] * K[:, i] * d_i + y[j] * K[:, j] * d_j)
        n_iter += 1

    minus_yg = -y * grad
    free = (alpha > 0) & (alpha < C)
    if free.any():
        b = float(minus_yg[free].mean())
    else:
        up = ((y > 0) & (alpha < C)) | ((y < 0) & (alpha > 0))
        low = ((y > 0) & (alpha > 0)) | ((y < 0) & (alpha < C))
        hi = minus_yg[up].max() if up.any() else minus_yg[low].min()
        lo = minus_yg[low].min() if low.any() else hi
        b = float((hi + lo) / 2)
    return alpha, b, n_iter


def dual_objective(K, y, alpha) -> float:
    """``sum(a) - 1/2 a'Qa`` (the quantity the dual maximises)."""
    ay = np.asarray(alpha) * np.asarray(y)
    return float(np.sum(alpha) - 0.5 * ay @ np.asarray(K) @ ay)


def primal_objective(K, y, alpha, b, C) -> float:
    ay = np.asarray(alpha) * np.asarray(y)
    f = np.asarray(K) @ ay + b
    slack = np.maximum(0.0, 1.0 - np.asarray(y) * f)
    return float(0.5 * ay @ np.asarray(K) @ ay + C * slack.sum())


def platt_fit(decisions, labels, max_iter=100, min_step=1e-10, sigma=1e-12, eps=1e-5):
    """Fit ``p(f) = 1 / (1 + exp(A f + B))`` to decision values.

    Regularised maximum likelihood with prior-corrected targets, solved by
    Newton's method with backtracking line search (Lin, Lin & Weng, 2007).
    Labels are +1/-1 (or 1/0).
    """
    f = np.asarray(decisions, dtype=float)
    pos = np.asarray(labels) > 0
    n_pos = int(pos.sum())
    n_neg = len(pos) - n_pos
    if n_pos == 0 or n_neg == 0:
        raise ValueError("Platt scaling needs both classes")
    hi = (n_pos + 1.0) / (n_pos + 2.0)
    lo = 1.0 / (n_neg + 2.0)
    t = np.where(pos, hi, lo)

    def objective(A, B):
        z = f * A + B
        return float(np.sum(np.logaddexp(0.0, z) - (1.0 - t) * z))

    A, B = 0.0, math.log((n_neg + 1.0) / (n_pos + 1.0))
    fval = objective(A, B)
    for _ in range(max_iter):
        p = expit(-(f * A + B))
        d2 = p * (1 - p)
        h11 = sigma + np.sum(f * f * d2)
        h22 = sigma + np.sum(d2)
        h21 = np.sum(f * d2)
        d1 = t - p
        g1 = np.sum(f * d1)
        g2 = np.sum(d1)
        if abs(g1) < eps and abs(g2) < eps:
            break
        det = h11 * h22 - h21 * h21
        dA = -(h22 * g1 - h21 * g2) / det
        dB = -(-h21 * g1 + h11 * g2) / det
        gd = g1 * dA + g2 * dB
        step = 1.0
        while step >= min_step:
            nA, nB = A + step * dA, B + step * dB
            nval = objective(nA, nB)
            if nval < fval + 1e-4 * step * gd:
                A, B, fval = nA, nB, nval
                break
            step /= 2.0
        else:
            warnings.warn("Platt scaling line search failed", ConvergenceWarning)
            break
    else:
        warnings.warn(f"Platt scaling did not converge in {max_iter} iterations",
                      ConvergenceWarning)
    return float(A), float(B)


def platt_apply(A, B, decisions):
    """Probability of the positive class; strictly inside (0, 1)."""
    p = expit(-(A * np.asarray(decisions, dtype=float) + B))
    return np.clip(p, PROBA_EPS, 1 - PROBA_EPS)


def _ensure_psd(K):
    if K.shape[0] == 0:
        return K
    eig = np.linalg.eigvalsh((K + K.T) / 2)
    scale = max(abs(eig).max(), 1.0)
    if eig.min() >= -PSD_RTOL * scale:
        return K
    warnings.warn(f"Gram matrix is not PSD (min eigenvalue {eig.min():.3g}); "
                  f"adding {JITTER:g} to the diagonal", NotPSDWarning)
    K = K + JITTER * np.eye(K.shape[0])
    if np.linalg.eigvalsh((K + K.T) / 2).min() < -PSD_RTOL * scale:
        warnings.warn("Gram matrix still not PSD after jitter; training anyway",
                      NotPSDWarning)
    return K


class PrecomputedSVC(BaseEstimator, ClassifierMixin):
    """Binary soft-margin SVM on a precomputed kernel with Platt scaling.

    ``fit(K, y)`` takes the square training Gram matrix and labels in
    {-1, +1} (0 is read as -1). Prediction methods take kernel rows of shape
    ``(n_queries, n_train)``.

    Single-class training data gives a degenerate constant model
    (``degenerate_`` is true) whose probability is exactly 1 or 0.

    Attributes
    ----------
    support_ : ndarray of int
        Training indices with non-zero dual coefficient.
    dual_coef_ : ndarray
        ``alpha_i * y_i`` for each support index.
    intercept_ : float
    platt_ : tuple of float
        Sigmoid parameters ``(A, B)``; ``None`` for degenerate models.
    """

    def __init__(self, C=1.0, tol=1e-4, max_iter=100_000, probability=True):
        self.C = C
        self.tol = tol
        self.max_iter = max_iter
        self.probability = probability

    def fit(self, K, y):
        K = check_array(K, dtype=float)
        if K.shape[0] != K.shape[1]:
            raise ValueError(f"training kernel must be square, got {K.shape}")
        y = np.where(np.asarray(y) > 0, 1.0, -1.0)
        if len(y) != K.shape[0]:
            raise ValueError("one label per training instance is required")
        if self.C <= 0:
            raise ValueError("C must be positive")
        self.n_train_ = K.shape[0]
        self.classes_ = np.array([-1, 1])
        if np.all(y > 0) or np.all(y < 0):
            self.degenerate_ = True
            self.alpha_ = np.zeros(len(y))
            self.support_ = np.zeros(0, dtype=int)
            self.dual_coef_ = np.zeros(0)
            self.intercept_ = float(y[0])
            self.platt_ = None
            self.n_iter_ = 0
            return self
        self.degenerate_ = False
        K = _ensure_psd(K)
        alpha, b, n_iter = smo(K, y, self.C, self.tol, self.max_iter)
        self.alpha_ = alpha
        self.n_iter_ = n_iter
        self.support_ = np.flatnonzero(alpha > 0)
        self.dual_coef_ = alpha[self.support_] * y[self.support_]
        self.intercept_ = b
        if self.probability:
            self.platt_ = platt_fit(K @ (alpha * y) + b, y)
        else:
            self.platt_ = None
        return self

    def decision_function(self, K_rows):
        check_is_fitted(self, "n_train_")
        K_rows = check_array(K_rows, dtype=float)
        if K_rows.shape[1] != self.n_train_:
            raise ValueError(
                f"kernel rows must cover all {self.n_train_} training instances, "
                f"got {K_rows.shape[1]} columns"
            )
        if self.degenerate_:
            return np.full(K_rows.shape[0], self.intercept_)
        return K_rows[:, self.support_] @ self.dual_coef_ + self.intercept_

    def predict(self, K_rows):
        return np.where(self.decision_function(K_rows) >= 0, 1, -1)

    def predict_proba(self, K_rows):
        """Columns: P(y=-1), P(y=+1)."""
        f = self.decision_function(K_rows)
        if self.degenerate_:
            p = np.full(len(f), 1.0 if self.intercept_ > 0 else 0.0)
        else:
            if self.platt_ is None:
                raise ValueError("model was trained with probability=False")
            p = platt_apply(*self.platt_, f)
        return np.column_stack([1 - p, p])

    def to_dict(self) -> dict:
        check_is_fitted(self, "n_train_")
        return {
            "C": self.C,
            "tol": self.tol,
            "n_train": self.n_train_,
            "degenerate": self.degenerate_,
            "support": self.support_.tolist(),
            "dual_coef": self.dual_coef_.tolist(),
            "intercept": self.intercept_,
            "platt": None if self.platt_ is None else list(self.platt_),
        }

    @classmethod
    def from_dict(cls, obj: dict) -> "PrecomputedSVC":
        model = cls(C=obj["C"], tol=obj["tol"])
        model.n_train_ = obj["n_train"]
        model.classes_ = np.array([-1, 1])
        model.degenerate_ = obj["degenerate"]
        model.support_ = np.asarray(obj["support"], dtype=int)
        model.dual_coef_ = np.asarray(obj["dual_coef"], dtype=float)
        model.intercept_ = float(obj["intercept"])
        model.platt_ = None if obj["platt"] is None else tuple(obj["platt"])
        model.probability = model.platt_ is not None or model.degenerate_
        return model

"""Label ranking: Spearman correlation, ranking by pairwise comparison (RPC)
with weighted voting, and the learning-free default predictor.

A ranking over ``K`` tools is an integer array ``pi`` where ``pi[i]`` is the
1-based position of tool ``i``. Batches of rankings are ``(n, K)`` arrays.
"""
from __future__ import annotations

import json
from pathlib import Path

import numpy as np
from joblib import Parallel, delayed
from sklearn.base import BaseEstimator
from sklearn.utils.validation import check_array, check_is_fitted

from .svm import PrecomputedSVC


def check_ranking(pi) -> np.ndarray:
    pi = np.asarray(pi)
    k = len(pi)
    if k < 2 or sorted(pi.tolist()) != list(range(1, k + 1)):
        raise ValueError(f"not a ranking of 1..{k}: {pi.tolist()}")
    return pi.astype(int)


def check_rankings(Y) -> np.ndarray:
    Y = check_array(Y, dtype=None, ensure_2d=True)
    for row in Y:
        check_ranking(row)
    return Y.astype(int)


def spearman(p, q) -> float:
    """Spearman rank correlation of two rankings of the same ``K >= 2`` labels."""
    p = np.asarray(p, dtype=np.int64)
    q = np.asarray(q, dtype=np.int64)
    if p.shape != q.shape:
        raise ValueError(f"ranking length mismatch: {len(p)} vs {len(q)}")
    k = len(p)
    if k < 2:
        raise ValueError("Spearman correlation needs at least two labels")
    d2 = int(np.sum((p - q) ** 2))
    return 1.0 - 6.0 * d2 / (k * (k * k - 1))


def spearman_loss(p, q) -> float:
    return 1.0 - spearman(p, q)


def mean_spearman(Y_true, Y_pred) -> float:
    return float(np.mean([spearman(a, b) for a, b in zip(Y_true, Y_pred)]))


def ranking_from_scores(scores) -> np.ndarray:
    """Positions from scores: higher score first, ties to the lower index."""
    scores = np.asarray(scores, dtype=float)
    order = sorted(range(len(scores)), key=lambda i: (-scores[i], i))
    pi = np.empty(len(scores), dtype=int)
    pi[order] = np.arange(1, len(scores) + 1)
    return pi


def voting_scores(M) -> np.ndarray:
    """``S_i = sum_{j != i} M[i, j]`` for a pairwise preference matrix."""
    M = np.asarray(M, dtype=float)
    return M.sum(axis=1) - np.diag(M)


def default_ranking(Y) -> np.ndarray:
    """Consensus ranking maximising the summed Spearman correlation to ``Y``.

    Sorting labels by mean position is optimal: with the position multiset
    fixed, the sum of squared differences is minimised by pairing the
    smallest position with the smallest mean (rearrangement inequality).
    """
    Y = check_rankings(Y)
    return ranking_from_scores(-Y.mean(axis=0))


def _fit_pair(K, y, C, tol):
    return PrecomputedSVC(C=C, tol=tol).fit(K, y)


class RPCRanker(BaseEstimator):
    """Ranking by pairwise comparison on a precomputed kernel.

    One :class:`~vgrank.svm.PrecomputedSVC` per label pair ``i < j`` learns
    whether ``i`` precedes ``j``; predictions aggregate the Platt
    probabilities by weighted voting.

    Parameters
    ----------
    C : float, default=1.0
    tol : float, default=1e-4
        SMO stopping tolerance.
    n_jobs : int, default=None
        Pair models are trained in parallel with joblib.
    """

    def __init__(self, C=1.0, tol=1e-4, n_jobs=None):
        self.C = C
        self.tol = tol
        self.n_jobs = n_jobs

    def fit(self, K, Y):
        K = check_array(K, dtype=float)
        Y = check_rankings(Y)
        if K.shape != (len(Y), len(Y)):
            raise ValueError(f"expected a {len(Y)}x{len(Y)} Gram matrix, got {K.shape}")
        k = Y.shape[1]
        self.n_labels_ = k
        self.n_train_ = len(Y)
        self.pairs_ = [(i, j) for i in range(k) for j in range(i + 1, k)]
        labels = [np.where(Y[:, i] < Y[:, j], 1, -1) for i, j in self.pairs_]
        self.estimators_ = Parallel(n_jobs=self.n_jobs)(
            delayed(_fit_pair)(K, y, self.C, self.tol) for y in labels
        )
        return self

    @property
    def degenerate_pairs_(self) -> list[tuple[int, int]]:
        check_is_fitted(self, "estimators_")
        return [p for p, m in zip(self.pairs_, self.estimators_) if m.degenerate_]

    def pairwise_proba(self, K_rows) -> np.ndarray:
        """``(n, K, K)`` array; ``[n, i, j]`` is the probability that ``i`` precedes ``j``.

        The diagonal is zero and ``M[j, i] = 1 - M[i, j]``.
        """
        check_is_fitted(self, "estimators_")
        K_rows = check_array(K_rows, dtype=float)
        k = self.n_labels_
        M = np.zeros((K_rows.shape[0], k, k))
        for (i, j), model in zip(self.pairs_, self.estimators_):
            p = model.predict_proba(K_rows)[:, 1]
            M[:, i, j] = p
            M[:, j, i] = 1.0 - p
        return M

    def predict_scores(self, K_rows) -> np.ndarray:
        return self.pairwise_proba(K_rows).sum(axis=2)

    def predict(self, K_rows) -> np.ndarray:
        return np.array([ranking_from_scores(s) for s in self.predict_scores(K_rows)])

    def score(self, K_rows, Y) -> float:
        return mean_spearman(check_rankings(Y), self.predict(K_rows))


class DefaultRanker(BaseEstimator):
    """Always predicts the consensus ranking of the training rankings."""

    def fit(self, K, Y):
        self.ranking_ = default_ranking(Y)
        return self

    def predict(self, K_rows) -> np.ndarray:
        check_is_fitted(self, "ranking_")
        n = len(K_rows)
        return np.tile(self.ranking_, (n, 1))

    def score(self, K_rows, Y) -> float:
        return mean_spearman(check_rankings(Y), self.predict(K_rows))


MANIFEST = "manifest.json"


def save_ensemble(ranker: RPCRanker, directory, tools, metadata=None) -> Path:
    """Write one JSON file per pair model plus ``manifest.json``.

    ``metadata`` (kernel configuration, training graphs, ...) is stored in
    the manifest verbatim.
    """
    check_is_fitted(ranker, "estimators_")
    if len(tools) != ranker.n_labels_:
        raise ValueError(f"{len(tools)} tool names for {ranker.n_labels_} labels")
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    models = []
    for (i, j), model in zip(ranker.pairs_, ranker.estimators_):
        name = f"pair_{i}_{j}.json"
        (directory / name).write_text(json.dumps({"pair": [i, j], **model.to_dict()}))
        models.append({"pair": [i, j], "file": name})
    manifest = {
        "tools": list(tools),
        "C": ranker.C,
        "tol": ranker.tol,
        "n_train": ranker.n_train_,
        "models": models,
        **(metadata or {}),
    }
    (directory / MANIFEST).write_text(json.dumps(manifest, indent=1) + "\n")
    return directory / MANIFEST


def load_ensemble(directory) -> tuple[RPCRanker, dict]:
    """Inverse of :func:`save_ensemble`; returns the ranker and its manifest."""
    directory = Path(directory)
    manifest = json.loads((directory / MANIFEST).read_text())
    k = len(manifest["tools"])
    ranker = RPCRanker(C=manifest["C"], tol=manifest["tol"])
    ranker.n_labels_ = k
    ranker.n_train_ = manifest["n_train"]
    ranker.pairs_ = [(i, j) for i in range(k) for j in range(i + 1, k)]
    files = {tuple(m["pair"]): m["file"] for m in manifest["models"]}
    if set(files) != set(ranker.pairs_):
        raise ValueError(f"ensemble in {directory} is incomplete: expected {len(ranker.pairs_)} "
                         f"pair models, found {len(files)}")
    ranker.estimators_ = [
        PrecomputedSVC.from_dict(json.loads((directory / files[p]).read_text()))
        for p in ranker.pairs_
    ]
    return ranker, manifest

"""k-fold cross-validation of RPC against the default predictor."""
from __future__ import annotations

import time

import numpy as np
from joblib import Parallel, delayed
from sklearn.utils.validation import check_array

from .ranking import DefaultRanker, RPCRanker, check_rankings


def fold_assignment(n: int, folds: int, rng: np.random.Generator) -> np.ndarray:
    """Seeded shuffle, then round-robin: fold sizes differ by at most one."""
    if folds < 2:
        raise ValueError("need at least two folds")
    if n < folds:
        raise ValueError(f"{n} instances cannot fill {folds} folds")
    assignment = np.empty(n, dtype=int)
    assignment[rng.permutation(n)] = np.arange(n) % folds
    return assignment


def _run_fold(K, Y, assignment, f, C, tol, timings):
    test = np.flatnonzero(assignment == f)
    train = np.flatnonzero(assignment != f)
    K_train = K[np.ix_(train, train)]
    K_test = K[np.ix_(test, train)]

    t0 = time.perf_counter()
    rpc = RPCRanker(C=C, tol=tol).fit(K_train, Y[train])
    t1 = time.perf_counter()
    rpc_score = rpc.score(K_test, Y[test])
    t2 = time.perf_counter()
    default = DefaultRanker().fit(K_train, Y[train])

    entry = {
        "fold": f,
        "n_train": int(len(train)),
        "n_test": int(len(test)),
        "rpc_spearman": rpc_score,
        "default_spearman": default.score(K_test, Y[test]),
        "default_ranking": default.ranking_.tolist(),
        "degenerate_pairs": [list(p) for p in rpc.degenerate_pairs_],
    }
    if timings:
        entry["train_time_s"] = t1 - t0
        entry["test_time_s"] = t2 - t1
    return entry


def cross_validate(K, Y, *, C=1.0, folds=10, seed=0, repeats=1, tol=1e-4, n_jobs=None,
                   config=None, timings=False) -> dict:
    """Mean Spearman correlation per fold for RPC and the default predictor.

    ``K`` is the Gram matrix over all tasks; each fold trains on the rows
    and columns of its training split. Folds run concurrently with
    ``n_jobs`` joblib workers. The report is a JSON-ready dict that depends
    only on the inputs and ``seed`` unless ``timings`` is set, which adds
    wall-clock training/testing times.
    """
    K = check_array(K, dtype=float)
    Y = check_rankings(Y)
    if K.shape != (len(Y), len(Y)):
        raise ValueError(f"Gram matrix shape {K.shape} does not match {len(Y)} rankings")
    if repeats < 1:
        raise ValueError("repeats must be at least 1")
    rng = np.random.default_rng(seed)
    assignments = [fold_assignment(len(Y), folds, rng) for _ in range(repeats)]
    entries = Parallel(n_jobs=n_jobs)(
        delayed(_run_fold)(K, Y, a, f, C, tol, timings)
        for a in assignments for f in range(folds)
    )
    runs = []
    for r in range(repeats):
        fold_reports = entries[r * folds:(r + 1) * folds]
        runs.append({
            "repeat": r,
            "folds": fold_reports,
            "rpc_mean": float(np.mean([e["rpc_spearman"] for e in fold_reports])),
            "default_mean": float(np.mean([e["default_spearman"] for e in fold_reports])),
        })

    all_folds = [e for run in runs for e in run["folds"]]
    rpc_scores = np.array([e["rpc_spearman"] for e in all_folds])
    default_scores = np.array([e["default_spearman"] for e in all_folds])
    summary = {
        "rpc_mean": float(rpc_scores.mean()),
        "rpc_std": float(rpc_scores.std()),
        "default_mean": float(default_scores.mean()),
        "default_std": float(default_scores.std()),
    }
    if repeats > 1:
        summary["rpc_std_across_repeats"] = float(np.std([r["rpc_mean"] for r in runs]))
        summary["default_std_across_repeats"] = float(np.std([r["default_mean"] for r in runs]))
    if timings:
        for phase in ("train", "test"):
            vals = np.array([e[f"{phase}_time_s"] for e in all_folds])
            summary[f"{phase}_time_mean_s"] = float(vals.mean())
            summary[f"{phase}_time_std_s"] = float(vals.std())
    report = {
        "seed": seed,
        "folds": folds,
        "repeats": repeats,
        "C": C,
        "n_tasks": int(len(Y)),
        "n_labels": int(Y.shape[1]),
        "runs": runs,
        "summary": summary,
    }
    if config is not None:
        report["config"] = config
    return report


def format_report(report: dict, tools=None) -> str:
    """Human-readable table of a cross-validation report."""
    lines = []
    if "config" in report:
        lines.append(f"config: {report['config']}")
    lines.append(f"tasks={report['n_tasks']} labels={report['n_labels']} "
                 f"folds={report['folds']} repeats={report['repeats']} seed={report['seed']}")
    timed = "train_time_mean_s" in report["summary"]
    header = f"{'run':>3} {'fold':>4} {'n_test':>6} {'RPC':>8} {'default':>8}"
    if timed:
        header += f" {'train[s]':>9} {'test[s]':>9}"
    lines.append(header)
    for run in report["runs"]:
        for e in run["folds"]:
            row = (f"{run['repeat']:>3} {e['fold']:>4} {e['n_test']:>6} "
                   f"{e['rpc_spearman']:>8.3f} {e['default_spearman']:>8.3f}")
            if timed:
                row += f" {e['train_time_s']:>9.3f} {e['test_time_s']:>9.3f}"
            lines.append(row)
    s = report["summary"]
    lines.append(f"RPC      {s['rpc_mean']:.3f} +- {s['rpc_std']:.3f}")
    lines.append(f"default  {s['default_mean']:.3f} +- {s['default_std']:.3f}")
    if timed:
        lines.append(f"train    {s['train_time_mean_s']:.3f}s +- {s['train_time_std_s']:.3f}s")
        lines.append(f"test     {s['test_time_mean_s']:.3f}s +- {s['test_time_std_s']:.3f}s")
    return "\n".join(lines)

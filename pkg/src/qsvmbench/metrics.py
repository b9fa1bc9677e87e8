"""Classification metrics and the paired bootstrap.

Class 1 (the minority class) is the positive class throughout.
"""
from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass

import numpy as np
from scipy.stats import rankdata

from .errors import DataError, DimensionError
from .numerics import Rng

__all__ = [
    "BootstrapResult",
    "MetricsReport",
    "auc_score",
    "evaluate",
    "f1_from_counts",
    "paired_bootstrap",
]


@dataclass
class MetricsReport:
    tp: int
    fp: int
    fn: int
    tn: int
    accuracy: float
    f1_minority: float
    auc: float
    auc_defined: bool = True

    @property
    def n(self) -> int:
        return self.tp + self.fp + self.fn + self.tn

    def to_dict(self) -> dict:
        return asdict(self)


def f1_from_counts(tp, fp, fn):
    """``2tp / (2tp + fp + fn)`` elementwise, with 0/0 taken as 0."""
    tp = np.asarray(tp, dtype=np.float64)
    denom = 2.0 * tp + np.asarray(fp) + np.asarray(fn)
    with np.errstate(invalid="ignore", divide="ignore"):
        out = np.where(denom > 0, 2.0 * tp / np.where(denom > 0, denom, 1.0), 0.0)
    return out if out.ndim else float(out)


def auc_score(y_true, scores) -> float:
    """Mann-Whitney U / (n1 * n0); tied scores count one half.

    Returns 0.5 when either class is absent.
    """
    y = np.asarray(y_true)
    s = np.asarray(scores, dtype=np.float64)
    n1 = int(np.sum(y == 1))
    n0 = y.size - n1
    if n1 == 0 or n0 == 0:
        return 0.5
    ranks = rankdata(s, method="average")
    u = float(np.sum(ranks[y == 1])) - n1 * (n1 + 1) / 2.0
    return u / (n1 * n0)


def evaluate(y_true, y_pred, scores=None) -> MetricsReport:
    y = np.asarray(y_true).astype(np.int64)
    p = np.asarray(y_pred).astype(np.int64)
    if y.shape != p.shape or y.ndim != 1:
        raise DimensionError("y_true and y_pred must be 1-D and equally long")
    if y.size < 1:
        raise DataError("need at least one sample")
    tp = int(np.sum((y == 1) & (p == 1)))
    fp = int(np.sum((y == 0) & (p == 1)))
    fn = int(np.sum((y == 1) & (p == 0)))
    tn = int(np.sum((y == 0) & (p == 0)))
    defined = bool(0 < np.sum(y) < y.size)
    if scores is None:
        auc = 0.5
        defined = False
    else:
        s = np.asarray(scores, dtype=np.float64)
        if s.shape != y.shape:
            raise DimensionError("scores must match y_true")
        auc = auc_score(y, s)
    return MetricsReport(tp, fp, fn, tn, (tp + tn) / y.size, f1_from_counts(tp, fp, fn), auc, defined)


@dataclass
class BootstrapResult:
    delta_observed: float
    delta_mean: float
    ci_lo: float
    ci_hi: float
    p_value: float
    p_value_two_sided: float
    resamples: int
    seed: int
    metric: str = "f1"

    def to_dict(self) -> dict:
        return asdict(self)


def _metric_rows(y, pred, metric):
    if metric == "accuracy":
        return np.mean(y == pred, axis=-1)
    tp = np.sum((y == 1) & (pred == 1), axis=-1)
    fp = np.sum((y == 0) & (pred == 1), axis=-1)
    fn = np.sum((y == 1) & (pred == 0), axis=-1)
    return f1_from_counts(tp, fp, fn)


def paired_bootstrap(
    y_true,
    pred_a,
    pred_b,
    resamples: int = 10_000,
    seed: int = 42,
    *,
    metric: str = "f1",
    threads: int = 1,
    block: int = 1000,
) -> BootstrapResult:
    """Paired bootstrap of ``metric(A) - metric(B)``.

    Resample ``b`` takes the ``n`` draws at stream positions
    ``b*n .. (b+1)*n - 1`` of the splitmix64 stream seeded with ``seed``, so
    blocks of resamples can be evaluated on separate workers with identical
    results. The one-sided p-value tests A > B:
    ``(1 + #{delta* <= 0}) / (B + 1)``. The CI is the 2.5/97.5 percentile
    pair with linear interpolation.
    """
    y = np.asarray(y_true).astype(np.int64)
    a = np.asarray(pred_a).astype(np.int64)
    b = np.asarray(pred_b).astype(np.int64)
    if not (y.shape == a.shape == b.shape) or y.ndim != 1:
        raise DimensionError("y_true, pred_a and pred_b must be equally long 1-D arrays")
    if resamples < 1:
        raise DataError("resamples must be >= 1")
    if metric not in ("f1", "accuracy"):
        raise DataError(f"unknown metric {metric!r}")
    n = y.size
    observed = float(_metric_rows(y, a, metric) - _metric_rows(y, b, metric))
    deltas = np.empty(resamples)

    def run(start):
        stop = min(start + block, resamples)
        idx = Rng(seed).skip(start * n).integers(n, (stop - start, n))
        deltas[start:stop] = _metric_rows(y[idx], a[idx], metric) - _metric_rows(y[idx], b[idx], metric)

    starts = list(range(0, resamples, block))
    if threads > 1 and len(starts) > 1:
        with ThreadPoolExecutor(max_workers=threads) as ex:
            list(ex.map(run, starts))
    else:
        for s in starts:
            run(s)

    lo, hi = np.percentile(deltas, [2.5, 97.5], method="linear")
    le = int(np.sum(deltas <= 0))
    ge = int(np.sum(deltas >= 0))
    p_one = (1 + le) / (resamples + 1)
    p_two = min(1.0, 2.0 * min(p_one, (1 + ge) / (resamples + 1)))
    return BootstrapResult(observed, float(deltas.mean()), float(lo), float(hi),
                           p_one, p_two, int(resamples), int(seed), metric)

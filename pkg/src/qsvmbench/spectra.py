"""Kernel eigenspectrum diagnostics.

The effective rank is the exponential of the Shannon entropy of the
normalized positive eigenvalues, ``exp(-sum p_i ln p_i)`` with
``p_i = lambda_i / sum_j lambda_j``. Eigenvalues at or below
``1e-10 * lambda_max`` count as numerical zeros.
"""
from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass
from pathlib import Path

import numpy as np

from .errors import DataError, DegenerateInputError, NumericalError, UnreachableTargetError
from .kernels import KernelMatrix, rbf_kernel, scale_gamma
from .numerics import Rng, apportion, as_matrix, shuffled_indices, sym_eigvals

__all__ = [
    "REL_THRESHOLD",
    "SpectrumReport",
    "VarianceReport",
    "effective_rank",
    "rank_match_gamma",
    "spectrum",
    "variance_stats",
]

REL_THRESHOLD = 1e-10


@dataclass
class SpectrumReport:
    eigenvalues: np.ndarray
    n_positive: int
    eff_rank: float
    lambda_max: float
    threshold: float

    def to_dict(self, include_eigenvalues: bool = False) -> dict:
        d = {
            "n": int(self.eigenvalues.shape[0]),
            "n_positive": int(self.n_positive),
            "eff_rank": float(self.eff_rank),
            "lambda_max": float(self.lambda_max),
            "threshold": float(self.threshold),
        }
        if include_eigenvalues:
            d["eigenvalues"] = [float(v) for v in self.eigenvalues]
        return d

    def save(self, path, eigen_csv=None) -> None:
        Path(path).write_text(json.dumps(self.to_dict(), indent=2, sort_keys=True))
        if eigen_csv is not None:
            with open(eigen_csv, "w") as fh:
                fh.write("index,eigenvalue\n")
                for i, v in enumerate(self.eigenvalues):
                    fh.write(f"{i},{float(v)!r}\n")


def _entropy_rank(eigenvalues: np.ndarray) -> tuple[int, float, float, float]:
    lam_max = float(eigenvalues[0])
    if not lam_max > 0.0:
        raise DegenerateInputError("kernel has no positive eigenvalue")
    eps = REL_THRESHOLD * lam_max
    pos = eigenvalues[eigenvalues > eps]
    p = pos / pos.sum()
    h = -float(np.sum(p * np.log(p)))
    return int(pos.size), math.exp(h), lam_max, eps


def spectrum(k, method: str = "auto") -> SpectrumReport:
    vals = k.values if isinstance(k, KernelMatrix) else as_matrix(k)
    ev = sym_eigvals(vals, method)
    n_pos, eff, lam_max, eps = _entropy_rank(ev)
    return SpectrumReport(ev, n_pos, eff, lam_max, eps)


def effective_rank(k, method: str = "auto") -> float:
    return spectrum(k, method).eff_rank


@dataclass
class VarianceReport:
    k_mean: float
    k_std: float
    k_var: float
    within_class_mean: float
    between_class_mean: float
    subsample: int
    indices: np.ndarray

    def to_dict(self) -> dict:
        d = asdict(self)
        d["indices"] = [int(i) for i in self.indices]
        return d


def variance_stats(k, labels, subsample: int = 200, rng: Rng | None = None) -> VarianceReport:
    """Off-diagonal statistics of a seeded, class-stratified kernel sub-block.

    The sub-block rows are ordered by class. Within/between means average
    the off-diagonal entries whose index pair has equal/different labels.
    """
    vals = k.values if isinstance(k, KernelMatrix) else as_matrix(k)
    labels = np.asarray(labels)
    n = vals.shape[0]
    if vals.shape != (n, n) or labels.shape != (n,):
        raise DataError("need a square kernel and one label per row")
    if subsample < 2:
        raise DataError("subsample must be >= 2")
    if subsample > n:
        raise DataError(f"subsample {subsample} exceeds kernel size {n}")
    rng = rng if rng is not None else Rng(0)
    classes = sorted(set(labels.tolist()))
    members = [np.flatnonzero(labels == c) for c in classes]
    counts = apportion(subsample, [len(m) for m in members])
    picked = []
    for m, cnt in zip(members, counts):
        perm = shuffled_indices(len(m), rng)
        picked.append(np.sort(m[perm[:cnt]]))
    idx = np.concatenate(picked)

    block = vals[np.ix_(idx, idx)]
    lab = labels[idx]
    off = ~np.eye(idx.size, dtype=bool)
    entries = block[off]
    mean = float(entries.mean())
    var = float(np.mean((entries - mean) ** 2))
    same = (lab[:, None] == lab[None, :]) & off
    diff = lab[:, None] != lab[None, :]
    within = float(block[same].mean()) if same.any() else float("nan")
    between = float(block[diff].mean()) if diff.any() else float("nan")
    return VarianceReport(mean, math.sqrt(var), var, within, between, int(idx.size), idx)


def rank_match_gamma(
    x,
    target_rank: float,
    tol_rel: float = 1e-3,
    *,
    bracket: tuple[float, float] = (1e-6, 1e6),
    max_iter: int = 60,
    method: str = "auto",
) -> float:
    """RBF bandwidth whose train kernel has effective rank ``target_rank``.

    Starting from the "scale" gamma, the bracket is widened by decades on
    log-gamma until it straddles the target, then bisected. Relies on the
    effective rank growing with gamma for distinct rows.
    """
    x = as_matrix(x, "x")
    n = x.shape[0]
    if np.all(x == x[0]):
        raise DegenerateInputError("all rows are identical")
    if not 1.0 < target_rank < n:
        raise UnreachableTargetError(f"target rank {target_rank} outside (1, {n})")
    lo_lim, hi_lim = bracket

    def rank_at(g):
        return effective_rank(rbf_kernel(x, None, g), method)

    def close(r):
        return abs(r - target_rank) <= tol_rel * target_rank

    g0 = min(max(scale_gamma(x), lo_lim), hi_lim)
    r0 = rank_at(g0)
    if close(r0):
        return g0
    if r0 < target_rank:
        lo, hi = g0, g0
        while True:
            hi = min(hi * 10.0, hi_lim)
            r = rank_at(hi)
            if close(r):
                return hi
            if r > target_rank:
                break
            if hi >= hi_lim:
                raise UnreachableTargetError(
                    f"eff_rank {r:.4f} at gamma={hi_lim:g} is below target {target_rank}")
            lo = hi
    else:
        lo, hi = g0, g0
        while True:
            lo = max(lo / 10.0, lo_lim)
            r = rank_at(lo)
            if close(r):
                return lo
            if r < target_rank:
                break
            if lo <= lo_lim:
                raise UnreachableTargetError(
                    f"eff_rank {r:.4f} at gamma={lo_lim:g} is above target {target_rank}")
            hi = lo

    a, b = math.log(lo), math.log(hi)
    for _ in range(max_iter):
        mid = 0.5 * (a + b)
        g = math.exp(mid)
        r = rank_at(g)
        if close(r):
            return g
        if r < target_rank:
            a = mid
        else:
            b = mid
    raise NumericalError(f"bisection did not reach target {target_rank} in {max_iter} steps")

"""C-SVC on a precomputed kernel, solved with SMO.

The dual is written in minimisation form

    min_a  0.5 * a^T Q a - sum(a)   s.t.  0 <= a_i <= C,  y^T a = 0,

with ``Q_ij = y_i y_j K_ij`` and ``y`` in {-1, +1}. Each step picks the
maximal violating pair (WSS1) and solves the two-variable subproblem
analytically.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import DataError, DimensionError
from .kernels import KernelMatrix
from .numerics import check_symmetric

__all__ = ["SvcModel", "decision_scores", "dual_objective", "load_model", "predict", "save_model", "train"]

DEFAULT_TOL = 1e-3
MAX_PAIR_UPDATES = 10_000_000
TAU = 1e-12
REFINE_TOL = 1e-9
REFINE_ROUNDS = 10
REFINE_UPDATES_PER_ROW = 50


@dataclass
class SvcModel:
    dual_coef: np.ndarray
    bias: float
    support: np.ndarray
    c: float
    degenerate: bool = False
    n_iter: int = 0
    converged: bool = True
    max_violation: float = 0.0
    objective_history: list = field(default_factory=list, repr=False)
    kernel_ref: str | None = None

    @property
    def alpha(self) -> np.ndarray:
        return np.abs(self.dual_coef)

    @property
    def n_train(self) -> int:
        return self.dual_coef.shape[0]


def _values(k):
    return k.values if isinstance(k, KernelMatrix) else np.asarray(k, dtype=np.float64)


def dual_objective(alpha, y_signed, k) -> float:
    """``sum(alpha) - 0.5 * sum_ij alpha_i alpha_j y_i y_j K_ij`` (to be maximised)."""
    ay = np.asarray(alpha) * np.asarray(y_signed)
    return float(np.sum(alpha) - 0.5 * ay @ _values(k) @ ay)


def train(
    k_train,
    labels,
    c: float = 1.0,
    *,
    tol: float = DEFAULT_TOL,
    max_iter: int = MAX_PAIR_UPDATES,
    record_objective: bool = False,
    polish: bool = True,
) -> SvcModel:
    """Fit a C-SVC on a square precomputed kernel.

    Labels are 0/1 with 1 mapped to +1. A single-class label vector gives a
    degenerate constant model. The bias averages ``y_i * grad_i`` over free
    support vectors, falling back to the midpoint of the bound-derived
    interval when every multiplier sits at a bound.

    With ``polish`` the converged SMO point is refined: an active-set solve
    over the free multipliers (see ``_polish``) alternates with SMO passes
    at ``REFINE_TOL`` until a pass makes no update. Neither step can lower
    the dual objective, and the result still meets ``tol``.
    """
    kv = _values(k_train)
    check_symmetric(kv, rtol=1e-9, name="training kernel")
    labels = np.asarray(labels)
    n = kv.shape[0]
    if labels.shape != (n,):
        raise DimensionError(f"{labels.shape[0]} labels for a {n}x{n} kernel")
    if not c > 0:
        raise DataError("C must be positive")
    y = np.where(labels == 1, 1.0, -1.0)
    kref = k_train.meta.get("feature_hash") if isinstance(k_train, KernelMatrix) else None

    if np.all(y == y[0]):
        return SvcModel(np.zeros(n), float(y[0]), np.array([], dtype=np.int64), c,
                        degenerate=True, kernel_ref=kref)

    alpha = np.zeros(n)
    grad = -np.ones(n)  # Q a - e
    history = [0.0] if record_objective else None
    alpha, grad, it, viol = _smo(alpha, grad, y, kv, c, tol, max_iter, history)
    converged = viol < tol

    if polish and converged:
        # Alternate the active-set solve with tight SMO passes until the
        # tight pass has nothing left to do.
        budget = REFINE_UPDATES_PER_ROW * n
        for _ in range(REFINE_ROUNDS):
            polished = _polish(alpha, y, kv, c)
            if polished is not None:
                alpha = polished
                grad = y * (kv @ (alpha * y)) - 1.0
            alpha, grad, extra, fine = _smo(alpha, grad, y, kv, c, REFINE_TOL,
                                            min(budget, max_iter - it), None)
            it += extra
            viol = min(viol, fine)
            if extra == 0:
                break
        if history is not None:
            history.append(dual_objective(alpha, y, kv))

    bias = _bias(alpha, grad, y, c)
    dual_coef = alpha * y
    support = np.flatnonzero(alpha > 0)
    return SvcModel(dual_coef, bias, support, c, n_iter=it, converged=converged,
                    max_violation=float(viol), objective_history=history or [], kernel_ref=kref)


def _smo(alpha, grad, y, kv, c, tol, max_iter, history):
    """WSS1 pair updates until the maximal violation drops below ``tol``."""
    diag = np.diag(kv)
    pos = y > 0
    obj = -history[-1] if history else 0.0  # primal-form f(a); dual objective is -f
    it = 0
    viol = np.inf
    while True:
        ygrad = -y * grad
        up = np.where(pos, alpha < c, alpha > 0)
        low = np.where(pos, alpha > 0, alpha < c)
        cand_up = np.where(up, ygrad, -np.inf)
        cand_low = np.where(low, ygrad, np.inf)
        i = int(np.argmax(cand_up))
        j = int(np.argmin(cand_low))
        viol = cand_up[i] - cand_low[j]
        if viol < tol or it >= max_iter:
            break
        a = diag[i] + diag[j] - 2.0 * kv[i, j]
        t = viol / max(a, TAU)
        cap_i = c - alpha[i] if pos[i] else alpha[i]
        cap_j = alpha[j] if pos[j] else c - alpha[j]
        t = min(t, cap_i, cap_j)
        alpha[i] += y[i] * t
        alpha[j] -= y[j] * t
        if t == cap_i:
            alpha[i] = c if pos[i] else 0.0
        if t == cap_j:
            alpha[j] = 0.0 if pos[j] else c
        grad += t * y * (kv[:, i] - kv[:, j])
        if history is not None:
            obj += -viol * t + 0.5 * a * t * t
            history.append(-obj)
        it += 1
    return alpha, grad, it, float(viol)


def _polish(alpha, y, kv, c):
    """Active-set refinement of a converged SMO point.

    Solves the KKT system of the subproblem on the free multipliers, steps
    toward that solution as far as the box allows, pins any multiplier that
    reaches a bound, and repeats. Returns None when nothing changes.
    """
    alpha = alpha.copy()
    changed = False
    for _ in range(alpha.size):
        free = np.flatnonzero((alpha > 0) & (alpha < c))
        if free.size == 0:
            break
        bound = np.flatnonzero(~((alpha > 0) & (alpha < c)))
        ab = alpha[bound] * y[bound]
        m = free.size
        lhs = np.zeros((m + 1, m + 1))
        lhs[:m, :m] = np.outer(y[free], y[free]) * kv[np.ix_(free, free)]
        lhs[:m, m] = y[free]
        lhs[m, :m] = y[free]
        rhs = np.append(1.0 - y[free] * (kv[np.ix_(free, bound)] @ ab), -np.sum(ab))
        # lstsq: the free block is singular when the kernel is rank deficient
        target = np.linalg.lstsq(lhs, rhs, rcond=None)[0][:m]
        if not np.all(np.isfinite(target)):
            break
        step = target - alpha[free]
        with np.errstate(divide="ignore", invalid="ignore"):
            limits = np.where(step > 0, (c - alpha[free]) / step,
                              np.where(step < 0, -alpha[free] / step, np.inf))
        tau = min(1.0, float(np.min(limits)))
        cand = alpha.copy()
        cand[free] = alpha[free] + tau * step
        if tau < 1.0:
            hit = free[limits <= tau]
            cand[hit] = np.where(step[limits <= tau] > 0, c, 0.0)
        if dual_objective(cand, y, kv) < dual_objective(alpha, y, kv):
            break
        alpha = cand
        changed = True
        if tau >= 1.0:
            break
    return alpha if changed else None


def _bias(alpha, grad, y, c) -> float:
    yg = y * grad
    free = (alpha > 0) & (alpha < c)
    if np.any(free):
        rho = float(np.mean(yg[free]))
    else:
        at_upper = alpha >= c
        # bound multipliers pin rho from above (ub) or below (lb)
        ub_mask = (at_upper & (y < 0)) | (~at_upper & (y > 0))
        lb_mask = ~ub_mask
        ub = float(np.min(yg[ub_mask])) if np.any(ub_mask) else np.inf
        lb = float(np.max(yg[lb_mask])) if np.any(lb_mask) else -np.inf
        if np.isinf(ub):
            ub = lb
        if np.isinf(lb):
            lb = ub
        rho = 0.5 * (ub + lb)
    return -rho


def decision_scores(m: SvcModel, k_cross) -> np.ndarray:
    """``K_cross @ dual_coef + bias`` for each test row."""
    kv = _values(k_cross)
    if kv.ndim != 2 or kv.shape[1] != m.n_train:
        raise DimensionError(f"cross kernel has shape {kv.shape}, model has {m.n_train} training rows")
    if m.degenerate:
        return np.full(kv.shape[0], m.bias)
    return kv @ m.dual_coef + m.bias


def predict(m: SvcModel, k_cross) -> np.ndarray:
    """Class 1 where the score is strictly positive, else class 0."""
    return (decision_scores(m, k_cross) > 0).astype(np.int64)


def save_model(m: SvcModel, path) -> Path:
    path = Path(path)
    doc = {
        "dual_coef": m.dual_coef.tolist(),
        "bias": m.bias,
        "support": m.support.tolist(),
        "c": m.c,
        "degenerate": m.degenerate,
        "kernel_sidecar_reference": m.kernel_ref,
    }
    path.write_text(json.dumps(doc, indent=2))
    return path


def load_model(path) -> SvcModel:
    doc = json.loads(Path(path).read_text())
    try:
        return SvcModel(
            np.asarray(doc["dual_coef"], dtype=np.float64),
            float(doc["bias"]),
            np.asarray(doc["support"], dtype=np.int64),
            float(doc["c"]),
            degenerate=bool(doc.get("degenerate", False)),
            kernel_ref=doc.get("kernel_sidecar_reference"),
        )
    except KeyError as exc:
        raise DataError(f"{path}: missing field {exc}") from None

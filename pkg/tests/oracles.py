"""Independent reference implementations used by the tests.

Each one is written the slow, obvious way and shares no code with the
package, so agreement is evidence rather than tautology.
"""
from __future__ import annotations

import itertools
import math

import numpy as np

MASK = (1 << 64) - 1
GOLDEN = 0x9E3779B97F4A7C15


# -- circuits -------------------------------------------------------------------

def _on_qubit(gate, qubit, q):
    # qubit 1 is the least significant bit, i.e. the rightmost kron factor
    op = np.eye(1)
    for k in range(q, 0, -1):
        op = np.kron(op, gate if k == qubit else np.eye(2))
    return op


def ry(theta):
    c, s = math.cos(theta / 2), math.sin(theta / 2)
    return np.array([[c, -s], [s, c]], dtype=complex)


def rz(theta):
    return np.diag([np.exp(-0.5j * theta), np.exp(0.5j * theta)])


def cnot(control, target, q):
    dim = 1 << q
    m = np.zeros((dim, dim), dtype=complex)
    for col in range(dim):
        row = col ^ (1 << (target - 1)) if (col >> (control - 1)) & 1 else col
        m[row, col] = 1.0
    return m


def circuit_unitary(u, q, reps=1, dof=1, rz_angles=None):
    rz_angles = u if rz_angles is None else rz_angles
    total = np.eye(1 << q, dtype=complex)
    for _ in range(reps):
        for d in range(1, q + 1):
            if dof == 3:
                g = rz(rz_angles[d - 1]) @ ry(u[d - 1]) @ rz(rz_angles[d - 1])
            else:
                g = ry(u[d - 1])
            total = _on_qubit(g, d, q) @ total
            total = cnot(d, d % q + 1, q) @ total
    return total


def dense_state(u, q, reps=1, dof=1, rz_angles=None):
    return circuit_unitary(u, q, reps, dof, rz_angles)[:, 0]


def compute_uncompute(u, v, q, reps=1, dof=1):
    """Probability of measuring |0...0> after U(v)^dagger U(u) |0...0>."""
    w = circuit_unitary(v, q, reps, dof).conj().T @ circuit_unitary(u, q, reps, dof)
    return abs(w[0, 0]) ** 2


def z_expectation(state, qubit):
    total = 0.0
    for idx, amp in enumerate(state):
        sign = -1.0 if (idx >> (qubit - 1)) & 1 else 1.0
        total += sign * abs(amp) ** 2
    return total


# -- linear algebra ---------------------------------------------------------------

def naive_matmul(a, b):
    n, m = len(a), len(b[0])
    out = np.zeros((n, m))
    for i in range(n):
        for j in range(m):
            s = 0.0
            for k in range(len(b)):
                s += a[i][k] * b[k][j]
            out[i, j] = s
    return out


def two_pass_var(values):
    vals = [float(v) for v in values]
    mean = sum(vals) / len(vals)
    return mean, sum((v - mean) ** 2 for v in vals) / len(vals)


# -- prng -------------------------------------------------------------------------

def splitmix64(seed):
    state = seed & MASK
    while True:
        state = (state + GOLDEN) & MASK
        z = state
        z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & MASK
        z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & MASK
        yield z ^ (z >> 31)


def uniform_index(word, bound):
    u = (word >> 11) * 2.0 ** -53
    return min(int(math.floor(u * bound)), bound - 1)


# -- metrics ----------------------------------------------------------------------

def pair_count_auc(y, s):
    pos = [si for yi, si in zip(y, s) if yi == 1]
    neg = [si for yi, si in zip(y, s) if yi == 0]
    if not pos or not neg:
        return 0.5
    total = 0.0
    for a, b in itertools.product(pos, neg):
        total += 1.0 if a > b else 0.5 if a == b else 0.0
    return total / (len(pos) * len(neg))


def f1(y, p):
    tp = sum(1 for a, b in zip(y, p) if a == 1 and b == 1)
    fp = sum(1 for a, b in zip(y, p) if a == 0 and b == 1)
    fn = sum(1 for a, b in zip(y, p) if a == 1 and b == 0)
    return 0.0 if 2 * tp + fp + fn == 0 else 2 * tp / (2 * tp + fp + fn)


def bootstrap_deltas(y, a, b, resamples, seed):
    """Resampling loop driven by the pure-Python splitmix64 generator."""
    n = len(y)
    gen = splitmix64(seed)
    out = []
    for _ in range(resamples):
        idx = [uniform_index(next(gen), n) for _ in range(n)]
        yy = [y[i] for i in idx]
        out.append(f1(yy, [a[i] for i in idx]) - f1(yy, [b[i] for i in idx]))
    return out


def percentile_linear(values, pct):
    v = sorted(values)
    pos = (len(v) - 1) * pct / 100.0
    lo = math.floor(pos)
    hi = min(lo + 1, len(v) - 1)
    return v[lo] + (v[hi] - v[lo]) * (pos - lo)


# -- quadratic programming ---------------------------------------------------------

def svm_dual_qp(k, labels, c):
    """Exact C-SVC dual via cvxopt; returns (alpha, bias, objective)."""
    from cvxopt import matrix, solvers

    y = np.where(np.asarray(labels) == 1, 1.0, -1.0)
    n = y.size
    p = np.outer(y, y) * k
    solvers.options.update(show_progress=False, abstol=1e-12, reltol=1e-12, feastol=1e-12,
                           maxiters=200)
    sol = solvers.qp(
        matrix(p), matrix(-np.ones(n)),
        matrix(np.vstack([-np.eye(n), np.eye(n)])),
        matrix(np.concatenate([np.zeros(n), np.full(n, c)])),
        matrix(y[None, :]), matrix(0.0),
    )
    alpha = np.clip(np.array(sol["x"]).ravel(), 0.0, c)
    obj = float(alpha.sum() - 0.5 * alpha @ p @ alpha)
    eps = 1e-6 * c
    free = (alpha > eps) & (alpha < c - eps)
    if free.any():
        bias = float(np.mean(y[free] - (k @ (alpha * y))[free]))
    else:
        # midpoint of the feasible bias interval
        g = y - k @ (alpha * y)
        # y_i (f_i + b) >= 1 at alpha_i = 0 and <= 1 at alpha_i = C
        up = ((alpha < eps) & (y < 0)) | ((alpha > c - eps) & (y > 0))
        lo = ((alpha < eps) & (y > 0)) | ((alpha > c - eps) & (y < 0))
        ub = g[up].min() if up.any() else np.inf
        lb = g[lo].max() if lo.any() else -np.inf
        bias = float(0.5 * (ub + lb))
    return alpha, bias, obj


def random_psd(rng, n, rank=None):
    rank = rank or n
    a = rng.normal(size=(n, rank))
    return a @ a.T / rank

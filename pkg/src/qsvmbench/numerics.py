"""Dense linear-algebra primitives and the portable splitmix64 generator.

Matrices are plain ``float64`` numpy arrays. The PRNG is implemented here
(rather than taken from ``numpy.random``) so that a seed produces the same
stream on every platform and in every implementation of the pipeline.
"""
from __future__ import annotations

import math

import numpy as np

from .errors import DimensionError, NumericalError, SymmetryError

__all__ = [
    "Rng",
    "apportion",
    "as_matrix",
    "check_symmetric",
    "jacobi_eigh",
    "matmul",
    "shuffled_indices",
    "sym_eigen",
    "sym_eigvals",
]

JACOBI_MAX_N = 48
"""Largest size for which ``sym_eigen(method="auto")`` uses the Jacobi solver."""


def as_matrix(a, name: str = "matrix") -> np.ndarray:
    m = np.asarray(a, dtype=np.float64)
    if m.ndim != 2:
        raise DimensionError(f"{name} must be 2-D, got shape {m.shape}")
    if not np.all(np.isfinite(m)):
        raise DimensionError(f"{name} contains non-finite entries")
    return m


def check_symmetric(m: np.ndarray, rtol: float = 1e-9, name: str = "matrix") -> None:
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise DimensionError(f"{name} must be square, got shape {m.shape}")
    scale = max(1.0, float(np.max(np.abs(m)))) if m.size else 1.0
    if m.size and float(np.max(np.abs(m - m.T))) > rtol * scale:
        raise SymmetryError(f"{name} is not symmetric within {rtol:g} relative")


def matmul(a, b) -> np.ndarray:
    """Matrix product with a fixed reduction order.

    The inner dimension is accumulated left to right with elementwise
    operations only, so the result equals the naive triple loop bit for bit
    and does not depend on BLAS threading.
    """
    a = as_matrix(a, "a")
    b = as_matrix(b, "b")
    if a.shape[1] != b.shape[0]:
        raise DimensionError(f"cannot multiply {a.shape} by {b.shape}")
    out = np.zeros((a.shape[0], b.shape[1]))
    for k in range(a.shape[1]):
        out += a[:, k, None] * b[None, k, :]
    return out


def jacobi_eigh(
    m, tol: float = 1e-12, max_sweeps: int = 100
) -> tuple[np.ndarray, np.ndarray]:
    """Cyclic Jacobi eigendecomposition of a symmetric matrix.

    Sweeps over all (p, q) pairs in row order, annihilating each off-diagonal
    entry with a plane rotation, until the off-diagonal Frobenius norm drops
    below ``tol * ||m||_F``.

    Returns eigenvalues sorted descending and the matching eigenvectors as
    columns.
    """
    a = as_matrix(m).copy()
    check_symmetric(a)
    n = a.shape[0]
    v = np.eye(n)
    norm = float(np.linalg.norm(a))
    if n == 1 or norm == 0.0:
        return _sorted_desc(np.diag(a).copy(), v)
    threshold = tol * norm

    for _ in range(max_sweeps):
        sq = a * a
        np.fill_diagonal(sq, 0.0)
        off = math.sqrt(float(np.sum(sq)))
        if off < threshold:
            return _sorted_desc(np.diag(a).copy(), v)
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = float(a[p, q])
                if abs(apq) < 1e-300:
                    continue
                theta = (a[q, q] - a[p, p]) / (2.0 * apq)
                if abs(theta) > 1e150:
                    t = 0.5 / theta
                else:
                    t = math.copysign(1.0, theta) / (abs(theta) + math.sqrt(theta * theta + 1.0))
                c = 1.0 / math.sqrt(t * t + 1.0)
                s = t * c
                # A <- J^T A J restricted to rows/cols p, q
                ap = a[:, p].copy()
                aq = a[:, q]
                a[:, p] = c * ap - s * aq
                a[:, q] = s * ap + c * aq
                ap = a[p, :].copy()
                aq = a[q, :]
                a[p, :] = c * ap - s * aq
                a[q, :] = s * ap + c * aq
                a[p, q] = a[q, p] = 0.0
                vp = v[:, p].copy()
                vq = v[:, q]
                v[:, p] = c * vp - s * vq
                v[:, q] = s * vp + c * vq
    raise NumericalError(f"Jacobi did not converge in {max_sweeps} sweeps")


def _sorted_desc(w: np.ndarray, v: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    order = np.argsort(-w, kind="stable")
    return w[order], v[:, order]


def sym_eigen(m, method: str = "auto") -> tuple[np.ndarray, np.ndarray]:
    """Eigenvalues (descending) and orthonormal eigenvectors of a symmetric matrix.

    ``method`` is ``"jacobi"``, ``"lapack"`` or ``"auto"``; auto uses Jacobi
    up to ``JACOBI_MAX_N`` rows and LAPACK's divide-and-conquer solver above.
    """
    a = as_matrix(m)
    check_symmetric(a)
    if a.shape[0] < 1:
        raise DimensionError("empty matrix")
    if method == "auto":
        method = "jacobi" if a.shape[0] <= JACOBI_MAX_N else "lapack"
    if method == "jacobi":
        return jacobi_eigh(a)
    if method == "lapack":
        w, v = np.linalg.eigh(0.5 * (a + a.T))
        return w[::-1].copy(), v[:, ::-1].copy()
    raise ValueError(f"unknown eigensolver {method!r}")


def sym_eigvals(m, method: str = "auto") -> np.ndarray:
    """Eigenvalues only, sorted descending."""
    a = as_matrix(m)
    check_symmetric(a)
    if method == "auto":
        method = "jacobi" if a.shape[0] <= JACOBI_MAX_N else "lapack"
    if method == "lapack":
        return np.linalg.eigvalsh(0.5 * (a + a.T))[::-1].copy()
    return sym_eigen(a, method)[0]


_GOLDEN = np.uint64(0x9E3779B97F4A7C15)
_MIX1 = np.uint64(0xBF58476D1CE4E5B9)
_MIX2 = np.uint64(0x94D049BB133111EB)
_MASK = (1 << 64) - 1


class Rng:
    """splitmix64 stream.

    Output ``k`` (1-based) is ``mix(seed + k * 0x9E3779B97F4A7C15)``, so any
    block of outputs can be produced in one vectorised call and the stream is
    identical on every platform.
    """

    def __init__(self, seed: int):
        self.seed = int(seed) & _MASK
        self.counter = 0

    def skip(self, k: int) -> "Rng":
        """Advance the stream by ``k`` outputs without generating them."""
        self.counter += int(k)
        return self

    def next_u64_block(self, k: int) -> np.ndarray:
        k = int(k)
        if k < 0:
            raise ValueError("k must be non-negative")
        steps = np.arange(self.counter + 1, self.counter + k + 1, dtype=np.uint64)
        self.counter += k
        z = np.uint64(self.seed) + steps * _GOLDEN
        z = (z ^ (z >> np.uint64(30))) * _MIX1
        z = (z ^ (z >> np.uint64(27))) * _MIX2
        return z ^ (z >> np.uint64(31))

    def next_u64(self) -> int:
        return int(self.next_u64_block(1)[0])

    def uniform_block(self, k: int) -> np.ndarray:
        """Floats in [0, 1) built from the top 53 bits of each output."""
        return (self.next_u64_block(k) >> np.uint64(11)).astype(np.float64) * 2.0**-53

    def below_block(self, bounds) -> np.ndarray:
        """One integer in ``[0, bound)`` per entry of ``bounds``."""
        bounds = np.asarray(bounds, dtype=np.int64)
        u = self.uniform_block(bounds.size).reshape(bounds.shape)
        j = np.floor(u * bounds).astype(np.int64)
        return np.minimum(j, bounds - 1)

    def integers(self, bound: int, size) -> np.ndarray:
        """Array of shape ``size`` with integers drawn uniformly from ``[0, bound)``."""
        if bound < 1:
            raise ValueError("bound must be >= 1")
        count = int(np.prod(size))
        u = self.uniform_block(count)
        j = np.minimum(np.floor(u * bound).astype(np.int64), bound - 1)
        return j.reshape(size)


def apportion(total: int, sizes) -> list[int]:
    """Split ``total`` across groups proportionally to ``sizes`` (largest remainder).

    Ties in the fractional remainder go to the lower group index.
    """
    n = sum(sizes)
    quotas = [total * s / n for s in sizes]
    alloc = [int(math.floor(x)) for x in quotas]
    order = sorted(range(len(quotas)), key=lambda k: (-(quotas[k] - alloc[k]), k))
    for k in order[: total - sum(alloc)]:
        alloc[k] += 1
    return alloc


def shuffled_indices(n: int, rng: Rng) -> np.ndarray:
    """Fisher-Yates permutation of ``0..n-1``.

    Step ``i`` (from ``n-1`` down to 1) swaps position ``i`` with a position
    drawn uniformly from ``[0, i]``.
    """
    if n < 0:
        raise ValueError("n must be non-negative")
    perm = np.arange(n, dtype=np.int64)
    if n < 2:
        return perm
    bounds = np.arange(n, 1, -1, dtype=np.int64)  # i + 1 for i = n-1 .. 1
    picks = rng.below_block(bounds)
    for i, j in zip(range(n - 1, 0, -1), picks.tolist()):
        perm[i], perm[j] = perm[j], perm[i]
    return perm

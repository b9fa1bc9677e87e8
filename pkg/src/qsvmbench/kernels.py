"""Quantum and classical kernel matrices, normalization, and on-disk format."""
from __future__ import annotations

import hashlib
import json
import struct
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import DataError, DegenerateInputError, DimensionError
from .numerics import as_matrix, check_symmetric, matmul
from .statevec import CircuitConfig, bsp_states

__all__ = [
    "KERNEL_KINDS",
    "NORMALIZATIONS",
    "KernelMatrix",
    "NormalizationStats",
    "feature_hash",
    "fit_normalization",
    "linear_kernel",
    "load_kernel",
    "normalize",
    "normalize_test",
    "projected_kernel",
    "quantum_kernel",
    "rbf_kernel",
    "save_kernel",
    "scale_gamma",
]

KERNEL_KINDS = ("quantum_fidelity", "projected", "linear", "rbf")
NORMALIZATIONS = ("none", "trace", "frobenius", "cosine")

DEFAULT_MEMORY_CAP = 4 * 1024**3
STRIPE_ROWS = 256  # fixed so results do not depend on the worker count


@dataclass
class KernelMatrix:
    values: np.ndarray
    kind: str
    normalization: str = "none"
    train_trace: float | None = None
    meta: dict = field(default_factory=dict)

    @property
    def shape(self) -> tuple[int, int]:
        return self.values.shape

    @property
    def is_square(self) -> bool:
        return self.values.shape[0] == self.values.shape[1]


def feature_hash(*arrays) -> str:
    h = hashlib.sha256()
    for a in arrays:
        a = np.ascontiguousarray(a, dtype=np.float64)
        h.update(str(a.shape).encode())
        h.update(a.tobytes())
    return h.hexdigest()


def _check_columns(left, right, name="kernel"):
    if left.shape[1] != right.shape[1]:
        raise DimensionError(
            f"{name}: column counts differ ({left.shape[1]} vs {right.shape[1]})"
        )


def _block_rows(n_total: int, dim: int, itemsize: int, memory_cap: int | None) -> int:
    """Rows of statevectors per block so that two blocks fit in the cap."""
    if memory_cap is None:
        return max(n_total, 1)
    per_row = dim * itemsize
    rows = int(memory_cap // (2 * per_row))
    if rows < 1:
        raise DataError("memory cap too small for a single statevector")
    return rows


def _overlap_sq(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    if np.iscomplexobj(a):
        g = a.conj() @ b.T
        return g.real**2 + g.imag**2
    g = a @ b.T
    return g * g


def quantum_kernel(
    left,
    right=None,
    cfg: CircuitConfig | None = None,
    *,
    memory_cap_bytes: int | None = DEFAULT_MEMORY_CAP,
    threads: int = 1,
) -> KernelMatrix:
    """Fidelity kernel ``|<psi(x_i)|psi(y_j)>|**2`` from the BSP circuit.

    With ``right=None`` the symmetric train kernel of ``left`` is built:
    only blocks on or above the diagonal are computed and the upper triangle
    is mirrored. Statevectors are prepared once when they fit under
    ``memory_cap_bytes``; otherwise rows are processed in stripes and the
    right-hand states are recomputed for every stripe. The two paths agree
    to rounding (BLAS block shapes differ); each is bit-reproducible for a
    given cap and independent of ``threads``.
    """
    if cfg is None:
        raise TypeError("quantum_kernel requires a CircuitConfig")
    left = as_matrix(left, "left")
    symmetric = right is None
    right_m = left if symmetric else as_matrix(right, "right")
    for m in (left, right_m):
        if m.shape[1] != cfg.num_qubits:
            raise DimensionError(
                f"features have {m.shape[1]} columns, circuit has {cfg.num_qubits} qubits"
            )
    n_l, n_r = left.shape[0], right_m.shape[0]
    itemsize = np.dtype(cfg.dtype).itemsize
    fits = memory_cap_bytes is None or (n_l + (0 if symmetric else n_r)) * cfg.dim * itemsize <= memory_cap_bytes
    out = np.zeros((n_l, n_r))

    if fits:
        sl = bsp_states(left, cfg)
        sr = sl if symmetric else bsp_states(right_m, cfg)
        step = STRIPE_ROWS
        starts = list(range(0, n_l, step))

        def stripe(i0):
            i1 = min(i0 + step, n_l)
            j0 = i0 if symmetric else 0
            out[i0:i1, j0:] = _overlap_sq(sl[i0:i1], sr[j0:])

        _run(stripe, starts, threads)
    else:
        rows = _block_rows(n_l + n_r, cfg.dim, itemsize, memory_cap_bytes)
        starts = list(range(0, n_l, rows))

        def stripe(i0):
            i1 = min(i0 + rows, n_l)
            sl = bsp_states(left[i0:i1], cfg)
            for j0 in range(i0 if symmetric else 0, n_r, rows):
                j1 = min(j0 + rows, n_r)
                sr = sl if (symmetric and j0 == i0) else bsp_states(right_m[j0:j1], cfg)
                out[i0:i1, j0:j1] = _overlap_sq(sl, sr)

        _run(stripe, starts, threads)

    if symmetric:
        upper = np.triu(out)
        out = upper + np.triu(out, 1).T
        np.fill_diagonal(out, 1.0)  # states are unit vectors; drop the rounding
    meta = {
        "circuit": cfg.to_dict(),
        "feature_hash": feature_hash(left) if symmetric else feature_hash(left, right_m),
        "blocked": not fits,
    }
    return KernelMatrix(out, "quantum_fidelity", meta=meta)


def _run(fn, items, threads):
    if threads <= 1 or len(items) <= 1:
        for it in items:
            fn(it)
        return
    with ThreadPoolExecutor(max_workers=threads) as ex:
        list(ex.map(fn, items))


def _sq_dists(left: np.ndarray, right: np.ndarray) -> np.ndarray:
    # accumulate per feature; avoids the cancellation of |x|^2 + |y|^2 - 2xy
    d2 = np.zeros((left.shape[0], right.shape[0]))
    for k in range(left.shape[1]):
        diff = left[:, k, None] - right[None, :, k]
        d2 += diff * diff
    return d2


def rbf_kernel(left, right=None, gamma: float = 1.0, *, kind: str = "rbf") -> KernelMatrix:
    """``exp(-gamma * ||x_i - y_j||**2)``."""
    if not gamma > 0:
        raise DegenerateInputError("gamma must be positive")
    left = as_matrix(left, "left")
    right_m = left if right is None else as_matrix(right, "right")
    _check_columns(left, right_m, kind)
    vals = np.exp(-gamma * _sq_dists(left, right_m))
    if right is None:
        vals = np.triu(vals) + np.triu(vals, 1).T
    return KernelMatrix(vals, kind, meta={"gamma": float(gamma)})


def projected_kernel(left_z, right_z=None, gamma: float = 1.0) -> KernelMatrix:
    """RBF kernel over per-qubit Pauli-Z expectation vectors."""
    left_z = as_matrix(left_z, "left_z")
    for z in (left_z, right_z):
        if z is not None and np.any(np.abs(np.asarray(z)) > 1.0):
            raise DataError("Pauli-Z expectations must lie in [-1, 1]")
    return rbf_kernel(left_z, right_z, gamma, kind="projected")


def linear_kernel(left, right=None) -> KernelMatrix:
    left = as_matrix(left, "left")
    right_m = left if right is None else as_matrix(right, "right")
    _check_columns(left, right_m, "linear")
    vals = matmul(left, right_m.T)
    if right is None:
        vals = np.triu(vals) + np.triu(vals, 1).T
    return KernelMatrix(vals, "linear")


def scale_gamma(x) -> float:
    """``1 / (n_features * var(x))`` with the population variance of all entries.

    This is the "scale" heuristic of common SVM libraries.
    """
    x = as_matrix(x, "x")
    if x.size < 2:
        raise DegenerateInputError("need at least two entries")
    var = float(np.var(x))
    if var <= 0.0:
        raise DegenerateInputError("zero variance input")
    return 1.0 / (x.shape[1] * var)


@dataclass(frozen=True)
class NormalizationStats:
    mode: str
    scale: float = 1.0
    train_diag: np.ndarray | None = None


def fit_normalization(k: KernelMatrix, mode: str) -> NormalizationStats:
    if mode not in NORMALIZATIONS:
        raise DataError(f"unknown normalization {mode!r}")
    vals = k.values
    check_symmetric(vals, rtol=1e-10, name="train kernel")
    if mode == "none":
        return NormalizationStats(mode)
    if mode == "trace":
        tr = float(np.trace(vals))
        if tr == 0.0:
            raise DegenerateInputError("zero kernel trace")
        return NormalizationStats(mode, tr)
    if mode == "frobenius":
        fro = float(np.linalg.norm(vals))
        if fro == 0.0:
            raise DegenerateInputError("zero Frobenius norm")
        return NormalizationStats(mode, fro)
    diag = np.diag(vals).copy()
    if np.any(diag <= 0.0):
        raise DegenerateInputError("cosine normalization needs a positive diagonal")
    return NormalizationStats(mode, 1.0, diag)


def _with_values(k: KernelMatrix, values, stats: NormalizationStats) -> KernelMatrix:
    return KernelMatrix(
        values,
        k.kind,
        stats.mode,
        stats.scale if stats.mode == "trace" else None,
        dict(k.meta),
    )


def normalize(k: KernelMatrix, mode: str) -> KernelMatrix:
    """Normalize a square train kernel; see ``fit_normalization`` for the modes."""
    if k.normalization != "none":
        raise DataError("kernel is already normalized")
    stats = fit_normalization(k, mode)
    vals = k.values
    if mode in ("trace", "frobenius"):
        vals = vals / stats.scale
    elif mode == "cosine":
        s = np.sqrt(stats.train_diag)
        vals = vals / s[:, None] / s[None, :]
        vals = np.triu(vals) + np.triu(vals, 1).T
    else:
        vals = vals.copy()
    return _with_values(k, vals, stats)


def normalize_test(
    k_test: KernelMatrix, stats: NormalizationStats, test_diag=None
) -> KernelMatrix:
    """Normalize a (test x train) block with statistics of the train kernel.

    Trace and Frobenius modes divide by the training scalar. Cosine mode uses
    the training diagonal for columns and ``test_diag`` (each test sample's
    self-kernel) for rows; it defaults to ones, which is exact for fidelity
    and RBF-type kernels.
    """
    vals = k_test.values
    if stats.mode in ("trace", "frobenius"):
        vals = vals / stats.scale
    elif stats.mode == "cosine":
        if vals.shape[1] != stats.train_diag.shape[0]:
            raise DimensionError("test block columns do not match the train kernel")
        if test_diag is None:
            if k_test.kind == "linear":
                raise DataError("cosine-normalizing a linear test block needs test_diag")
            test_diag = np.ones(vals.shape[0])
        test_diag = np.asarray(test_diag, dtype=np.float64)
        if np.any(test_diag <= 0.0):
            raise DegenerateInputError("non-positive test self-kernel")
        vals = vals / np.sqrt(test_diag)[:, None] / np.sqrt(stats.train_diag)[None, :]
    else:
        vals = vals.copy()
    return _with_values(k_test, vals, stats)


_MAGIC = b"QKMX"
_VERSION = 1
_HEADER = struct.Struct("<4sHII2x")


def save_kernel(k: KernelMatrix, path) -> Path:
    """Write ``path`` (binary matrix) and ``path.json`` (metadata sidecar)."""
    path = Path(path)
    vals = np.ascontiguousarray(k.values, dtype="<f8")
    rows, cols = vals.shape
    with open(path, "wb") as fh:
        fh.write(_HEADER.pack(_MAGIC, _VERSION, rows, cols))
        fh.write(vals.tobytes())
    sidecar = {
        "kind": k.kind,
        "normalization": k.normalization,
        "train_trace": k.train_trace,
        "circuit": k.meta.get("circuit"),
        "feature_hash": k.meta.get("feature_hash"),
        "meta": {key: v for key, v in k.meta.items() if key not in ("circuit", "feature_hash")},
    }
    Path(str(path) + ".json").write_text(json.dumps(sidecar, indent=2, sort_keys=True))
    return path


def load_kernel(path) -> KernelMatrix:
    path = Path(path)
    raw = path.read_bytes()
    if len(raw) < _HEADER.size:
        raise DataError(f"{path}: truncated header")
    magic, version, rows, cols = _HEADER.unpack_from(raw)
    if magic != _MAGIC:
        raise DataError(f"{path}: bad magic {magic!r}")
    if version != _VERSION:
        raise DataError(f"{path}: unsupported version {version}")
    expected = _HEADER.size + 8 * rows * cols
    if len(raw) != expected:
        raise DataError(f"{path}: expected {expected} bytes, found {len(raw)}")
    vals = np.frombuffer(raw, dtype="<f8", offset=_HEADER.size).reshape(rows, cols).astype(np.float64)
    side_path = Path(str(path) + ".json")
    side = json.loads(side_path.read_text()) if side_path.exists() else {}
    meta = dict(side.get("meta") or {})
    if side.get("circuit") is not None:
        meta["circuit"] = side["circuit"]
    if side.get("feature_hash") is not None:
        meta["feature_hash"] = side["feature_hash"]
    return KernelMatrix(
        vals,
        side.get("kind", "quantum_fidelity"),
        side.get("normalization", "none"),
        side.get("train_trace"),
        meta,
    )

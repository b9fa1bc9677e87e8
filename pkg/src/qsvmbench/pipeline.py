"""Embedding ingestion, stratified splitting, and the standardize -> PCA -> MinMax chain.

Every fitted quantity comes from the training rows only; validation and test
rows are pushed through ``transform`` without touching the fitted state.
"""
from __future__ import annotations

import csv
import json
import logging
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from scipy.linalg import hadamard

from .errors import DataError, DegenerateInputError, DimensionError
from .numerics import Rng, apportion, as_matrix, shuffled_indices, sym_eigen

__all__ = [
    "Dataset",
    "FittedPipeline",
    "SplitIndices",
    "fit",
    "load_embeddings",
    "make_synthetic",
    "save_embeddings",
    "split",
    "transform",
]

log = logging.getLogger(__name__)

STD_FLOOR = 1e-12
SPLIT_FRACTIONS = (0.8, 0.1)


@dataclass
class Dataset:
    ids: list[str]
    labels: np.ndarray
    features: np.ndarray
    manifest: dict = field(default_factory=dict)

    def __post_init__(self):
        self.labels = np.asarray(self.labels, dtype=np.int64)
        self.features = as_matrix(self.features, "features")
        n = self.features.shape[0]
        if len(self.ids) != n or self.labels.shape != (n,):
            raise DimensionError("ids, labels and features disagree on sample count")
        if len(set(self.ids)) != n:
            raise DataError("duplicate sample ids")
        if not np.all((self.labels == 0) | (self.labels == 1)):
            raise DataError("labels must be 0 or 1")
        if n < 10:
            raise DataError("a dataset needs at least 10 samples")

    def __len__(self):
        return self.features.shape[0]

    @property
    def dim(self) -> int:
        return self.features.shape[1]


def load_embeddings(path, manifest_path=None) -> Dataset:
    """Read ``id,label,e0,...,e{D-1}`` CSV plus an optional JSON manifest.

    Without ``manifest_path`` a sibling ``<stem>.json`` is used if present.
    """
    path = Path(path)
    if not path.exists():
        raise DataError(f"embedding file not found: {path}")
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise DataError(f"{path}: empty file") from None
        if header[:2] != ["id", "label"] or header[2:] != [f"e{i}" for i in range(len(header) - 2)]:
            raise DataError(f"{path}: header must be id,label,e0,...,e{{D-1}}")
        ids, labels, rows = [], [], []
        for lineno, rec in enumerate(reader, start=2):
            if not rec:
                continue
            if len(rec) != len(header):
                raise DataError(f"{path}:{lineno}: expected {len(header)} fields")
            try:
                labels.append(int(rec[1]))
                rows.append([float(v) for v in rec[2:]])
            except ValueError as exc:
                raise DataError(f"{path}:{lineno}: {exc}") from None
            ids.append(rec[0])
    if not rows:
        raise DataError(f"{path}: no samples")
    manifest = {}
    mpath = Path(manifest_path) if manifest_path else path.with_suffix(".json")
    if mpath.exists():
        manifest = json.loads(mpath.read_text())
        if "dim" in manifest and int(manifest["dim"]) != len(header) - 2:
            raise DataError(f"{mpath}: manifest dim {manifest['dim']} != {len(header) - 2}")
    return Dataset(ids, np.array(labels), np.array(rows, dtype=np.float64), manifest)


def save_embeddings(ds: Dataset, path) -> Path:
    path = Path(path)
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["id", "label"] + [f"e{i}" for i in range(ds.dim)])
        for i in range(len(ds)):
            w.writerow([ds.ids[i], int(ds.labels[i])] + [repr(float(v)) for v in ds.features[i]])
    if ds.manifest:
        path.with_suffix(".json").write_text(json.dumps(ds.manifest, indent=2, sort_keys=True))
    return path


@dataclass(frozen=True)
class SplitIndices:
    train: np.ndarray
    val: np.ndarray
    test: np.ndarray


def split(ds: Dataset, seed: int) -> SplitIndices:
    """Stratified 80/10/10 split.

    Global sizes are ``floor(0.8 N)`` train and ``floor(0.1 N)`` validation
    with the remainder going to test; each size is shared across classes by
    largest remainder. Within a class the members are Fisher-Yates shuffled
    (class 0 first, one splitmix64 stream) and dealt out train, val, test.
    """
    n = len(ds)
    n_train = int(np.floor(SPLIT_FRACTIONS[0] * n))
    n_val = int(np.floor(SPLIT_FRACTIONS[1] * n))
    members = [np.flatnonzero(ds.labels == c) for c in (0, 1)]
    sizes = [len(m) for m in members]
    if min(sizes) < 3:
        raise DataError("each class needs at least 3 samples to split")
    tr = apportion(n_train, sizes)
    va = apportion(n_val, sizes)
    rng = Rng(seed)
    parts = ([], [], [])
    for c, m in enumerate(members):
        perm = m[shuffled_indices(len(m), rng)]
        parts[0].append(perm[: tr[c]])
        parts[1].append(perm[tr[c] : tr[c] + va[c]])
        parts[2].append(perm[tr[c] + va[c] :])
    return SplitIndices(*(np.sort(np.concatenate(p)) for p in parts))


@dataclass(frozen=True)
class FittedPipeline:
    means: np.ndarray
    stds: np.ndarray
    pca_components: np.ndarray
    pca_explained_fraction: np.ndarray
    minmax_lo: np.ndarray
    minmax_hi: np.ndarray

    @property
    def num_components(self) -> int:
        return self.pca_components.shape[0]


def _project(p_means, p_stds, components, rows):
    z = (rows - p_means) / p_stds
    return z @ components.T


def fit(ds: Dataset, train_idx, q: int) -> FittedPipeline:
    """Fit scaler, PCA-q and MinMax bounds on the training rows.

    PCA uses the eigendecomposition of the D x D covariance, or of the
    n x n Gram matrix when there are fewer training rows than features.
    Each component's sign is fixed so its largest-magnitude coordinate is
    positive.
    """
    train_idx = np.asarray(train_idx, dtype=np.int64)
    x = ds.features[train_idx]
    n, d = x.shape
    if not 1 <= q <= min(n, d):
        raise DegenerateInputError(f"q={q} exceeds min(|train|={n}, D={d})")
    means = x.mean(axis=0)
    stds = np.maximum(x.std(axis=0), STD_FLOOR)
    z = (x - means) / stds

    if d <= n:
        cov = z.T @ z / n
        cov = 0.5 * (cov + cov.T)
        evals, evecs = sym_eigen(cov)
        total = float(np.trace(cov))
        comps = evecs[:, :q].T.copy()
    else:
        gram = z @ z.T / n
        gram = 0.5 * (gram + gram.T)
        evals, evecs = sym_eigen(gram)
        total = float(np.trace(gram))
        lead = evals[:q]
        if np.any(lead <= 1e-12 * max(evals[0], 1e-300)):
            raise DegenerateInputError(f"q={q} exceeds the rank of the training data")
        comps = (z.T @ evecs[:, :q] / np.sqrt(n * lead)).T
    evals = np.clip(evals, 0.0, None)
    if total <= 0.0:
        raise DegenerateInputError("training data has zero total variance")
    for k in range(q):
        j = int(np.argmax(np.abs(comps[k])))
        if comps[k, j] < 0:
            comps[k] = -comps[k]
    frac = evals[:q] / total

    proj = _project(means, stds, comps, x)
    return FittedPipeline(means, stds, comps, frac, proj.min(axis=0), proj.max(axis=0))


def transform(p: FittedPipeline, rows) -> np.ndarray:
    """Map raw embeddings to PCA-q features rescaled with the train min/max.

    Rows outside the training range land outside [-1, 1]; they are not
    clipped.
    """
    rows = as_matrix(rows, "rows")
    if rows.shape[1] != p.means.shape[0]:
        raise DimensionError(f"expected {p.means.shape[0]} columns, got {rows.shape[1]}")
    span = p.minmax_hi - p.minmax_lo
    if np.any(span <= 0.0):
        raise DegenerateInputError("a PCA component is constant on the training rows")
    v = _project(p.means, p.stds, p.pca_components, rows)
    out = 2.0 * (v - p.minmax_lo) / span - 1.0
    over = float(np.max(np.abs(out))) if out.size else 0.0
    if over > 1.0:
        log.info("transformed rows exceed [-1, 1] (max |value| %.4f); not clipped", over)
    return out


def _mixing_matrix(d: int, gen) -> np.ndarray:
    if d & (d - 1) == 0:
        h = hadamard(d) / np.sqrt(d)
        h = h * gen.choice([-1.0, 1.0], size=d)[:, None]
        return h[:, gen.permutation(d)]
    q, _ = np.linalg.qr(gen.normal(size=(d, d)))
    return q


def make_synthetic(
    n: int = 500,
    d: int = 32,
    seed: int = 0,
    minority_frac: float = 0.304,
    noise: float = 0.5,
    decay: float = 0.5,
) -> Dataset:
    """Imbalanced embeddings with a full-rank covariance and a nonlinear label.

    Latent factors are uniform on [-1, 1] with geometrically decaying scales
    and are mixed by a random orthogonal matrix whose entries all have equal
    magnitude, so every raw column has the same variance and standardizing
    does not tilt the principal axes away from the factors. Class 1 is the ``minority_frac`` of
    samples closest to the origin in the two leading factors (after adding
    Gaussian ``noise`` to the radius), so the minority sits inside the
    majority's convex hull and no linear boundary separates them.
    """
    gen = np.random.default_rng(seed)
    z = gen.uniform(-1.0, 1.0, size=(n, d))
    scales = 3.0 * decay ** np.arange(d)
    feats = (z * scales) @ _mixing_matrix(d, gen).T
    score = -(z[:, 0] ** 2 + z[:, 1] ** 2) + noise * gen.normal(size=n)
    n1 = int(round(minority_frac * n))
    labels = np.zeros(n, dtype=np.int64)
    labels[np.argsort(-score, kind="stable")[:n1]] = 1
    ids = [f"s{i:05d}" for i in range(n)]
    manifest = {"model_name": "synthetic", "dim": d, "seed_tag": f"seed_{seed}"}
    return Dataset(ids, labels, feats, manifest)

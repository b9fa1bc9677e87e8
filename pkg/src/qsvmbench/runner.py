"""Experiment orchestration: Tier-1/Tier-2 comparisons, sweeps and ablations.

A *cell* is one (model, seed, q) combination: a dataset split, a pipeline
fitted on its training rows, and the transformed train/val/test features.
Every protocol walks the cells in a fixed order, so reruns of the same
configuration write byte-identical ``results.csv`` files. Wall-clock times
go to a separate ``timings.csv``.
"""
from __future__ import annotations

import csv
import io
import json
import logging
import math
import time
from dataclasses import asdict, dataclass, field
from importlib import resources
from pathlib import Path

import numpy as np

from . import kernels as K
from .errors import ConfigError, DataError, UnreachableTargetError
from .metrics import MetricsReport, evaluate, paired_bootstrap
from .pipeline import Dataset, fit, load_embeddings, make_synthetic, split, transform
from .spectra import SpectrumReport, effective_rank, rank_match_gamma, spectrum, variance_stats
from .statevec import CircuitConfig, bsp_states, pauli_z_expectations
from .svc import decision_scores, save_model, train

log = logging.getLogger(__name__)

__all__ = [
    "CSV_COLUMNS",
    "Cell",
    "ExperimentConfig",
    "KernelCache",
    "RunRecord",
    "Runner",
    "is_collapsed",
    "verdict",
]

CSV_COLUMNS = [
    "tier", "model_tag", "seed_tag", "q", "method", "normalization", "dof", "reps",
    "c", "gamma", "accuracy", "f1_minority", "auc", "tp", "fp", "fn", "tn",
    "eff_rank", "n_positive", "collapsed", "note",
]
COLLAPSE_F1 = 0.05


@dataclass
class ExperimentConfig:
    embedding_paths: dict = field(default_factory=dict)
    synthetic: dict | None = None
    qubit_list: list = field(default_factory=lambda: [4])
    c_grid: list = field(default_factory=lambda: [0.01, 0.1, 1.0, 10.0, 100.0])
    gamma_grid: list = field(default_factory=lambda: [0.5, 1.0, 2.0, 5.0, 10.0])
    normalization: str = "trace"
    dof: int = 1
    reps: int = 1
    split_seed: int = 0
    bootstrap: dict = field(default_factory=lambda: {"resamples": 10_000, "seed": 42})
    output_dir: str = "results"
    memory_cap_bytes: int = K.DEFAULT_MEMORY_CAP
    threads: int = 1
    qsvm_c: float = 1.0
    classical_c: float = 1.0
    sweep_variants: list | None = None
    rank_targets: dict | None = None
    rank_tol: float = 1e-3
    collapse_threshold: float = COLLAPSE_F1

    @classmethod
    def from_dict(cls, doc: dict) -> "ExperimentConfig":
        known = set(cls.__dataclass_fields__)
        unknown = set(doc) - known
        if unknown:
            raise ConfigError(f"unknown config keys: {sorted(unknown)}")
        cfg = cls(**doc)
        cfg.validate()
        return cfg

    @classmethod
    def from_json(cls, path) -> "ExperimentConfig":
        try:
            doc = json.loads(Path(path).read_text())
        except FileNotFoundError:
            raise ConfigError(f"config file not found: {path}") from None
        except json.JSONDecodeError as exc:
            raise ConfigError(f"{path}: {exc}") from None
        if not isinstance(doc, dict):
            raise ConfigError("config must be a JSON object")
        return cls.from_dict(doc)

    def validate(self) -> None:
        if not self.embedding_paths and not self.synthetic:
            raise ConfigError("config needs embedding_paths or synthetic")
        if not isinstance(self.embedding_paths, dict) or not all(
            isinstance(v, dict) for v in self.embedding_paths.values()
        ):
            raise ConfigError("embedding_paths must map model -> {seed_tag: path}")
        if not self.qubit_list or any(int(q) < 2 for q in self.qubit_list):
            raise ConfigError("qubit_list must be non-empty with every q >= 2")
        if self.normalization not in K.NORMALIZATIONS:
            raise ConfigError(f"normalization must be one of {K.NORMALIZATIONS}")
        if self.dof not in (1, 3) or self.reps < 1:
            raise ConfigError("dof must be 1 or 3 and reps >= 1")
        if any(c <= 0 for c in self.c_grid) or any(g <= 0 for g in self.gamma_grid):
            raise ConfigError("grid values must be positive")
        if int(self.bootstrap.get("resamples", 0)) < 1:
            raise ConfigError("bootstrap.resamples must be >= 1")
        if self.synthetic is not None and not isinstance(self.synthetic, dict):
            raise ConfigError("synthetic must be an object")
        for v in self.variants():
            if v["normalization"] not in K.NORMALIZATIONS or v["dof"] not in (1, 3) or v["reps"] < 1:
                raise ConfigError(f"bad sweep variant {v}")

    def variants(self) -> list[dict]:
        base = {"reps": self.reps, "dof": self.dof, "normalization": self.normalization}
        if not self.sweep_variants:
            return [base]
        return [{**base, **v} for v in self.sweep_variants]

    def to_dict(self) -> dict:
        return asdict(self)


@dataclass
class RunRecord:
    tier: str
    model_tag: str
    seed_tag: str
    q: int
    method: str
    normalization: str
    c: float | None
    gamma: float | None
    metrics: MetricsReport | None
    dof: int | None = None
    reps: int | None = None
    spectrum: SpectrumReport | None = None
    collapsed: bool | None = None
    note: str = ""
    wallclock: float = 0.0
    predictions: np.ndarray | None = field(default=None, repr=False)
    y_true: np.ndarray | None = field(default=None, repr=False)

    def row(self) -> list:
        m = self.metrics
        s = self.spectrum
        return [
            self.tier, self.model_tag, self.seed_tag, self.q, self.method, self.normalization,
            _fmt(self.dof), _fmt(self.reps), _fmt(self.c), _fmt(self.gamma),
            _fmt(m.accuracy if m else None), _fmt(m.f1_minority if m else None),
            _fmt(m.auc if m else None),
            _fmt(m.tp if m else None), _fmt(m.fp if m else None),
            _fmt(m.fn if m else None), _fmt(m.tn if m else None),
            _fmt(s.eff_rank if s else None), _fmt(s.n_positive if s else None),
            _fmt(self.collapsed), self.note,
        ]


def _fmt(v) -> str:
    if v is None:
        return ""
    if isinstance(v, (bool, np.bool_)):
        return "1" if v else "0"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    return repr(float(v))


def is_collapsed(f1: float, threshold: float = COLLAPSE_F1) -> bool:
    """A run counts as collapsed when its minority F1 is below ``threshold``."""
    return f1 < threshold


def verdict(mean_quantum: float, mean_classical: float) -> str:
    """``F1 WIN`` only on a strict improvement of the mean F1."""
    if mean_quantum > mean_classical:
        return "F1 WIN"
    if mean_quantum == mean_classical:
        return "TIE"
    return "F1 LOSS"


@dataclass
class Cell:
    model_tag: str
    seed_tag: str
    q: int
    x_train: np.ndarray
    x_val: np.ndarray
    x_test: np.ndarray
    y_train: np.ndarray
    y_val: np.ndarray
    y_test: np.ndarray
    explained: float


class KernelCache:
    """Raw (unnormalized) quantum kernels keyed by a content hash.

    Entries are append-only; with a directory the kernels are also written
    as ``.qkmx`` files and re-read by later runs.
    """

    def __init__(self, directory=None, memory_cap_bytes=K.DEFAULT_MEMORY_CAP, threads=1):
        self.directory = Path(directory) if directory else None
        self.memory_cap_bytes = memory_cap_bytes
        self.threads = threads
        self._mem: dict[str, K.KernelMatrix] = {}
        self.hits = 0
        self.misses = 0

    @staticmethod
    def key(left, right, circuit: CircuitConfig) -> str:
        parts = [left] if right is None else [left, right]
        circ = np.array([circuit.num_qubits, circuit.reps, circuit.dof], dtype=np.float64)
        return K.feature_hash(circ, *parts)[:32]

    def get(self, left, right, circuit: CircuitConfig) -> K.KernelMatrix:
        key = self.key(left, right, circuit)
        if key in self._mem:
            self.hits += 1
            return self._mem[key]
        path = self.directory / f"{key}.qkmx" if self.directory else None
        if path is not None and path.exists():
            km = K.load_kernel(path)
            self.hits += 1
        else:
            self.misses += 1
            km = K.quantum_kernel(left, right, circuit,
                                  memory_cap_bytes=self.memory_cap_bytes, threads=self.threads)
            if path is not None:
                path.parent.mkdir(parents=True, exist_ok=True)
                K.save_kernel(km, path)
        self._mem[key] = km
        return km


BUNDLED_PREFIX = "bundled:"


def resolve_path(p: str) -> Path:
    if p.startswith(BUNDLED_PREFIX):
        name = p[len(BUNDLED_PREFIX):]
        return Path(str(resources.files("qsvmbench") / "data" / name))
    return Path(p)


class Runner:
    def __init__(self, cfg: ExperimentConfig, out_dir=None, *, cache_to_disk: bool = False):
        self.cfg = cfg
        self.out_dir = Path(out_dir or cfg.output_dir)
        self.cache = KernelCache(self.out_dir / "kernels" if cache_to_disk else None,
                                 cfg.memory_cap_bytes, cfg.threads)
        self._datasets: dict[tuple[str, str], Dataset] = {}
        self._cells: dict[tuple[str, str, int], Cell] = {}

    # data -----------------------------------------------------------------
    def dataset_keys(self) -> list[tuple[str, str]]:
        keys = []
        for model in sorted(self.cfg.embedding_paths):
            for seed_tag in sorted(self.cfg.embedding_paths[model]):
                keys.append((model, seed_tag))
        if self.cfg.synthetic:
            for s in self.cfg.synthetic.get("seeds", [0]):
                keys.append((self.cfg.synthetic.get("model_tag", "synthetic"), f"seed_{int(s)}"))
        return keys

    def dataset(self, model: str, seed_tag: str) -> Dataset:
        key = (model, seed_tag)
        if key not in self._datasets:
            if model in self.cfg.embedding_paths:
                self._datasets[key] = load_embeddings(resolve_path(self.cfg.embedding_paths[model][seed_tag]))
            else:
                syn = self.cfg.synthetic
                seed = int(seed_tag.split("_")[-1])
                self._datasets[key] = make_synthetic(
                    int(syn.get("n", 500)), int(syn.get("d", 32)), seed,
                    float(syn.get("minority_frac", 0.304)), float(syn.get("noise", 0.5)),
                )
        return self._datasets[key]

    def cell(self, model: str, seed_tag: str, q: int) -> Cell:
        key = (model, seed_tag, q)
        if key not in self._cells:
            ds = self.dataset(model, seed_tag)
            sp = split(ds, self.cfg.split_seed)
            if q > min(len(sp.train), ds.dim):
                raise DataError(f"q={q} not feasible for {model}/{seed_tag}")
            p = fit(ds, sp.train, q)
            self._cells[key] = Cell(
                model, seed_tag, q,
                transform(p, ds.features[sp.train]),
                transform(p, ds.features[sp.val]),
                transform(p, ds.features[sp.test]),
                ds.labels[sp.train], ds.labels[sp.val], ds.labels[sp.test],
                float(np.sum(p.pca_explained_fraction)),
            )
        return self._cells[key]

    def cells(self):
        for model, seed_tag in self.dataset_keys():
            for q in self.cfg.qubit_list:
                yield self.cell(model, seed_tag, int(q))

    # building blocks --------------------------------------------------------
    def quantum_blocks(self, cell: Cell, circuit: CircuitConfig, normalization: str, *, val=False):
        k_train = self.cache.get(cell.x_train, None, circuit)
        stats = K.fit_normalization(k_train, normalization)
        ktr = K.normalize(k_train, normalization)
        other = cell.x_val if val else cell.x_test
        kte = K.normalize_test(self.cache.get(other, cell.x_train, circuit), stats)
        return ktr, kte

    def qsvm_record(self, tier, cell, *, normalization=None, dof=None, reps=None, c=None) -> RunRecord:
        t0 = time.perf_counter()
        normalization = normalization or self.cfg.normalization
        dof = dof or self.cfg.dof
        reps = reps or self.cfg.reps
        c = self.cfg.qsvm_c if c is None else c
        circuit = CircuitConfig(cell.q, reps, dof)
        ktr, kte = self.quantum_blocks(cell, circuit, normalization)
        rec = self._fit_eval(tier, cell, "qsvm", ktr, kte, c, None, normalization)
        rec.dof, rec.reps = dof, reps
        rec.wallclock = time.perf_counter() - t0
        return rec

    def classical_blocks(self, cell: Cell, method: str, gamma=None, *, val=False):
        other = cell.x_val if val else cell.x_test
        if method == "linear":
            return K.linear_kernel(cell.x_train), K.linear_kernel(other, cell.x_train)
        return K.rbf_kernel(cell.x_train, None, gamma), K.rbf_kernel(other, cell.x_train, gamma)

    def classical_record(self, tier, cell, method, c, gamma=None, label=None) -> RunRecord:
        t0 = time.perf_counter()
        ktr, kte = self.classical_blocks(cell, method, gamma)
        rec = self._fit_eval(tier, cell, label or method, ktr, kte, c, gamma, "none")
        rec.wallclock = time.perf_counter() - t0
        return rec

    def _fit_eval(self, tier, cell, method, ktr, kte, c, gamma, normalization) -> RunRecord:
        model = train(ktr, cell.y_train, c)
        scores = decision_scores(model, kte)
        preds = (scores > 0).astype(np.int64)
        m = evaluate(cell.y_test, preds, scores)
        sp = spectrum(ktr)
        note = "" if model.converged else "smo_not_converged"
        if model.degenerate:
            note = "degenerate_training_labels"
        return RunRecord(tier, cell.model_tag, cell.seed_tag, cell.q, method, normalization,
                         c, gamma, m, spectrum=sp,
                         collapsed=is_collapsed(m.f1_minority, self.cfg.collapse_threshold),
                         note=note, predictions=preds, y_true=cell.y_test)

    def select_c(self, cell, method, gamma=None) -> float:
        """C from ``c_grid`` maximising validation F1; ties go to the smaller C."""
        ktr, kval = self.classical_blocks(cell, method, gamma, val=True)
        best_c, best_f1 = None, -1.0
        for c in sorted(self.cfg.c_grid):
            model = train(ktr, cell.y_train, c)
            preds = (decision_scores(model, kval) > 0).astype(np.int64)
            f1 = evaluate(cell.y_val, preds).f1_minority
            if f1 > best_f1:
                best_c, best_f1 = c, f1
        return best_c

    # protocols --------------------------------------------------------------
    def run_tier1(self, baseline: str = "linear") -> tuple[list[RunRecord], dict]:
        records = []
        for cell in self.cells():
            qrec = self.qsvm_record("tier1", cell)
            if baseline == "qsvm":
                crec = self.qsvm_record("tier1", cell)
                crec.method = "qsvm_baseline"
            else:
                crec = self.classical_record("tier1", cell, "linear", self.cfg.classical_c)
            records += [qrec, crec]
        return records, self.compare(records, "qsvm", "qsvm_baseline" if baseline == "qsvm" else "linear")

    def run_tier2(self) -> tuple[list[RunRecord], dict]:
        records = []
        for cell in self.cells():
            qrec = self.qsvm_record("tier2", cell)
            gamma = K.scale_gamma(cell.x_train)
            c = self.select_c(cell, "rbf", gamma)
            crec = self.classical_record("tier2", cell, "rbf", c, gamma)
            records += [qrec, crec]
        return records, self.compare(records, "qsvm", "rbf")

    def run_sweep(self) -> tuple[list[RunRecord], dict]:
        records = []
        for cell in self.cells():
            for v in self.cfg.variants():
                records.append(self.qsvm_record("sweep", cell, normalization=v["normalization"],
                                                dof=v["dof"], reps=v["reps"]))
        records.sort(key=lambda r: (r.model_tag, r.q))
        return records, {"groups": self.aggregate(records)}

    def run_rank_matched(self) -> tuple[list[RunRecord], dict]:
        records = []
        targets = {int(k): float(v) for k, v in (self.cfg.rank_targets or {}).items()}
        for cell in self.cells():
            qrec = self.qsvm_record("rankmatch", cell)
            gamma_scale = K.scale_gamma(cell.x_train)
            srec = self.classical_record("rankmatch", cell, "rbf", self.cfg.classical_c, gamma_scale)
            target = targets.get(cell.q, qrec.spectrum.eff_rank)
            try:
                g = rank_match_gamma(cell.x_train, target, self.cfg.rank_tol)
                rrec = self.classical_record("rankmatch", cell, "rbf", self.cfg.classical_c, g,
                                             label="rbf_rank_matched")
                rrec.note = f"target_eff_rank={target!r}"
            except UnreachableTargetError as exc:
                rrec = RunRecord("rankmatch", cell.model_tag, cell.seed_tag, cell.q,
                                 "rbf_rank_matched", "none", self.cfg.classical_c, None, None,
                                 note=f"unreachable_target: {exc}")
            records += [qrec, srec, rrec]
        return records, {"groups": self.aggregate(records)}

    def run_projected(self) -> tuple[list[RunRecord], dict]:
        records = []
        for cell in self.cells():
            t0 = time.perf_counter()
            circuit = CircuitConfig(cell.q, self.cfg.reps, self.cfg.dof)
            z = {name: pauli_z_expectations(bsp_states(x, circuit))
                 for name, x in (("train", cell.x_train), ("val", cell.x_val), ("test", cell.x_test))}
            for arr in z.values():
                if np.any(np.abs(arr) > 1.0):
                    raise DataError("Pauli-Z expectation outside [-1, 1]")
            gamma, c = self.select_projected(cell, z)
            ktr = K.projected_kernel(z["train"], None, gamma)
            kte = K.projected_kernel(z["test"], z["train"], gamma)
            rec = self._fit_eval("projected", cell, "projected", ktr, kte, c, gamma, "none")
            rec.dof, rec.reps = circuit.dof, circuit.reps
            rec.wallclock = time.perf_counter() - t0
            records.append(rec)
        return records, {"groups": self.aggregate(records)}

    def select_projected(self, cell, z) -> tuple[float, float]:
        """(gamma, C) maximising validation accuracy; first grid point wins ties."""
        best, best_acc = None, -1.0
        for gamma in self.cfg.gamma_grid:
            ktr = K.projected_kernel(z["train"], None, gamma)
            kval = K.projected_kernel(z["val"], z["train"], gamma)
            for c in self.cfg.c_grid:
                model = train(ktr, cell.y_train, c)
                preds = (decision_scores(model, kval) > 0).astype(np.int64)
                acc = evaluate(cell.y_val, preds).accuracy
                if acc > best_acc:
                    best, best_acc = (float(gamma), float(c)), acc
        return best

    # aggregation --------------------------------------------------------------
    def aggregate(self, records) -> list[dict]:
        groups: dict[tuple, list[RunRecord]] = {}
        for r in records:
            if r.metrics is None:
                continue
            key = (r.tier, r.model_tag, r.q, r.method, r.normalization, r.dof, r.reps)
            groups.setdefault(key, []).append(r)
        out = []
        for key in sorted(groups, key=lambda k: tuple("" if v is None else str(v) for v in k)):
            rs = groups[key]
            row = dict(zip(("tier", "model_tag", "q", "method", "normalization", "dof", "reps"), key))
            row["n_seeds"] = len(rs)
            for name in ("accuracy", "f1_minority", "auc"):
                vals = np.array([getattr(r.metrics, name) for r in rs])
                row[f"{name}_mean"] = float(vals.mean())
                row[f"{name}_std"] = float(vals.std())
            row["collapse_fraction"] = float(np.mean([bool(r.collapsed) for r in rs]))
            effs = [r.spectrum.eff_rank for r in rs if r.spectrum is not None]
            if effs:
                row["eff_rank_mean"] = float(np.mean(effs))
            out.append(row)
        return out

    def compare(self, records, method_a: str, method_b: str) -> dict:
        bs = self.cfg.bootstrap
        resamples, seed = int(bs.get("resamples", 10_000)), int(bs.get("seed", 42))
        by_cell: dict[tuple, dict[str, RunRecord]] = {}
        for r in records:
            by_cell.setdefault((r.model_tag, r.q, r.seed_tag), {})[r.method] = r
        per_config: dict[tuple, list] = {}
        seeds_out = []
        for (model, q, seed_tag), recs in sorted(by_cell.items()):
            a, b = recs[method_a], recs[method_b]
            res = paired_bootstrap(a.y_true, a.predictions, b.predictions, resamples, seed,
                                   threads=self.cfg.threads)
            seeds_out.append({"model_tag": model, "q": q, "seed_tag": seed_tag,
                              "f1_a": a.metrics.f1_minority, "f1_b": b.metrics.f1_minority,
                              "bootstrap": res.to_dict()})
            per_config.setdefault((model, q), []).append((a, b))
        configs = []
        for (model, q), pairs in sorted(per_config.items()):
            fa = np.array([p[0].metrics.f1_minority for p in pairs])
            fb = np.array([p[1].metrics.f1_minority for p in pairs])
            aa = np.array([p[0].metrics.accuracy for p in pairs])
            ab = np.array([p[1].metrics.accuracy for p in pairs])
            y = np.concatenate([p[0].y_true for p in pairs])
            pa = np.concatenate([p[0].predictions for p in pairs])
            pb = np.concatenate([p[1].predictions for p in pairs])
            pooled = paired_bootstrap(y, pa, pb, resamples, seed, threads=self.cfg.threads)
            delta = float(fa.mean() - fb.mean())
            configs.append({
                "model_tag": model, "q": q, "n_seeds": len(pairs),
                f"{method_a}_f1_mean": float(fa.mean()), f"{method_a}_f1_std": float(fa.std()),
                f"{method_b}_f1_mean": float(fb.mean()), f"{method_b}_f1_std": float(fb.std()),
                f"{method_a}_acc_mean": float(aa.mean()), f"{method_a}_acc_std": float(aa.std()),
                f"{method_b}_acc_mean": float(ab.mean()), f"{method_b}_acc_std": float(ab.std()),
                "delta_f1": delta,
                "relative_gain": delta / float(fb.mean()) if fb.mean() > 0 else None,
                "verdict": verdict(float(fa.mean()), float(fb.mean())),
                "pooled_bootstrap": pooled.to_dict(),
            })
        wins = sum(c["verdict"] == "F1 WIN" for c in configs)
        return {"configs": configs, "per_seed": seeds_out, "wins": wins, "total": len(configs),
                "groups": self.aggregate(records)}

    # output -------------------------------------------------------------------
    def write(self, records, summary, name: str = "results") -> Path:
        self.out_dir.mkdir(parents=True, exist_ok=True)
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(CSV_COLUMNS)
        for r in records:
            w.writerow(r.row())
        path = self.out_dir / f"{name}.csv"
        path.write_text(buf.getvalue())

        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["tier", "model_tag", "seed_tag", "q", "method", "wallclock_s"])
        for r in records:
            w.writerow([r.tier, r.model_tag, r.seed_tag, r.q, r.method, f"{r.wallclock:.4f}"])
        (self.out_dir / "timings.csv").write_text(buf.getvalue())

        spec_dir = self.out_dir / "spectra"
        spec_dir.mkdir(exist_ok=True)
        for r in records:
            if r.spectrum is not None:
                stem = f"{r.tier}_{r.model_tag}_{r.seed_tag}_q{r.q}_{r.method}_{r.normalization}"
                if r.reps and r.dof:
                    stem += f"_r{r.reps}_d{r.dof}"
                r.spectrum.save(spec_dir / f"{stem}.json")

        doc = {"config": _jsonable(self.cfg.to_dict()), "summary": _jsonable(summary)}
        (self.out_dir / "summary.json").write_text(json.dumps(doc, indent=2, sort_keys=True))
        return path

    # standalone artefacts -------------------------------------------------------
    def write_kernels(self) -> list[Path]:
        kdir = self.out_dir / "kernels"
        kdir.mkdir(parents=True, exist_ok=True)
        paths = []
        for cell in self.cells():
            circuit = CircuitConfig(cell.q, self.cfg.reps, self.cfg.dof)
            ktr, kte = self.quantum_blocks(cell, circuit, self.cfg.normalization)
            stem = f"{cell.model_tag}_{cell.seed_tag}_q{cell.q}_{self.cfg.normalization}"
            paths.append(K.save_kernel(ktr, kdir / f"{stem}_train.qkmx"))
            paths.append(K.save_kernel(kte, kdir / f"{stem}_test.qkmx"))
        return paths

    def write_models(self) -> list[Path]:
        mdir = self.out_dir / "models"
        mdir.mkdir(parents=True, exist_ok=True)
        paths = []
        for cell in self.cells():
            circuit = CircuitConfig(cell.q, self.cfg.reps, self.cfg.dof)
            ktr, _ = self.quantum_blocks(cell, circuit, self.cfg.normalization)
            model = train(ktr, cell.y_train, self.cfg.qsvm_c)
            stem = f"{cell.model_tag}_{cell.seed_tag}_q{cell.q}_{self.cfg.normalization}"
            model.kernel_ref = f"kernels/{stem}_train.qkmx.json"
            paths.append(save_model(model, mdir / f"{stem}_qsvm.json"))
        return paths

    def write_spectra(self, subsample: int = 200) -> list[dict]:
        from .numerics import Rng

        sdir = self.out_dir / "spectra"
        sdir.mkdir(parents=True, exist_ok=True)
        rows = []
        for cell in self.cells():
            circuit = CircuitConfig(cell.q, self.cfg.reps, self.cfg.dof)
            kq, _ = self.quantum_blocks(cell, circuit, self.cfg.normalization)
            kl = K.linear_kernel(cell.x_train)
            sub = min(subsample, cell.x_train.shape[0])
            for kind, km in (("linear", kl), ("quantum", kq)):
                rep = spectrum(km)
                var = variance_stats(km, cell.y_train, sub, Rng(self.cfg.split_seed))
                stem = f"{cell.model_tag}_{cell.seed_tag}_q{cell.q}_{kind}"
                rep.save(sdir / f"{stem}.json", sdir / f"{stem}_eigenvalues.csv")
                (sdir / f"{stem}_variance.json").write_text(
                    json.dumps(_jsonable({k: v for k, v in var.to_dict().items() if k != "indices"}),
                               indent=2, sort_keys=True))
                rows.append({"model_tag": cell.model_tag, "seed_tag": cell.seed_tag, "q": cell.q,
                             "kernel": kind, "pca_var_fraction": cell.explained,
                             **rep.to_dict(), "k_mean": var.k_mean, "k_std": var.k_std,
                             "k_var": var.k_var, "within_class_mean": var.within_class_mean,
                             "between_class_mean": var.between_class_mean})
        (sdir / "summary.json").write_text(json.dumps(_jsonable(rows), indent=2, sort_keys=True))
        return rows


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [_jsonable(v) for v in obj.tolist()]
    if isinstance(obj, (np.floating, float)):
        f = float(obj)
        return None if math.isnan(f) else f
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, np.bool_):
        return bool(obj)
    return obj

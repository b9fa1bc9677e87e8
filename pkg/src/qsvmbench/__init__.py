"""Quantum-kernel SVM benchmarking on precomputed kernels.

Statevector simulation of angle-encoded circuits, fidelity and projected
quantum kernels, classical baselines, an SMO solver for C-SVC, spectral
diagnostics, and a reproducible comparison harness.
"""
from .errors import (
    ConfigError,
    DataError,
    DegenerateInputError,
    DimensionError,
    NumericalError,
    QsvmError,
    SymmetryError,
    UnreachableTargetError,
)
from .kernels import (
    KernelMatrix,
    linear_kernel,
    load_kernel,
    normalize,
    normalize_test,
    projected_kernel,
    quantum_kernel,
    rbf_kernel,
    save_kernel,
    scale_gamma,
)
from .metrics import evaluate, paired_bootstrap
from .pipeline import Dataset, fit, load_embeddings, make_synthetic, split, transform
from .spectra import effective_rank, rank_match_gamma, spectrum, variance_stats
from .statevec import CircuitConfig, bsp_state, bsp_states, fidelity, pauli_z_expectations
from .svc import decision_scores, predict, train

__version__ = "0.1.0"

__all__ = [
    "CircuitConfig",
    "ConfigError",
    "DataError",
    "Dataset",
    "DegenerateInputError",
    "DimensionError",
    "KernelMatrix",
    "NumericalError",
    "QsvmError",
    "SymmetryError",
    "UnreachableTargetError",
    "bsp_state",
    "bsp_states",
    "decision_scores",
    "effective_rank",
    "evaluate",
    "fidelity",
    "fit",
    "linear_kernel",
    "load_embeddings",
    "load_kernel",
    "make_synthetic",
    "normalize",
    "normalize_test",
    "paired_bootstrap",
    "pauli_z_expectations",
    "predict",
    "projected_kernel",
    "quantum_kernel",
    "rank_match_gamma",
    "rbf_kernel",
    "save_kernel",
    "scale_gamma",
    "spectrum",
    "split",
    "train",
    "transform",
    "variance_stats",
]

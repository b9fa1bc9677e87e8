"""Noiseless statevector simulation of the BSP angle-encoding circuit.

Conventions
-----------
* Qubit ``d`` (1-based) is bit ``d - 1`` of the basis index, i.e. qubit 1 is
  the least significant bit.
* ``Ry(t) = [[cos t/2, -sin t/2], [sin t/2, cos t/2]]``,
  ``Rz(t) = diag(exp(-i t/2), exp(+i t/2))``.
* One encoding block visits ``d = 1..q`` in ascending order, applying the
  rotation(s) on qubit ``d`` followed by ``CNOT(d -> d mod q + 1)``. The
  block is repeated ``reps`` times with the same features.
* The rotation angle is the feature value itself (no ``pi`` factor).

Batches of samples are simulated together as an ``(n, 2**q)`` array; the
1-DOF circuit only involves real gates, so its states are kept real.
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .errors import ConfigError, DimensionError

__all__ = [
    "CircuitConfig",
    "StateVector",
    "bsp_state",
    "bsp_states",
    "fidelity",
    "pauli_z_expectations",
    "zero_state",
]

MAX_QUBITS = 24


@dataclass(frozen=True)
class CircuitConfig:
    num_qubits: int
    reps: int = 1
    dof: int = 1

    def __post_init__(self):
        if self.num_qubits < 2:
            raise ConfigError("BSP ring entanglement needs at least 2 qubits")
        if self.num_qubits > MAX_QUBITS:
            raise ConfigError(f"num_qubits > {MAX_QUBITS} exceeds the memory guard")
        if self.reps < 1:
            raise ConfigError("reps must be >= 1")
        if self.dof not in (1, 3):
            raise ConfigError("dof must be 1 or 3")

    @property
    def dim(self) -> int:
        return 1 << self.num_qubits

    @property
    def dtype(self):
        return np.float64 if self.dof == 1 else np.complex128

    def to_dict(self) -> dict:
        return {"num_qubits": self.num_qubits, "reps": self.reps, "dof": self.dof}


@dataclass(frozen=True)
class StateVector:
    num_qubits: int
    amplitudes: np.ndarray

    def __post_init__(self):
        if self.amplitudes.shape != (1 << self.num_qubits,):
            raise DimensionError("amplitude vector length must be 2**num_qubits")

    @property
    def norm(self) -> float:
        return float(np.sum(np.abs(self.amplitudes) ** 2))


def zero_state(num_qubits: int) -> StateVector:
    amps = np.zeros(1 << num_qubits)
    amps[0] = 1.0
    return StateVector(num_qubits, amps)


@lru_cache(maxsize=None)
def _cnot_permutation(num_qubits: int, control: int, target: int) -> np.ndarray:
    """Index map ``new[k] = old[perm[k]]`` for CNOT on 1-based qubits."""
    idx = np.arange(1 << num_qubits, dtype=np.int64)
    cmask = 1 << (control - 1)
    tmask = 1 << (target - 1)
    return np.where(idx & cmask, idx ^ tmask, idx)


def _split_qubit(amps: np.ndarray, num_qubits: int, qubit: int) -> np.ndarray:
    # (n, high, 2, low) view where axis 2 is the bit of `qubit`
    n = amps.shape[0]
    return amps.reshape(n, 1 << (num_qubits - qubit), 2, 1 << (qubit - 1))


def _apply_ry(amps, num_qubits, qubit, angles):
    v = _split_qubit(amps, num_qubits, qubit)
    c = np.cos(angles / 2.0)[:, None, None]
    s = np.sin(angles / 2.0)[:, None, None]
    a0 = v[:, :, 0, :].copy()
    a1 = v[:, :, 1, :]
    v[:, :, 0, :] = c * a0 - s * a1
    v[:, :, 1, :] = s * a0 + c * a1


def _apply_rz(amps, num_qubits, qubit, angles):
    v = _split_qubit(amps, num_qubits, qubit)
    v[:, :, 0, :] *= np.exp(-0.5j * angles)[:, None, None]
    v[:, :, 1, :] *= np.exp(0.5j * angles)[:, None, None]


def bsp_states(features, cfg: CircuitConfig, *, rz_features=None) -> np.ndarray:
    """Statevectors ``U(u)|0^q>`` for every row of ``features``.

    Parameters
    ----------
    features : array (n, q)
        Rotation angles in radians, one per qubit.
    cfg : CircuitConfig
    rz_features : array (n, q), optional
        Angles for the two Rz gates of the 3-DOF variant. Defaults to
        ``features`` (the same value drives all three rotations).

    Returns
    -------
    array (n, 2**q), real for 1-DOF and complex for 3-DOF.
    """
    u = np.asarray(features, dtype=np.float64)
    if u.ndim == 1:
        u = u[None, :]
    q = cfg.num_qubits
    if u.ndim != 2 or u.shape[1] != q:
        raise DimensionError(f"expected {q} features per sample, got shape {u.shape}")
    if not np.all(np.isfinite(u)):
        raise DimensionError("features contain non-finite values")
    if cfg.dof == 3:
        rz = u if rz_features is None else np.asarray(rz_features, dtype=np.float64)
        if rz.shape != u.shape:
            raise DimensionError("rz_features must match features")

    amps = np.zeros((u.shape[0], cfg.dim), dtype=cfg.dtype)
    amps[:, 0] = 1.0
    for _ in range(cfg.reps):
        for d in range(1, q + 1):
            if cfg.dof == 3:
                _apply_rz(amps, q, d, rz[:, d - 1])
                _apply_ry(amps, q, d, u[:, d - 1])
                _apply_rz(amps, q, d, rz[:, d - 1])
            else:
                _apply_ry(amps, q, d, u[:, d - 1])
            amps = amps[:, _cnot_permutation(q, d, d % q + 1)]
    return amps


def bsp_state(features, cfg: CircuitConfig) -> StateVector:
    u = np.asarray(features, dtype=np.float64)
    if u.ndim != 1:
        raise DimensionError("bsp_state takes a single feature vector")
    return StateVector(cfg.num_qubits, bsp_states(u[None, :], cfg)[0])


def fidelity(a: StateVector, b: StateVector) -> float:
    """``|<a|b>|**2``, symmetric in its arguments bit for bit."""
    if a.num_qubits != b.num_qubits:
        raise DimensionError("qubit counts differ")
    ar, ai = a.amplitudes.real, np.imag(a.amplitudes)
    br, bi = b.amplitudes.real, np.imag(b.amplitudes)
    re = np.sum(ar * br + ai * bi)
    im = np.sum(ar * bi - ai * br)
    return float(re * re + im * im)


@lru_cache(maxsize=None)
def _z_signs(num_qubits: int) -> np.ndarray:
    idx = np.arange(1 << num_qubits)[:, None]
    bits = (idx >> np.arange(num_qubits)[None, :]) & 1
    return (1 - 2 * bits).astype(np.float64)


def pauli_z_expectations(states) -> np.ndarray:
    """Per-qubit ``<Z_k>`` for a StateVector or an ``(n, 2**q)`` batch.

    Column ``k`` refers to qubit ``k + 1``.
    """
    if isinstance(states, StateVector):
        return pauli_z_expectations(states.amplitudes[None, :])[0]
    amps = np.asarray(states)
    dim = amps.shape[-1]
    q = dim.bit_length() - 1
    if 1 << q != dim:
        raise DimensionError("state length is not a power of two")
    probs = np.abs(amps) ** 2
    return np.clip(probs @ _z_signs(q), -1.0, 1.0)

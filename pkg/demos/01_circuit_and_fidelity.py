import math

import numpy as np

from qsvmbench import CircuitConfig, bsp_state, bsp_states, fidelity, pauli_z_expectations

# Two qubits, one block: Ry on each qubit followed by a ring of CNOTs.
# Qubit 1 is the least significant bit of the amplitude index.
cfg = CircuitConfig(num_qubits=2)
s = bsp_state(np.array([math.pi, 0.0]), cfg)
print("amplitudes for u=(pi, 0):", np.round(s.amplitudes, 12))  # all weight on index 2 (|q2=1, q1=0>)

# Feature values are used as rotation angles directly
cfg = CircuitConfig(num_qubits=4, reps=2)
u = np.random.default_rng(0).uniform(-1, 1, size=(3, 4))
states = bsp_states(u, cfg)
print("batch shape:", states.shape, "norms:", np.round(np.sum(states**2, axis=1), 12))

a, b = bsp_state(u[0], cfg), bsp_state(u[1], cfg)
print("fidelity(a, a) =", fidelity(a, a))
print("fidelity(a, b) =", round(fidelity(a, b), 6))

# The 3-DOF variant wraps each Ry in two Rz gates and gives complex states
cfg3 = CircuitConfig(num_qubits=4, dof=3)
print("3-DOF dtype:", bsp_states(u, cfg3).dtype)

# Per-qubit <Z> values feed the projected kernel; they always lie in [-1, 1]
print("<Z> per qubit:\n", np.round(pauli_z_expectations(states), 4))

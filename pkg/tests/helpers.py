"""Independent reference implementations used as test oracles.

Everything here deliberately avoids the package's fast paths: states are built
by multiplying explicit 2^n x 2^n gate matrices, and leave-one-out importance
re-simulates each deletion from scratch.
"""
import math

import numpy as np

from qbrittle.circuits import Axis, Circuit, Cnot, Rotation, remove_gates
from qbrittle.simulator import fidelity, run


def rotation_matrix(axis: Axis, theta: float) -> np.ndarray:
    c, s = math.cos(theta / 2), math.sin(theta / 2)
    if axis is Axis.X:
        return np.array([[c, -1j * s], [-1j * s, c]])
    if axis is Axis.Y:
        return np.array([[c, -s], [s, c]])
    return np.array([[np.exp(-0.5j * theta), 0], [0, np.exp(0.5j * theta)]])


def dense_gate_matrix(n: int, gate) -> np.ndarray:
    """Full 2^n unitary of one gate, little-endian (qubit 0 = LSB)."""
    dim = 2 ** n
    U = np.zeros((dim, dim), dtype=complex)
    if isinstance(gate, Rotation):
        m = rotation_matrix(gate.axis, gate.theta)
        for col in range(dim):
            bit = (col >> gate.qubit) & 1
            for new_bit in (0, 1):
                row = (col & ~(1 << gate.qubit)) | (new_bit << gate.qubit)
                U[row, col] += m[new_bit, bit]
    else:
        for col in range(dim):
            row = col ^ (1 << gate.target) if (col >> gate.control) & 1 else col
            U[row, col] = 1.0
    return U


def dense_reference_state(circuit: Circuit) -> np.ndarray:
    """|0...0> pushed through the explicit matrix product of all gates."""
    state = np.zeros(2 ** circuit.n_qubits, dtype=complex)
    state[0] = 1.0
    for gate in circuit.gates:
        state = dense_gate_matrix(circuit.n_qubits, gate) @ state
    return state


def random_circuit(rng: np.random.Generator, n: int, n_gates: int,
                   theta_lo: float = -2 * math.pi, theta_hi: float = 2 * math.pi) -> Circuit:
    axes = (Axis.X, Axis.Y, Axis.Z)
    gates = []
    for _ in range(n_gates):
        if n >= 2 and rng.random() < 0.3:
            control, target = rng.choice(n, size=2, replace=False)
            gates.append(Cnot(int(control), int(target)))
        else:
            gates.append(Rotation(axes[rng.integers(3)], int(rng.integers(n)),
                                  float(rng.uniform(theta_lo, theta_hi))))
    return Circuit(n, tuple(gates))


def naive_importances(circuit: Circuit) -> np.ndarray:
    """Leave-one-out importance by re-simulating every single-gate deletion."""
    baseline = run(circuit)
    return np.array([
        1.0 - fidelity(baseline, run(remove_gates(circuit, {i})))
        for i in range(len(circuit.gates))
    ])

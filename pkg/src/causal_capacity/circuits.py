"""Small qubit state-vector simulator for encoder circuits followed by noise on one qubit.

Qubit 0 is the most significant bit, matching the tensor-core ordering.
Used to cross-check process-matrix results against explicit circuits.
"""

from __future__ import annotations

from typing import Iterable, Sequence

import numpy as np

from .channels import H, X, Z, QuantumChannel
from .tensor_core import SpaceLayout

_GATES = {"H": H, "X": X, "Z": Z}


def apply_1q(state: np.ndarray, gate: np.ndarray, qubit: int, n: int) -> np.ndarray:
    t = state.reshape((2,) * n)
    t = np.moveaxis(np.tensordot(gate, t, axes=([1], [qubit])), 0, qubit)
    return t.reshape(-1)


def apply_controlled(state: np.ndarray, gate: np.ndarray, control: int, target: int, n: int) -> np.ndarray:
    t = state.reshape((2,) * n).copy()
    idx = [slice(None)] * n
    idx[control] = 1
    sub = t[tuple(idx)]
    tgt = target if target < control else target - 1
    sub = np.moveaxis(np.tensordot(gate, sub, axes=([1], [tgt])), 0, tgt)
    t[tuple(idx)] = sub
    return t.reshape(-1)


def run(ops: Iterable[tuple], state: np.ndarray, n: int) -> np.ndarray:
    """Apply ``ops``: ``("H", q)``, ``("X", q)``, ``("Z", q)``, ``("CNOT", c, t)``, ``("CZ", c, t)``."""
    for op in ops:
        name = op[0]
        if name in _GATES:
            state = apply_1q(state, _GATES[name], op[1], n)
        elif name == "CNOT":
            state = apply_controlled(state, X, op[1], op[2], n)
        elif name == "CZ":
            state = apply_controlled(state, Z, op[1], op[2], n)
        else:
            raise ValueError(f"unknown gate {name!r}")
    return state


def encoder_isometry(ops: Sequence[tuple], n: int, input_qubit: int, ancillas: dict[int, np.ndarray]) -> np.ndarray:
    """Columns are the circuit outputs for input ``|0>`` and ``|1>`` on ``input_qubit``."""
    cols = []
    for j in range(2):
        kets = []
        for q in range(n):
            if q == input_qubit:
                kets.append(np.eye(2)[j])
            else:
                kets.append(np.asarray(ancillas.get(q, [1, 0]), dtype=complex))
        state = kets[0]
        for k in kets[1:]:
            state = np.kron(state, k)
        cols.append(run(ops, state.astype(complex), n))
    return np.stack(cols, axis=1)


def noisy_encoder_channel(iso: np.ndarray, noise: QuantumChannel, target: int, n: int,
                          out_layout: SpaceLayout | None = None) -> QuantumChannel:
    """Channel ``psi -> noise_target(iso psi)`` with the output in circuit qubit order."""
    kraus = [np.stack([apply_1q(iso[:, j], e, target, n) for j in range(iso.shape[1])], axis=1)
             for e in noise.kraus]
    return QuantumChannel(kraus, in_layout=SpaceLayout.single("P", 2), out_layout=out_layout)


PLUS = np.array([1, 1], dtype=complex) / np.sqrt(2)


def cnot_circuit() -> tuple[list[tuple], int, int, dict]:
    """Control qubit 0 in ``|+>`` drives a CNOT onto the input on qubit 1."""
    return [("CNOT", 0, 1)], 2, 1, {0: PLUS}


def shor_sdpp_circuit_as_drawn() -> tuple[list[tuple], int, int, dict]:
    """Four ``|+>`` controls; the input (qubit 4) gets ``H``, four CNOTs, ``H``."""
    ops = [("H", 4), ("CNOT", 3, 4), ("CNOT", 2, 4), ("CNOT", 1, 4), ("CNOT", 0, 4), ("H", 4)]
    return ops, 5, 4, {q: PLUS for q in range(4)}


def shor_restricted_circuit() -> tuple[list[tuple], int, int, dict]:
    """Encoder of the nine-qubit Shor code restricted to its qubits 1, 2, 3, 4, 7.

    Circuit qubits are ordered ``(2, 3, 4, 7, 1)`` so the data qubit comes last.
    The trailing Hadamards on qubits 2 and 3 are a fixed basis change on
    qubits that never meet the noise.
    """
    q2, q3, q4, q7, q1 = range(5)
    ops = [("CNOT", q1, q4), ("CNOT", q1, q7), ("H", q1), ("H", q4), ("H", q7),
           ("CNOT", q1, q2), ("CNOT", q1, q3), ("H", q2), ("H", q3)]
    return ops, 5, q1, {}

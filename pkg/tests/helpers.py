"""Shared builders for tests."""
from __future__ import annotations

import numpy as np

from mirrorbench.circuit import Circuit, circuit_from_gates, sq, tq

CLIFFORD_NAMES = ("CNOT", "CPHASE", "SWAP")


def random_clifford_tq_circuit(n: int, gates: int, rng: np.random.Generator, sq_prob: float = 0.5) -> Circuit:
    """Random circuit of SQ Euler gates and self-inverse Clifford TQ gates."""
    ops = []
    for _ in range(gates):
        if n > 1 and rng.random() > sq_prob:
            a, b = rng.choice(n, 2, replace=False)
            ops.append(tq(CLIFFORD_NAMES[rng.integers(3)], int(a), int(b)))
        else:
            ops.append(sq(int(rng.integers(n)), tuple(rng.uniform(-np.pi, np.pi, 3))))
    return circuit_from_gates(n, ops)


def embed(mat: np.ndarray, qubits, n: int) -> np.ndarray:
    """Dense ``n``-qubit operator for ``mat`` on ``qubits`` (qubit 0 most significant)."""
    from mirrorbench.circuit import apply_gate

    d = 1 << n
    cols = [apply_gate(np.eye(d, dtype=complex)[:, i], mat, qubits, n) for i in range(d)]
    return np.stack(cols, axis=1)


def target_probability(mc) -> float:
    """Noiseless probability of the mirror circuit's target bitstring."""
    from mirrorbench.circuit import statevector_of

    psi = statevector_of(mc.circuit)
    return float(abs(psi[int(mc.target, 2)]) ** 2)


def exact_mirror_polarization(mc, em) -> float:
    """Hamming-weighted polarization of ``mc`` from its exact output distribution."""
    from mirrorbench.analysis import polarization_from_hamming
    from mirrorbench.sim import exact_output_distribution

    p = exact_output_distribution(mc.circuit, em)
    n = mc.circuit.width
    t = int(mc.target, 2)
    h = np.zeros(n + 1)
    for i, v in enumerate(p):
        h[(i ^ t).bit_count()] += v
    return polarization_from_hamming(h)

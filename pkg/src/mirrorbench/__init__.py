"""Mirror-circuit benchmark generation, noisy simulation and fidelity analysis."""
from .circuit import (
    Circuit,
    GateOp,
    Layer,
    QubitPermutation,
    apply_permutation,
    layer_by_layer_inverse,
    unitary_of,
)
from .pauli import PauliString, compose_pauli, conjugate_pauli_by_clifford

__version__ = "0.1.0"

__all__ = [
    "Circuit",
    "GateOp",
    "Layer",
    "PauliString",
    "QubitPermutation",
    "apply_permutation",
    "compose_pauli",
    "conjugate_pauli_by_clifford",
    "layer_by_layer_inverse",
    "unitary_of",
]

"""Noisy simulation: error models, compiled kernels, exact oracles."""
from .backend import available_backends, default_backend_name, get_backend
from .noise import ErrorModel, ErrorModelError, compose_pauli_channels, depolarizing_probs
from .program import Program, build_program, unravel
from .simulator import (
    OutcomeCounts,
    apply_readout,
    exact_output_distribution,
    exact_polarization,
    final_density_matrix,
    process_fidelity,
    simulate_counts,
)

__all__ = [
    "ErrorModel",
    "ErrorModelError",
    "OutcomeCounts",
    "Program",
    "apply_readout",
    "available_backends",
    "build_program",
    "compose_pauli_channels",
    "default_backend_name",
    "depolarizing_probs",
    "exact_output_distribution",
    "exact_polarization",
    "final_density_matrix",
    "get_backend",
    "process_fidelity",
    "simulate_counts",
    "unravel",
]

"""Reference compiler targeting SQ + self-inverse Clifford gates."""
from .compile import (
    CompilationError,
    CompiledCircuit,
    ExchangeTimeout,
    GateSetViolation,
    MalformedResponse,
    compile_exact,
    consolidate_blocks,
    external_preprocess,
    fix_permutation,
    insert_dd,
    lower_gates,
    merge_single_qubit_runs,
    route,
    validate_compiled,
)
from .graphs import ConnectivityGraph, heavy_hex_lattice
from .kak import KAKDecomposition, NonUnitaryError, kak, kak_decompose_su4, kak_gates
from .routing import RoutingError, permutation_swaps

__all__ = [
    "CompilationError",
    "CompiledCircuit",
    "ConnectivityGraph",
    "ExchangeTimeout",
    "GateSetViolation",
    "KAKDecomposition",
    "MalformedResponse",
    "NonUnitaryError",
    "RoutingError",
    "compile_exact",
    "consolidate_blocks",
    "external_preprocess",
    "fix_permutation",
    "heavy_hex_lattice",
    "insert_dd",
    "kak",
    "kak_decompose_su4",
    "kak_gates",
    "lower_gates",
    "merge_single_qubit_runs",
    "permutation_swaps",
    "route",
    "validate_compiled",
]

"""Reference compiler: block consolidation, routing, KAK lowering, DD."""
from __future__ import annotations

import json
import math
import subprocess
import time
import uuid
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Callable, Sequence

import numpy as np

from ..circuit import (
    IDLE,
    SQ,
    TQ,
    U4,
    Circuit,
    GateOp,
    Layer,
    QubitPermutation,
    circuit_from_gates,
    sq,
    tq,
    u4,
    unitary_of,
)
from ..gates import SWAP, X_ANGLES, euler_angles, euler_matrix
from .graphs import ConnectivityGraph
from .kak import kak_gates
from .routing import RoutingError, permutation_swaps, random_layout, route_gates


class CompilationError(ValueError):
    pass


class GateSetViolation(CompilationError):
    pass


class MalformedResponse(CompilationError):
    pass


class ExchangeTimeout(CompilationError, TimeoutError):
    pass


@dataclass(frozen=True)
class CompiledCircuit:
    """A low-level circuit implementing ``P_final U P_initial^-1``.

    ``permutation`` is where each logical qubit ends up; ``initial_layout`` is
    where it starts (identity unless random placement was requested).
    """

    circuit: Circuit
    permutation: QubitPermutation
    initial_layout: QubitPermutation | None = None
    approx_error: float = 0.0
    connectivity: str = "complete"
    swaps: int = 0
    metadata: dict[str, Any] = field(default_factory=dict, compare=False)

    def __post_init__(self) -> None:
        if self.initial_layout is None:
            object.__setattr__(self, "initial_layout", QubitPermutation.identity(self.circuit.width))

    @property
    def width(self) -> int:
        return self.circuit.width

    @property
    def exact(self) -> bool:
        return self.approx_error == 0.0

    def target_unitary(self, u: np.ndarray) -> np.ndarray:
        """The unitary this compilation is judged against, given ``U``."""
        pf = self.permutation.to_matrix()
        p0 = self.initial_layout.to_matrix()
        return pf @ u @ p0.T

    def to_json(self) -> dict[str, Any]:
        d = self.circuit.to_json()
        d["permutation"] = list(self.permutation.image)
        d["initial_layout"] = list(self.initial_layout.image)
        d["connectivity"] = self.connectivity
        d["approx"] = not self.exact
        d["approx_error"] = self.approx_error
        d["swaps"] = self.swaps
        return d

    @classmethod
    def from_json(cls, d: dict[str, Any]) -> CompiledCircuit:
        circuit = Circuit.from_json(d)
        n = circuit.width
        perm = QubitPermutation(tuple(d.get("permutation", range(n))))
        init = QubitPermutation(tuple(d.get("initial_layout", range(n))))
        err = d.get("approx_error")
        if err is None:
            err = math.nan if d.get("approx") else 0.0
        return cls(circuit, perm, init, float(err), d.get("connectivity", "complete"), int(d.get("swaps", 0)))

    def dump(self, path: str | Path) -> None:
        Path(path).write_text(json.dumps(self.to_json(), sort_keys=True))

    @classmethod
    def load(cls, path: str | Path) -> CompiledCircuit:
        return cls.from_json(json.loads(Path(path).read_text()))


def _embed(g: GateOp, pair: tuple[int, int]) -> np.ndarray:
    m = g.unitary()
    if len(g.qubits) == 1:
        return np.kron(m, np.eye(2)) if g.qubits[0] == pair[0] else np.kron(np.eye(2), m)
    if g.qubits == pair:
        return m
    return SWAP @ m @ SWAP


def consolidate_blocks(c: Circuit) -> list[GateOp]:
    """Fuse runs of gates on a qubit pair into U4 blocks (time-ordered list)."""
    open_block: dict[int, list] = {}
    out: list[GateOp] = []

    def close(block) -> None:
        pair, mat = block[0], block[1]
        for q in pair:
            open_block.pop(q, None)
        out.append(u4(pair[0], pair[1], mat))

    for layer in c.layers:
        for g in layer.gates:
            if g.kind == IDLE:
                continue
            if len(g.qubits) == 1:
                block = open_block.get(g.qubits[0])
                if block is None:
                    out.append(g)
                else:
                    block[1] = _embed(g, block[0]) @ block[1]
                continue
            a, b = g.qubits
            block = open_block.get(a)
            if block is not None and block is open_block.get(b):
                block[1] = _embed(g, block[0]) @ block[1]
                continue
            for q in (a, b):
                if q in open_block:
                    close(open_block[q])
            block = [(a, b), g.unitary()]
            open_block[a] = open_block[b] = block
    seen = set()
    for q in sorted(open_block):
        block = open_block.get(q)
        if block is not None and id(block) not in seen:
            seen.add(id(block))
            close(block)
    return out


def lower_gates(gates: Sequence[GateOp]) -> list[GateOp]:
    """Rewrite U4 blocks via KAK and SWAPs as three CNOTs."""
    out: list[GateOp] = []
    for g in gates:
        if g.kind == U4:
            out.extend(kak_gates(g.unitary(), *g.qubits))
        elif g.kind == TQ and g.name == "SWAP":
            a, b = g.qubits
            out += [tq("CNOT", a, b), tq("CNOT", b, a), tq("CNOT", a, b)]
        else:
            out.append(g)
    return out


def merge_single_qubit_runs(gates: Sequence[GateOp], width: int) -> list[GateOp]:
    """Fuse consecutive SQ gates on the same qubit into one."""
    pending: list[np.ndarray | None] = [None] * width
    out: list[GateOp] = []

    def flush(q: int) -> None:
        if pending[q] is not None:
            out.append(sq(q, euler_angles(pending[q])))
            pending[q] = None

    for g in gates:
        if g.kind == SQ:
            q = g.qubits[0]
            m = euler_matrix(g.angles)
            pending[q] = m if pending[q] is None else m @ pending[q]
        elif g.kind == IDLE:
            continue
        else:
            for q in g.qubits:
                flush(q)
            out.append(g)
    for q in range(width):
        flush(q)
    return out


def route(
    c: Circuit,
    graph: ConnectivityGraph,
    rng: np.random.Generator | None = None,
    random_placement: bool = False,
    initial_layout: QubitPermutation | None = None,
) -> CompiledCircuit:
    """Greedy routing; every two-qubit gate ends up on a graph edge."""
    if c.width > graph.n:
        raise RoutingError(f"circuit width {c.width} exceeds graph size {graph.n}")
    if c.width != graph.n:
        raise RoutingError("graph must have exactly as many nodes as the circuit has qubits")
    if initial_layout is not None:
        if initial_layout.n != c.width:
            raise RoutingError("initial layout width mismatch")
        layout = list(initial_layout.image)
    elif random_placement:
        if rng is None:
            raise ValueError("random placement needs an rng")
        layout = random_layout(c.width, graph, rng)
    else:
        layout = list(range(c.width))
    initial = QubitPermutation(tuple(layout))
    gates = [g for g in c.gates() if g.kind != IDLE]
    routed, final, swaps = route_gates(gates, graph, list(layout))
    routed = [h for g in routed for h in (lower_gates([g]) if g.kind == TQ and g.name == "SWAP" else [g])]
    circuit = circuit_from_gates(c.width, routed, c.metadata)
    return CompiledCircuit(circuit, QubitPermutation(tuple(final)), initial, 0.0, graph.name, swaps)


def compile_exact(
    c: Circuit,
    graph: ConnectivityGraph,
    rng: np.random.Generator | None = None,
    random_placement: bool = False,
    dd: bool = False,
    initial_layout: QubitPermutation | None = None,
) -> CompiledCircuit:
    """Exact compilation to SQ + CNOT gates on ``graph`` (up to permutation)."""
    blocks = consolidate_blocks(c)
    block_circuit = circuit_from_gates(c.width, blocks)
    routed = route(block_circuit, graph, rng, random_placement, initial_layout)
    gates = lower_gates(list(routed.circuit.gates()))
    gates = merge_single_qubit_runs(gates, c.width)
    circuit = circuit_from_gates(c.width, gates, {**c.metadata, "compiled": True})
    if dd:
        circuit = insert_dd(circuit)
    return CompiledCircuit(circuit, routed.permutation, routed.initial_layout, 0.0, graph.name, routed.swaps)


def fix_permutation(cc: CompiledCircuit, graph: ConnectivityGraph, target: QubitPermutation) -> CompiledCircuit:
    """Append a SWAP network so the final permutation equals ``target``."""
    swaps = permutation_swaps(graph, cc.permutation, target)
    extra = []
    for a, b in swaps:
        extra += [tq("CNOT", a, b), tq("CNOT", b, a), tq("CNOT", a, b)]
    gates = [g for g in cc.circuit.gates() if g.kind != IDLE] + extra
    circuit = circuit_from_gates(cc.width, gates, cc.circuit.metadata)
    return CompiledCircuit(circuit, target, cc.initial_layout, cc.approx_error, cc.connectivity, cc.swaps + len(swaps))


def insert_dd(c: Circuit) -> Circuit:
    """X-X echo on qubits idling beside two-qubit gates.

    The first X replaces the idle inside the two-qubit layer and the second
    X follows in an inserted layer, so the net unitary is unchanged.
    """
    layers: list[Layer] = []
    for layer in c.layers:
        idlers = [g.qubits[0] for g in layer.gates if g.kind == IDLE]
        if not layer.has_two_qubit or not idlers:
            layers.append(layer)
            continue
        swapped = [sq(g.qubits[0], X_ANGLES) if g.kind == IDLE else g for g in layer.gates]
        layers.append(Layer(tuple(swapped)))
        layers.append(Layer.of(c.width, [sq(q, X_ANGLES) for q in idlers]))
    return Circuit(c.width, tuple(layers), {**c.metadata, "dd": True})


def validate_compiled(cc: CompiledCircuit, graph: ConnectivityGraph) -> None:
    for g in cc.circuit.gates():
        if g.kind not in (SQ, TQ, IDLE):
            raise GateSetViolation(f"gate kind {g.kind} is not native")
        if g.kind == TQ and not graph.adjacent(*g.qubits):
            raise GateSetViolation(f"{g.name} on {g.qubits} is not a {graph.name} edge")


Preprocessor = Callable[[Path, Path], None] | Sequence[str] | None


def external_preprocess(
    c: Circuit,
    exchange_dir: str | Path,
    preprocessor: Preprocessor = None,
    graph: ConnectivityGraph | None = None,
    timeout: float = 60.0,
    poll: float = 0.05,
    oracle_limit: int = 8,
) -> CompiledCircuit:
    """Hand ``c`` to an outside compiler through JSON files.

    ``preprocessor`` may be a callable ``(request, response)``, a command line
    that receives the two paths as trailing arguments, or ``None`` to wait
    for some other process to write the response file.
    """
    exchange = Path(exchange_dir)
    exchange.mkdir(parents=True, exist_ok=True)
    tag = uuid.uuid4().hex[:12]
    request = exchange / f"request_{tag}.json"
    response = exchange / f"response_{tag}.json"
    request.write_text(json.dumps(c.to_json(), sort_keys=True))

    if callable(preprocessor):
        preprocessor(request, response)
    elif preprocessor is not None:
        try:
            subprocess.run([*preprocessor, str(request), str(response)], check=True, timeout=timeout)
        except subprocess.TimeoutExpired as exc:
            raise ExchangeTimeout(f"preprocessor exceeded {timeout}s") from exc
    deadline = time.monotonic() + timeout
    while not response.exists():
        if time.monotonic() > deadline:
            raise ExchangeTimeout(f"no response at {response} after {timeout}s")
        time.sleep(poll)

    try:
        payload = json.loads(response.read_text())
        cc = CompiledCircuit.from_json(payload)
    except (ValueError, KeyError, TypeError) as exc:
        raise MalformedResponse(f"cannot parse {response.name}: {exc}") from exc
    if cc.width != c.width:
        raise MalformedResponse(f"response width {cc.width} != request width {c.width}")
    if graph is None:
        graph = ConnectivityGraph.from_name(cc.connectivity, cc.width)
    validate_compiled(cc, graph)
    if not cc.exact and math.isnan(cc.approx_error) and c.width <= oracle_limit:
        target = cc.target_unitary(unitary_of(c))
        d = 1 << c.width
        fid = abs(np.vdot(target.ravel(), unitary_of(cc.circuit).ravel())) ** 2 / d**2
        cc = CompiledCircuit(cc.circuit, cc.permutation, cc.initial_layout, max(0.0, 1.0 - fid), graph.name, cc.swaps)
    return cc

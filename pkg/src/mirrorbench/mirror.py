"""Mirror-circuit construction with randomized compiling.

Every mirror circuit ideally implements ``R Q`` where ``R`` is a tracked
Pauli and ``Q`` a qubit permutation, so its noiseless output from
``|0...0>`` is the bitstring of ``R``'s X-part.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Sequence

import numpy as np

from .circuit import (
    IDLE,
    SQ,
    TQ,
    Circuit,
    GateOp,
    Layer,
    QubitPermutation,
    apply_permutation,
    idle,
    layer_by_layer_inverse,
    sq,
)
from .compiler import CompiledCircuit, ConnectivityGraph, compile_exact, fix_permutation
from .gates import IDENTITY_ANGLES, inverse_angles, pauli_left, pauli_right
from .generators import sample_2design_layer
from .pauli import PauliString

MIRROR_KINDS = ("M1", "M2", "M3")
_LETTER = ("I", "Z", "X", "Y")  # indexed by 2 * x + z


def _letter(x: int, z: int) -> str:
    return _LETTER[2 * x + z]


def _conjugate_bits(name: str, xa: int, za: int, xb: int, zb: int) -> tuple[int, int, int, int]:
    if name == "CNOT":
        return xa, za ^ zb, xb ^ xa, zb
    if name == "CPHASE":
        return xa, za ^ xb, xb, zb ^ xa
    return xb, zb, xa, za


def randomized_compile(
    c: Circuit,
    rng: np.random.Generator,
    final_frame: bool = True,
    frames: Sequence[PauliString] | None = None,
) -> tuple[Circuit, PauliString]:
    """Twirl every layer containing two-qubit gates with random Pauli frames.

    Qubits inside a two-qubit gate, and qubits idling beside one, receive a
    frame before the layer that is undone after it; frames merge into the
    neighbouring single-qubit gates, and a single-qubit layer is inserted
    only where no such gate exists.  With ``final_frame`` a fresh uniform
    Pauli ``R`` is left at the end and returned, so the result implements
    ``R @ U``.  ``frames`` forces the frame of each twirled layer in order.
    """
    n = c.width
    if not c.layers:
        return c, PauliString.identity(n)
    for g in c.gates():
        if g.kind not in (SQ, TQ, IDLE):
            raise ValueError(f"randomized compiling needs SQ/TQ/IDLE gates, found {g.kind}")
    hard = [layer.has_two_qubit for layer in c.layers]
    n_hard = sum(hard)
    if frames is not None:
        if len(frames) != n_hard:
            raise ValueError(f"need {n_hard} forced frames, got {len(frames)}")
        draws = np.array([[2 * ((f.x >> q) & 1) + ((f.z >> q) & 1) for q in range(n)] for f in frames], dtype=np.int64)
    else:
        draws = rng.integers(0, 4, size=(n_hard, n))

    px = [0] * n
    pz = [0] * n
    # out[i][q]: angles for an SQ slot, a GateOp for TQ (stored on both qubits), or None for idle
    out: list[list[Any]] = []
    open_slot = [-1] * n
    h = 0
    for layer, is_hard in zip(c.layers, hard):
        row: list[Any] = [None] * n
        if is_hard:
            frame = draws[h]
            h += 1
            insert: dict[int, str] = {}
            for g in layer.gates:
                if g.kind == SQ:
                    continue
                for q in g.qubits:
                    f = int(frame[q])
                    rx, rz = f >> 1, f & 1
                    bx, bz = px[q] ^ rx, pz[q] ^ rz
                    px[q], pz[q] = rx, rz
                    if bx or bz:
                        label = _letter(bx, bz)
                        slot = open_slot[q]
                        if slot >= 0:
                            out[slot][q] = pauli_left(label, out[slot][q])
                        else:
                            insert[q] = label
            if insert:
                out.append([pauli_left(insert[q], IDENTITY_ANGLES) if q in insert else None for q in range(n)])
            for g in layer.gates:
                if g.kind == TQ:
                    a, b = g.qubits
                    xa, za, xb, zb = _conjugate_bits(g.name, px[a], pz[a], px[b], pz[b])
                    px[a], pz[a], px[b], pz[b] = xa, za, xb, zb
                    row[a] = row[b] = g
                    open_slot[a] = open_slot[b] = -1
                elif g.kind == IDLE:
                    open_slot[g.qubits[0]] = -1
        for g in layer.gates:
            if g.kind == SQ:
                q = g.qubits[0]
                angles = g.angles
                if px[q] or pz[q]:
                    angles = pauli_right(_letter(px[q], pz[q]), angles)
                    px[q] = pz[q] = 0
                row[q] = angles
                open_slot[q] = len(out)
        out.append(row)

    if final_frame:
        fin = rng.integers(0, 4, size=n)
        fx = [int(v) >> 1 for v in fin]
        fz = [int(v) & 1 for v in fin]
    else:
        fx = [0] * n
        fz = [0] * n
    tail: dict[int, str] = {}
    for q in range(n):
        bx, bz = px[q] ^ fx[q], pz[q] ^ fz[q]
        if bx or bz:
            label = _letter(bx, bz)
            if open_slot[q] >= 0:
                out[open_slot[q]][q] = pauli_left(label, out[open_slot[q]][q])
            else:
                tail[q] = label
    if tail:
        out.append([pauli_left(tail[q], IDENTITY_ANGLES) if q in tail else None for q in range(n)])

    layers = tuple(_row_to_layer(row) for row in out)
    residual = PauliString(n, sum(x << q for q, x in enumerate(fx)), sum(z << q for q, z in enumerate(fz)))
    return Circuit(n, layers, dict(c.metadata)), residual


def _row_to_layer(row: list[Any]) -> Layer:
    gates: list[GateOp] = []
    for q, item in enumerate(row):
        if item is None:
            gates.append(idle(q))
        elif isinstance(item, GateOp):
            if min(item.qubits) == q:
                gates.append(item)
        else:
            gates.append(sq(q, item))
    return Layer(tuple(gates))


@dataclass(frozen=True)
class ReferenceCompilation:
    """Exact reference ``forward`` and the circuit ``reverse`` that undoes it.

    Running the compiled circuit and then ``reverse`` implements the qubit
    permutation ``mirror_permutation``.
    """

    forward: Circuit
    reverse: Circuit
    mirror_permutation: QubitPermutation
    perm_trick: bool = True

    @property
    def width(self) -> int:
        return self.forward.width


def make_reference(
    c_high: Circuit,
    comp: CompiledCircuit,
    graph: ConnectivityGraph | None = None,
    perm_trick: bool = True,
) -> ReferenceCompilation:
    """Exact reference compilation paired with ``comp``.

    With ``perm_trick`` the reverse circuit is compiled directly from the
    permuted inverse of ``c_high`` and may leave a residual permutation; the
    forward reference is its layer-by-layer inverse.  Without it the forward
    reference is compiled from the same initial layout and padded with a
    SWAP network so its permutation matches ``comp`` exactly.
    """
    if c_high.width != comp.width:
        raise ValueError("width mismatch between circuit and compilation")
    n = c_high.width
    graph = graph or ConnectivityGraph.from_name(comp.connectivity, n)
    if perm_trick:
        target = apply_permutation(layer_by_layer_inverse(c_high), comp.permutation)
        rev = compile_exact(target, graph)
        q = rev.permutation.compose(comp.permutation).compose(comp.initial_layout.inverse())
        reverse = rev.circuit
        forward = layer_by_layer_inverse(reverse)
    else:
        fwd = compile_exact(c_high, graph, initial_layout=comp.initial_layout)
        fwd = fix_permutation(fwd, graph, comp.permutation)
        forward = fwd.circuit
        reverse = layer_by_layer_inverse(forward)
        q = QubitPermutation.identity(n)
    return ReferenceCompilation(forward, reverse, q, perm_trick)


@dataclass(frozen=True)
class MirrorCircuit:
    circuit: Circuit
    target: str
    kind: str
    rc_seed: int | None = None
    metadata: dict[str, Any] = field(default_factory=dict, compare=False)

    def __post_init__(self) -> None:
        if self.kind not in MIRROR_KINDS:
            raise ValueError(f"unknown mirror kind {self.kind!r}")
        if len(self.target) != self.circuit.width or set(self.target) - {"0", "1"}:
            raise ValueError("target must be a bitstring of the circuit width")

    def to_json(self) -> dict[str, Any]:
        return {
            "kind": self.kind,
            "target": self.target,
            "rc_seed": self.rc_seed,
            "metadata": self.metadata,
            "circuit": self.circuit.to_json(),
        }

    @classmethod
    def from_json(cls, d: dict[str, Any]) -> MirrorCircuit:
        return cls(Circuit.from_json(d["circuit"]), d["target"], d["kind"], d.get("rc_seed"), d.get("metadata", {}))


def _layer_circuit(n: int, layer: Layer) -> Circuit:
    return Circuit(n, (layer,))


def _reversed_layer(layer: Layer, perm: QubitPermutation | None = None) -> Layer:
    """Inverse of an SQ layer, gate on qubit ``i`` moved to ``perm(i)``."""
    gates = []
    for g in layer.gates:
        q = g.qubits[0]
        target = perm(q) if perm is not None else q
        if g.kind == SQ:
            gates.append(sq(target, inverse_angles(g.angles)))
        else:
            gates.append(idle(target))
    gates.sort(key=lambda g: g.qubits[0])
    return Layer(tuple(gates))


def _finish(kind: str, circuit: Circuit, residual: PauliString, seed, extra: dict) -> MirrorCircuit:
    meta = {"mirror_kind": kind, "residual": residual.label, **extra}
    return MirrorCircuit(circuit.with_metadata(**meta), residual.flip_bits(), kind, seed, meta)


def build_m1(
    comp: CompiledCircuit,
    ref: ReferenceCompilation,
    rng: np.random.Generator,
    seed: int | None = None,
    layer: Layer | None = None,
    rc: bool = True,
) -> MirrorCircuit:
    """``L``, the compiled circuit, then a randomized compile of ``reverse`` and the permuted ``L^-1``."""
    if comp.width != ref.width:
        raise ValueError("width mismatch")
    n = comp.width
    L = layer if layer is not None else sample_2design_layer(n, rng)
    tail = ref.reverse.then(_layer_circuit(n, _reversed_layer(L, ref.mirror_permutation)))
    if rc:
        tail, residual = randomized_compile(tail, rng)
    else:
        residual = PauliString.identity(n)
    circuit = _layer_circuit(n, L).then(comp.circuit).then(tail)
    return _finish("M1", circuit, residual, seed, {"compiled_span": [1, 1 + comp.circuit.depth]})


def build_m2(
    ref: ReferenceCompilation,
    rng: np.random.Generator,
    seed: int | None = None,
    layer: Layer | None = None,
    rc: bool = True,
) -> MirrorCircuit:
    """Randomized compile of ``L``, forward reference, reverse reference, ``L^-1``."""
    n = ref.width
    L = layer if layer is not None else sample_2design_layer(n, rng)
    body = _layer_circuit(n, L).then(ref.forward).then(ref.reverse).then(_layer_circuit(n, _reversed_layer(L)))
    if rc:
        body, residual = randomized_compile(body, rng)
    else:
        residual = PauliString.identity(n)
    return _finish("M2", body, residual, seed, {})


def build_m3(
    n: int,
    rng: np.random.Generator,
    seed: int | None = None,
    layer: Layer | None = None,
    rc: bool = True,
) -> MirrorCircuit:
    """Randomized compile of ``L`` followed by ``L^-1``."""
    L = layer if layer is not None else sample_2design_layer(n, rng)
    body = _layer_circuit(n, L).then(_layer_circuit(n, _reversed_layer(L)))
    if rc:
        body, residual = randomized_compile(body, rng)
    else:
        residual = PauliString.identity(n)
    return _finish("M3", body, residual, seed, {})


@dataclass
class MirrorSuite:
    m1: list[MirrorCircuit]
    m2: list[MirrorCircuit]
    m3: list[MirrorCircuit]
    source_id: str | None = None
    reference_id: str | None = None
    metadata: dict[str, Any] = field(default_factory=dict)

    def __post_init__(self) -> None:
        if not (self.m1 and self.m2 and self.m3):
            raise ValueError("each mirror kind needs at least one circuit")

    @property
    def counts(self) -> tuple[int, int, int]:
        return len(self.m1), len(self.m2), len(self.m3)

    @property
    def width(self) -> int:
        return self.m1[0].circuit.width

    def by_kind(self, kind: str) -> list[MirrorCircuit]:
        return {"M1": self.m1, "M2": self.m2, "M3": self.m3}[kind]

    def __iter__(self):
        yield from self.m1
        yield from self.m2
        yield from self.m3

    def __len__(self) -> int:
        return sum(self.counts)

    def dump(self, directory: str | Path) -> Path:
        """Write one JSON file per circuit plus ``manifest.json``."""
        root = Path(directory)
        (root / "circuits").mkdir(parents=True, exist_ok=True)
        entries = []
        for kind in MIRROR_KINDS:
            for i, mc in enumerate(self.by_kind(kind)):
                name = f"circuits/{kind.lower()}_{i:04d}.json"
                mc.circuit.dump(root / name)
                entries.append({"kind": kind, "file": name, "target": mc.target, "rc_seed": mc.rc_seed})
        manifest = {
            "counts": list(self.counts),
            "source_id": self.source_id,
            "reference_id": self.reference_id,
            "metadata": self.metadata,
            "circuits": entries,
        }
        path = root / "manifest.json"
        path.write_text(json.dumps(manifest, sort_keys=True, indent=1))
        return path

    @classmethod
    def load(cls, directory: str | Path) -> MirrorSuite:
        root = Path(directory)
        manifest = json.loads((root / "manifest.json").read_text())
        groups: dict[str, list[MirrorCircuit]] = {k: [] for k in MIRROR_KINDS}
        for e in manifest["circuits"]:
            circuit = Circuit.load(root / e["file"])
            groups[e["kind"]].append(MirrorCircuit(circuit, e["target"], e["kind"], e.get("rc_seed")))
        return cls(groups["M1"], groups["M2"], groups["M3"], manifest.get("source_id"), manifest.get("reference_id"), manifest.get("metadata", {}))


def _distinct_seeds(rng: np.random.Generator, k: int) -> list[int]:
    seeds: list[int] = []
    seen: set[int] = set()
    while len(seeds) < k:
        for s in rng.integers(0, 2**63 - 1, size=k - len(seeds), dtype=np.int64):
            s = int(s)
            if s not in seen:
                seen.add(s)
                seeds.append(s)
    return seeds


def build_suite(
    comp: CompiledCircuit,
    ref: ReferenceCompilation,
    k1: int,
    k2: int,
    k3: int,
    rng: np.random.Generator,
    source_id: str | None = None,
    reference_id: str | None = None,
) -> MirrorSuite:
    """Independent ``L`` and frame randomness per circuit, each from its own seed."""
    if min(k1, k2, k3) < 1:
        raise ValueError("each K must be at least 1")
    seeds = _distinct_seeds(rng, k1 + k2 + k3)
    n = comp.width
    m1 = [build_m1(comp, ref, np.random.default_rng(s), s) for s in seeds[:k1]]
    m2 = [build_m2(ref, np.random.default_rng(s), s) for s in seeds[k1 : k1 + k2]]
    m3 = [build_m3(n, np.random.default_rng(s), s) for s in seeds[k1 + k2 :]]
    meta = {"perm_trick": ref.perm_trick, "mirror_permutation": list(ref.mirror_permutation.image)}
    return MirrorSuite(m1, m2, m3, source_id, reference_id, meta)

"""Layered circuit IR, qubit permutations, and dense oracles.

Qubit 0 is the most significant bit of a computational-basis index and the
leftmost character of a bitstring.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Iterable, Sequence

import numpy as np

from .gates import TQ_MATRICES, Angles, euler_matrix, inverse_angles

SQ, TQ, IDLE, U4 = "SQ", "TQ", "IDLE", "U4"
CLIFFORD_KINDS = ("CNOT", "CPHASE", "SWAP")

DEFAULT_ORACLE_LIMIT = 10


class OracleLimitError(ValueError):
    """Raised when a dense computation is requested above its width limit."""


@dataclass(frozen=True, slots=True)
class GateOp:
    """One gate.  ``U4`` is an opaque two-qubit block left for the compiler."""

    kind: str
    qubits: tuple[int, ...]
    angles: Angles | None = None
    name: str | None = None
    matrix: tuple[complex, ...] | None = None

    def __post_init__(self) -> None:
        k = self.kind
        if k == SQ or k == IDLE:
            if len(self.qubits) != 1:
                raise ValueError(f"{k} acts on one qubit")
        elif k == TQ:
            if self.name not in CLIFFORD_KINDS:
                raise ValueError(f"unsupported two-qubit gate {self.name!r}")
        elif k != U4:
            raise ValueError(f"unknown gate kind {k!r}")
        if len(self.qubits) == 2 and self.qubits[0] == self.qubits[1]:
            raise ValueError("a gate must touch distinct qubits")

    @property
    def is_two_qubit(self) -> bool:
        return len(self.qubits) == 2

    def unitary(self) -> np.ndarray:
        if self.kind == SQ:
            return euler_matrix(self.angles)
        if self.kind == IDLE:
            return np.eye(2, dtype=complex)
        if self.kind == TQ:
            return TQ_MATRICES[self.name]
        return np.array(self.matrix, dtype=complex).reshape(4, 4)

    def inverse(self) -> GateOp:
        if self.kind == SQ:
            return GateOp(SQ, self.qubits, angles=inverse_angles(self.angles))
        if self.kind == U4:
            m = np.array(self.matrix, dtype=complex).reshape(4, 4).conj().T
            return GateOp(U4, self.qubits, matrix=tuple(m.ravel().tolist()))
        return self

    def relabel(self, mapping: Sequence[int]) -> GateOp:
        return GateOp(
            self.kind,
            tuple(mapping[q] for q in self.qubits),
            angles=self.angles,
            name=self.name,
            matrix=self.matrix,
        )

    def to_json(self) -> dict[str, Any]:
        if self.kind == SQ:
            return {"kind": SQ, "q": self.qubits[0], "angles": list(self.angles)}
        if self.kind == IDLE:
            return {"kind": IDLE, "q": self.qubits[0]}
        if self.kind == TQ:
            return {"kind": TQ, "gate": self.name, "q": list(self.qubits)}
        return {
            "kind": U4,
            "q": list(self.qubits),
            "matrix": [[z.real, z.imag] for z in self.matrix],
        }

    @classmethod
    def from_json(cls, d: dict[str, Any]) -> GateOp:
        kind = d["kind"]
        if kind == SQ:
            return sq(d["q"], tuple(float(a) for a in d["angles"]))
        if kind == IDLE:
            return idle(d["q"])
        if kind == TQ:
            return tq(d["gate"], *d["q"])
        if kind == U4:
            return GateOp(U4, tuple(d["q"]), matrix=tuple(complex(re, im) for re, im in d["matrix"]))
        raise ValueError(f"unknown gate kind {kind!r}")


def sq(q: int, angles: Angles) -> GateOp:
    return GateOp(SQ, (q,), angles=tuple(angles))


def tq(name: str, a: int, b: int) -> GateOp:
    return GateOp(TQ, (a, b), name=name)


def idle(q: int) -> GateOp:
    return GateOp(IDLE, (q,))


def u4(a: int, b: int, matrix: np.ndarray) -> GateOp:
    return GateOp(U4, (a, b), matrix=tuple(np.asarray(matrix, dtype=complex).ravel().tolist()))


@dataclass(frozen=True, slots=True)
class Layer:
    """Gates acting in parallel; every qubit appears exactly once."""

    gates: tuple[GateOp, ...]

    def __post_init__(self) -> None:
        # canonical order so equality and JSON round trips ignore construction order
        object.__setattr__(self, "gates", tuple(sorted(self.gates, key=lambda g: min(g.qubits))))

    @classmethod
    def of(cls, width: int, gates: Iterable[GateOp]) -> Layer:
        """Build a layer, filling untouched qubits with IDLE."""
        gates = list(gates)
        used = {q for g in gates for q in g.qubits}
        gates.extend(idle(q) for q in range(width) if q not in used)
        layer = cls(tuple(gates))
        layer.check(width)
        return layer

    @property
    def width(self) -> int:
        return sum(len(g.qubits) for g in self.gates)

    @property
    def has_two_qubit(self) -> bool:
        return any(len(g.qubits) == 2 for g in self.gates)

    @property
    def is_idle(self) -> bool:
        return all(g.kind == IDLE for g in self.gates)

    def check(self, width: int) -> None:
        qs = [q for g in self.gates for q in g.qubits]
        if len(qs) != width or len(set(qs)) != width or min(qs, default=0) < 0 or max(qs, default=-1) >= width:
            raise ValueError(f"layer does not cover qubits 0..{width - 1} exactly once: {sorted(qs)}")


@dataclass(frozen=True)
class Circuit:
    width: int
    layers: tuple[Layer, ...] = ()
    metadata: dict[str, Any] = field(default_factory=dict, compare=False)

    def __post_init__(self) -> None:
        if self.width < 1:
            raise ValueError("circuit width must be >= 1")
        object.__setattr__(self, "layers", tuple(self.layers))
        for layer in self.layers:
            layer.check(self.width)

    def __len__(self) -> int:
        return len(self.layers)

    @property
    def depth(self) -> int:
        return len(self.layers)

    def gates(self) -> Iterable[GateOp]:
        for layer in self.layers:
            yield from layer.gates

    def count(self, kind: str) -> int:
        return sum(1 for g in self.gates() if g.kind == kind)

    @property
    def two_qubit_count(self) -> int:
        return sum(1 for g in self.gates() if len(g.qubits) == 2)

    def then(self, other: Circuit) -> Circuit:
        """Concatenate in time order: ``self`` runs first."""
        if other.width != self.width:
            raise ValueError("width mismatch")
        return Circuit(self.width, self.layers + other.layers, dict(self.metadata))

    def with_metadata(self, **kw: Any) -> Circuit:
        return Circuit(self.width, self.layers, {**self.metadata, **kw})

    def to_json(self) -> dict[str, Any]:
        return {
            "width": self.width,
            "layers": [[g.to_json() for g in layer.gates] for layer in self.layers],
            "metadata": self.metadata,
        }

    @classmethod
    def from_json(cls, d: dict[str, Any]) -> Circuit:
        width = int(d["width"])
        layers = [Layer.of(width, [GateOp.from_json(g) for g in layer]) for layer in d["layers"]]
        return cls(width, tuple(layers), dict(d.get("metadata", {})))

    def dump(self, path: str | Path) -> None:
        Path(path).write_text(json.dumps(self.to_json(), sort_keys=True))

    @classmethod
    def load(cls, path: str | Path) -> Circuit:
        return cls.from_json(json.loads(Path(path).read_text()))


def circuit_from_gates(width: int, gates: Iterable[GateOp], metadata: dict | None = None) -> Circuit:
    """Pack a time-ordered gate list into layers as early as possible."""
    frontier = [0] * width
    slots: list[list[GateOp]] = []
    for g in gates:
        if g.kind == IDLE:
            continue
        t = max(frontier[q] for q in g.qubits)
        if t == len(slots):
            slots.append([])
        slots[t].append(g)
        for q in g.qubits:
            frontier[q] = t + 1
    return Circuit(width, tuple(Layer.of(width, s) for s in slots), dict(metadata or {}))


@dataclass(frozen=True)
class QubitPermutation:
    """Qubit ``i`` is moved to position ``image[i]``."""

    image: tuple[int, ...]

    def __post_init__(self) -> None:
        object.__setattr__(self, "image", tuple(int(i) for i in self.image))
        if sorted(self.image) != list(range(len(self.image))):
            raise ValueError(f"not a permutation: {self.image}")

    @classmethod
    def identity(cls, n: int) -> QubitPermutation:
        return cls(tuple(range(n)))

    @classmethod
    def random(cls, n: int, rng: np.random.Generator) -> QubitPermutation:
        return cls(tuple(int(i) for i in rng.permutation(n)))

    @property
    def n(self) -> int:
        return len(self.image)

    def is_identity(self) -> bool:
        return all(i == j for i, j in enumerate(self.image))

    def inverse(self) -> QubitPermutation:
        inv = [0] * self.n
        for i, j in enumerate(self.image):
            inv[j] = i
        return QubitPermutation(tuple(inv))

    def compose(self, other: QubitPermutation) -> QubitPermutation:
        """``self`` after ``other``."""
        if other.n != self.n:
            raise ValueError("width mismatch")
        return QubitPermutation(tuple(self.image[j] for j in other.image))

    def __call__(self, q: int) -> int:
        return self.image[q]

    def to_matrix(self) -> np.ndarray:
        n = self.n
        d = 1 << n
        out = np.zeros((d, d))
        for idx in range(d):
            new = 0
            for q in range(n):
                if (idx >> (n - 1 - q)) & 1:
                    new |= 1 << (n - 1 - self.image[q])
            out[new, idx] = 1.0
        return out

    def index_map(self) -> np.ndarray:
        """``index_map()[i]`` is the basis index that index ``i`` is sent to."""
        n = self.n
        idx = np.arange(1 << n)
        out = np.zeros_like(idx)
        for q in range(n):
            bit = (idx >> (n - 1 - q)) & 1
            out |= bit << (n - 1 - self.image[q])
        return out


def apply_permutation(obj, p: QubitPermutation):
    """Relabel a circuit's qubits or a bitstring's positions by ``p``.

    A relabelled circuit implements ``P U P^dagger``.
    """
    if isinstance(obj, str):
        if len(obj) != p.n:
            raise ValueError("width mismatch")
        out = [""] * p.n
        for i, ch in enumerate(obj):
            out[p.image[i]] = ch
        return "".join(out)
    if isinstance(obj, Circuit):
        if obj.width != p.n:
            raise ValueError("width mismatch")
        layers = tuple(Layer.of(obj.width, [g.relabel(p.image) for g in layer.gates]) for layer in obj.layers)
        return Circuit(obj.width, layers, dict(obj.metadata))
    raise TypeError(f"cannot permute {type(obj).__name__}")


def layer_by_layer_inverse(c: Circuit) -> Circuit:
    layers = tuple(Layer(tuple(g.inverse() for g in layer.gates)) for layer in reversed(c.layers))
    return Circuit(c.width, layers, dict(c.metadata))


def apply_gate(state: np.ndarray, mat: np.ndarray, qubits: Sequence[int], n: int) -> np.ndarray:
    """Apply ``mat`` to ``qubits`` of ``state`` with shape ``(2**n, ...)``."""
    k = len(qubits)
    rest = state.shape[1:]
    t = state.reshape((2,) * n + rest)
    t = np.tensordot(mat.reshape((2,) * (2 * k)), t, axes=(list(range(k, 2 * k)), list(qubits)))
    # tensordot puts the gate's output axes first
    order = list(range(k, n))
    perm = []
    it = iter(order)
    pos = {q: i for i, q in enumerate(qubits)}
    for ax in range(n):
        perm.append(pos[ax] if ax in pos else next(it))
    perm += list(range(n, n + len(rest)))
    return np.transpose(t, perm).reshape(state.shape)


def unitary_of(c: Circuit, max_width: int = DEFAULT_ORACLE_LIMIT) -> np.ndarray:
    """Dense unitary of a circuit (oracle scale only)."""
    if c.width > max_width:
        raise OracleLimitError(f"width {c.width} exceeds oracle limit {max_width}")
    n = c.width
    u = np.eye(1 << n, dtype=complex)
    for layer in c.layers:
        for g in layer.gates:
            if g.kind == IDLE:
                continue
            u = apply_gate(u, g.unitary(), g.qubits, n)
    return u


def statevector_of(c: Circuit, max_width: int = 20) -> np.ndarray:
    if c.width > max_width:
        raise OracleLimitError(f"width {c.width} exceeds limit {max_width}")
    n = c.width
    psi = np.zeros(1 << n, dtype=complex)
    psi[0] = 1.0
    for layer in c.layers:
        for g in layer.gates:
            if g.kind != IDLE:
                psi = apply_gate(psi, g.unitary(), g.qubits, n)
    return psi


def bitstring(index: int, n: int) -> str:
    return format(index, f"0{n}b")

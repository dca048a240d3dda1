"""Signed Pauli strings on bitmasks.

Bit ``q`` of ``x``/``z`` refers to qubit ``q``.  The operator represented is
``i**phase * sigma_0 (x) sigma_1 (x) ...`` where each ``sigma`` is the
Hermitian single-qubit Pauli selected by its ``(x, z)`` bits, with
``(1, 1) -> Y``.  Hermitian strings therefore carry ``phase`` in ``{0, 2}``,
i.e. a sign.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .gates import PAULI_MATRICES

_LABEL_BITS = {"I": (0, 0), "X": (1, 0), "Y": (1, 1), "Z": (0, 1)}
_BITS_LABEL = {v: k for k, v in _LABEL_BITS.items()}


def _g(x1: int, z1: int, x2: int, z2: int) -> int:
    # exponent of i picked up by sigma(x1,z1) @ sigma(x2,z2)
    if x1 == 0 and z1 == 0:
        return 0
    if x1 == 1 and z1 == 1:
        return z2 - x2
    if x1 == 1:
        return z2 * (2 * x2 - 1)
    return x2 * (1 - 2 * z2)


@dataclass(frozen=True)
class PauliString:
    n: int
    x: int = 0
    z: int = 0
    phase: int = 0

    def __post_init__(self) -> None:
        limit = 1 << self.n
        if not (0 <= self.x < limit and 0 <= self.z < limit):
            raise ValueError("Pauli masks exceed width")
        object.__setattr__(self, "phase", self.phase % 4)

    @classmethod
    def identity(cls, n: int) -> PauliString:
        return cls(n)

    @classmethod
    def from_label(cls, label: str) -> PauliString:
        """``"-XIZ"`` style labels; character ``q`` acts on qubit ``q``."""
        phase = 0
        if label.startswith("-"):
            phase, label = 2, label[1:]
        elif label.startswith("+"):
            label = label[1:]
        x = z = 0
        for q, ch in enumerate(label):
            bx, bz = _LABEL_BITS[ch]
            x |= bx << q
            z |= bz << q
        return cls(len(label), x, z, phase)

    @classmethod
    def random(cls, n: int, rng: np.random.Generator) -> PauliString:
        bits = rng.integers(0, 2, size=(2, n))
        x = int(sum(int(b) << q for q, b in enumerate(bits[0])))
        z = int(sum(int(b) << q for q, b in enumerate(bits[1])))
        return cls(n, x, z)

    @property
    def sign(self) -> int:
        if self.phase % 2:
            raise ValueError("non-Hermitian Pauli has no real sign")
        return 1 if self.phase == 0 else -1

    def letter(self, q: int) -> str:
        return _BITS_LABEL[((self.x >> q) & 1, (self.z >> q) & 1)]

    @property
    def label(self) -> str:
        body = "".join(self.letter(q) for q in range(self.n))
        prefix = {0: "+", 1: "+i", 2: "-", 3: "-i"}[self.phase]
        return prefix + body

    def flip_bits(self) -> str:
        """Measured bitstring after applying this Pauli to ``|0...0>``."""
        return "".join(str((self.x >> q) & 1) for q in range(self.n))

    def is_identity(self) -> bool:
        return self.x == 0 and self.z == 0

    def to_matrix(self) -> np.ndarray:
        m = np.array([[1.0]], dtype=complex)
        for q in range(self.n):
            m = np.kron(m, PAULI_MATRICES[self.letter(q)])
        return (1j**self.phase) * m

    def __matmul__(self, other: PauliString) -> PauliString:
        return compose_pauli(self, other)


def compose_pauli(a: PauliString, b: PauliString) -> PauliString:
    """Operator product ``a @ b`` with exact phase."""
    if a.n != b.n:
        raise ValueError(f"width mismatch: {a.n} vs {b.n}")
    phase = a.phase + b.phase
    overlap = (a.x | a.z) & (b.x | b.z)
    q = 0
    while overlap >> q:
        if (overlap >> q) & 1:
            phase += _g((a.x >> q) & 1, (a.z >> q) & 1, (b.x >> q) & 1, (b.z >> q) & 1)
        q += 1
    return PauliString(a.n, a.x ^ b.x, a.z ^ b.z, phase)


def conjugate_pauli_by_clifford(p: PauliString, kind: str, qubits: tuple[int, int]) -> PauliString:
    """Return ``G p G^dagger`` for a two-qubit Clifford ``G``."""
    a, b = qubits
    xa, za = (p.x >> a) & 1, (p.z >> a) & 1
    xb, zb = (p.x >> b) & 1, (p.z >> b) & 1
    flip = 0
    if kind == "CNOT":
        flip = xa & zb & (xb ^ za ^ 1)
        xb ^= xa
        za ^= zb
    elif kind == "CPHASE":
        flip = xa & xb & (za ^ zb)
        za ^= xb
        zb ^= xa
    elif kind == "SWAP":
        xa, xb = xb, xa
        za, zb = zb, za
    else:
        raise ValueError(f"not a supported Clifford gate: {kind}")
    x = p.x & ~((1 << a) | (1 << b)) | (xa << a) | (xb << b)
    z = p.z & ~((1 << a) | (1 << b)) | (za << a) | (zb << b)
    return PauliString(p.n, x, z, p.phase + 2 * flip)

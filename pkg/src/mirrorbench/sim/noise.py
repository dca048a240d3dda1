"""Declarative error models."""
from __future__ import annotations

import json
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Any

import numpy as np

_ONE_Q = ("I", "X", "Y", "Z")
TWO_Q_LABELS = tuple(a + b for a in _ONE_Q for b in _ONE_Q)


class ErrorModelError(ValueError):
    pass


def depolarizing_probs(gamma: float, k: int) -> np.ndarray:
    """Pauli probabilities of the ``k``-qubit depolarizing channel with polarization ``gamma``.

    The uniform part includes the identity, so the channel is
    ``gamma * rho + (1 - gamma) * I / 2**k`` on the affected qubits.
    """
    size = 4**k
    p = np.full(size, (1.0 - gamma) / size)
    p[0] += gamma
    return p


def compose_pauli_channels(p: np.ndarray, q: np.ndarray) -> np.ndarray:
    """Probabilities of two independent Pauli channels applied in sequence.

    Indices encode ``(x, z)`` bits per qubit, so the product Pauli (up to
    phase) is the XOR of symplectic codes.
    """
    k = int(round(np.log(len(p)) / np.log(4)))
    codes = _symplectic_codes(k)
    out = np.zeros(len(p))
    lookup = {c: i for i, c in enumerate(codes)}
    for i, a in enumerate(codes):
        if p[i] == 0:
            continue
        for j, b in enumerate(codes):
            if q[j]:
                out[lookup[a ^ b]] += p[i] * q[j]
    return out


def _symplectic_codes(k: int) -> list[int]:
    # index = sum_j letter_j * 4**(k-1-j); code packs x bits then z bits
    bits = {0: (0, 0), 1: (1, 0), 2: (1, 1), 3: (0, 1)}
    codes = []
    for idx in range(4**k):
        x = z = 0
        for j in range(k):
            letter = (idx >> (2 * (k - 1 - j))) & 3
            bx, bz = bits[letter]
            x = (x << 1) | bx
            z = (z << 1) | bz
        codes.append((x << k) | z)
    return codes


def polarization_bounds(k: int) -> tuple[float, float]:
    return -1.0 / (4**k - 1), 1.0


GLOBAL_SCOPES = ("end", "compiled")


@dataclass(frozen=True)
class ErrorModel:
    """Noise attached after each gate, plus circuit-level and readout terms.

    ``pauli_1q`` holds ``(p_X, p_Y, p_Z)`` applied after every single-qubit
    gate; ``pauli_2q`` maps two-letter labels such as ``"XZ"`` to rates
    applied after every two-qubit gate.  ``global_scope="compiled"`` applies
    the global channel only after the span a circuit marks as compiled
    (``metadata["compiled_span"]``); circuits without the mark get it at
    the end unless they are M2 or M3 mirrors.
    """

    g1_pol: float = 1.0
    g2_pol: float = 1.0
    idle_z_rad: float = 0.0
    global_pol: float = 1.0
    readout_flip: float = 0.0
    pauli_1q: tuple[float, float, float] = (0.0, 0.0, 0.0)
    pauli_2q: dict[str, float] = field(default_factory=dict)
    global_scope: str = "end"

    def __post_init__(self) -> None:
        object.__setattr__(self, "pauli_1q", tuple(float(v) for v in self.pauli_1q))
        object.__setattr__(self, "pauli_2q", {str(k): float(v) for k, v in dict(self.pauli_2q).items()})
        self.validate()

    def validate(self) -> None:
        for name, k in (("g1_pol", 1), ("g2_pol", 2)):
            lo, hi = polarization_bounds(k)
            v = getattr(self, name)
            if not lo - 1e-12 <= v <= hi:
                raise ErrorModelError(f"{name}={v} outside [{lo:.4f}, 1]")
        if not -1.0 <= self.global_pol <= 1.0:
            raise ErrorModelError(f"global_pol={self.global_pol} outside [-1, 1]")
        if not 0.0 <= self.readout_flip <= 1.0:
            raise ErrorModelError("readout_flip must be a probability")
        if len(self.pauli_1q) != 3 or min(self.pauli_1q) < 0 or sum(self.pauli_1q) > 1 + 1e-12:
            raise ErrorModelError("pauli_1q must be three nonnegative rates summing to at most 1")
        for label, v in self.pauli_2q.items():
            if label not in TWO_Q_LABELS or label == "II":
                raise ErrorModelError(f"bad two-qubit Pauli label {label!r}")
            if v < 0:
                raise ErrorModelError("Pauli rates must be nonnegative")
        if sum(self.pauli_2q.values()) > 1 + 1e-12:
            raise ErrorModelError("pauli_2q rates sum above 1")
        if self.global_scope not in GLOBAL_SCOPES:
            raise ErrorModelError(f"global_scope must be one of {GLOBAL_SCOPES}")
        if not np.isfinite(self.idle_z_rad):
            raise ErrorModelError("idle_z_rad must be finite")

    @classmethod
    def noiseless(cls) -> ErrorModel:
        return cls()

    @property
    def is_noiseless(self) -> bool:
        return (
            self.g1_pol == 1.0
            and self.g2_pol == 1.0
            and self.idle_z_rad == 0.0
            and self.global_pol == 1.0
            and self.readout_flip == 0.0
            and not any(self.pauli_1q)
            and not any(self.pauli_2q.values())
        )

    def one_qubit_channel(self) -> np.ndarray | None:
        """Combined Pauli probabilities ``(I, X, Y, Z)`` after a single-qubit gate."""
        if self.g1_pol == 1.0 and not any(self.pauli_1q):
            return None
        px, py, pz = self.pauli_1q
        stoch = np.array([1.0 - px - py - pz, px, py, pz])
        return compose_pauli_channels(depolarizing_probs(self.g1_pol, 1), stoch)

    def two_qubit_channel(self) -> np.ndarray | None:
        """Combined 16 Pauli probabilities after a two-qubit gate, or ``None``."""
        if self.g2_pol == 1.0 and not any(self.pauli_2q.values()):
            return None
        stoch = np.zeros(16)
        for label, v in self.pauli_2q.items():
            stoch[TWO_Q_LABELS.index(label)] = v
        stoch[0] = 1.0 - stoch.sum()
        return compose_pauli_channels(depolarizing_probs(self.g2_pol, 2), stoch)

    def without(self, *names: str) -> ErrorModel:
        """Copy with the named terms reset to their noiseless values."""
        base = asdict(ErrorModel())
        d = self.to_json()
        for name in names:
            d[name] = base[name]
        return ErrorModel.from_json(d)

    def to_json(self) -> dict[str, Any]:
        d = asdict(self)
        d["pauli_1q"] = list(self.pauli_1q)
        d["pauli_2q"] = dict(sorted(self.pauli_2q.items()))
        return d

    @classmethod
    def from_json(cls, d: dict[str, Any]) -> ErrorModel:
        known = set(cls.__dataclass_fields__)
        extra = set(d) - known
        if extra:
            raise ErrorModelError(f"unknown error-model keys: {sorted(extra)}")
        return cls(**d)

    @classmethod
    def load(cls, path: str | Path) -> ErrorModel:
        return cls.from_json(json.loads(Path(path).read_text()))

    def dump(self, path: str | Path) -> None:
        Path(path).write_text(json.dumps(self.to_json(), sort_keys=True, indent=2))

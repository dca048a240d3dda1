"""Two-qubit KAK (Cartan) decomposition into the fixed 3-CNOT template."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ..circuit import Circuit, GateOp, Layer, sq, tq
from ..gates import X, Y, Z, euler_angles, ry, rz

_MAGIC = np.array(
    [[1, 0, 0, 1j], [0, 1j, 1, 0], [0, 1j, -1, 0], [1, 0, 0, -1j]], dtype=complex
) / math.sqrt(2)
_MAGIC_DAG = _MAGIC.conj().T
_XX, _YY, _ZZ = np.kron(X, X), np.kron(Y, Y), np.kron(Z, Z)


class NonUnitaryError(ValueError):
    pass


@dataclass(frozen=True)
class KAKDecomposition:
    """``u ~ (after0 (x) after1) exp(i(a XX + b YY + c ZZ)) (before0 (x) before1)``."""

    before: tuple[np.ndarray, np.ndarray]
    after: tuple[np.ndarray, np.ndarray]
    coefficients: tuple[float, float, float]

    def interaction(self) -> np.ndarray:
        a, b, c = self.coefficients
        h = a * _XX + b * _YY + c * _ZZ
        w, v = np.linalg.eigh(h)
        return (v * np.exp(1j * w)) @ v.conj().T

    def unitary(self) -> np.ndarray:
        return np.kron(*self.after) @ self.interaction() @ np.kron(*self.before)


def _kron_factor(m: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    r = m.reshape(2, 2, 2, 2).transpose(0, 2, 1, 3).reshape(4, 4)
    u, s, vh = np.linalg.svd(r)
    k0 = math.sqrt(s[0]) * u[:, 0].reshape(2, 2)
    k1 = math.sqrt(s[0]) * vh[0, :].reshape(2, 2)
    return k0, k1


def _simultaneous_real_eigvecs(m: np.ndarray) -> np.ndarray:
    a, b = m.real, m.imag
    for r in (0.5773502691896258, 1.4142135623730951, 2.718281828459045, 0.1234567, 7.3):
        _, p = np.linalg.eigh(a + r * b)
        off = p.T @ m @ p
        if np.max(np.abs(off - np.diag(np.diag(off)))) < 1e-9:
            return p
    raise RuntimeError("failed to diagonalize symmetric unitary")


def kak(u: np.ndarray, atol: float = 1e-10) -> KAKDecomposition:
    u = np.asarray(u, dtype=complex)
    if u.shape != (4, 4) or np.max(np.abs(u.conj().T @ u - np.eye(4))) > atol:
        raise NonUnitaryError("input is not a 4x4 unitary")
    u = u / np.linalg.det(u) ** 0.25
    up = _MAGIC_DAG @ u @ _MAGIC
    m2 = up.T @ up
    p = _simultaneous_real_eigvecs(m2)
    if np.linalg.det(p) < 0:
        p[:, 0] = -p[:, 0]
    dvals = np.diag(p.T @ m2 @ p)
    half = np.sqrt(dvals)
    k1 = up @ p / half
    if np.linalg.det(k1).real < 0:
        half[0] = -half[0]
        k1[:, 0] = -k1[:, 0]
    after = _MAGIC @ k1.real @ _MAGIC_DAG
    before = _MAGIC @ p.T @ _MAGIC_DAG
    h = _MAGIC @ np.diag(np.angle(half)) @ _MAGIC_DAG
    coeffs = tuple(float(np.trace(h @ s).real / 4) for s in (_XX, _YY, _ZZ))
    return KAKDecomposition(_kron_factor(before), _kron_factor(after), coeffs)


def kak_gates(u: np.ndarray, q0: int = 0, q1: int = 1) -> list[GateOp]:
    """Time-ordered gates: 3 CNOTs and 8 single-qubit gates implementing ``u``."""
    dec = kak(u)
    a, b, c = dec.coefficients
    b0, b1 = dec.before
    a0, a1 = dec.after
    hp = math.pi / 2
    locals_ = [
        (b0, rz(-hp) @ b1),
        (rz(hp - 2 * c), ry(2 * a - hp)),
        (np.eye(2), ry(hp - 2 * b)),
        (a0 @ rz(hp), a1),
    ]
    cnots = [("CNOT", q1, q0), ("CNOT", q0, q1), ("CNOT", q1, q0)]
    out: list[GateOp] = []
    for i, (m0, m1) in enumerate(locals_):
        out.append(sq(q0, euler_angles(m0)))
        out.append(sq(q1, euler_angles(m1)))
        if i < 3:
            name, ctl, tgt = cnots[i]
            out.append(tq(name, ctl, tgt))
    return out


def kak_decompose_su4(u: np.ndarray) -> Circuit:
    """Two-qubit circuit (7 layers) implementing ``u`` up to global phase."""
    layers = []
    gates = kak_gates(u)
    for i in range(0, len(gates), 3):
        chunk = gates[i : i + 3]
        layers.append(Layer.of(2, chunk[:2]))
        if len(chunk) == 3:
            layers.append(Layer.of(2, chunk[2:]))
    return Circuit(2, tuple(layers), {"family": "kak"})

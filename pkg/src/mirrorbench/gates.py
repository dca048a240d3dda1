"""Single-qubit gate algebra in Z-X-Z Euler form.

An SQ gate with angles ``(a, b, c)`` is the matrix ``Rz(a) @ Rx(b) @ Rz(c)``,
so ``Rz(c)`` acts first.  Global phase is discarded everywhere.
"""
from __future__ import annotations

import cmath
import math
from functools import lru_cache

import numpy as np

Angles = tuple[float, float, float]

I2 = np.eye(2, dtype=complex)
X = np.array([[0, 1], [1, 0]], dtype=complex)
Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
Z = np.array([[1, 0], [0, -1]], dtype=complex)
PAULI_MATRICES = {"I": I2, "X": X, "Y": Y, "Z": Z}

CNOT = np.array([[1, 0, 0, 0], [0, 1, 0, 0], [0, 0, 0, 1], [0, 0, 1, 0]], dtype=complex)
CPHASE = np.diag([1, 1, 1, -1]).astype(complex)
SWAP = np.array([[1, 0, 0, 0], [0, 0, 1, 0], [0, 1, 0, 0], [0, 0, 0, 1]], dtype=complex)
TQ_MATRICES = {"CNOT": CNOT, "CPHASE": CPHASE, "SWAP": SWAP}

_EPS = 1e-12


def wrap(theta: float) -> float:
    """Map an angle into (-pi, pi]."""
    t = math.fmod(theta, 2 * math.pi)
    if t <= -math.pi:
        t += 2 * math.pi
    elif t > math.pi:
        t -= 2 * math.pi
    return t


def rz(theta: float) -> np.ndarray:
    return np.array([[cmath.exp(-0.5j * theta), 0], [0, cmath.exp(0.5j * theta)]])


def rx(theta: float) -> np.ndarray:
    c, s = math.cos(theta / 2), math.sin(theta / 2)
    return np.array([[c, -1j * s], [-1j * s, c]])


def ry(theta: float) -> np.ndarray:
    c, s = math.cos(theta / 2), math.sin(theta / 2)
    return np.array([[c, -s], [s, c]], dtype=complex)


def euler_matrix(angles: Angles) -> np.ndarray:
    a, b, c = angles
    ea, ec = cmath.exp(-0.5j * a), cmath.exp(-0.5j * c)
    cb, sb = math.cos(b / 2), math.sin(b / 2)
    return np.array(
        [
            [ea * ec * cb, -1j * ea / ec * sb],
            [-1j * ec / ea * sb, cb / (ea * ec)],
        ]
    )


def euler_matrices(angles: np.ndarray) -> np.ndarray:
    """Vectorized :func:`euler_matrix` over an ``(m, 3)`` array."""
    angles = np.asarray(angles, dtype=float).reshape(-1, 3)
    ea = np.exp(-0.5j * angles[:, 0])
    ec = np.exp(-0.5j * angles[:, 2])
    cb = np.cos(angles[:, 1] / 2)
    sb = np.sin(angles[:, 1] / 2)
    out = np.empty((len(angles), 2, 2), dtype=complex)
    out[:, 0, 0] = ea * ec * cb
    out[:, 0, 1] = -1j * ea / ec * sb
    out[:, 1, 0] = -1j * ec / ea * sb
    out[:, 1, 1] = cb / (ea * ec)
    return out


def euler_angles(u: np.ndarray) -> Angles:
    """Z-X-Z angles of a 2x2 unitary, up to global phase."""
    u00, u01, u10, u11 = u[0, 0], u[0, 1], u[1, 0], u[1, 1]
    b = 2.0 * math.atan2(abs(u10), abs(u00))
    if abs(u10) < 1e-9:
        a = cmath.phase(u11) - cmath.phase(u00)
        return (wrap(a), 0.0, 0.0)
    if abs(u00) < 1e-9:
        a = cmath.phase(u10) - cmath.phase(u01)
        return (wrap(a), b, 0.0)
    a = cmath.phase(u10) - cmath.phase(u00) + math.pi / 2
    c = cmath.phase(u11) - cmath.phase(u00) - a
    return (wrap(a), b, wrap(c))


def inverse_angles(angles: Angles) -> Angles:
    a, b, c = angles
    return (-c, -b, -a)


def merge_angles(first: Angles, second: Angles) -> Angles:
    """Angles of ``second @ first`` (``first`` acts first)."""
    return euler_angles(euler_matrix(second) @ euler_matrix(first))


# Pauli absorption is exact in Euler form; no matrix round trip needed.
def pauli_left(label: str, angles: Angles) -> Angles:
    """Angles of ``P @ g`` for a Pauli ``P`` applied after ``g``."""
    a, b, c = angles
    if label == "I":
        return angles
    if label == "Z":
        return (wrap(a + math.pi), b, c)
    if label == "X":
        return (wrap(-a), wrap(b + math.pi), c)
    # Y ~ X Z
    return (wrap(-a - math.pi), wrap(b + math.pi), c)


def pauli_right(label: str, angles: Angles) -> Angles:
    """Angles of ``g @ P`` for a Pauli ``P`` applied before ``g``."""
    a, b, c = angles
    if label == "I":
        return angles
    if label == "Z":
        return (a, b, wrap(c + math.pi))
    if label == "X":
        return (a, wrap(b + math.pi), wrap(-c))
    return (a, wrap(b + math.pi), wrap(math.pi - c))


IDENTITY_ANGLES: Angles = (0.0, 0.0, 0.0)
X_ANGLES: Angles = (0.0, math.pi, 0.0)


def equal_up_to_phase(u: np.ndarray, v: np.ndarray, atol: float = 1e-9) -> bool:
    return phase_distance(u, v) < atol


def phase_distance(u: np.ndarray, v: np.ndarray) -> float:
    """Operator-norm-free distance ``min_phi ||u - e^{i phi} v||_max``."""
    k = np.vdot(v.ravel(), u.ravel())
    phase = k / abs(k) if abs(k) > _EPS else 1.0
    return float(np.max(np.abs(u - phase * v)))


@lru_cache(maxsize=1)
def clifford_angles() -> tuple[Angles, ...]:
    """The 24 single-qubit Cliffords (mod phase) as Euler angles."""
    h = np.array([[1, 1], [1, -1]], dtype=complex) / math.sqrt(2)
    s = np.diag([1, 1j])
    found: list[np.ndarray] = [I2]
    frontier = [I2]
    while frontier:
        nxt = []
        for g in frontier:
            for gen in (h, s):
                m = gen @ g
                if not any(equal_up_to_phase(m, f) for f in found):
                    found.append(m)
                    nxt.append(m)
        frontier = nxt
    assert len(found) == 24
    return tuple(euler_angles(m) for m in found)

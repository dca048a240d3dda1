"""Lower circuits plus an error model to flat op arrays for the kernels.

Row layout of ``ops``: ``[opcode, q0, q1, aux, row]``.  Qubit ``q`` of an
``nreg``-qubit register owns basis-index bit ``1 << (nreg - 1 - q)``.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..circuit import IDLE, SQ, TQ, U4, Circuit
from .noise import ErrorModel, ErrorModelError

EULER, MAT1, CNOT, CZ, SWAP, MAT2, PCH1, DEP2, DEPG, PCH2, PAULI = range(11)
NOISE_OPS = (PCH1, DEP2, DEPG, PCH2)
_TQ_CODES = {"CNOT": CNOT, "CPHASE": CZ, "SWAP": SWAP}
# (x, z) bits of single-qubit Pauli letters I, X, Y, Z
LETTER_BITS = ((0, 0), (1, 0), (1, 1), (0, 1))


@dataclass
class Program:
    nreg: int
    ops: np.ndarray
    params: np.ndarray
    mats: np.ndarray
    ptab: np.ndarray

    @property
    def dim(self) -> int:
        return 1 << self.nreg

    @property
    def noise_rows(self) -> np.ndarray:
        return np.flatnonzero(np.isin(self.ops[:, 0], NOISE_OPS))


class _Builder:
    def __init__(self, nreg: int) -> None:
        self.nreg = nreg
        self.ops: list[tuple[int, int, int, int, int]] = []
        self.params: list[tuple[float, float, float]] = []
        self.mats: list[np.ndarray] = []
        self.ptab: list[np.ndarray] = []
        self._ptab_index: dict[bytes, int] = {}

    def add(self, code: int, q0: int = 0, q1: int = 0, aux: int = 0, params=(0.0, 0.0, 0.0)) -> None:
        self.ops.append((code, q0, q1, aux, 0))
        self.params.append(tuple(params))

    def matrix(self, m: np.ndarray) -> int:
        pad = np.zeros((4, 4), dtype=complex)
        pad[: m.shape[0], : m.shape[1]] = m
        self.mats.append(pad)
        return len(self.mats) - 1

    def table(self, probs: np.ndarray) -> int:
        key = probs.tobytes()
        if key not in self._ptab_index:
            self._ptab_index[key] = len(self.ptab)
            self.ptab.append(probs)
        return self._ptab_index[key]

    def build(self) -> Program:
        m = len(self.ops)
        ops = np.array(self.ops, dtype=np.int32).reshape(m, 5)
        params = np.array(self.params, dtype=np.float64).reshape(m, 3)
        mats = np.array(self.mats, dtype=np.complex128).reshape(-1, 4, 4) if self.mats else np.zeros((1, 4, 4), complex)
        ptab = np.array(self.ptab, dtype=np.float64).reshape(-1, 16) if self.ptab else np.zeros((1, 16))
        return Program(self.nreg, ops, params, mats, ptab)


def build_program(c: Circuit, em: ErrorModel | None = None, nreg: int | None = None) -> Program:
    """Ops for ``c`` on the top ``c.width`` qubits of an ``nreg``-qubit register."""
    em = em or ErrorModel()
    b = _Builder(nreg or c.width)
    p1 = em.one_qubit_channel()
    p2 = em.two_qubit_channel()
    dep2_only = p2 is not None and not any(em.pauli_2q.values())
    theta = em.idle_z_rad
    global_at = _global_position(c, em)
    for li, layer in enumerate(c.layers):
        if li == global_at:
            b.add(DEPG, aux=c.width, params=(em.global_pol, 0.0, 0.0))
        busy = layer.has_two_qubit
        for g in layer.gates:
            kind = g.kind
            if kind == SQ:
                b.add(EULER, g.qubits[0], params=g.angles)
                if p1 is not None:
                    b.add(PCH1, g.qubits[0], params=(p1[1], p1[2], p1[3]))
                continue
            if kind == IDLE:
                if busy and theta:
                    b.add(EULER, g.qubits[0], params=(theta, 0.0, 0.0))
                continue
            q0, q1 = g.qubits
            if kind == TQ:
                b.add(_TQ_CODES[g.name], q0, q1)
            elif kind == U4:
                b.add(MAT2, q0, q1, b.matrix(g.unitary()))
            if p2 is not None:
                if dep2_only:
                    b.add(DEP2, q0, q1, params=(em.g2_pol, 0.0, 0.0))
                else:
                    b.add(PCH2, q0, q1, b.table(p2))
    if global_at == c.depth:
        b.add(DEPG, aux=c.width, params=(em.global_pol, 0.0, 0.0))
    return b.build()


def _global_position(c: Circuit, em: ErrorModel) -> int | None:
    """Layer index before which the global channel acts, or ``None``."""
    if em.global_pol == 1.0:
        return None
    if em.global_pol < -1.0 / (4**c.width - 1) - 1e-12:
        raise ErrorModelError(f"global_pol={em.global_pol} is not completely positive on {c.width} qubits")
    if em.global_scope == "end":
        return c.depth
    span = c.metadata.get("compiled_span")
    if span is not None:
        return int(span[1])
    if c.metadata.get("mirror_kind") in ("M2", "M3"):
        return None
    return c.depth


def noise_distribution(prog: Program, row: int) -> tuple[np.ndarray, list[int]]:
    """Pauli probabilities and affected qubits of noise op ``row``."""
    code, q0, q1, aux, _ = (int(v) for v in prog.ops[row])
    par = prog.params[row]
    if code == PCH1:
        return np.array([1.0 - par.sum(), par[0], par[1], par[2]]), [q0]
    if code == DEP2:
        g = par[0]
        p = np.full(16, (1.0 - g) / 16)
        p[0] += g
        return p, [q0, q1]
    if code == PCH2:
        return prog.ptab[aux], [q0, q1]
    raise ValueError(f"op {code} is not a local noise op")


def unravel(prog: Program, trajectories: int, rng: np.random.Generator) -> tuple[Program, np.ndarray]:
    """Replace channel ops by sampled Pauli ops, one error row per channel.

    Returns the rewritten program and ``errors`` with shape
    ``(trajectories, rows, 2)`` holding x and z basis-index masks.
    """
    rows = prog.noise_rows
    ops = prog.ops.copy()
    errors = np.zeros((trajectories, max(1, len(rows)), 2), dtype=np.int64)
    nreg = prog.nreg
    for r, row in enumerate(rows):
        code = int(ops[row, 0])
        ops[row, 0] = PAULI
        ops[row, 4] = r
        if code == DEPG:
            k = int(ops[row, 3])
            gamma = prog.params[row, 0]
            hit = rng.random(trajectories) >= gamma
            span = 1 << k
            shift = nreg - k
            xs = rng.integers(0, span, size=trajectories, dtype=np.int64) << shift
            zs = rng.integers(0, span, size=trajectories, dtype=np.int64) << shift
            errors[:, r, 0] = np.where(hit, xs, 0)
            errors[:, r, 1] = np.where(hit, zs, 0)
            continue
        probs, qubits = noise_distribution(prog, row)
        cdf = np.cumsum(probs)
        cdf[-1] = 1.0
        idx = np.searchsorted(cdf, rng.random(trajectories), side="right")
        k = len(qubits)
        xm = np.zeros(trajectories, dtype=np.int64)
        zm = np.zeros(trajectories, dtype=np.int64)
        for j, q in enumerate(qubits):
            letter = (idx >> (2 * (k - 1 - j))) & 3
            bit = np.int64(1) << (nreg - 1 - q)
            xm |= np.where((letter == 1) | (letter == 2), bit, 0)
            zm |= np.where((letter == 2) | (letter == 3), bit, 0)
        errors[:, r, 0] = xm
        errors[:, r, 1] = zm
    return Program(nreg, ops, prog.params, prog.mats, prog.ptab), errors

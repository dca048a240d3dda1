"""Pure-numpy fallback with the same interface as the compiled kernels."""
from __future__ import annotations

import numpy as np

from ..gates import PAULI_MATRICES, euler_matrix
from ..circuit import apply_gate
from ..gates import CNOT as _CNOT, CPHASE as _CZ, SWAP as _SWAP
from .program import CNOT, CZ, DEP2, DEPG, EULER, MAT1, MAT2, PAULI, PCH1, PCH2, SWAP

_PERM = {CNOT: _CNOT, CZ: _CZ, SWAP: _SWAP}
_LETTERS = [PAULI_MATRICES[k] for k in "IXYZ"]
_PAULI2 = [np.kron(a, b) for a in _LETTERS for b in _LETTERS]


def _left(a: np.ndarray, u: np.ndarray, qubits, nreg: int) -> np.ndarray:
    return apply_gate(a, u, qubits, nreg)


def _conj(rho: np.ndarray, u: np.ndarray, qubits, nreg: int) -> np.ndarray:
    rho = apply_gate(rho, u, qubits, nreg)
    return apply_gate(rho.T, u.conj(), qubits, nreg).T


def _pauli_channel(rho: np.ndarray, probs, mats, qubits, nreg: int) -> np.ndarray:
    out = np.zeros_like(rho)
    for p, m in zip(probs, mats):
        if p:
            out += p * _conj(rho, m, qubits, nreg)
    return out


def _gate_matrix(code: int, par, mats, aux: int) -> np.ndarray:
    if code == EULER:
        return euler_matrix(tuple(par))
    if code == MAT1:
        return mats[aux, :2, :2]
    if code == MAT2:
        return mats[aux]
    return _PERM[code]


def run_dm(nreg, ops, params, mats, ptab, rho) -> None:
    D = rho.shape[0]
    if D != 1 << nreg or rho.shape[1] != D:
        raise ValueError("density matrix shape does not match register")
    r = np.array(rho)
    for i in range(ops.shape[0]):
        code, q0, q1, aux, _ = (int(v) for v in ops[i])
        par = params[i]
        if code in (EULER, MAT1):
            r = _conj(r, _gate_matrix(code, par, mats, aux), (q0,), nreg)
        elif code in (CNOT, CZ, SWAP, MAT2):
            r = _conj(r, _gate_matrix(code, par, mats, aux), (q0, q1), nreg)
        elif code == PCH1:
            probs = (1.0 - par.sum(), par[0], par[1], par[2])
            r = _pauli_channel(r, probs, _LETTERS, (q0,), nreg)
        elif code == DEP2:
            g = par[0]
            probs = np.full(16, (1.0 - g) / 16)
            probs[0] += g
            r = _pauli_channel(r, probs, _PAULI2, (q0, q1), nreg)
        elif code == PCH2:
            r = _pauli_channel(r, ptab[aux], _PAULI2, (q0, q1), nreg)
        elif code == DEPG:
            ds = 1 << aux
            da = D // ds
            g = par[0]
            t = r.reshape(ds, da, ds, da)
            sigma = np.einsum("sasb->ab", t)
            r = g * r + (1.0 - g) * np.kron(np.eye(ds) / ds, sigma)
        else:
            raise ValueError(f"opcode {code} not valid for density matrices")
    rho[...] = r


def run_sv(nreg, ops, params, mats, errors, psi) -> None:
    T, D = psi.shape
    if D != 1 << nreg:
        raise ValueError("state shape does not match register")
    if errors.shape[0] < T:
        raise ValueError("need one error table per trajectory")
    s = np.array(psi).T.copy()
    k = np.arange(D, dtype=np.int64)
    cols = np.arange(T)
    for i in range(ops.shape[0]):
        code, q0, q1, aux, row = (int(v) for v in ops[i])
        if code in (EULER, MAT1):
            s = _left(s, _gate_matrix(code, params[i], mats, aux), (q0,), nreg)
        elif code in (CNOT, CZ, SWAP, MAT2):
            s = _left(s, _gate_matrix(code, params[i], mats, aux), (q0, q1), nreg)
        elif code == PAULI:
            x = errors[:T, row, 0]
            z = errors[:T, row, 1]
            sign = 1 - 2 * (np.bitwise_count(k[:, None] & z[None, :]) & 1).astype(np.int64)
            out = np.empty_like(s)
            out[k[:, None] ^ x[None, :], cols[None, :]] = sign * s
            s = out
        else:
            raise ValueError(f"opcode {code} must be unravelled before state-vector runs")
    psi[...] = s.T

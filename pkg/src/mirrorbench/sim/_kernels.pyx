# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled density-matrix and state-vector kernels.

Semantics mirror ``_pykernels``; see ``program.py`` for the op layout.
"""
import numpy as np

from libc.math cimport cos, sin

ctypedef double complex cplx

cdef extern from *:
    """
    static inline int mb_parity(long long v) { return __builtin_parityll((unsigned long long) v); }
    """
    int mb_parity(long long v) nogil

cdef enum:
    EULER, MAT1, CNOT, CZ, SWAP, MAT2, PCH1, DEP2, DEPG, PCH2, PAULI

# local (x, z) codes for I, X, Y, Z inside a two-qubit block
cdef int LX[4]
cdef int LZ[4]
LX[:] = [0, 1, 1, 0]
LZ[:] = [0, 0, 1, 1]


cdef inline void euler(double a, double b, double c, cplx* u) noexcept nogil:
    cdef cplx ea = cos(a / 2) - 1j * sin(a / 2)
    cdef cplx ec = cos(c / 2) - 1j * sin(c / 2)
    cdef double cb = cos(b / 2), sb = sin(b / 2)
    u[0] = ea * ec * cb
    u[1] = -1j * sb * ea * ec.conjugate()
    u[2] = -1j * sb * ec * ea.conjugate()
    u[3] = cb * (ea * ec).conjugate()


cdef void left1(cplx* a, Py_ssize_t D, Py_ssize_t C, Py_ssize_t m, cplx* u) noexcept nogil:
    cdef Py_ssize_t i, c, i0, i1
    cdef cplx x, y
    for i in range(D):
        if i & m:
            continue
        i0 = i * C
        i1 = (i | m) * C
        for c in range(C):
            x = a[i0 + c]
            y = a[i1 + c]
            a[i0 + c] = u[0] * x + u[1] * y
            a[i1 + c] = u[2] * x + u[3] * y


cdef void right1(cplx* a, Py_ssize_t D, Py_ssize_t m, cplx* u) noexcept nogil:
    # a <- a @ u^dagger
    cdef Py_ssize_t r, c, base
    cdef cplx x, y
    cdef cplx v0 = u[0].conjugate(), v1 = u[1].conjugate(), v2 = u[2].conjugate(), v3 = u[3].conjugate()
    for r in range(D):
        base = r * D
        for c in range(D):
            if c & m:
                continue
            x = a[base + c]
            y = a[base + (c | m)]
            a[base + c] = x * v0 + y * v1
            a[base + (c | m)] = x * v2 + y * v3


cdef void left2(cplx* a, Py_ssize_t D, Py_ssize_t C, Py_ssize_t ma, Py_ssize_t mb, cplx* u) noexcept nogil:
    cdef Py_ssize_t i, c, k, j
    cdef Py_ssize_t idx[4]
    cdef cplx v[4]
    cdef cplx s
    for i in range(D):
        if i & (ma | mb):
            continue
        idx[0] = i * C
        idx[1] = (i | mb) * C
        idx[2] = (i | ma) * C
        idx[3] = (i | ma | mb) * C
        for c in range(C):
            for k in range(4):
                v[k] = a[idx[k] + c]
            for k in range(4):
                s = 0
                for j in range(4):
                    s = s + u[4 * k + j] * v[j]
                a[idx[k] + c] = s


cdef void right2(cplx* a, Py_ssize_t D, Py_ssize_t ma, Py_ssize_t mb, cplx* u) noexcept nogil:
    cdef Py_ssize_t r, c, k, j, base
    cdef Py_ssize_t idx[4]
    cdef cplx v[4]
    cdef cplx w[16]
    cdef cplx s
    for k in range(16):
        w[k] = u[k].conjugate()
    for r in range(D):
        base = r * D
        for c in range(D):
            if c & (ma | mb):
                continue
            idx[0] = base + c
            idx[1] = base + (c | mb)
            idx[2] = base + (c | ma)
            idx[3] = base + (c | ma | mb)
            for k in range(4):
                v[k] = a[idx[k]]
            for k in range(4):
                s = 0
                for j in range(4):
                    s = s + v[j] * w[4 * k + j]
                a[idx[k]] = s


cdef void perm_rows(cplx* a, Py_ssize_t D, Py_ssize_t C, int code, Py_ssize_t ma, Py_ssize_t mb) noexcept nogil:
    # CNOT (control ma, target mb), CZ, SWAP as row permutations / signs
    cdef Py_ssize_t i, c, p, q
    cdef cplx t
    for i in range(D):
        if code == CNOT:
            if (i & ma) and not (i & mb):
                p = i * C
                q = (i | mb) * C
                for c in range(C):
                    t = a[p + c]
                    a[p + c] = a[q + c]
                    a[q + c] = t
        elif code == CZ:
            if (i & ma) and (i & mb):
                p = i * C
                for c in range(C):
                    a[p + c] = -a[p + c]
        else:
            if (i & ma) and not (i & mb):
                p = i * C
                q = ((i & ~ma) | mb) * C
                for c in range(C):
                    t = a[p + c]
                    a[p + c] = a[q + c]
                    a[q + c] = t


cdef void perm_cols(cplx* a, Py_ssize_t D, int code, Py_ssize_t ma, Py_ssize_t mb) noexcept nogil:
    cdef Py_ssize_t r, c, base, q
    cdef cplx t
    for r in range(D):
        base = r * D
        for c in range(D):
            if code == CNOT:
                if (c & ma) and not (c & mb):
                    q = c | mb
                    t = a[base + c]
                    a[base + c] = a[base + q]
                    a[base + q] = t
            elif code == CZ:
                if (c & ma) and (c & mb):
                    a[base + c] = -a[base + c]
            else:
                if (c & ma) and not (c & mb):
                    q = (c & ~ma) | mb
                    t = a[base + c]
                    a[base + c] = a[base + q]
                    a[base + q] = t


cdef void pch1(cplx* a, Py_ssize_t D, Py_ssize_t m, double px, double py, double pz) noexcept nogil:
    cdef double p0 = 1.0 - px - py - pz
    cdef double kd = p0 + pz, ko = px + py, kb = p0 - pz, kc = px - py
    cdef Py_ssize_t r, c, r1, c1
    cdef cplx x00, x01, x10, x11
    for r in range(D):
        if r & m:
            continue
        r1 = r | m
        for c in range(D):
            if c & m:
                continue
            c1 = c | m
            x00 = a[r * D + c]
            x01 = a[r * D + c1]
            x10 = a[r1 * D + c]
            x11 = a[r1 * D + c1]
            a[r * D + c] = kd * x00 + ko * x11
            a[r1 * D + c1] = kd * x11 + ko * x00
            a[r * D + c1] = kb * x01 + kc * x10
            a[r1 * D + c] = kb * x10 + kc * x01


cdef void dep2(cplx* a, Py_ssize_t D, Py_ssize_t ma, Py_ssize_t mb, double g) noexcept nogil:
    cdef Py_ssize_t r, c, k, j
    cdef Py_ssize_t off[4]
    cdef cplx tr
    cdef double mix = (1.0 - g) / 4.0
    off[0] = 0
    off[1] = mb
    off[2] = ma
    off[3] = ma | mb
    for r in range(D):
        if r & (ma | mb):
            continue
        for c in range(D):
            if c & (ma | mb):
                continue
            tr = 0
            for k in range(4):
                tr = tr + a[(r | off[k]) * D + (c | off[k])]
            for k in range(4):
                for j in range(4):
                    a[(r | off[k]) * D + (c | off[j])] = g * a[(r | off[k]) * D + (c | off[j])]
                a[(r | off[k]) * D + (c | off[k])] += mix * tr


cdef void pch2(cplx* a, Py_ssize_t D, Py_ssize_t ma, Py_ssize_t mb, double* p) noexcept nogil:
    cdef Py_ssize_t r, c, i, j, P
    cdef Py_ssize_t off[4]
    cdef cplx blk[16]
    cdef cplx out[16]
    cdef int xs, zs, si, sj
    off[0] = 0
    off[1] = mb
    off[2] = ma
    off[3] = ma | mb
    for r in range(D):
        if r & (ma | mb):
            continue
        for c in range(D):
            if c & (ma | mb):
                continue
            for i in range(4):
                for j in range(4):
                    blk[4 * i + j] = a[(r | off[i]) * D + (c | off[j])]
                    out[4 * i + j] = 0
            for P in range(16):
                if p[P] == 0.0:
                    continue
                xs = 2 * LX[P >> 2] + LX[P & 3]
                zs = 2 * LZ[P >> 2] + LZ[P & 3]
                for i in range(4):
                    si = 1 - 2 * mb_parity((i ^ xs) & zs)
                    for j in range(4):
                        sj = 1 - 2 * mb_parity((j ^ xs) & zs)
                        out[4 * i + j] += p[P] * si * sj * blk[4 * (i ^ xs) + (j ^ xs)]
            for i in range(4):
                for j in range(4):
                    a[(r | off[i]) * D + (c | off[j])] = out[4 * i + j]


cdef void depg(cplx* a, Py_ssize_t D, Py_ssize_t ds, double g) noexcept nogil:
    # depolarize the top log2(ds) qubits
    cdef Py_ssize_t da = D // ds
    cdef Py_ssize_t s, x, y, s2
    cdef cplx acc
    cdef double mix = (1.0 - g) / ds
    for x in range(da):
        for y in range(da):
            acc = 0
            for s in range(ds):
                acc = acc + a[(s * da + x) * D + s * da + y]
            for s in range(ds):
                for s2 in range(ds):
                    a[(s * da + x) * D + s2 * da + y] = g * a[(s * da + x) * D + s2 * da + y]
                a[(s * da + x) * D + s * da + y] += mix * acc


cdef void pauli_vec(cplx* a, Py_ssize_t D, long long x, long long z) noexcept nogil:
    cdef Py_ssize_t k, kx
    cdef cplx v, w
    cdef int sk, skx
    for k in range(D):
        kx = k ^ x
        if kx < k:
            continue
        sk = 1 - 2 * mb_parity(k & z)
        if kx == k:
            if sk < 0:
                a[k] = -a[k]
            continue
        skx = 1 - 2 * mb_parity(kx & z)
        v = a[k]
        w = a[kx]
        a[kx] = sk * v
        a[k] = skx * w


def run_dm(int nreg, int[:, ::1] ops, double[:, ::1] params, double complex[:, :, ::1] mats,
           double[:, ::1] ptab, double complex[:, ::1] rho):
    """Evolve ``rho`` in place through the program."""
    cdef Py_ssize_t D = rho.shape[0]
    cdef Py_ssize_t i, ma, mb
    cdef int code
    cdef cplx u[16]
    cdef cplx* a = &rho[0, 0]
    if D != (1 << nreg) or rho.shape[1] != D:
        raise ValueError("density matrix shape does not match register")
    with nogil:
        for i in range(ops.shape[0]):
            code = ops[i, 0]
            ma = (<Py_ssize_t> 1) << (nreg - 1 - ops[i, 1])
            mb = (<Py_ssize_t> 1) << (nreg - 1 - ops[i, 2])
            if code == EULER:
                euler(params[i, 0], params[i, 1], params[i, 2], u)
                left1(a, D, D, ma, u)
                right1(a, D, ma, u)
            elif code == MAT1:
                u[0] = mats[ops[i, 3], 0, 0]
                u[1] = mats[ops[i, 3], 0, 1]
                u[2] = mats[ops[i, 3], 1, 0]
                u[3] = mats[ops[i, 3], 1, 1]
                left1(a, D, D, ma, u)
                right1(a, D, ma, u)
            elif code == CNOT or code == CZ or code == SWAP:
                perm_rows(a, D, D, code, ma, mb)
                perm_cols(a, D, code, ma, mb)
            elif code == MAT2:
                left2(a, D, D, ma, mb, &mats[ops[i, 3], 0, 0])
                right2(a, D, ma, mb, &mats[ops[i, 3], 0, 0])
            elif code == PCH1:
                pch1(a, D, ma, params[i, 0], params[i, 1], params[i, 2])
            elif code == DEP2:
                dep2(a, D, ma, mb, params[i, 0])
            elif code == PCH2:
                pch2(a, D, ma, mb, &ptab[ops[i, 3], 0])
            elif code == DEPG:
                depg(a, D, (<Py_ssize_t> 1) << ops[i, 3], params[i, 0])
            else:
                with gil:
                    raise ValueError(f"opcode {code} not valid for density matrices")


def run_sv(int nreg, int[:, ::1] ops, double[:, ::1] params, double complex[:, :, ::1] mats,
           long long[:, :, ::1] errors, double complex[:, ::1] psi):
    """Evolve each row of ``psi`` in place; row ``t`` uses ``errors[t]``."""
    cdef Py_ssize_t T = psi.shape[0], D = psi.shape[1]
    cdef Py_ssize_t t, i, ma, mb
    cdef int code
    cdef cplx u[16]
    cdef cplx* a
    if D != (1 << nreg):
        raise ValueError("state shape does not match register")
    if errors.shape[0] < T:
        raise ValueError("need one error table per trajectory")
    with nogil:
        for t in range(T):
            a = &psi[t, 0]
            for i in range(ops.shape[0]):
                code = ops[i, 0]
                ma = (<Py_ssize_t> 1) << (nreg - 1 - ops[i, 1])
                mb = (<Py_ssize_t> 1) << (nreg - 1 - ops[i, 2])
                if code == EULER:
                    euler(params[i, 0], params[i, 1], params[i, 2], u)
                    left1(a, D, 1, ma, u)
                elif code == MAT1:
                    u[0] = mats[ops[i, 3], 0, 0]
                    u[1] = mats[ops[i, 3], 0, 1]
                    u[2] = mats[ops[i, 3], 1, 0]
                    u[3] = mats[ops[i, 3], 1, 1]
                    left1(a, D, 1, ma, u)
                elif code == CNOT or code == CZ or code == SWAP:
                    perm_rows(a, D, 1, code, ma, mb)
                elif code == MAT2:
                    left2(a, D, 1, ma, mb, &mats[ops[i, 3], 0, 0])
                elif code == PAULI:
                    pauli_vec(a, D, errors[t, ops[i, 4], 0], errors[t, ops[i, 4], 1])
                else:
                    with gil:
                        raise ValueError(f"opcode {code} must be unravelled before state-vector runs")

# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled implementations of the hot kernels.

Mirrors the signatures in ``_kernels_py``; :mod:`isomon.backend` picks
whichever imports cleanly.
"""

import numpy as np

cimport cython
cimport numpy as cnp

cnp.import_array()

BACKEND_NAME = "compiled"

ctypedef double complex cplx

# Dormand-Prince 5(4) tableau, flattened row-major (row i has i entries).
cdef double _C[7]
_C[0] = 0.0; _C[1] = 1.0 / 5; _C[2] = 3.0 / 10; _C[3] = 4.0 / 5
_C[4] = 8.0 / 9; _C[5] = 1.0; _C[6] = 1.0

cdef double _A[7][6]
_A[1][0] = 1.0 / 5
_A[2][0] = 3.0 / 40; _A[2][1] = 9.0 / 40
_A[3][0] = 44.0 / 45; _A[3][1] = -56.0 / 15; _A[3][2] = 32.0 / 9
_A[4][0] = 19372.0 / 6561; _A[4][1] = -25360.0 / 2187
_A[4][2] = 64448.0 / 6561; _A[4][3] = -212.0 / 729
_A[5][0] = 9017.0 / 3168; _A[5][1] = -355.0 / 33; _A[5][2] = 46732.0 / 5247
_A[5][3] = 49.0 / 176; _A[5][4] = -5103.0 / 18656
_A[6][0] = 35.0 / 384; _A[6][1] = 0.0; _A[6][2] = 500.0 / 1113
_A[6][3] = 125.0 / 192; _A[6][4] = -2187.0 / 6784; _A[6][5] = 11.0 / 84

cdef double _B5[7]
_B5[0] = 35.0 / 384; _B5[1] = 0.0; _B5[2] = 500.0 / 1113
_B5[3] = 125.0 / 192; _B5[4] = -2187.0 / 6784; _B5[5] = 11.0 / 84; _B5[6] = 0.0

cdef double _E[7]
_E[0] = 71.0 / 57600; _E[1] = 0.0; _E[2] = -71.0 / 16695
_E[3] = 71.0 / 1920; _E[4] = -17253.0 / 339200; _E[5] = 22.0 / 525
_E[6] = -1.0 / 40


def cauchy_mul(a, b, Py_ssize_t out_len):
    """Truncated Cauchy product of coefficient vectors."""
    cdef cnp.ndarray[cplx, ndim=1] aa = np.ascontiguousarray(a, dtype=np.complex128)
    cdef cnp.ndarray[cplx, ndim=1] bb = np.ascontiguousarray(b, dtype=np.complex128)
    if out_len <= 0:
        return np.zeros(0, dtype=np.complex128)
    cdef cnp.ndarray[cplx, ndim=1] out = np.zeros(out_len, dtype=np.complex128)
    cdef Py_ssize_t na = aa.shape[0], nb = bb.shape[0]
    cdef Py_ssize_t k, i, lo, hi
    cdef cplx acc
    for k in range(out_len):
        lo = k - nb + 1
        if lo < 0:
            lo = 0
        hi = k if k < na - 1 else na - 1
        acc = 0
        for i in range(lo, hi + 1):
            acc += aa[i] * bb[k - i]
        out[k] = acc
    return out


def mat_cauchy_mul(A, B, Py_ssize_t out_len):
    """Truncated Cauchy product of matrix coefficient stacks."""
    cdef cnp.ndarray[cplx, ndim=3] AA = np.ascontiguousarray(A, dtype=np.complex128)
    cdef cnp.ndarray[cplx, ndim=3] BB = np.ascontiguousarray(B, dtype=np.complex128)
    cdef Py_ssize_t na = AA.shape[0], nb = BB.shape[0], r = AA.shape[1]
    cdef cnp.ndarray[cplx, ndim=3] out = np.zeros((out_len, r, r), dtype=np.complex128)
    cdef Py_ssize_t k, i, lo, hi, p, q, m
    cdef cplx acc
    for k in range(out_len):
        lo = k - nb + 1
        if lo < 0:
            lo = 0
        hi = k if k < na - 1 else na - 1
        for i in range(lo, hi + 1):
            for p in range(r):
                for q in range(r):
                    acc = 0
                    for m in range(r):
                        acc += AA[i, p, m] * BB[k - i, m, q]
                    out[k, p, q] += acc
    return out


def lax_eval(z, inf_coeffs, pole_locs, pole_coeffs, pole_orders):
    """Evaluate the rational matrix at a point (matches python backend)."""
    cdef cnp.ndarray[cplx, ndim=3] I = np.ascontiguousarray(inf_coeffs, dtype=np.complex128)
    cdef cnp.ndarray[cplx, ndim=1] P = np.ascontiguousarray(pole_locs, dtype=np.complex128)
    cdef cnp.ndarray[cplx, ndim=4] C = np.ascontiguousarray(pole_coeffs, dtype=np.complex128)
    cdef cnp.ndarray[long, ndim=1] O = np.ascontiguousarray(pole_orders, dtype=np.int64)
    cdef Py_ssize_t r = C.shape[2] if C.size else I.shape[1]
    cdef cnp.ndarray[cplx, ndim=2] L = np.zeros((r, r), dtype=np.complex128)
    cdef cplx zz = z
    _lax_eval_into(L, zz, I, P, C, O)
    return L


cdef void _lax_eval_into(cnp.ndarray[cplx, ndim=2] L, cplx z,
                         cnp.ndarray[cplx, ndim=3] I,
                         cnp.ndarray[cplx, ndim=1] P,
                         cnp.ndarray[cplx, ndim=4] C,
                         cnp.ndarray[long, ndim=1] O):
    cdef Py_ssize_t r = L.shape[0]
    cdef Py_ssize_t j, nu, p, q
    cdef cplx zp, u, up
    L[:, :] = 0
    zp = 1
    for j in range(I.shape[0]):
        for p in range(r):
            for q in range(r):
                L[p, q] -= I[j, p, q] * zp
        zp *= z
    for nu in range(P.shape[0]):
        u = 1.0 / (z - P[nu])
        up = u
        for j in range(O[nu]):
            for p in range(r):
                for q in range(r):
                    L[p, q] += C[nu, j, p, q] * up
            up *= u


def transport_polyline(psi0, waypoints, inf_coeffs, pole_locs, pole_coeffs,
                       pole_orders, double rtol, double atol, long max_steps):
    """Adaptive RK transport of Psi' = L(z) Psi along a polyline."""
    cdef cnp.ndarray[cplx, ndim=2] psi = np.array(psi0, dtype=np.complex128)
    cdef cnp.ndarray[cplx, ndim=1] W = np.ascontiguousarray(waypoints, dtype=np.complex128)
    cdef cnp.ndarray[cplx, ndim=3] I = np.ascontiguousarray(inf_coeffs, dtype=np.complex128)
    cdef cnp.ndarray[cplx, ndim=1] P = np.ascontiguousarray(pole_locs, dtype=np.complex128)
    cdef cnp.ndarray[cplx, ndim=4] C = np.ascontiguousarray(pole_coeffs, dtype=np.complex128)
    cdef cnp.ndarray[long, ndim=1] O = np.ascontiguousarray(pole_orders, dtype=np.int64)
    cdef Py_ssize_t r = psi.shape[0]
    cdef long accepted = 0, rejected = 0
    cdef cnp.ndarray[cplx, ndim=2] L = np.zeros((r, r), dtype=np.complex128)
    cdef cnp.ndarray[cplx, ndim=3] k = np.zeros((7, r, r), dtype=np.complex128)
    cdef cnp.ndarray[cplx, ndim=2] y = np.zeros((r, r), dtype=np.complex128)
    cdef cnp.ndarray[cplx, ndim=2] ynew = np.zeros((r, r), dtype=np.complex128)
    cdef cnp.ndarray[cplx, ndim=2] err = np.zeros((r, r), dtype=np.complex128)
    cdef Py_ssize_t seg, i, j, p, q, m
    cdef cplx z0, z1, dz, zeval, acc
    cdef double s, h, scale, enorm, mpsi, mynew, a, fac
    for seg in range(W.shape[0] - 1):
        z0 = W[seg]
        z1 = W[seg + 1]
        dz = z1 - z0
        if dz == 0:
            continue
        s = 0.0
        h = 0.1
        _lax_eval_into(L, z0, I, P, C, O)
        for p in range(r):
            for q in range(r):
                acc = 0
                for m in range(r):
                    acc += L[p, m] * psi[m, q]
                k[0, p, q] = dz * acc
        while s < 1.0:
            if s + h > 1.0:
                h = 1.0 - s
            for i in range(1, 7):
                for p in range(r):
                    for q in range(r):
                        acc = psi[p, q]
                        for j in range(i):
                            if _A[i][j] != 0.0:
                                acc += h * _A[i][j] * k[j, p, q]
                        y[p, q] = acc
                zeval = z0 + (s + _C[i] * h) * dz
                _lax_eval_into(L, zeval, I, P, C, O)
                for p in range(r):
                    for q in range(r):
                        acc = 0
                        for m in range(r):
                            acc += L[p, m] * y[m, q]
                        k[i, p, q] = dz * acc
            mpsi = 0.0
            mynew = 0.0
            enorm = 0.0
            for p in range(r):
                for q in range(r):
                    acc = psi[p, q]
                    for i in range(7):
                        if _B5[i] != 0.0:
                            acc += h * _B5[i] * k[i, p, q]
                    ynew[p, q] = acc
                    acc = 0
                    for i in range(7):
                        if _E[i] != 0.0:
                            acc += h * _E[i] * k[i, p, q]
                    err[p, q] = acc
                    a = abs(psi[p, q])
                    if a > mpsi:
                        mpsi = a
                    a = abs(ynew[p, q])
                    if a > mynew:
                        mynew = a
            scale = atol + rtol * (mpsi if mpsi > mynew else mynew)
            for p in range(r):
                for q in range(r):
                    a = abs(err[p, q]) / scale
                    if a > enorm:
                        enorm = a
            if enorm <= 1.0:
                s += h
                for p in range(r):
                    for q in range(r):
                        psi[p, q] = ynew[p, q]
                        k[0, p, q] = k[6, p, q]
                accepted += 1
            else:
                rejected += 1
            if enorm > 0:
                fac = 0.9 * enorm ** (-0.2)
            else:
                fac = 5.0
            if fac > 5.0:
                fac = 5.0
            if fac < 0.2:
                fac = 0.2
            h *= fac
            if h < 1e-14:
                raise RuntimeError("step underflow at segment %d, s=%.6f" % (seg, s))
            if accepted + rejected > max_steps:
                raise RuntimeError("step budget exceeded at segment %d, s=%.6f" % (seg, s))
    return psi, accepted, rejected

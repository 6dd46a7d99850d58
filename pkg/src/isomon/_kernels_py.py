"""Pure numpy implementations of the hot kernels.

Same call signatures as the compiled module ``isomon._kernels``; selection
happens in :mod:`isomon.backend`.  Everything here is complex128.
"""

from __future__ import annotations

import numpy as np

BACKEND_NAME = "python"

# Dormand-Prince 5(4) tableau.
_C = np.array([0.0, 1 / 5, 3 / 10, 4 / 5, 8 / 9, 1.0, 1.0])
_A = [
    np.array([]),
    np.array([1 / 5]),
    np.array([3 / 40, 9 / 40]),
    np.array([44 / 45, -56 / 15, 32 / 9]),
    np.array([19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729]),
    np.array([9017 / 3168, -355 / 33, 46732 / 5247, 49 / 176, -5103 / 18656]),
    np.array([35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84]),
]
_B5 = np.array([35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84, 0.0])
_E = np.array(
    [71 / 57600, 0.0, -71 / 16695, 71 / 1920, -17253 / 339200, 22 / 525, -1 / 40]
)


def cauchy_mul(a: np.ndarray, b: np.ndarray, out_len: int) -> np.ndarray:
    """Truncated Cauchy product of coefficient vectors.

    out[k] = sum_{i+j=k} a[i] b[j] for k < out_len.
    """
    a = np.ascontiguousarray(a, dtype=np.complex128)
    b = np.ascontiguousarray(b, dtype=np.complex128)
    if out_len <= 0:
        return np.zeros(0, dtype=np.complex128)
    full = np.convolve(a, b)
    out = np.zeros(out_len, dtype=np.complex128)
    n = min(out_len, full.shape[0])
    out[:n] = full[:n]
    return out


def mat_cauchy_mul(A: np.ndarray, B: np.ndarray, out_len: int) -> np.ndarray:
    """Truncated Cauchy product of matrix coefficient stacks.

    A has shape (na, r, r), B (nb, r, r); out[k] = sum_{i+j=k} A[i] @ B[j].
    """
    A = np.ascontiguousarray(A, dtype=np.complex128)
    B = np.ascontiguousarray(B, dtype=np.complex128)
    na, r, _ = A.shape
    nb = B.shape[0]
    out = np.zeros((out_len, r, r), dtype=np.complex128)
    for k in range(out_len):
        lo = max(0, k - nb + 1)
        hi = min(na - 1, k)
        for i in range(lo, hi + 1):
            out[k] += A[i] @ B[k - i]
    return out


def lax_eval(
    z: complex,
    inf_coeffs: np.ndarray,
    pole_locs: np.ndarray,
    pole_coeffs: np.ndarray,
    pole_orders: np.ndarray,
) -> np.ndarray:
    """Evaluate the rational matrix at a point.

    inf_coeffs: (d_inf, r, r) stack multiplying -z^j for j = 0..d_inf-1.
    pole_coeffs: (N, max_order, r, r) padded stacks; entry j multiplies
    (z - c_nu)^-(j+1); pole_orders[nu] gives the used length.
    """
    r = pole_coeffs.shape[2] if pole_coeffs.size else inf_coeffs.shape[1]
    L = np.zeros((r, r), dtype=np.complex128)
    zp = 1.0 + 0.0j
    for j in range(inf_coeffs.shape[0]):
        L -= inf_coeffs[j] * zp
        zp *= z
    for nu in range(pole_locs.shape[0]):
        u = 1.0 / (z - pole_locs[nu])
        up = u
        for j in range(pole_orders[nu]):
            L += pole_coeffs[nu, j] * up
            up *= u
    return L


def transport_polyline(
    psi0: np.ndarray,
    waypoints: np.ndarray,
    inf_coeffs: np.ndarray,
    pole_locs: np.ndarray,
    pole_coeffs: np.ndarray,
    pole_orders: np.ndarray,
    rtol: float,
    atol: float,
    max_steps: int,
):
    """Transport the fundamental solution of Psi' = L(z) Psi along segments.

    Returns (psi, accepted, rejected).  Raises ``RuntimeError`` with a
    diagnostic message on step underflow or step-budget exhaustion; callers
    wrap it into the package error type.
    """
    psi = np.array(psi0, dtype=np.complex128, copy=True)
    accepted = 0
    rejected = 0

    def rhs(z: complex, dz: complex, y: np.ndarray) -> np.ndarray:
        return dz * (lax_eval(z, inf_coeffs, pole_locs, pole_coeffs, pole_orders) @ y)

    for seg in range(waypoints.shape[0] - 1):
        z0 = waypoints[seg]
        z1 = waypoints[seg + 1]
        dz = z1 - z0
        if dz == 0:
            continue
        s = 0.0
        h = 0.1
        k = [None] * 7
        k[0] = rhs(z0, dz, psi)
        while s < 1.0:
            if s + h > 1.0:
                h = 1.0 - s
            for i in range(1, 7):
                y = psi.copy()
                ai = _A[i]
                for j in range(i):
                    if ai[j] != 0.0:
                        y += h * ai[j] * k[j]
                k[i] = rhs(z0 + (s + _C[i] * h) * dz, dz, y)
            err = np.zeros_like(psi)
            ynew = psi.copy()
            for i in range(7):
                if _B5[i] != 0.0:
                    ynew += h * _B5[i] * k[i]
                if _E[i] != 0.0:
                    err += h * _E[i] * k[i]
            scale = atol + rtol * max(np.max(np.abs(psi)), np.max(np.abs(ynew)))
            enorm = np.max(np.abs(err)) / scale
            if enorm <= 1.0:
                s += h
                psi = ynew
                k[0] = k[6]
                accepted += 1
            else:
                rejected += 1
            fac = 0.9 * (1.0 / enorm) ** 0.2 if enorm > 0 else 5.0
            h *= min(5.0, max(0.2, fac))
            if h < 1e-14:
                raise RuntimeError(
                    f"step underflow at segment {seg}, s={s:.6f}"
                )
            if accepted + rejected > max_steps:
                raise RuntimeError(
                    f"step budget exceeded at segment {seg}, s={s:.6f}"
                )
    return psi, accepted, rejected

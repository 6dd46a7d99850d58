"""Adaptive embedded Runge-Kutta integration for complex state vectors.

Shares the fifth-order tableau with the transport kernel.  The driver walks a
real parameter interval, lands exactly on requested checkpoints, and turns
step underflow, step-budget exhaustion, or a tripped guard into a structured
abort carrying the last good state.
"""

from __future__ import annotations

import numpy as np

from ._kernels_py import _A, _B5, _C, _E
from .errors import NumericalAbortError

_BLOWUP = 1e8


def integrate(rhs, t0: float, t1: float, y0: np.ndarray,
              rtol: float = 1e-9, atol: float = 1e-12,
              max_steps: int = 200000, checkpoints=None, guard=None):
    """Integrate y' = rhs(t, y) from t0 to t1.

    checkpoints: increasing parameter values inside [t0, t1]; the stepper
    lands on each one and records a state copy.  guard(t, y) may return a
    message to abort integration.  Returns (y_final, records) where records
    is a list of (t, y) pairs at the checkpoints.
    """
    y = np.array(y0, dtype=complex, copy=True)
    targets = []
    if checkpoints is not None:
        targets = [float(c) for c in checkpoints]
        span = abs(t1 - t0)
        for c in targets:
            if (c - t0) * (t1 - t0) < -1e-12 * span or \
               (c - t1) * (t1 - t0) > 1e-12 * span:
                raise ValueError(f"checkpoint {c} outside [{t0}, {t1}]")
    records = []
    direction = 1.0 if t1 >= t0 else -1.0
    t = t0
    tol_t = 1e-12 * max(1.0, abs(t0), abs(t1))
    next_target = 0
    while next_target < len(targets) and \
            (t - targets[next_target]) * direction >= -tol_t:
        records.append((targets[next_target], y.copy()))
        next_target += 1
    h = min(0.1, abs(t1 - t0)) * direction
    if h == 0:
        return y, records
    k = [None] * 7
    k[0] = rhs(t, y)
    steps = 0
    while (t1 - t) * direction > 1e-14 * max(1.0, abs(t1 - t0)):
        limit = t1
        if next_target < len(targets) and \
                (targets[next_target] - t) * direction > 1e-14:
            limit = targets[next_target]
        if (t + h - limit) * direction > 0:
            h = limit - t
        for i in range(1, 7):
            yi = y.copy()
            for j in range(i):
                if _A[i][j] != 0.0:
                    yi += (h * _A[i][j]) * k[j]
            k[i] = rhs(t + _C[i] * h, yi)
        ynew = y.copy()
        err = np.zeros_like(y)
        for i in range(7):
            if _B5[i] != 0.0:
                ynew += (h * _B5[i]) * k[i]
            if _E[i] != 0.0:
                err += (h * _E[i]) * k[i]
        scale = atol + rtol * max(np.max(np.abs(y)), np.max(np.abs(ynew)))
        enorm = np.max(np.abs(err)) / scale
        if enorm <= 1.0:
            t = t + h
            y = ynew
            k[0] = k[6]
            if np.max(np.abs(y)) > _BLOWUP:
                raise NumericalAbortError("state norm blew up", t, y.copy())
            if guard is not None:
                msg = guard(t, y)
                if msg:
                    raise NumericalAbortError(str(msg), t, y.copy())
            while next_target < len(targets) and \
                    (t - targets[next_target]) * direction >= -tol_t:
                records.append((targets[next_target], y.copy()))
                next_target += 1
        fac = 0.9 * enorm ** -0.2 if enorm > 0 else 5.0
        h *= min(5.0, max(0.2, fac))
        if abs(h) < 1e-14 * max(1.0, abs(t1 - t0)):
            raise NumericalAbortError("step size underflow", t, y.copy())
        steps += 1
        if steps > max_steps:
            raise NumericalAbortError("step budget exceeded", t, y.copy())
    return y, records

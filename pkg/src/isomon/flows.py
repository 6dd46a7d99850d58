"""Deformation flows on the coefficient space of a rational connection.

A flow direction is a weighted list of deformation parameters: depth-j
spectral times at any chart, and finite pole positions.  Each parameter
contributes its deformation matrix; the coefficient motion is read off the
rational identity

    dL/ds = [U, L] + dU/dz

with pole-motion bookkeeping: when a pole location moves at rate cdot, the
order-k principal coefficient obeys Ldot_k = R_k - cdot (k-1) L_{k-1}, and
the consistency of the leftover top order is reported as a tangency
residual.  The weighted Hamiltonian values advance a running log of the
deformation 1-form along the path.
"""

from __future__ import annotations

import numpy as np

from .errors import ValidationError
from .integrators import integrate
from .lax import INF, FinitePole, InfinityPart, LaxMatrix
from .poisson import hamiltonian_deformation
from .formal import deformation_v
from .rational import RationalMatrix
from .spectral import extract_invariants, pole_hamiltonian


def normalize_param(param) -> tuple:
    """Accept ("t", chart, j, a) or ("c", nu) and validate lightly."""
    if param[0] == "t":
        _, chart, j, a = param
        if j < 1:
            raise ValidationError("depth-0 exponents are not flow parameters")
        return ("t", chart, int(j), int(a))
    if param[0] == "c":
        return ("c", int(param[1]))
    raise ValidationError(f"unknown flow parameter {param!r}")


def deformation_matrix(lax: LaxMatrix, param) -> RationalMatrix:
    param = normalize_param(param)
    if param[0] == "c":
        return deformation_v(lax, param[1])
    _, chart, j, a = param
    return hamiltonian_deformation(lax, "H_t", chart, j, a)


def explicit_derivative(lax: LaxMatrix, param) -> RationalMatrix:
    """Coordinate derivative of the connection at frozen phase point,
    which the zero-curvature identity equates to dU/dz."""
    return deformation_matrix(lax, param).deriv()


def flow_hamiltonian(lax: LaxMatrix, param) -> complex:
    param = normalize_param(param)
    if param[0] == "c":
        return pole_hamiltonian(lax, param[1])
    _, chart, j, a = param
    table = extract_invariants(lax)
    return table.hamiltonians[(chart, j, a)]


class FlowDerivative:
    """One evaluation of the flow direction at a state."""

    def __init__(self, pole_stacks, inf_stack, loc_rates, h_value,
                 residual, u_at=None) -> None:
        self.pole_stacks = pole_stacks
        self.inf_stack = inf_stack
        self.loc_rates = loc_rates
        self.h_value = h_value
        self.residual = residual
        self.u_at = u_at


def vector_field(lax: LaxMatrix, weighted_params,
                 with_hamiltonian: bool = True,
                 eval_at: complex | None = None) -> FlowDerivative:
    params = [(complex(w), normalize_param(p)) for w, p in weighted_params]
    U = RationalMatrix.zero(lax.r)
    for w, p in params:
        U = U + deformation_matrix(lax, p).scale(w)
    lrat = RationalMatrix.from_lax(lax)
    ldot = U.commutator(lrat) + U.deriv()
    u_at = U.eval(eval_at) if eval_at is not None else None

    cdot = np.zeros(len(lax.poles), dtype=complex)
    for w, p in params:
        if p[0] == "c":
            cdot[p[1]] += w

    scale = max(1.0, lax.max_abs())
    residual = 0.0
    pole_stacks = []
    for nu, pole in enumerate(lax.poles):
        top = pole.d + 1
        stack = ldot.principal_part_at(pole.loc)
        width = max(stack.shape[0], top + 1)
        rs = np.zeros((width, lax.r, lax.r), dtype=complex)
        rs[: stack.shape[0]] = stack
        dot = np.zeros((top, lax.r, lax.r), dtype=complex)
        for k in range(1, top + 1):
            dot[k - 1] = rs[k - 1]
            if k >= 2:
                dot[k - 1] -= cdot[nu] * (k - 1) * pole.coeffs[k - 2]
        # order d+2 must be pure pole motion; anything deeper is off-shape
        extra = rs[top] - cdot[nu] * top * pole.coeffs[top - 1]
        residual = max(residual, float(np.max(np.abs(extra))) / scale)
        if width > top + 1:
            residual = max(residual,
                           float(np.max(np.abs(rs[top + 1:]))) / scale)
        pole_stacks.append(dot)

    dinf = lax.infinity.d
    poly = ldot.poly_part()
    inf_stack = np.zeros((dinf, lax.r, lax.r), dtype=complex)
    for p in range(min(dinf, poly.shape[0])):
        inf_stack[p] = -poly[p]
    if poly.shape[0] > dinf:
        residual = max(residual, float(np.max(np.abs(poly[dinf:]))) / scale)

    h_value = 0.0 + 0.0j
    if with_hamiltonian:
        for w, p in params:
            h_value += w * flow_hamiltonian(lax, p)
    return FlowDerivative(pole_stacks, inf_stack, cdot, h_value, residual,
                          u_at)


# -- packed state ---------------------------------------------------------------


def pack_state(lax: LaxMatrix, log_tau: complex = 0.0) -> np.ndarray:
    parts = [pole.coeffs.ravel() for pole in lax.poles]
    parts.append(lax.infinity.coeffs.ravel())
    parts.append(np.array([pole.loc for pole in lax.poles], dtype=complex))
    parts.append(np.array([log_tau], dtype=complex))
    return np.concatenate(parts)


def unpack_state(vec: np.ndarray, template: LaxMatrix):
    r = template.r
    idx = 0
    poles = []
    locs_at = sum((p.d + 1) * r * r for p in template.poles) \
        + template.infinity.d * r * r
    locs = vec[locs_at: locs_at + len(template.poles)]
    for nu, pole in enumerate(template.poles):
        n = (pole.d + 1) * r * r
        coeffs = vec[idx: idx + n].reshape(pole.d + 1, r, r)
        poles.append(FinitePole(locs[nu], coeffs))
        idx += n
    n = template.infinity.d * r * r
    infinity = InfinityPart(vec[idx: idx + n].reshape(template.infinity.d, r, r),
                            r=r)
    log_tau = vec[-1]
    return LaxMatrix(poles, infinity), complex(log_tau)


def _pack_derivative(dv: FlowDerivative) -> np.ndarray:
    parts = [s.ravel() for s in dv.pole_stacks]
    parts.append(dv.inf_stack.ravel())
    parts.append(dv.loc_rates.astype(complex))
    parts.append(np.array([dv.h_value], dtype=complex))
    return np.concatenate(parts)


class FlowResult:
    def __init__(self, lax, log_tau, records, residual_max, casimir_drift,
                 frames=None, frame=None):
        self.lax = lax
        self.log_tau = log_tau
        self.records = records
        self.residual_max = residual_max
        self.casimir_drift = casimir_drift
        self.frames = frames
        self.frame = frame


def integrate_flow(lax: LaxMatrix, weighted_params, span: float = 1.0,
                   rtol: float = 1e-9, atol: float = 1e-12,
                   n_checkpoints: int = 8, freeze: bool = False,
                   log_tau0: complex = 0.0, max_steps: int = 200000,
                   frame_at: complex | None = None) -> FlowResult:
    """Advance the system along the composite flow over [0, span].

    freeze=True integrates the direction field evaluated once at the start
    (a straight line in coefficient space), which deliberately breaks the
    deformation equations; it serves as a negative control.

    frame_at=z0 co-transports a frame C(s) with dC/ds = U(z0, s) C,
    C(0) = I.  Solutions normalized to the identity at z0 for different s
    are related by right multiplication with C(s)^{-1}; monodromy
    certificates need it to undo that change of basis.
    """
    params = [(w, normalize_param(p)) for w, p in weighted_params]
    template = lax
    r = lax.r
    state0 = pack_state(lax, log_tau0)
    nbase = state0.shape[0]
    if frame_at is not None:
        state0 = np.concatenate([state0, np.eye(r, dtype=complex).ravel()])
    residual_tracker = [0.0]

    if freeze:
        dv0 = vector_field(lax, params, eval_at=frame_at)
        const = _pack_derivative(dv0)
        residual_tracker[0] = dv0.residual

        def rhs(s, y):
            if frame_at is None:
                return const
            frame = y[nbase:].reshape(r, r)
            return np.concatenate([const, (dv0.u_at @ frame).ravel()])
    else:
        def rhs(s, y):
            lx, _ = unpack_state(y[:nbase], template)
            dv = vector_field(lx, params, eval_at=frame_at)
            residual_tracker[0] = max(residual_tracker[0], dv.residual)
            packed = _pack_derivative(dv)
            if frame_at is None:
                return packed
            frame = y[nbase:].reshape(r, r)
            return np.concatenate([packed, (dv.u_at @ frame).ravel()])

    checkpoints = list(np.linspace(0.0, span, max(n_checkpoints, 2)))
    yf, recs = integrate(rhs, 0.0, span, state0, rtol=rtol, atol=atol,
                         max_steps=max_steps, checkpoints=checkpoints)
    records = []
    frames = [] if frame_at is not None else None
    for s, y in recs:
        lx, lt = unpack_state(y[:nbase], template)
        records.append((s, lx, lt))
        if frame_at is not None:
            frames.append(y[nbase:].reshape(r, r).copy())
    final_lax, final_tau = unpack_state(yf[:nbase], template)
    final_frame = yf[nbase:].reshape(r, r).copy() if frame_at is not None else None

    drift = 0.0
    if records and not freeze:
        flowed = {p[1:3] for _, p in params if p[0] == "t"}
        moved = {p[1] for _, p in params if p[0] == "c"}
        base = extract_invariants(records[0][1])
        # Branch labels are not stable across nearby systems (conjugate
        # eigenvalue pairs reorder under roundoff), so conservation is
        # checked per (chart, depth) group as a sorted multiset.
        groups = sorted({k[:2] for k in base.casimirs} - flowed,
                        key=lambda g: (str(g[0]), g[1]))

        def group_values(tab, group):
            vals = [v for k, v in tab.casimirs.items() if k[:2] == group]
            return np.array(sorted(vals, key=lambda z: (z.real, z.imag)))

        base_groups = {g: group_values(base, g) for g in groups}
        for _, lx, _lt in records[1:]:
            tab = extract_invariants(lx)
            for g in groups:
                gap = np.abs(group_values(tab, g) - base_groups[g])
                drift = max(drift, float(gap.max()))
            for nu, c in enumerate(tab.pole_locs):
                if nu not in moved:
                    drift = max(drift, abs(c - base.pole_locs[nu]))
    return FlowResult(final_lax, final_tau, records, residual_tracker[0],
                      drift, frames, final_frame)

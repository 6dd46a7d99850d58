"""Accumulation and certification of the deformation 1-form.

The weighted Hamiltonians along a flow are the components of a locally
closed 1-form; its line integral is the log of the tau function, fixed to
zero at the start of the path.  Closedness itself is certified by a
mixed-partial estimate along two integrated flows.
"""

from __future__ import annotations

import numpy as np
from scipy.integrate import cumulative_simpson

from .errors import ValidationError
from .flows import FlowResult, flow_hamiltonian, integrate_flow, normalize_param
from .lax import LaxMatrix


class TauSample:
    """One checkpoint of the accumulated 1-form."""

    def __init__(self, s: float, h_components: dict, log_tau: complex) -> None:
        self.s = float(s)
        self.h_components = dict(h_components)
        self.log_tau = complex(log_tau)

    @property
    def h_total(self) -> complex:
        return sum(self.h_components.values())


def composite_hamiltonian(lax: LaxMatrix, weighted_params) -> dict:
    """Component values of the 1-form contracted with the flow direction."""
    out = {}
    for w, p in weighted_params:
        p = normalize_param(p)
        out[p] = out.get(p, 0.0) + complex(w) * flow_hamiltonian(lax, p)
    return out


def tau_accumulate(result: FlowResult, weighted_params) -> list:
    """Quadrature route to log tau over a flow's checkpoint records.

    Independent of the log tau carried inside the flow state: this one
    re-evaluates the Hamiltonians at each checkpoint and Simpson-integrates
    them, so the two routes cross-check each other.  log tau(start) = 0.
    """
    if not result.records:
        raise ValidationError("flow result carries no checkpoint records")
    svals = np.array([rec[0] for rec in result.records], dtype=float)
    comps = [composite_hamiltonian(rec[1], weighted_params)
             for rec in result.records]
    totals = np.array([sum(c.values()) for c in comps], dtype=complex)
    if len(svals) == 1:
        acc = np.zeros(1, dtype=complex)
    else:
        # cumulative_simpson is real-only; run the two parts separately
        acc = cumulative_simpson(totals.real, x=svals, initial=0.0) \
            + 1j * cumulative_simpson(totals.imag, x=svals, initial=0.0)
    return [TauSample(s, c, v) for s, c, v in zip(svals, comps, acc)]


def schlesinger_two_pole_log_tau(lax0: LaxMatrix, lax1: LaxMatrix) -> complex:
    """Closed form for the simple-pole two-point system.

    The single Hamiltonian is tr(L1 L2)/(c1 - c2) with conserved numerator,
    so the integral is tr(L1 L2) log of the gap ratio.  The log branch is
    immaterial for gap ratios near 1 (short flows), which is the regime the
    certificate uses.
    """
    if len(lax0.poles) != 2 or any(p.d != 0 for p in lax0.poles) \
            or lax0.infinity.d != 0:
        raise ValidationError(
            "closed form needs exactly two simple poles and no polynomial part"
        )
    cross = np.trace(lax0.poles[0].coeffs[0] @ lax0.poles[1].coeffs[0])
    gap0 = lax0.poles[0].loc - lax0.poles[1].loc
    gap1 = lax1.poles[0].loc - lax1.poles[1].loc
    return complex(cross * np.log(gap1 / gap0))


def closedness_certificate(lax: LaxMatrix, params_p, params_q,
                           h: float = 1e-3, rtol: float = 1e-11,
                           atol: float = 1e-13) -> float:
    """Mixed-partial asymmetry of the 1-form for two flow directions.

    Returns |d(H_q)/dp - d(H_p)/dq| estimated by central differences along
    the two integrated flows.  Zero (to quadrature error) is the closedness
    property restricted to the two-parameter sheet.
    """

    def h_along(flow_params, eval_params, sign):
        moved = integrate_flow(lax, flow_params, span=sign * h, rtol=rtol,
                               atol=atol, n_checkpoints=2)
        return sum(composite_hamiltonian(moved.lax, eval_params).values())

    dq_dp = (h_along(params_p, params_q, +1) - h_along(params_p, params_q, -1)) \
        / (2.0 * h)
    dp_dq = (h_along(params_q, params_p, +1) - h_along(params_q, params_p, -1)) \
        / (2.0 * h)
    return abs(dq_dp - dp_dq)

"""Monodromy of the rational connection via numerical transport.

Loops are polylines (regular polygons around one pole, reached from a
common base point), so the only analysis needed is segment clearance from
the poles.  Transport itself runs in the selected backend kernel.

The invariance certificate compares monodromy along a deformation flow.
Solutions are normalized to the identity at the base point, and that
normalization itself moves with the flow: the flow-invariant object is
C(s)^{-1} M(s) C(s), where C(s) is the frame co-transported by
``integrate_flow(..., frame_at=base)``.
"""

from __future__ import annotations

import cmath

import numpy as np

from . import backend
from .errors import NumericalAbortError, PathError
from .flows import integrate_flow
from .lax import LaxMatrix

_CLEARANCE = 0.4


def _segment_distance(z0: complex, z1: complex, c: complex) -> float:
    dz = z1 - z0
    den = abs(dz) ** 2
    if den == 0.0:
        return abs(c - z0)
    s = ((c - z0) * dz.conjugate()).real / den
    s = min(1.0, max(0.0, s))
    return abs(c - (z0 + s * dz))


def check_clearance(lax: LaxMatrix, waypoints, clearance: float) -> None:
    pts = [complex(w) for w in waypoints]
    if len(pts) < 2:
        raise PathError("a path needs at least two waypoints")
    for k in range(len(pts) - 1):
        for pole in lax.poles:
            dist = _segment_distance(pts[k], pts[k + 1], pole.loc)
            if dist < clearance:
                raise PathError(
                    f"segment {k} passes within {dist:.3e} of the pole at "
                    f"{pole.loc} (required clearance {clearance:.3e})"
                )


def transport(lax: LaxMatrix, waypoints, psi0: np.ndarray | None = None,
              rtol: float = 1e-10, atol: float = 1e-12,
              max_steps: int = 400000, clearance: float | None = None):
    """Fundamental-solution transport along a polyline.

    Returns (psi, stats) with stats = {"accepted": n, "rejected": m}.
    """
    # transport is defined for any coefficient data; only the pole layout
    # has to be sane
    lax.require_valid(spectral=False)
    pts = np.asarray([complex(w) for w in waypoints], dtype=complex)
    if clearance is None:
        clearance = 1e-6 * max(1.0, lax.max_abs())
    check_clearance(lax, pts, clearance)
    if psi0 is None:
        psi0 = np.eye(lax.r, dtype=complex)
    inf_stack, locs, stacks, orders = lax.kernel_arrays()
    try:
        psi, accepted, rejected = backend.transport_polyline(
            np.asarray(psi0, dtype=complex), pts, inf_stack, locs, stacks,
            orders, float(rtol), float(atol), int(max_steps))
    except RuntimeError as exc:
        raise NumericalAbortError(f"transport failed: {exc}") from exc
    return psi, {"accepted": int(accepted), "rejected": int(rejected)}


def default_base_point(lax: LaxMatrix) -> complex:
    locs = [p.loc for p in lax.poles]
    if not locs:
        return -1j
    center = sum(locs) / len(locs)
    spread = max(max(abs(c - center) for c in locs), 0.5)
    return center - 1j * (2.0 * spread + 1.0)


def nearest_pole_gap(lax: LaxMatrix, nu: int) -> float:
    c = lax.poles[nu].loc
    others = [abs(c - p.loc) for k, p in enumerate(lax.poles) if k != nu]
    return min(others) if others else 1.0


def loop_radius(lax: LaxMatrix, nu: int) -> float:
    return 0.5 * nearest_pole_gap(lax, nu)


def loop_waypoints(lax: LaxMatrix, nu: int, base_point: complex | None = None,
                   sides: int = 24, radius: float | None = None) -> np.ndarray:
    """Positively oriented polygon around pole nu, entered radially from
    the base point."""
    c = lax.poles[nu].loc
    base = default_base_point(lax) if base_point is None else complex(base_point)
    r = loop_radius(lax, nu) if radius is None else float(radius)
    if abs(base - c) <= r:
        raise PathError("base point lies inside the requested loop")
    theta0 = cmath.phase(base - c)
    ring = [c + r * cmath.exp(1j * (theta0 + 2 * cmath.pi * k / sides))
            for k in range(sides)]
    ring.append(ring[0])
    return np.asarray([base] + ring + [base], dtype=complex)


class MonodromySet:
    """Loop transports around every finite pole from one base point.

    order[k] is the pole index looped by mats[k]; the canonical sequence
    is (Re c, Im c) increasing.  product is mats[-1] @ ... @ mats[0], the
    total counterclockwise circuit, which inverts the circuit at infinity.
    """

    def __init__(self, base_point: complex, order, mats) -> None:
        self.base_point = complex(base_point)
        self.order = list(order)
        self.mats = list(mats)
        prod = np.eye(mats[0].shape[0], dtype=complex) if mats else None
        for m in self.mats:
            prod = m @ prod
        self.product = prod

    def by_pole(self, nu: int) -> np.ndarray:
        return self.mats[self.order.index(nu)]

    def to_json_dict(self) -> dict:
        out = {"base_point": [self.base_point.real, self.base_point.imag],
               "pole_order": [nu + 1 for nu in self.order]}
        for k, m in enumerate(self.mats):
            out[f"M[{self.order[k] + 1}]"] = [
                [[v.real, v.imag] for v in row] for row in m
            ]
        return out


def monodromy_set(lax: LaxMatrix, base_point: complex | None = None,
                  sides: int = 24, rtol: float = 1e-10, atol: float = 1e-12,
                  max_steps: int = 400000) -> MonodromySet:
    """One monodromy matrix per finite pole, ordered by (Re c, Im c)."""
    order = sorted(range(len(lax.poles)),
                   key=lambda nu: (lax.poles[nu].loc.real, lax.poles[nu].loc.imag))
    base = default_base_point(lax) if base_point is None else complex(base_point)
    mats = []
    for nu in order:
        pts = loop_waypoints(lax, nu, base)
        # polygon chords sit at r cos(pi/n) ~ 0.99 r from the center, so
        # they clear the 0.4 x nearest-gap requirement with r = gap / 2
        clearance = _CLEARANCE * nearest_pole_gap(lax, nu)
        psi, _ = transport(lax, pts, rtol=rtol, atol=atol,
                           max_steps=max_steps, clearance=clearance)
        mats.append(psi)
    return MonodromySet(base, order, mats)


def residue_determinant_check(lax: LaxMatrix, mset: MonodromySet) -> float:
    """max over loops of |det M / exp(2 pi i tr(residue)) - 1|.

    The determinant of a loop transport only sees the residue trace, so
    this is a backend self-check independent of the loop shape.  Relative
    form because the reference value ranges over many orders of magnitude.
    """
    worst = 0.0
    for nu, mat in zip(mset.order, mset.mats):
        res_tr = np.trace(lax.poles[nu].coeffs[0])
        expected = cmath.exp(2j * cmath.pi * res_tr)
        worst = max(worst, abs(complex(np.linalg.det(mat)) / expected - 1.0))
    return worst


def invariance_certificate(lax: LaxMatrix, weighted_params, span: float,
                           base_point: complex | None = None,
                           n_checkpoints: int = 4, sides: int = 24,
                           rtol: float = 1e-11, atol: float = 1e-13,
                           freeze: bool = False,
                           max_steps: int = 400000) -> dict:
    """Drift of the frame-corrected monodromy along a deformation flow.

    Integrates the flow with a co-transported frame at the base point,
    computes the loop transports at every checkpoint, conjugates them back
    into the starting basis, and reports the largest entrywise drift from
    the first checkpoint.  Loops are rebuilt per checkpoint (radius tracks
    the moving poles); the base point stays fixed, so the homotopy classes
    match as long as no pole crosses a path, which the clearance check
    enforces.
    """
    base = default_base_point(lax) if base_point is None else complex(base_point)
    result = integrate_flow(lax, weighted_params, span=span, rtol=rtol,
                            atol=atol, n_checkpoints=n_checkpoints,
                            freeze=freeze, max_steps=max_steps, frame_at=base)
    ref = None
    drift = 0.0
    det_check = 0.0
    for (s, lx, _), frame in zip(result.records, result.frames):
        mset = monodromy_set(lx, base, sides=sides, rtol=rtol, atol=atol,
                             max_steps=max_steps)
        det_check = max(det_check, residue_determinant_check(lx, mset))
        inv = np.linalg.inv(frame)
        corrected = {nu: inv @ mset.by_pole(nu) @ frame
                     for nu in range(len(lx.poles))}
        if ref is None:
            ref = corrected
            continue
        for nu, mat in corrected.items():
            drift = max(drift, float(np.max(np.abs(mat - ref[nu]))))
    return {
        "max_drift": drift,
        "det_check": det_check,
        "checkpoints": len(result.records),
        "base_point": base,
        "flow_residual": result.residual_max,
    }

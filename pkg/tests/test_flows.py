"""Deformation vector fields and flow integration."""

import numpy as np
import pytest

from helpers import lax_allclose, random_lax
from isomon.errors import ValidationError
from isomon.flows import (deformation_matrix, explicit_derivative,
                          flow_hamiltonian, integrate_flow, normalize_param,
                          vector_field)
from isomon.lax import INF
from isomon.spectral import extract_invariants


def two_pole_system(seed=71):
    rng = np.random.default_rng(seed)
    return random_lax(rng, 2, [0, 0], 0, scale=0.4)


def irregular_system(seed=72):
    rng = np.random.default_rng(seed)
    return random_lax(rng, 2, [1], 2, scale=0.4)


def test_normalize_param_guards():
    assert normalize_param(("c", 1)) == ("c", 1)
    assert normalize_param(("t", INF, 2, 0)) == ("t", INF, 2, 0)
    with pytest.raises(ValidationError):
        normalize_param(("t", INF, 0, 0))
    with pytest.raises(ValidationError):
        normalize_param(("x", 0))


def test_vector_field_residual_small():
    lax = irregular_system()
    for param in [("t", INF, 1, 0), ("t", INF, 2, 1), ("t", 0, 1, 0)]:
        dv = vector_field(lax, [(1.0, param)])
        assert dv.residual < 1e-8, param
    lax2 = two_pole_system()
    dv = vector_field(lax2, [(1.0, ("c", 0))])
    assert dv.residual < 1e-10
    assert dv.loc_rates[0] == 1.0 and dv.loc_rates[1] == 0.0


def test_vector_field_is_finite_difference_of_flow():
    """The reported coefficient rates equal d/ds of the integrated flow."""
    lax = irregular_system()
    params = [(1.0, ("t", INF, 1, 0)), (-0.5, ("t", 0, 1, 1))]
    dv = vector_field(lax, params)
    h = 1e-5
    fwd = integrate_flow(lax, params, span=h, rtol=1e-12, atol=1e-14).lax
    bwd = integrate_flow(lax, params, span=-h, rtol=1e-12, atol=1e-14).lax
    for nu in range(len(lax.poles)):
        fd = (fwd.poles[nu].coeffs - bwd.poles[nu].coeffs) / (2 * h)
        assert np.max(np.abs(fd - dv.pole_stacks[nu])) < 1e-6
    fd_inf = (fwd.infinity.coeffs - bwd.infinity.coeffs) / (2 * h)
    assert np.max(np.abs(fd_inf - dv.inf_stack)) < 1e-6


def test_flow_moves_its_own_time():
    """Advancing along a spectral-time direction moves that Casimir at
    unit rate and keeps the others fixed."""
    lax = irregular_system()
    span = 0.2
    key = (INF, 2, 0)
    before = extract_invariants(lax)
    res = integrate_flow(lax, [(1.0, ("t",) + key)], span=span,
                         rtol=1e-11, atol=1e-13)
    after = extract_invariants(res.lax)
    moved = after.casimirs[key] - before.casimirs[key]
    assert abs(moved - span) < 1e-8
    assert res.casimir_drift < 1e-8
    assert res.residual_max < 1e-7


def test_pole_flow_moves_location():
    lax = two_pole_system()
    res = integrate_flow(lax, [(1.0, ("c", 1))], span=0.15,
                         rtol=1e-11, atol=1e-13)
    assert abs(res.lax.poles[1].loc - lax.poles[1].loc - 0.15) < 1e-10
    assert abs(res.lax.poles[0].loc - lax.poles[0].loc) < 1e-12
    assert res.casimir_drift < 1e-9
    # residues evolve but their spectra stay put: handled by casimir_drift
    assert not lax_allclose(res.lax, lax, 1e-6)


def test_freeze_control_breaks_conservation():
    lax = two_pole_system()
    live = integrate_flow(lax, [(1.0, ("c", 0))], span=0.4,
                          rtol=1e-10, atol=1e-12)
    frozen = integrate_flow(lax, [(1.0, ("c", 0))], span=0.4,
                            rtol=1e-10, atol=1e-12, freeze=True)
    after = extract_invariants(frozen.lax)
    before = extract_invariants(lax)
    key = lambda z: (z.real, z.imag)
    a_sorted = sorted((after.casimirs[k] for k in after.casimirs
                       if k[0] == 0), key=key)
    b_sorted = sorted((before.casimirs[k] for k in before.casimirs
                       if k[0] == 0), key=key)
    worst = max(abs(x - y) for x, y in zip(a_sorted, b_sorted))
    assert live.casimir_drift < 1e-8
    assert worst > 1e-4


def test_commuting_flows_cross_derivatives():
    """d/ds1 (flow 2 rates) equals d/ds2 (flow 1 rates): curvature check."""
    lax = irregular_system()
    p1 = [(1.0, ("t", INF, 1, 0))]
    p2 = [(1.0, ("t", INF, 2, 0))]
    h = 1e-4

    def rates(base, params):
        dv = vector_field(base, params)
        return np.concatenate([s.ravel() for s in dv.pole_stacks]
                              + [dv.inf_stack.ravel()])

    lax_p1 = integrate_flow(lax, p1, span=h, rtol=1e-12, atol=1e-14).lax
    lax_m1 = integrate_flow(lax, p1, span=-h, rtol=1e-12, atol=1e-14).lax
    lax_p2 = integrate_flow(lax, p2, span=h, rtol=1e-12, atol=1e-14).lax
    lax_m2 = integrate_flow(lax, p2, span=-h, rtol=1e-12, atol=1e-14).lax
    d1_of_f2 = (rates(lax_p1, p2) - rates(lax_m1, p2)) / (2 * h)
    d2_of_f1 = (rates(lax_p2, p1) - rates(lax_m2, p1)) / (2 * h)
    assert np.max(np.abs(d1_of_f2 - d2_of_f1)) < 1e-6


def test_log_tau_accumulates_hamiltonian():
    lax = two_pole_system()
    param = [(1.0, ("c", 0))]
    res = integrate_flow(lax, param, span=0.1, rtol=1e-12, atol=1e-14)
    h = 1e-4
    mid = integrate_flow(lax, param, span=0.05, rtol=1e-12, atol=1e-14).lax
    hp = integrate_flow(lax, param, span=0.05 + h,
                        rtol=1e-12, atol=1e-14).log_tau
    hm = integrate_flow(lax, param, span=0.05 - h,
                        rtol=1e-12, atol=1e-14).log_tau
    want = flow_hamiltonian(mid, ("c", 0))
    assert abs((hp - hm) / (2 * h) - want) < 1e-7


def test_explicit_derivative_is_du_dz():
    lax = irregular_system()
    param = ("t", INF, 2, 0)
    U = deformation_matrix(lax, param)
    D = explicit_derivative(lax, param)
    z = 0.37 - 0.2j
    h = 1e-6
    fd = (U.eval(z + h) - U.eval(z - h)) / (2 * h)
    assert np.max(np.abs(D.eval(z) - fd)) < 1e-7


def test_checkpoints_and_frames():
    lax = two_pole_system()
    base = -1.5j
    res = integrate_flow(lax, [(1.0, ("c", 0))], span=0.2, rtol=1e-11,
                         atol=1e-13, n_checkpoints=5, frame_at=base)
    assert len(res.records) == 5
    assert res.records[0][0] == 0.0 and abs(res.records[-1][0] - 0.2) < 1e-12
    assert len(res.frames) == 5
    assert np.allclose(res.frames[0], np.eye(2))
    assert np.allclose(res.frame, res.frames[-1])
    # the frame solves dC/ds = U(base) C: check first step against Euler
    dv = vector_field(lax, [(1.0, ("c", 0))], eval_at=base)
    step = res.records[1][0]
    predicted = np.eye(2) + step * dv.u_at
    assert np.max(np.abs(res.frames[1] - predicted)) < 5 * step ** 2

"""Pole-divisor containers: evaluation, local expansion, validation."""

import numpy as np
import pytest

from helpers import crand, random_lax, random_shapes
from isomon.errors import DegenerateSpectrumError, ValidationError
from isomon.lax import INF, FinitePole, InfinityPart, LaxMatrix


def direct_eval(lax, z):
    out = np.zeros((lax.r, lax.r), dtype=complex)
    for pole in lax.poles:
        for k in range(1, pole.d + 2):
            out += pole.coeffs[k - 1] / (z - pole.loc) ** k
    for p in range(lax.infinity.d):
        out -= lax.infinity.coeffs[p] * z ** p
    return out


def test_eval_matches_direct():
    rng = np.random.default_rng(21)
    for (r, ds, dinf) in random_shapes(rng, 8):
        lax = random_lax(rng, r, ds, dinf)
        for _ in range(4):
            z = 2.5 * crand(rng)
            want = direct_eval(lax, z)
            assert np.max(np.abs(lax.eval(z) - want)) < 1e-12 * max(
                1.0, np.max(np.abs(want)))


def test_charts_skip_empty_infinity():
    rng = np.random.default_rng(22)
    lax = random_lax(rng, 2, [0, 1], 0)
    assert INF not in lax.charts()
    assert lax.charts() == [0, 1]
    lax2 = random_lax(rng, 2, [1], 2)
    assert lax2.charts() == [0, INF]
    assert lax2.chart_rank(INF) == 2
    assert lax2.chart_rank(0) == 1


def test_local_expansion_finite():
    rng = np.random.default_rng(23)
    lax = random_lax(rng, 3, [2, 0], 1)
    pole = lax.poles[0]
    depth = 4
    jet = lax.local_expansion(0, depth)
    assert jet.val == -(pole.d + 1)
    # principal coefficients are the stored stack
    for k in range(1, pole.d + 2):
        assert np.max(np.abs(jet.coeff(-k) - pole.coeffs[k - 1])) < 1e-13
    # analytic part from the other blocks, checked by evaluation
    zeta = 0.08 + 0.02j
    want = direct_eval(lax, pole.loc + zeta)
    got = jet.eval(zeta)
    assert np.max(np.abs(got - want)) < 1e-6


def test_local_expansion_infinity():
    rng = np.random.default_rng(24)
    lax = random_lax(rng, 2, [1], 2)
    jet = lax.local_expansion(INF, 5)
    z = 60.0 + 9.0j
    want = direct_eval(lax, z)
    got = jet.eval(1.0 / z)
    assert np.max(np.abs(got - want)) < 1e-8 * max(1.0, np.max(np.abs(want)))
    # leading exponent carries -B_{d-1} z^{d-1} = -B_{d-1} zeta^{1-d}
    assert np.max(np.abs(jet.coeff(-1) + lax.infinity.coeffs[1])) < 1e-13


def test_validate_reports():
    rng = np.random.default_rng(25)
    lax = random_lax(rng, 2, [0, 2], 1)
    checks = lax.validate()
    assert all(rec["pass"] for rec in checks)
    names = {rec["check"] for rec in checks}
    assert "pole_distinctness" in names
    assert "inf_leading_diagonal" in names


def test_coincident_poles_rejected():
    res = np.eye(2, dtype=complex)[None]
    poles = [FinitePole(1.0, res.copy()), FinitePole(1.0 + 1e-14, res.copy())]
    lax = LaxMatrix(poles, InfinityPart(np.zeros((0, 2, 2), complex), r=2))
    with pytest.raises(ValidationError):
        lax.require_valid()


def test_zero_leading_rejected():
    coeffs = np.zeros((2, 2, 2), dtype=complex)
    coeffs[0] = np.diag([1.0, 2.0])  # top order (index 1) is zero
    lax = LaxMatrix([FinitePole(0.0, coeffs)],
                    InfinityPart(np.zeros((0, 2, 2), complex), r=2))
    bad = [rec for rec in lax.validate() if not rec["pass"]]
    assert bad


def test_spectral_flag_splits_checks():
    # nilpotent residue: fine for transport, not for branch machinery
    nil = np.array([[0.0, 1.0], [0.0, 0.0]], dtype=complex)[None]
    lax = LaxMatrix([FinitePole(0.0, nil)],
                    InfinityPart(np.zeros((0, 2, 2), complex), r=2))
    with pytest.raises(DegenerateSpectrumError):
        lax.require_valid()
    lax.require_valid(spectral=False)


def test_kernel_arrays_padding():
    rng = np.random.default_rng(26)
    lax = random_lax(rng, 2, [0, 2], 1)
    inf_stack, locs, stacks, orders = lax.kernel_arrays()
    assert inf_stack.shape == (1, 2, 2)
    assert list(orders) == [1, 3]
    assert stacks.shape == (2, 3, 2, 2)
    assert np.max(np.abs(stacks[0, 1:])) == 0.0
    assert np.allclose(stacks[1], lax.poles[1].coeffs)

"""Diagonal gauge reduction: exponents, residual window, deformation parts."""

import numpy as np
import pytest

from helpers import random_lax, random_shapes
from isomon.formal import deformation_v, formal_solution
from isomon.lax import INF
from isomon.rational import RationalMatrix
from isomon.spectral import eigen_expansions, extract_invariants


def chart_connection_principal(lax, chart, a, depth):
    """Principal part of the branch eigenvalue of the chart connection."""
    lams = eigen_expansions(lax, chart, depth=depth)
    la = lams[a]
    if chart == INF:
        # d/dz -> d/dzeta carries -zeta^(-2)
        la = (la * -1.0).shift(-2)
    return la


def test_exponent_matches_table():
    rng = np.random.default_rng(51)
    for (r, ds, dinf) in random_shapes(rng, 5):
        lax = random_lax(rng, r, ds, dinf)
        table = extract_invariants(lax)
        for chart in lax.charts():
            fs = formal_solution(lax, chart)
            tvals = fs.t_values()
            for key, want in tvals.items():
                assert abs(table.casimirs[key] - want) < 1e-9, key


def test_t_prime_matches_eigen_principal():
    rng = np.random.default_rng(52)
    for (r, ds, dinf) in random_shapes(rng, 4):
        lax = random_lax(rng, r, ds, dinf)
        for chart in lax.charts():
            d = lax.chart_rank(chart)
            fs = formal_solution(lax, chart)
            for a in range(r):
                la = chart_connection_principal(lax, chart, a, d + 3)
                # dT_a/dzeta = -sum_j T_j zeta^{-j-1} + T_0 / zeta
                got = {-1: fs.T_coeffs[0][a, a]}
                for j in range(1, d + 1):
                    got[-j - 1] = -fs.T_coeffs[j][a, a]
                for k, want_c in got.items():
                    assert abs(want_c - la.coeff(k)) < 1e-9, (chart, k)


def test_gauge_residual_window():
    rng = np.random.default_rng(53)
    for (r, ds, dinf) in random_shapes(rng, 5):
        lax = random_lax(rng, r, ds, dinf)
        scale = max(1.0, lax.max_abs())
        for chart in lax.charts():
            d = lax.chart_rank(chart)
            fs = formal_solution(lax, chart)
            res = fs.gauge_residual()
            floor = fs.depth - d - 1
            for k in range(res.val, min(res.order, floor)):
                assert np.max(np.abs(res.coeff(k))) < 1e-9 * scale, (chart, k)


def test_second_route_hamiltonians():
    rng = np.random.default_rng(54)
    for (r, ds, dinf) in random_shapes(rng, 4):
        lax = random_lax(rng, r, ds, dinf)
        table = extract_invariants(lax)
        for chart in lax.charts():
            d = lax.chart_rank(chart)
            fs = formal_solution(lax, chart)
            for j in range(1, d + 1):
                for a in range(r):
                    want = table.hamiltonians[(chart, j, a)]
                    got = fs.second_route_hamiltonian(j, a)
                    assert abs(got - want) < 1e-8, (chart, j, a)


def test_deformation_v_is_minus_principal():
    rng = np.random.default_rng(55)
    lax = random_lax(rng, 3, [2, 0], 1)
    for nu, pole in enumerate(lax.poles):
        V = deformation_v(lax, nu)
        assert set(V.parts) == {pole.loc}
        assert np.array_equal(V.parts[pole.loc], -pole.coeffs)
        assert V.poly.shape[0] == 0


def test_deformation_u_singular_shape():
    rng = np.random.default_rng(56)
    lax = random_lax(rng, 2, [2], 2)
    # finite chart: strictly proper with poles only at the home location
    fs = formal_solution(lax, 0)
    U = fs.deformation_u(2, 1)
    assert U.poly.shape[0] == 0
    assert set(U.parts) == {lax.poles[0].loc}
    assert U.parts[lax.poles[0].loc].shape[0] == 2
    # reciprocal chart: pure polynomial of degree j
    fsi = formal_solution(lax, INF)
    Ui = fsi.deformation_u(2, 0)
    assert not Ui.parts
    assert Ui.poly.shape[0] == 3


def test_deformation_u_depth_guard():
    rng = np.random.default_rng(57)
    lax = random_lax(rng, 2, [1], 0)
    fs = formal_solution(lax, 0)
    with pytest.raises(ValueError):
        fs.deformation_u(5, 0)


def test_projector_sums_to_identity():
    rng = np.random.default_rng(58)
    lax = random_lax(rng, 2, [1], 2)
    for chart in lax.charts():
        fs = formal_solution(lax, chart)
        order = 3
        total = fs.branch_projector(0, order) + fs.branch_projector(1, order)
        for k in range(total.val, total.order):
            want = np.eye(2) if k == 0 else np.zeros((2, 2))
            assert np.max(np.abs(total.coeff(k) - want)) < 1e-10


def test_rational_u_matches_series():
    """The extracted rational deformation matrix agrees with the raw
    projector series on its singular window."""
    rng = np.random.default_rng(59)
    lax = random_lax(rng, 2, [2], 1)
    fs = formal_solution(lax, 0)
    loc = lax.poles[0].loc
    j = 2
    for a in range(2):
        U = fs.deformation_u(j, a)
        s = fs.branch_projector(a, j + 1)
        stack = U.parts[loc]
        for m in range(1, j + 1):
            want = s.coeff(j - m) / j
            assert np.max(np.abs(stack[m - 1] - want)) < 1e-12

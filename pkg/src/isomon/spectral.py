"""Eigenvalue expansions at the singular charts and the invariant read-offs.

Each chart carries r scalar Laurent branches lambda_a(zeta).  Conserved data
and Hamiltonians are coefficient extractions:

  finite pole, local coordinate zeta = z - c_nu, branch valuation -(d+1):
      t_ja  = -[lambda_a]_{zeta^(-j-1)}     j = 1..d      (deformation times)
      t_0a  = +[lambda_a]_{zeta^(-1)}                      (formal monodromy)
      H_ja  = -(1/j) [lambda_a]_{zeta^(j-1)} j = 1..d
      H_c   = (1/2)  [tr M(zeta)^2]_{zeta^(-1)}

  infinity, zeta = 1/z, branch valuation -(dinf-1):
      t_ja  = +[lambda_a]_{zeta^(1-j)}      j = 1..dinf
      t_0a  = +[lambda_a]_{zeta^(1)}
      H_ja  = +(1/j) [lambda_a]_{zeta^(j+1)}
"""

from __future__ import annotations

import numpy as np

from .errors import DegenerateSpectrumError
from .lax import INF, LaxMatrix, leading_eigenvalues
from .series import LaurentSeries, MatrixSeries

_NEWTON_MAX_ITERS = 64


def char_poly_local(M: MatrixSeries) -> list:
    """Coefficients c_0..c_r of det(lambda I - M), each a scalar series.

    Built from power sums p_k = tr(M^k) via the Newton identities, so the only
    divisions are by integers.
    """
    r = M.size
    powers = [M]
    for _ in range(r - 1):
        powers.append(powers[-1] @ M)
    psums = [p.trace() for p in powers]
    # Elementary symmetric functions of the eigenvalues (Newton identities).
    elem = [LaurentSeries.constant(1.0, M.order - M.val)]
    for k in range(1, r + 1):
        acc = elem[k - 1] * psums[0]
        sign = -1.0
        for i in range(2, k + 1):
            acc = acc + (elem[k - i] * psums[i - 1]) * sign
            sign = -sign
        elem.append(acc * (1.0 / k))
    coeffs = []
    for k in range(r + 1):
        c = elem[r - k] * float((-1) ** (r - k))
        coeffs.append(c)
    return coeffs


def _poly_eval(coeffs: list, lam: LaurentSeries) -> LaurentSeries:
    acc = None
    for c in reversed(coeffs):
        acc = c if acc is None else acc * lam + c
    return acc


def _poly_deriv(coeffs: list) -> list:
    return [coeffs[k] * float(k) for k in range(1, len(coeffs))]


def eigen_expansions(lax: LaxMatrix, chart, depth: int | None = None) -> list:
    """Branch eigenvalue series of the chart-local expansion of L.

    Branches are ordered canonically: lexicographic leading eigenvalue at a
    finite pole, stored diagonal order at infinity.  Raises
    DegenerateSpectrumError when the Newton correction stops contracting.
    """
    r = lax.r
    d = lax.chart_rank(chart)
    if depth is None:
        depth = d + 3
    lead_val = -(d + 1) if chart != INF else -(d - 1)
    target_order = depth
    jet_order = target_order + r * (d + 1) + 2
    M = lax.local_expansion(chart, jet_order)
    coeffs = char_poly_local(M)
    dcoeffs = _poly_deriv(coeffs)
    seeds = leading_eigenvalues(lax, chart)
    scale = max(1.0, float(np.max(np.abs(seeds))))
    for a in range(r):
        for b in range(a + 1, r):
            if abs(seeds[a] - seeds[b]) < 1e-10 * scale:
                raise DegenerateSpectrumError(
                    f"leading eigenvalues {a} and {b} collide at chart {chart}"
                )
    out = []
    for a in range(r):
        width = target_order - lead_val
        arr = np.zeros(width, dtype=complex)
        arr[0] = seeds[a]
        lam = LaurentSeries(lead_val, arr)
        prev_corr_val = None
        stall = 0
        for _ in range(_NEWTON_MAX_ITERS):
            num = _poly_eval(coeffs, lam)
            den = _poly_eval(dcoeffs, lam)
            corr = (num * den.inverse()).truncate(target_order)
            scale = max(1.0, lam.max_abs())
            if corr.max_abs() <= 1e-13 * scale:
                break
            cval = corr.actual_valuation(1e-13 * scale)
            if cval >= target_order:
                break
            lam = (lam - corr).truncate(target_order)
            if prev_corr_val is not None and cval <= prev_corr_val:
                stall += 1
                if stall >= 3:
                    raise DegenerateSpectrumError(
                        f"eigenvalue branch {a} at chart {chart}: Newton correction "
                        f"stalled at valuation {cval}"
                    )
            else:
                stall = 0
            prev_corr_val = cval
        out.append(lam)
    return out


def eigen_residual(lax: LaxMatrix, chart, lambdas: list) -> float:
    """Max residual coefficient magnitude of det(lambda I - M) at the branches."""
    r = lax.r
    d = lax.chart_rank(chart)
    order = lambdas[0].order
    jet_order = order + r * (d + 1) + 2
    M = lax.local_expansion(chart, jet_order)
    coeffs = char_poly_local(M)
    worst = 0.0
    for lam in lambdas:
        res = _poly_eval(coeffs, lam)
        worst = max(worst, res.max_abs())
    return worst


def root_certificate(lax: LaxMatrix, depth: int | None = None) -> float:
    """Worst eigen_residual over all charts; embedded in invariant reports."""
    worst = 0.0
    for chart in lax.charts():
        lams = eigen_expansions(lax, chart, depth)
        worst = max(worst, eigen_residual(lax, chart, lams))
    return worst


def projector_series(lax: LaxMatrix, chart, lambdas: list, a: int,
                     M: MatrixSeries | None = None) -> MatrixSeries:
    """Spectral projector of the chart-local jet onto branch a.

    Frobenius product form: prod_{b != a} (M - lambda_b) / (lambda_a - lambda_b);
    analytic in zeta with value E_a-like at the origin.
    """
    if M is None:
        order = lambdas[0].order
        M = lax.local_expansion(chart, order + lax.r * (lax.chart_rank(chart) + 1) + 2)
    r = lax.r
    num = None
    den = None
    for b in range(r):
        if b == a:
            continue
        diff = M + MatrixSeries.from_const(np.eye(r), M.order) * (lambdas[b] * -1.0)
        gap = lambdas[a] - lambdas[b]
        num = diff if num is None else num @ diff
        den = gap if den is None else den * gap
    if num is None:  # r == 1
        return MatrixSeries.from_const(np.eye(1), M.order)
    return num * den.inverse()


class InvariantTable:
    """Spectral read-offs of one system: Casimir-type data and Hamiltonians.

    Keys are (chart, j, a) with chart a 0-based pole index or "inf", j the
    coefficient depth, a the 0-based branch label.
    """

    def __init__(self, r: int, pole_locs, ranks: dict,
                 casimirs: dict, hamiltonians: dict, h_c: dict) -> None:
        self.r = r
        self.pole_locs = [complex(c) for c in pole_locs]
        self.ranks = dict(ranks)
        self.casimirs = dict(casimirs)
        self.hamiltonians = dict(hamiltonians)
        self.h_c = dict(h_c)

    def all_hamiltonian_items(self) -> list:
        items = [(("H_t",) + key, val) for key, val in self.hamiltonians.items()]
        items += [(("H_c", nu), val) for nu, val in self.h_c.items()]
        return items

    def central_keys(self) -> list:
        """Keys of the entries that are central for the coefficient bracket.

        Depth-0 exponents at infinity are carried as data but are not
        central once finite poles are present, so they are never listed.
        """
        return [key for key in self.casimirs
                if not (key[0] == INF and key[1] == 0)]

    @staticmethod
    def _chart_label(chart) -> str:
        return "inf" if chart == INF else str(chart + 1)

    def to_json_dict(self) -> dict:
        out: dict = {}
        for nu, c in enumerate(self.pole_locs):
            out[f"c[{nu + 1}]"] = [c.real, c.imag]
        for (chart, j, a), val in sorted(
            self.casimirs.items(), key=lambda kv: (str(kv[0][0]), kv[0][1], kv[0][2])
        ):
            out[f"t[{self._chart_label(chart)}][{j}][{a + 1}]"] = [val.real, val.imag]
        for (chart, j, a), val in sorted(
            self.hamiltonians.items(), key=lambda kv: (str(kv[0][0]), kv[0][1], kv[0][2])
        ):
            out[f"H_t[{self._chart_label(chart)}][{j}][{a + 1}]"] = [val.real, val.imag]
        for nu, val in sorted(self.h_c.items()):
            out[f"H_c[{nu + 1}]"] = [val.real, val.imag]
        return out


def extract_invariants(lax: LaxMatrix, depth: int | None = None) -> InvariantTable:
    """Full table over every chart (infinity only when it carries structure)."""
    casimirs: dict = {}
    hamiltonians: dict = {}
    h_c: dict = {}
    ranks: dict = {}
    for chart in lax.charts():
        d = lax.chart_rank(chart)
        ranks[chart] = d
        lambdas = eigen_expansions(lax, chart, depth if depth is not None else d + 3)
        if chart == INF:
            for a, lam in enumerate(lambdas):
                for j in range(1, d + 1):
                    casimirs[(INF, j, a)] = lam.coeff(1 - j)
                casimirs[(INF, 0, a)] = lam.coeff(1)
                for j in range(1, d + 1):
                    hamiltonians[(INF, j, a)] = lam.coeff(j + 1) / j
        else:
            for a, lam in enumerate(lambdas):
                for j in range(1, d + 1):
                    casimirs[(chart, j, a)] = -lam.coeff(-j - 1)
                casimirs[(chart, 0, a)] = lam.coeff(-1)
                for j in range(1, d + 1):
                    hamiltonians[(chart, j, a)] = -lam.coeff(j - 1) / j
            h_c[chart] = pole_hamiltonian(lax, chart)
    return InvariantTable(
        lax.r, [p.loc for p in lax.poles], ranks, casimirs, hamiltonians, h_c
    )


def pole_hamiltonian(lax: LaxMatrix, nu: int) -> complex:
    """H_{c_nu} = (1/2) [tr M^2]_{zeta^(-1)}, straight from the local jet."""
    d = lax.poles[nu].d
    M = lax.local_expansion(nu, d + 3)
    tr2 = (M @ M).trace()
    return tr2.coeff(-1) / 2.0

"""Formal gauge reduction at a singular chart and the deformation matrices.

At each chart the connection (chart coordinate zeta, the 1/z chart carries
the -zeta^(-2) Jacobian) is conjugated to a diagonal exponent:

    Psi = Y(zeta) e^(T(zeta)),   T = sum_{j=1}^{d} T_j / (j zeta^j) + T_0 log zeta

with Y analytic and invertible at zeta = 0.  The recursion runs in an
off-diagonal gauge Yhat (diag(Yhat_k) = 0) where the order-by-order equation
is strictly triangular, producing a diagonal series Q; the singular part of Q
is T', the analytic part integrates to a diagonal exponent D that is folded
back as Y = G Yhat e^D.  Branch a's deformation matrix of depth j is then the
singular part (at a finite pole: principal part; at infinity: polynomial
part) of Y E_a Y^{-1} / (j zeta^j).
"""

from __future__ import annotations

import numpy as np

from .errors import DegenerateSpectrumError, ResonanceError
from .lax import INF, LaxMatrix, proper_frame
from .rational import RationalMatrix
from .series import LaurentSeries, MatrixSeries

_GAP_REL = 1e-8


class FormalSolution:
    """Gauge data at one chart: frame, analytic factor, exponent coefficients."""

    def __init__(self, lax: LaxMatrix, chart, depth: int,
                 G: np.ndarray, yhat: list, qdiag: dict) -> None:
        self.lax = lax
        self.chart = chart
        self.d = lax.chart_rank(chart)
        self.depth = depth
        self.G = G
        self._yhat = yhat          # yhat[k] is the order-k off-diagonal factor
        self._qdiag = qdiag        # qdiag[q] is the (r,) diagonal of Q_q
        self.r = lax.r
        self.T_coeffs = self._build_t()
        self.Y = self._build_y()

    # -- assembly ------------------------------------------------------------

    def _build_t(self) -> list:
        out = []
        zero = np.zeros(self.r, dtype=complex)
        out.append(np.diag(self._qdiag.get(-1, zero)))
        for j in range(1, self.d + 1):
            out.append(np.diag(-self._qdiag.get(-j - 1, zero)))
        return out

    def _yhat_series(self, order: int) -> MatrixSeries:
        stack = np.zeros((order, self.r, self.r), dtype=complex)
        for k in range(min(order, len(self._yhat))):
            stack[k] = self._yhat[k]
        return MatrixSeries(0, stack)

    def _exp_d(self, order: int) -> MatrixSeries:
        entries = []
        for a in range(self.r):
            dcoef = np.zeros(order, dtype=complex)
            for k in range(1, order):
                q = self._qdiag.get(k - 1)
                if q is not None:
                    dcoef[k] = q[a] / k
            entries.append(LaurentSeries(0, dcoef).exp())
        from .series import diagonal_series

        return diagonal_series(entries)

    def _build_y(self) -> MatrixSeries:
        order = self.depth + 1
        y = self._yhat_series(order) @ self._exp_d(order)
        return y.left_const(self.G)

    # -- products ------------------------------------------------------------

    def branch_projector(self, a: int, order: int | None = None) -> MatrixSeries:
        """Y E_a Y^{-1}; the diagonal exponent cancels, so Yhat suffices."""
        if order is None:
            order = self.depth + 1
        yh = self._yhat_series(order)
        ea = np.zeros((self.r, self.r), dtype=complex)
        ea[a, a] = 1.0
        s = yh.right_const(ea) @ yh.inverse()
        return s.left_const(self.G).right_const(np.linalg.inv(self.G))

    def deformation_u(self, j: int, a: int) -> RationalMatrix:
        """Singular part of Y E_a Y^{-1} / (j zeta^j) as a rational matrix."""
        if not 1 <= j <= self.d:
            raise ValueError(f"deformation depth {j} outside 1..{self.d}")
        s = self.branch_projector(a, j + 1)
        if self.chart == INF:
            # zeta = 1/z: exponents -j..0 become the z-polynomial part.
            poly = np.zeros((j + 1, self.r, self.r), dtype=complex)
            for i in range(j + 1):
                poly[i] = s.coeff(j - i) / j
            return RationalMatrix(self.r, poly=poly)
        stack = np.zeros((j, self.r, self.r), dtype=complex)
        for m in range(1, j + 1):
            stack[m - 1] = s.coeff(j - m) / j
        return RationalMatrix(self.r, parts={self.lax.poles[self.chart].loc: stack})

    def log_deriv(self, order: int | None = None) -> MatrixSeries:
        """Y^{-1} dY/dzeta (the constant frame cancels)."""
        if order is None:
            order = self.depth + 1
        y = self._yhat_series(order) @ self._exp_d(order)
        return y.inverse() @ y.deriv()

    def second_route_hamiltonian(self, j: int, a: int) -> complex:
        """-(1/j) [ (Y^{-1} Y')_aa ]_{zeta^(j-1)}; same shape in both charts."""
        ld = self.log_deriv()
        return -ld.entry(a, a).coeff(j - 1) / j

    def t_values(self) -> dict:
        """Exponent read-offs keyed like the invariant table Casimirs."""
        out = {}
        sign = -1.0 if self.chart == INF else 1.0
        for a in range(self.r):
            out[(self.chart, 0, a)] = sign * complex(self.T_coeffs[0][a, a])
            for j in range(1, self.d + 1):
                out[(self.chart, j, a)] = complex(self.T_coeffs[j][a, a])
        return out

    def gauge_residual(self) -> MatrixSeries:
        """R = Y^{-1} A Y - Y^{-1} Y' - T' over the stored window."""
        order = self.depth + 1
        conn = _connection(self.lax, self.chart, order)
        y = self.Y
        yinv = y.inverse()
        width = order + self.d + 2
        tp = np.zeros((width, self.r, self.r), dtype=complex)
        for q in range(-(self.d + 1), -1 + 1):
            vec = self._qdiag.get(q)
            if vec is not None:
                tp[q + self.d + 1] = np.diag(vec)
        tprime = MatrixSeries(-(self.d + 1), tp)
        return (yinv @ conn @ y) - (yinv @ y.deriv()) - tprime


def _connection(lax: LaxMatrix, chart, order: int) -> MatrixSeries:
    if chart == INF:
        jet = lax.local_expansion(INF, order + 2)
        return (jet * (-1.0)).shift(-2)
    return lax.local_expansion(chart, order)


def formal_solution(lax: LaxMatrix, chart, depth: int | None = None) -> FormalSolution:
    """Run the triangular gauge recursion to the requested analytic depth."""
    d = lax.chart_rank(chart)
    r = lax.r
    if depth is None:
        depth = d + 4
    n_top = depth - 1
    conn = _connection(lax, chart, n_top + 1)
    G = proper_frame(lax, chart)
    Ginv = np.linalg.inv(G)
    M = conn.left_const(Ginv).right_const(G)

    def mcoef(m: int) -> np.ndarray:
        if m < M.val or m >= M.order:
            return np.zeros((r, r), dtype=complex)
        return M.coeffs[m - M.val]

    lead = mcoef(-(d + 1))
    lam = np.diag(lead).copy()
    scale = max(np.max(np.abs(lam)), 1.0)
    off = lead - np.diag(lam)
    if np.max(np.abs(off)) > 1e-8 * scale:
        raise DegenerateSpectrumError(
            f"chart {chart}: leading connection coefficient not diagonalized "
            f"(max off-diagonal {np.max(np.abs(off)):.3e})"
        )
    gaps = lam[:, None] - lam[None, :]
    if d >= 1:
        small = np.abs(gaps) + np.eye(r)
        if np.min(small) <= _GAP_REL * scale:
            raise DegenerateSpectrumError(
                f"chart {chart}: leading eigenvalue gap below threshold"
            )

    yhat = [np.eye(r, dtype=complex)]
    qdiag = {-(d + 1): lam}

    def ycoef(k: int) -> np.ndarray:
        if k < 0 or k >= len(yhat):
            return np.zeros((r, r), dtype=complex)
        return yhat[k]

    for n in range(-d, n_top + 1):
        acc = np.zeros((r, r), dtype=complex)
        for k in range(0, n + d + 1):
            mk = mcoef(n - k)
            if np.any(mk):
                acc += mk @ ycoef(k)
        if d >= 1 and n + 1 != 0:
            acc -= (n + 1) * ycoef(n + 1)
        for k in range(1, n + d + 1):
            q = qdiag.get(n - k)
            if q is not None:
                acc -= ycoef(k) * q[None, :]
        qdiag[n] = np.diag(acc).copy()
        denom = gaps.copy()
        if d == 0:
            denom = denom - (n + 1)
        np.fill_diagonal(denom, 1.0)
        if np.min(np.abs(denom)) <= _GAP_REL * scale:
            bad = np.unravel_index(np.argmin(np.abs(denom)), denom.shape)
            raise ResonanceError(
                f"chart {chart}: resonant divisor at order {n + 1}, "
                f"branch pair {bad}"
            )
        x = -acc / denom
        np.fill_diagonal(x, 0.0)
        yhat.append(x)

    return FormalSolution(lax, chart, depth, G, yhat, qdiag)


def deformation_v(lax: LaxMatrix, nu: int) -> RationalMatrix:
    """Pole-motion deformation matrix: minus the principal part at c_nu."""
    pole = lax.poles[nu]
    return RationalMatrix(lax.r, parts={pole.loc: -pole.coeffs})

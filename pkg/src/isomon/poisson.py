"""Poisson structure on rational connection coefficients.

The bracket closes on the coefficient arrays of a fixed pole divisor.  Two
coefficients at different points commute; within one block the bracket is a
shifted commutator read off a generating kernel, implemented here as explicit
structure constants.

Observables enter through loop elements: one matrix jet per chart, paired
against coefficient perturbations by window extraction.  A loop element keeps
enough of each jet to recover every partial derivative (the dual window), and
its rational truncations feed the classical splitting map R that turns a
Hamiltonian gradient into a deformation matrix.
"""

from __future__ import annotations

import numpy as np

from .errors import GradientPairingError, ValidationError
from .lax import INF, FinitePole, InfinityPart, LaxMatrix, binom_taylor
from .rational import RationalMatrix, _shift_poly
from .series import MatrixSeries
from .spectral import eigen_expansions, projector_series

# -- structure constants ------------------------------------------------------


def bracket_coefficients(lax: LaxMatrix, first, second) -> complex:
    """Bracket of two coefficient entries.

    A coefficient entry is ("pole", nu, alpha, a, b) for the order-alpha
    principal coefficient at pole nu, or ("inf", p, a, b) for the degree-p
    polynomial coefficient.  Entries at different blocks commute.
    """
    if first[0] != second[0]:
        return 0.0 + 0.0j
    if first[0] == "pole":
        _, nu, alpha, a, b = first
        _, mu, beta, c, d = second
        if nu != mu:
            return 0.0 + 0.0j
        pole = lax.poles[nu]
        gamma = alpha + beta - 1
        if gamma > pole.d + 1:
            return 0.0 + 0.0j
        coeff = pole.coeffs[gamma - 1]
    elif first[0] == "inf":
        _, p, a, b = first
        _, q, c, d = second
        gamma = p + q + 1
        if gamma > lax.infinity.d - 1:
            return 0.0 + 0.0j
        coeff = lax.infinity.coeffs[gamma]
    else:
        raise ValidationError(f"unknown coefficient block {first[0]!r}")
    out = 0.0 + 0.0j
    if c == b:
        out -= coeff[a, d]
    if a == d:
        out += coeff[c, b]
    return complex(out)


def _contract(lax: LaxMatrix, fin_f, inf_f, fin_g, inf_g) -> complex:
    out = 0.0 + 0.0j
    for nu, pole in enumerate(lax.poles):
        top = pole.d + 1
        for al in range(1, top + 1):
            F = fin_f[nu][al - 1]
            if not np.any(F):
                continue
            for be in range(1, top - al + 2):
                G = fin_g[nu][be - 1]
                lg = pole.coeffs[al + be - 2]
                out += np.sum((G @ F - F @ G) * lg)
    dinf = lax.infinity.d
    for p in range(dinf):
        F = inf_f[p]
        if not np.any(F):
            continue
        for q in range(dinf - 1 - p):
            G = inf_g[q]
            bg = lax.infinity.coeffs[p + q + 1]
            out += np.sum((G @ F - F @ G) * bg)
    return complex(out)


def bracket_kernel(lax: LaxMatrix, F: np.ndarray, G: np.ndarray,
                   z: complex, w: complex) -> complex:
    """Bracket of the linear observables tr(F L(z)) and tr(G L(w))."""
    fin_f, inf_f = _linear_gradient(lax, F, z)
    fin_g, inf_g = _linear_gradient(lax, G, w)
    return _contract(lax, fin_f, inf_f, fin_g, inf_g)


def _linear_gradient(lax: LaxMatrix, F: np.ndarray, z: complex):
    ft = np.asarray(F, dtype=complex).T
    fin = []
    for pole in lax.poles:
        stack = np.zeros((pole.d + 1, lax.r, lax.r), dtype=complex)
        for k in range(1, pole.d + 2):
            stack[k - 1] = ft * (z - pole.loc) ** (-k)
        fin.append(stack)
    dinf = lax.infinity.d
    inf = np.zeros((dinf, lax.r, lax.r), dtype=complex)
    for p in range(dinf):
        inf[p] = -ft * z**p
    return fin, inf


# -- coefficient perturbations -------------------------------------------------


def random_delta(lax: LaxMatrix, rng: np.random.Generator, scale: float = 1.0):
    """Random perturbation of every coefficient block, matching shapes."""
    fin = []
    for pole in lax.poles:
        shape = pole.coeffs.shape
        fin.append(scale * (rng.standard_normal(shape)
                            + 1j * rng.standard_normal(shape)))
    shape = lax.infinity.coeffs.shape
    inf = scale * (rng.standard_normal(shape) + 1j * rng.standard_normal(shape))
    return fin, inf


def apply_delta(lax: LaxMatrix, delta, h: float) -> LaxMatrix:
    fin, inf = delta
    poles = [FinitePole(p.loc, p.coeffs + h * fin[nu])
             for nu, p in enumerate(lax.poles)]
    infinity = InfinityPart(lax.infinity.coeffs + h * inf, r=lax.r)
    return LaxMatrix(poles, infinity)


# -- loop elements -------------------------------------------------------------


class LoopElement:
    """One matrix jet per chart, acting on coefficient perturbations.

    finite_jets maps pole index -> jet in the local coordinate; inf_jet is a
    jet in the reciprocal coordinate.  The pairing with a perturbation reads
    the dual window: exponent k-1 against the order-k principal coefficient
    at a finite pole, exponent p+1 (with a sign) against the degree-p
    polynomial coefficient.
    """

    def __init__(self, lax: LaxMatrix, finite_jets: dict, inf_jet=None) -> None:
        self.lax = lax
        self.r = lax.r
        self.finite_jets = finite_jets
        self.inf_jet = inf_jet

    def _finite_partial(self, nu: int) -> np.ndarray:
        pole = self.lax.poles[nu]
        out = np.zeros((pole.d + 1, self.r, self.r), dtype=complex)
        jet = self.finite_jets.get(nu)
        if jet is not None:
            for k in range(1, pole.d + 2):
                out[k - 1] = jet.coeff(k - 1).T
        return out

    def _inf_partial(self) -> np.ndarray:
        dinf = self.lax.infinity.d
        out = np.zeros((dinf, self.r, self.r), dtype=complex)
        if self.inf_jet is not None:
            for p in range(dinf):
                out[p] = -self.inf_jet.coeff(p + 1).T
        return out

    def gradient_arrays(self):
        """True partial derivatives per coefficient entry."""
        fin = [self._finite_partial(nu) for nu in range(len(self.lax.poles))]
        return fin, self._inf_partial()

    def pair(self, delta) -> complex:
        fin, inf = self.gradient_arrays()
        dfin, dinf = delta
        out = 0.0 + 0.0j
        for g, d in zip(fin, dfin):
            out += np.sum(g * d)
        out += np.sum(inf * dinf)
        return complex(out)

    def plus(self) -> RationalMatrix:
        """Polynomial truncation, read from the reciprocal-coordinate jet."""
        if self.inf_jet is None or self.inf_jet.val > 0:
            return RationalMatrix.zero(self.r)
        deg = -self.inf_jet.val
        poly = np.zeros((deg + 1, self.r, self.r), dtype=complex)
        for p in range(deg + 1):
            poly[p] = self.inf_jet.coeff(-p)
        return RationalMatrix(self.r, poly=poly)

    def minus(self) -> RationalMatrix:
        """Strictly proper truncation: principal parts of the finite jets."""
        parts = {}
        for nu, jet in self.finite_jets.items():
            if jet is None or jet.val >= 0:
                continue
            m = -jet.val
            stack = np.zeros((m, self.r, self.r), dtype=complex)
            for k in range(1, m + 1):
                stack[k - 1] = jet.coeff(-k)
            if np.any(stack):
                parts[self.lax.poles[nu].loc] = stack
        return RationalMatrix(self.r, parts=parts)

    def apply_R(self, s: float) -> RationalMatrix:
        """Splitting map: s * (polynomial part) + (s - 1) * (proper part)."""
        out = self.plus().scale(s)
        if s != 1.0:
            out = out + self.minus().scale(s - 1.0)
        return out


def bracket_functions(lax: LaxMatrix, X: LoopElement, Y: LoopElement) -> complex:
    fin_f, inf_f = X.gradient_arrays()
    fin_g, inf_g = Y.gradient_arrays()
    return _contract(lax, fin_f, inf_f, fin_g, inf_g)


# -- jets of rational matrices --------------------------------------------------


def _taylor_at(rmat: RationalMatrix, loc: complex, order: int) -> MatrixSeries:
    r = rmat.r
    coeffs = np.zeros((order, r, r), dtype=complex)
    if rmat.poly.shape[0]:
        shifted = _shift_poly(rmat.poly, loc)
        top = min(order, shifted.shape[0])
        coeffs[:top] += shifted[:top]
    for lb, stack in rmat.parts.items():
        delta = loc - lb
        if abs(delta) < 1e-12:
            raise ValidationError("Taylor expansion requested at a pole")
        for j in range(1, stack.shape[0] + 1):
            tail = binom_taylor(j, delta, order)
            coeffs += tail[:, None, None] * stack[j - 1][None, :, :]
    return MatrixSeries(0, coeffs)


def _inf_jet_of(rmat: RationalMatrix, order: int) -> MatrixSeries:
    """Jet in the reciprocal coordinate, window [-poly_degree, order)."""
    r = rmat.r
    deg = max(rmat.poly.shape[0] - 1, 0)
    val = -deg
    width = order - val
    coeffs = np.zeros((width, r, r), dtype=complex)
    for p in range(rmat.poly.shape[0]):
        coeffs[-p - val] += rmat.poly[p]
    for lb, stack in rmat.parts.items():
        for j in range(1, stack.shape[0] + 1):
            b = 1.0 + 0.0j
            s = 0
            while j + s < order:
                coeffs[j + s - val] += b * stack[j - 1]
                b *= lb * (j + s) / (s + 1)
                s += 1
    return MatrixSeries(val, coeffs)


# -- analytic gradients of the invariant-table observables ----------------------


def _branch_projector(lax: LaxMatrix, chart, a: int, order: int) -> MatrixSeries:
    d = lax.chart_rank(chart)
    pad = (lax.r - 1) * (d + 1) + 2
    lams = eigen_expansions(lax, chart, depth=order + pad)
    M = lax.local_expansion(chart, order + pad)
    proj = projector_series(lax, chart, lams, a, M=M)
    if proj.order < order:
        raise GradientPairingError(
            f"projector window {proj.order} short of requested {order}"
        )
    return proj


def _principal_rational(jet: MatrixSeries, loc: complex, r: int) -> RationalMatrix:
    if jet.val >= 0:
        return RationalMatrix.zero(r)
    m = -jet.val
    stack = np.zeros((m, r, r), dtype=complex)
    for k in range(1, m + 1):
        stack[k - 1] = jet.coeff(-k)
    return RationalMatrix(r, parts={loc: stack})


def _poly_rational(jet: MatrixSeries, r: int) -> RationalMatrix:
    if jet.val > 0:
        return RationalMatrix.zero(r)
    deg = -jet.val
    poly = np.zeros((deg + 1, r, r), dtype=complex)
    for p in range(deg + 1):
        poly[p] = jet.coeff(-p)
    return RationalMatrix(r, poly=poly)


def _spread(lax: LaxMatrix, home, home_jet: MatrixSeries) -> LoopElement:
    """Fill the other charts from the rational content of the home jet."""
    finite_jets = {}
    inf_jet = None
    if home == INF:
        kernel = _poly_rational(home_jet, lax.r)
        inf_jet = home_jet
        for mu, pole in enumerate(lax.poles):
            finite_jets[mu] = _taylor_at(kernel, pole.loc, pole.d + 1)
    else:
        kernel = _principal_rational(home_jet, lax.poles[home].loc, lax.r)
        finite_jets[home] = home_jet
        for mu, pole in enumerate(lax.poles):
            if mu == home:
                continue
            finite_jets[mu] = _taylor_at(kernel.scale(-1.0), pole.loc, pole.d + 1)
        if lax.infinity.d >= 1:
            inf_jet = _inf_jet_of(kernel, lax.infinity.d + 1)
    return LoopElement(lax, finite_jets, inf_jet)


def gradient_loop(lax: LaxMatrix, kind: str, chart, j: int | None = None,
                  a: int | None = None) -> LoopElement:
    """Loop-element gradient of one invariant-table observable.

    kind "t" or "H_t" take (chart, j, a); kind "H_c" takes a finite chart
    only.  The home-chart jet is an explicit kernel built from the branch
    projector; every other chart is filled by expanding the kernel's
    rational content, which also makes the splitting map exact.
    """
    d = lax.chart_rank(chart)
    if kind == "H_c":
        if chart == INF:
            raise ValidationError("H_c is indexed by finite poles")
        jet = lax.local_expansion(chart, d + 1)
        return _spread(lax, chart, jet)
    if kind not in ("t", "H_t"):
        raise ValidationError(f"unknown observable kind {kind!r}")
    if kind == "t" and not 0 <= j <= d:
        raise ValidationError(f"depth {j} outside 0..{d}")
    if kind == "H_t" and not 1 <= j <= d:
        raise ValidationError(f"depth {j} outside 1..{d}")
    dual_top = lax.infinity.d + 1 if chart == INF else d + 1
    if kind == "t":
        proj = _branch_projector(lax, chart, a, dual_top + max(-j, 0))
        sign = 1.0 if (chart == INF or j == 0) else -1.0
        jet = (proj * sign).shift(j).truncate(dual_top)
    else:
        proj = _branch_projector(lax, chart, a, dual_top + j)
        sign = 1.0 if chart == INF else -1.0
        jet = (proj * (sign / j)).shift(-j).truncate(dual_top)
    return _spread(lax, chart, jet)


def hamiltonian_deformation(lax: LaxMatrix, kind: str, chart,
                            j: int | None = None, a: int | None = None
                            ) -> RationalMatrix:
    """Deformation matrix of a table Hamiltonian via the splitting map."""
    if kind == "H_c":
        grad = gradient_loop(lax, "H_c", chart)
        return grad.apply_R(0.0)
    grad = gradient_loop(lax, kind, chart, j, a)
    s = 1.0 if chart == INF else 0.0
    return grad.apply_R(s)


# -- finite-difference gradients -------------------------------------------------


def gradient_fd(lax: LaxMatrix, func, step: float | None = None) -> LoopElement:
    """Loop element of an arbitrary coefficient observable, by central
    differences in every coefficient entry.  The jets carry the dual window
    only, so the result pairs correctly but has no rational content."""
    if step is None:
        step = 1e-5 * max(1.0, lax.max_abs())
    r = lax.r

    def probe(h_fin, h_inf):
        poles = [FinitePole(p.loc, p.coeffs + h_fin[nu])
                 for nu, p in enumerate(lax.poles)]
        return func(LaxMatrix(poles, InfinityPart(lax.infinity.coeffs + h_inf,
                                                  r=r)))

    zero_fin = [np.zeros_like(p.coeffs) for p in lax.poles]
    zero_inf = np.zeros_like(lax.infinity.coeffs)
    finite_jets = {}
    for nu, pole in enumerate(lax.poles):
        coeffs = np.zeros((pole.d + 1, r, r), dtype=complex)
        for k in range(pole.d + 1):
            for c in range(r):
                for dd in range(r):
                    bump = [z.copy() for z in zero_fin]
                    bump[nu][k, c, dd] = step
                    dplus = probe(bump, zero_inf)
                    bump[nu][k, c, dd] = -step
                    dminus = probe(bump, zero_inf)
                    coeffs[k, dd, c] = (dplus - dminus) / (2 * step)
        finite_jets[nu] = MatrixSeries(0, coeffs)
    inf_jet = None
    if lax.infinity.d >= 1:
        coeffs = np.zeros((lax.infinity.d, r, r), dtype=complex)
        for p in range(lax.infinity.d):
            for c in range(r):
                for dd in range(r):
                    bump = zero_inf.copy()
                    bump[p, c, dd] = step
                    dplus = probe(zero_fin, bump)
                    bump[p, c, dd] = -step
                    dminus = probe(zero_fin, bump)
                    coeffs[p, dd, c] = -(dplus - dminus) / (2 * step)
        inf_jet = MatrixSeries(1, coeffs)
    return LoopElement(lax, finite_jets, inf_jet)


def verify_pairing(lax: LaxMatrix, elem: LoopElement, func,
                   rng: np.random.Generator, trials: int = 10,
                   tol: float = 1e-6) -> float:
    """Check the loop element against directional derivatives of func."""
    scale = max(1.0, abs(func(lax)))
    step = 1e-6 * max(1.0, lax.max_abs())
    worst = 0.0
    for _ in range(trials):
        delta = random_delta(lax, rng)
        predicted = elem.pair(delta)
        fp = func(apply_delta(lax, delta, step))
        fm = func(apply_delta(lax, delta, -step))
        measured = (fp - fm) / (2 * step)
        err = abs(predicted - measured) / scale
        worst = max(worst, err)
    if worst > tol:
        raise GradientPairingError(
            f"pairing mismatch {worst:.3e} exceeds {tol:.1e}"
        )
    return worst

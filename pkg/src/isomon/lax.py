"""Rational connection data: poles, coefficient stacks, local expansions.

A system is stored through the coefficients of

    L(z) = -sum_{p=0}^{dinf-1} B_p z^p
           + sum_nu sum_{j=1}^{d_nu+1} C^nu_j / (z - c_nu)^j

where the B_p stack (possibly empty) is the polynomial block and each finite
pole nu carries its principal-part stack C^nu_j.  Charts are addressed by the
0-based pole index or by the INF sentinel; the local coordinate is
zeta = z - c_nu at a finite pole and zeta = 1/z at infinity.
"""

from __future__ import annotations

import math

import numpy as np

from . import backend
from .errors import DegenerateSpectrumError, ValidationError, WindowError
from .series import MatrixSeries

INF = "inf"

# Gap thresholds used by validate(); relative to the coefficient norm.
_EIG_GAP_REL = 1e-8
_POLE_GAP_ABS = 1e-12


def _as_stack(coeffs, r: int) -> np.ndarray:
    arr = np.asarray(coeffs, dtype=complex)
    if arr.ndim != 3 or arr.shape[1:] != (r, r):
        raise ValidationError(
            f"coefficient stack must have shape (k, {r}, {r}), got {arr.shape}"
        )
    return arr.copy()


def binom_taylor(j: int, delta: complex, depth: int) -> np.ndarray:
    """Taylor coefficients of (delta + zeta)^(-j) at zeta = 0, orders 0..depth-1."""
    if delta == 0:
        raise ValidationError("expansion point collides with a pole")
    out = np.empty(depth, dtype=complex)
    c = delta ** (-j)
    for s in range(depth):
        out[s] = c
        c *= -(j + s) / ((s + 1) * delta)
    return out


class FinitePole:
    """One finite singular point: location and principal-part stack."""

    __slots__ = ("loc", "coeffs")

    def __init__(self, loc: complex, coeffs) -> None:
        self.loc = complex(loc)
        arr = np.asarray(coeffs, dtype=complex)
        if arr.ndim != 3 or arr.shape[0] < 1 or arr.shape[1] != arr.shape[2]:
            raise ValidationError(
                f"finite pole stack must have shape (d+1, r, r), got {arr.shape}"
            )
        self.coeffs = arr.copy()

    @property
    def r(self) -> int:
        return self.coeffs.shape[1]

    @property
    def d(self) -> int:
        return self.coeffs.shape[0] - 1

    @property
    def leading(self) -> np.ndarray:
        return self.coeffs[-1]

    def copy(self) -> "FinitePole":
        return FinitePole(self.loc, self.coeffs)


class InfinityPart:
    """Polynomial block: stack of B_p, p = 0..dinf-1, entering as -B_p z^p."""

    __slots__ = ("coeffs", "r")

    def __init__(self, coeffs, r: int | None = None) -> None:
        arr = np.asarray(coeffs, dtype=complex)
        if arr.size == 0:
            if r is None:
                raise ValidationError("empty polynomial block needs explicit r")
            arr = np.zeros((0, r, r), dtype=complex)
        elif arr.ndim != 3 or arr.shape[1] != arr.shape[2]:
            raise ValidationError(
                f"polynomial block must have shape (dinf, r, r), got {arr.shape}"
            )
        self.coeffs = arr.copy()
        self.r = int(r if r is not None else arr.shape[1])
        if arr.shape[0] and arr.shape[1] != self.r:
            raise ValidationError("polynomial block size mismatch")

    @property
    def d(self) -> int:
        return self.coeffs.shape[0]

    @property
    def leading(self) -> np.ndarray:
        if self.d == 0:
            raise ValidationError("polynomial block is empty")
        return self.coeffs[-1]

    def copy(self) -> "InfinityPart":
        return InfinityPart(self.coeffs, self.r)


class LaxMatrix:
    """The full rational coefficient matrix with chart-local expansion support."""

    def __init__(self, poles, infinity: InfinityPart) -> None:
        self.infinity = infinity.copy()
        self.r = self.infinity.r
        self.poles = []
        for p in poles:
            if p.r != self.r:
                raise ValidationError("pole block size mismatch")
            self.poles.append(p.copy())
        self._pack()

    def _pack(self) -> None:
        # Padded arrays in the layout the compiled kernels expect.
        n = len(self.poles)
        maxord = max((p.d + 1 for p in self.poles), default=1)
        self._locs = np.array([p.loc for p in self.poles], dtype=complex)
        self._orders = np.array([p.d + 1 for p in self.poles], dtype=np.int64)
        self._stacks = np.zeros((n, maxord, self.r, self.r), dtype=complex)
        for i, p in enumerate(self.poles):
            self._stacks[i, : p.d + 1] = p.coeffs

    @property
    def n_poles(self) -> int:
        return len(self.poles)

    def charts(self) -> list:
        ids: list = list(range(len(self.poles)))
        if self.infinity.d >= 1:
            ids.append(INF)
        return ids

    def copy(self) -> "LaxMatrix":
        return LaxMatrix(self.poles, self.infinity)

    def kernel_arrays(self):
        return self._inf_stack(), self._locs, self._stacks, self._orders

    def _inf_stack(self) -> np.ndarray:
        return self.infinity.coeffs

    def eval(self, z: complex) -> np.ndarray:
        z = complex(z)
        for p in self.poles:
            if abs(z - p.loc) <= _POLE_GAP_ABS * max(1.0, abs(p.loc)):
                raise ValidationError(f"evaluation point {z} collides with pole at {p.loc}")
        return backend.lax_eval(z, self._inf_stack(), self._locs, self._stacks, self._orders)

    def chart_rank(self, chart) -> int:
        if chart == INF:
            return self.infinity.d
        return self.poles[chart].d

    def default_depth(self, chart) -> int:
        # Enough analytic coefficients past the last invariant read-off.
        return self.chart_rank(chart) + 3

    def local_expansion(self, chart, depth: int | None = None) -> MatrixSeries:
        """Laurent jet of L in the chart coordinate, analytic orders < depth."""
        if depth is None:
            depth = self.default_depth(chart)
        if chart == INF:
            return self._expand_inf(depth)
        return self._expand_finite(int(chart), depth)

    def _expand_finite(self, nu: int, depth: int) -> MatrixSeries:
        pole = self.poles[nu]
        d = pole.d
        r = self.r
        if depth < -(d + 1):
            raise WindowError("expansion depth below the principal window")
        width = depth + d + 1
        coeffs = np.zeros((width, r, r), dtype=complex)
        # Principal part, exact bitwise.
        for j in range(1, d + 2):
            coeffs[d + 1 - j] = pole.coeffs[j - 1]
        c = pole.loc
        # Polynomial block: -sum_p B_p (c + zeta)^p.
        for p in range(self.infinity.d):
            bp = self.infinity.coeffs[p]
            for s in range(min(p, depth - 1) + 1):
                coeffs[d + 1 + s] -= math.comb(p, s) * c ** (p - s) * bp
        # Analytic tails of the other principal parts.
        for mu, other in enumerate(self.poles):
            if mu == nu:
                continue
            delta = c - other.loc
            for j in range(1, other.d + 2):
                tay = binom_taylor(j, delta, depth)
                for s in range(depth):
                    coeffs[d + 1 + s] += tay[s] * other.coeffs[j - 1]
        return MatrixSeries(-(d + 1), coeffs)

    def _expand_inf(self, depth: int) -> MatrixSeries:
        dinf = self.infinity.d
        r = self.r
        val = -(dinf - 1) if dinf >= 1 else 0
        if depth <= val:
            raise WindowError("expansion depth below the polynomial window")
        width = depth - val
        coeffs = np.zeros((width, r, r), dtype=complex)
        # Polynomial block in zeta = 1/z: -B_p zeta^(-p).
        for p in range(dinf):
            coeffs[-p - val] -= self.infinity.coeffs[p]
        # (1/zeta - c)^(-j) = zeta^j (1 - c zeta)^(-j); Taylor of the proper parts.
        for pole in self.poles:
            c = pole.loc
            for j in range(1, pole.d + 2):
                # (1 - c zeta)^(-j) = sum_s binom(j+s-1, s) c^s zeta^s
                term = 1.0 + 0.0j
                for s in range(depth - j + 1):
                    k = j + s - val
                    if 0 <= k < width:
                        coeffs[k] += term * pole.coeffs[j - 1]
                    term *= c * (j + s) / (s + 1)
        return MatrixSeries(val, coeffs)

    # -- validation ----------------------------------------------------------

    def validate(self) -> list:
        """Structural checks; returns a list of check records (dicts)."""
        checks = []
        # Pairwise pole distinctness.
        ok = True
        gap = math.inf
        for i in range(len(self.poles)):
            for k in range(i + 1, len(self.poles)):
                g = abs(self.poles[i].loc - self.poles[k].loc)
                gap = min(gap, g)
                if g <= _POLE_GAP_ABS:
                    ok = False
        checks.append(
            {
                "check": "pole_distinctness",
                "pass": ok,
                "detail": "min pairwise pole distance"
                + (f" {gap:.3e}" if self.poles else " (no poles)"),
            }
        )
        # Leading-coefficient spectrum at each finite pole.
        for nu, pole in enumerate(self.poles):
            lead = pole.leading
            w = np.linalg.eigvals(lead)
            scale = max(np.linalg.norm(lead), 1e-300)
            g = _min_gap(w)
            checks.append(
                {
                    "check": f"leading_spectrum_pole_{nu}",
                    "pass": bool(g >= _EIG_GAP_REL * scale),
                    "detail": f"min eigenvalue gap {g:.3e} vs {_EIG_GAP_REL * scale:.3e}",
                }
            )
        # Polynomial block leading coefficient: diagonal, distinct entries.
        if self.infinity.d >= 1:
            lead = self.infinity.leading
            off = lead - np.diag(np.diag(lead))
            diag_ok = bool(np.max(np.abs(off)) == 0.0)
            checks.append(
                {
                    "check": "inf_leading_diagonal",
                    "pass": diag_ok,
                    "detail": f"max off-diagonal magnitude {np.max(np.abs(off)):.3e}",
                }
            )
            scale = max(np.linalg.norm(lead), 1e-300)
            g = _min_gap(np.diag(lead))
            checks.append(
                {
                    "check": "inf_leading_spectrum",
                    "pass": bool(g >= _EIG_GAP_REL * scale),
                    "detail": f"min diagonal gap {g:.3e} vs {_EIG_GAP_REL * scale:.3e}",
                }
            )
        return checks

    def require_valid(self, spectral: bool = True) -> None:
        for rec in self.validate():
            if rec["pass"]:
                continue
            if "spectrum" in rec["check"] or "diagonal" in rec["check"]:
                if spectral:
                    raise DegenerateSpectrumError(f"{rec['check']}: {rec['detail']}")
                continue
            raise ValidationError(f"{rec['check']}: {rec['detail']}")

    def max_abs(self) -> float:
        m = 0.0
        if self.infinity.d:
            m = float(np.max(np.abs(self.infinity.coeffs)))
        for p in self.poles:
            m = max(m, float(np.max(np.abs(p.coeffs))))
        return m


def _min_gap(values) -> float:
    vals = np.asarray(values)
    g = math.inf
    for i in range(len(vals)):
        for k in range(i + 1, len(vals)):
            g = min(g, abs(vals[i] - vals[k]))
    return g


def proper_frame(lax: LaxMatrix, chart) -> np.ndarray:
    """Eigenvector frame at the chart: columns ordered canonically.

    Finite charts sort the leading-stack eigenvalues lexicographically by
    (real, imag); the infinity chart keeps the stored diagonal order and the
    frame is the identity.
    """
    if chart == INF:
        return np.eye(lax.r, dtype=complex)
    lead = lax.poles[chart].leading
    w, v = np.linalg.eig(lead)
    order = np.lexsort((w.imag, w.real))
    v = v[:, order]
    return v / np.linalg.norm(v, axis=0, keepdims=True)


def leading_eigenvalues(lax: LaxMatrix, chart) -> np.ndarray:
    """Eigenvalues of the leading chart coefficient in canonical branch order."""
    if chart == INF:
        return -np.diag(lax.infinity.leading)
    w = np.linalg.eigvals(lax.poles[chart].leading)
    return w[np.lexsort((w.imag, w.real))]

"""Exact arithmetic for matrix-valued rational functions of z.

Values are stored in partial-fraction form: one polynomial stack plus one
principal-part stack per pole.  Sums, products, commutators and d/dz stay in
this form with no series truncation, which is what keeps the zero-curvature
and tangency residuals honest: any nonzero coefficient outside a target shape
is genuine, not an artifact of a cut-off tail.
"""

from __future__ import annotations

import math

import numpy as np

from .errors import ValidationError
from .lax import LaxMatrix, binom_taylor

_MERGE_TOL = 0.0  # pole locations are compared exactly; flows keep them exact


def _trim_poly(poly: np.ndarray) -> np.ndarray:
    k = poly.shape[0]
    while k > 0 and not np.any(poly[k - 1]):
        k -= 1
    return poly[:k]


def _trim_stack(stack: np.ndarray) -> np.ndarray:
    k = stack.shape[0]
    while k > 0 and not np.any(stack[k - 1]):
        k -= 1
    return stack[:k]


class RationalMatrix:
    """poly[p] multiplies z^p; parts[loc][j-1] multiplies (z-loc)^(-j)."""

    __slots__ = ("r", "poly", "parts")

    def __init__(self, r: int, poly=None, parts=None) -> None:
        self.r = int(r)
        if poly is None:
            poly = np.zeros((0, r, r), dtype=complex)
        self.poly = _trim_poly(np.asarray(poly, dtype=complex).copy())
        self.parts = {}
        if parts:
            for loc, stack in parts.items():
                stack = _trim_stack(np.asarray(stack, dtype=complex).copy())
                if stack.shape[0]:
                    self.parts[complex(loc)] = stack

    # -- constructors --------------------------------------------------------

    @classmethod
    def zero(cls, r: int) -> "RationalMatrix":
        return cls(r)

    @classmethod
    def constant(cls, M) -> "RationalMatrix":
        M = np.asarray(M, dtype=complex)
        return cls(M.shape[0], poly=M[None, :, :])

    @classmethod
    def from_lax(cls, lax: LaxMatrix) -> "RationalMatrix":
        poly = -lax.infinity.coeffs
        parts = {p.loc: p.coeffs for p in lax.poles}
        return cls(lax.r, poly=poly, parts=parts)

    def copy(self) -> "RationalMatrix":
        return RationalMatrix(self.r, self.poly, self.parts)

    # -- ring operations -----------------------------------------------------

    def __add__(self, other: "RationalMatrix") -> "RationalMatrix":
        if self.r != other.r:
            raise ValidationError("size mismatch")
        np1, np2 = self.poly.shape[0], other.poly.shape[0]
        poly = np.zeros((max(np1, np2), self.r, self.r), dtype=complex)
        poly[:np1] += self.poly
        poly[:np2] += other.poly
        parts: dict = {}
        for src in (self.parts, other.parts):
            for loc, stack in src.items():
                if loc in parts:
                    a, b = parts[loc], stack
                    m = max(a.shape[0], b.shape[0])
                    out = np.zeros((m, self.r, self.r), dtype=complex)
                    out[: a.shape[0]] += a
                    out[: b.shape[0]] += b
                    parts[loc] = out
                else:
                    parts[loc] = stack.copy()
        return RationalMatrix(self.r, poly, parts)

    def __neg__(self) -> "RationalMatrix":
        return RationalMatrix(self.r, -self.poly, {c: -s for c, s in self.parts.items()})

    def __sub__(self, other: "RationalMatrix") -> "RationalMatrix":
        return self + (-other)

    def scale(self, c: complex) -> "RationalMatrix":
        return RationalMatrix(
            self.r, c * self.poly, {loc: c * s for loc, s in self.parts.items()}
        )

    def __matmul__(self, other: "RationalMatrix") -> "RationalMatrix":
        if self.r != other.r:
            raise ValidationError("size mismatch")
        out = RationalMatrix.zero(self.r)
        out = out + _poly_mul(self.poly, other.poly, self.r)
        for loc, stack in other.parts.items():
            out = out + _poly_prin(self.poly, loc, stack, self.r, left=True)
        for loc, stack in self.parts.items():
            out = out + _poly_prin(other.poly, loc, stack, self.r, left=False)
        for la, sa in self.parts.items():
            for lb, sb in other.parts.items():
                out = out + _prin_prin(la, sa, lb, sb, self.r)
        return out

    def commutator(self, other: "RationalMatrix") -> "RationalMatrix":
        return (self @ other) - (other @ self)

    def deriv(self) -> "RationalMatrix":
        npoly = self.poly.shape[0]
        poly = np.zeros((max(npoly - 1, 0), self.r, self.r), dtype=complex)
        for p in range(1, npoly):
            poly[p - 1] = p * self.poly[p]
        parts = {}
        for loc, stack in self.parts.items():
            out = np.zeros((stack.shape[0] + 1, self.r, self.r), dtype=complex)
            for j in range(1, stack.shape[0] + 1):
                out[j] = -j * stack[j - 1]
            parts[loc] = out
        return RationalMatrix(self.r, poly, parts)

    # -- structure access ----------------------------------------------------

    def eval(self, z: complex) -> np.ndarray:
        z = complex(z)
        acc = np.zeros((self.r, self.r), dtype=complex)
        zp = 1.0 + 0.0j
        for p in range(self.poly.shape[0]):
            acc += self.poly[p] * zp
            zp *= z
        for loc, stack in self.parts.items():
            w = 1.0 / (z - loc)
            wp = w
            for j in range(stack.shape[0]):
                acc += stack[j] * wp
                wp *= w
        return acc

    def principal_part_at(self, loc: complex) -> np.ndarray:
        stack = self.parts.get(complex(loc))
        if stack is None:
            return np.zeros((0, self.r, self.r), dtype=complex)
        return stack.copy()

    def poly_part(self) -> np.ndarray:
        return self.poly.copy()

    def residue(self, loc: complex) -> np.ndarray:
        stack = self.parts.get(complex(loc))
        if stack is None or stack.shape[0] == 0:
            return np.zeros((self.r, self.r), dtype=complex)
        return stack[0].copy()

    def trace_residue(self, loc: complex) -> complex:
        return complex(np.trace(self.residue(loc)))

    def max_abs(self) -> float:
        m = float(np.max(np.abs(self.poly))) if self.poly.shape[0] else 0.0
        for stack in self.parts.values():
            if stack.shape[0]:
                m = max(m, float(np.max(np.abs(stack))))
        return m

    def proper_minus(self) -> "RationalMatrix":
        """Strictly proper part: all principal parts, no polynomial block."""
        return RationalMatrix(self.r, None, self.parts)

    def poly_plus(self) -> "RationalMatrix":
        """Polynomial block only (constant term included)."""
        return RationalMatrix(self.r, self.poly, None)


def _poly_mul(pa: np.ndarray, pb: np.ndarray, r: int) -> RationalMatrix:
    na, nb = pa.shape[0], pb.shape[0]
    if na == 0 or nb == 0:
        return RationalMatrix.zero(r)
    out = np.zeros((na + nb - 1, r, r), dtype=complex)
    for i in range(na):
        for k in range(nb):
            out[i + k] += pa[i] @ pb[k]
    return RationalMatrix(r, out)


def _shift_poly(poly: np.ndarray, c: complex) -> np.ndarray:
    """Rewrite sum_p poly[p] z^p in powers of w = z - c."""
    n = poly.shape[0]
    out = np.zeros_like(poly)
    for p in range(n):
        for s in range(p + 1):
            out[s] += math.comb(p, s) * c ** (p - s) * poly[p]
    return out


def _unshift_poly(poly_w: np.ndarray, c: complex) -> np.ndarray:
    return _shift_poly(poly_w, -c)


def _poly_prin(
    poly: np.ndarray, loc: complex, stack: np.ndarray, r: int, left: bool
) -> RationalMatrix:
    """Product of a polynomial with a principal part at loc (exact split)."""
    n = poly.shape[0]
    m = stack.shape[0]
    if n == 0 or m == 0:
        return RationalMatrix.zero(r)
    pw = _shift_poly(poly, loc)  # polynomial in w = z - loc
    new_stack = np.zeros((m, r, r), dtype=complex)
    poly_w = np.zeros((n, r, r), dtype=complex)
    for k in range(n):
        for j in range(1, m + 1):
            # w^k * A w^(-j): exponent k - j
            a = pw[k] @ stack[j - 1] if left else stack[j - 1] @ pw[k]
            e = k - j
            if e < 0:
                new_stack[-e - 1] += a
            else:
                poly_w[e] += a
    return RationalMatrix(r, _unshift_poly(poly_w, loc), {loc: new_stack})


def _prin_prin(
    la: complex, sa: np.ndarray, lb: complex, sb: np.ndarray, r: int
) -> RationalMatrix:
    if la == lb:
        out = np.zeros((sa.shape[0] + sb.shape[0], r, r), dtype=complex)
        for i in range(1, sa.shape[0] + 1):
            for j in range(1, sb.shape[0] + 1):
                out[i + j - 1] += sa[i - 1] @ sb[j - 1]
        return RationalMatrix(r, None, {la: out})
    parts: dict = {la: np.zeros((sa.shape[0], r, r), dtype=complex),
                   lb: np.zeros((sb.shape[0], r, r), dtype=complex)}
    for i in range(1, sa.shape[0] + 1):
        for j in range(1, sb.shape[0] + 1):
            ab = sa[i - 1] @ sb[j - 1]
            # A/(z-a)^i * B/(z-b)^j: Taylor of each factor at the other pole.
            tb = binom_taylor(j, la - lb, i)
            for m in range(1, i + 1):
                parts[la][m - 1] += tb[i - m] * ab
            ta = binom_taylor(i, lb - la, j)
            for m in range(1, j + 1):
                parts[lb][m - 1] += ta[j - m] * ab
    return RationalMatrix(r, None, parts)

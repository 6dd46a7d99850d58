"""Truncated Laurent series with explicit validity windows.

A series here is a finite coefficient array plus the half-open exponent
window [val, val + len) on which those coefficients are exact.  Below the
window everything is exactly zero; above it nothing is known, and reading
there raises :class:`~isomon.errors.WindowError`.  Arithmetic shrinks
windows the way truncation error actually propagates, so a silent loss of
precision is impossible by construction.
"""

from __future__ import annotations

from typing import Iterable, Sequence

import numpy as np

from . import backend
from .errors import SingularLeadingError, ValidationError, WindowError

_LEADING_TOL = 1e-12


class LaurentSeries:
    """Scalar truncated Laurent series in one local coordinate.

    ``val`` is the window start, not necessarily the order of vanishing;
    ``coeffs[i]`` multiplies the coordinate to the power ``val + i``.
    """

    __slots__ = ("val", "coeffs")

    def __init__(self, val: int, coeffs: Sequence[complex] | np.ndarray):
        arr = np.asarray(coeffs, dtype=np.complex128)
        if arr.ndim != 1:
            raise ValidationError("coefficient array must be one-dimensional")
        if arr.shape[0] == 0:
            raise WindowError("empty coefficient window")
        self.val = int(val)
        self.coeffs = arr

    @property
    def order(self) -> int:
        """First exponent beyond the known window."""
        return self.val + self.coeffs.shape[0]

    @classmethod
    def constant(cls, c: complex, order: int) -> "LaurentSeries":
        out = np.zeros(order, dtype=np.complex128)
        if order <= 0:
            raise WindowError("constant needs a positive window")
        out[0] = c
        return cls(0, out)

    @classmethod
    def zero(cls, val: int, order: int) -> "LaurentSeries":
        if order <= val:
            raise WindowError("zero series needs a nonempty window")
        return cls(val, np.zeros(order - val, dtype=np.complex128))

    def copy(self) -> "LaurentSeries":
        return LaurentSeries(self.val, self.coeffs.copy())

    def coeff(self, k: int) -> complex:
        if k >= self.order:
            raise WindowError(
                f"exponent {k} outside known window [{self.val}, {self.order})"
            )
        if k < self.val:
            return 0.0 + 0.0j
        return complex(self.coeffs[k - self.val])

    def truncate(self, order: int) -> "LaurentSeries":
        """Restrict the window to exponents below ``order``."""
        if order > self.order:
            raise WindowError(
                f"cannot extend window to {order}, only know up to {self.order}"
            )
        if order <= self.val:
            raise WindowError("truncation would empty the window")
        return LaurentSeries(self.val, self.coeffs[: order - self.val].copy())

    def shift(self, m: int) -> "LaurentSeries":
        """Multiply by the coordinate to the power ``m``."""
        return LaurentSeries(self.val + m, self.coeffs.copy())

    def __add__(self, other: "LaurentSeries") -> "LaurentSeries":
        if not isinstance(other, LaurentSeries):
            return NotImplemented
        val = min(self.val, other.val)
        order = min(self.order, other.order)
        if order <= val:
            raise WindowError("sum has empty window")
        out = np.zeros(order - val, dtype=np.complex128)
        for s in (self, other):
            lo = s.val - val
            hi = min(s.order, order) - val
            if hi > lo:
                out[lo:hi] += s.coeffs[: hi - lo]
        return LaurentSeries(val, out)

    def __neg__(self) -> "LaurentSeries":
        return LaurentSeries(self.val, -self.coeffs)

    def __sub__(self, other: "LaurentSeries") -> "LaurentSeries":
        return self + (-other)

    def __mul__(self, other):
        if isinstance(other, LaurentSeries):
            val = self.val + other.val
            order = min(
                self.val + other.order, other.val + self.order
            )
            if order <= val:
                raise WindowError("product has empty window")
            out = backend.cauchy_mul(self.coeffs, other.coeffs, order - val)
            return LaurentSeries(val, out)
        return LaurentSeries(self.val, self.coeffs * complex(other))

    def __rmul__(self, other) -> "LaurentSeries":
        return LaurentSeries(self.val, self.coeffs * complex(other))

    def inverse(self) -> "LaurentSeries":
        a0 = self.coeffs[0]
        if abs(a0) <= _LEADING_TOL:
            raise SingularLeadingError(
                "cannot invert series whose leading coefficient vanishes"
            )
        n = self.coeffs.shape[0]
        c = np.zeros(n, dtype=np.complex128)
        c[0] = 1.0 / a0
        for k in range(1, n):
            c[k] = -np.dot(self.coeffs[1 : k + 1], c[k - 1 :: -1]) / a0
        return LaurentSeries(-self.val, c)

    def deriv(self) -> "LaurentSeries":
        ks = np.arange(self.val, self.order, dtype=np.complex128)
        return LaurentSeries(self.val - 1, ks * self.coeffs)

    def exp(self) -> "LaurentSeries":
        """Exponential; requires a window contained in exponents >= 0."""
        if self.val < 0:
            raise ValidationError("exp needs a series with no principal part")
        n = self.order
        v = np.zeros(n, dtype=np.complex128)
        v[self.val :] = self.coeffs
        u = np.zeros(n, dtype=np.complex128)
        u[0] = np.exp(v[0])
        for k in range(1, n):
            # k u_k = sum_{j=1}^{k} j v_j u_{k-j}
            js = np.arange(1, k + 1, dtype=np.complex128)
            u[k] = np.dot(js * v[1 : k + 1], u[k - 1 :: -1]) / k
        return LaurentSeries(0, u)

    def eval(self, zeta: complex) -> complex:
        powers = zeta ** np.arange(self.val, self.order, dtype=np.float64)
        return complex(np.dot(self.coeffs, powers))

    def actual_valuation(self, tol: float = 1e-9) -> int:
        """First exponent with coefficient above ``tol``; order if none."""
        idx = np.nonzero(np.abs(self.coeffs) > tol)[0]
        if idx.shape[0] == 0:
            return self.order
        return self.val + int(idx[0])

    def max_abs(self) -> float:
        return float(np.max(np.abs(self.coeffs)))

    def __repr__(self) -> str:  # pragma: no cover
        return f"LaurentSeries(val={self.val}, order={self.order})"


class MatrixSeries:
    """Matrix-valued truncated Laurent series with a shared window."""

    __slots__ = ("val", "coeffs")

    def __init__(self, val: int, coeffs: np.ndarray):
        arr = np.asarray(coeffs, dtype=np.complex128)
        if arr.ndim != 3 or arr.shape[1] != arr.shape[2]:
            raise ValidationError("expected a stack of square matrices")
        if arr.shape[0] == 0:
            raise WindowError("empty coefficient window")
        self.val = int(val)
        self.coeffs = arr

    @property
    def order(self) -> int:
        return self.val + self.coeffs.shape[0]

    @property
    def size(self) -> int:
        return self.coeffs.shape[1]

    @classmethod
    def from_const(cls, M: np.ndarray, order: int) -> "MatrixSeries":
        M = np.asarray(M, dtype=np.complex128)
        if order <= 0:
            raise WindowError("constant needs a positive window")
        out = np.zeros((order, M.shape[0], M.shape[0]), dtype=np.complex128)
        out[0] = M
        return cls(0, out)

    @classmethod
    def zero(cls, val: int, order: int, r: int) -> "MatrixSeries":
        if order <= val:
            raise WindowError("zero series needs a nonempty window")
        return cls(val, np.zeros((order - val, r, r), dtype=np.complex128))

    def copy(self) -> "MatrixSeries":
        return MatrixSeries(self.val, self.coeffs.copy())

    def coeff(self, k: int) -> np.ndarray:
        if k >= self.order:
            raise WindowError(
                f"exponent {k} outside known window [{self.val}, {self.order})"
            )
        r = self.size
        if k < self.val:
            return np.zeros((r, r), dtype=np.complex128)
        return self.coeffs[k - self.val].copy()

    def truncate(self, order: int) -> "MatrixSeries":
        if order > self.order:
            raise WindowError(
                f"cannot extend window to {order}, only know up to {self.order}"
            )
        if order <= self.val:
            raise WindowError("truncation would empty the window")
        return MatrixSeries(self.val, self.coeffs[: order - self.val].copy())

    def shift(self, m: int) -> "MatrixSeries":
        return MatrixSeries(self.val + m, self.coeffs.copy())

    def __add__(self, other: "MatrixSeries") -> "MatrixSeries":
        if not isinstance(other, MatrixSeries):
            return NotImplemented
        val = min(self.val, other.val)
        order = min(self.order, other.order)
        if order <= val:
            raise WindowError("sum has empty window")
        r = self.size
        out = np.zeros((order - val, r, r), dtype=np.complex128)
        for s in (self, other):
            lo = s.val - val
            hi = min(s.order, order) - val
            if hi > lo:
                out[lo:hi] += s.coeffs[: hi - lo]
        return MatrixSeries(val, out)

    def __neg__(self) -> "MatrixSeries":
        return MatrixSeries(self.val, -self.coeffs)

    def __sub__(self, other: "MatrixSeries") -> "MatrixSeries":
        return self + (-other)

    def __matmul__(self, other: "MatrixSeries") -> "MatrixSeries":
        val = self.val + other.val
        order = min(self.val + other.order, other.val + self.order)
        if order <= val:
            raise WindowError("product has empty window")
        out = backend.mat_cauchy_mul(self.coeffs, other.coeffs, order - val)
        return MatrixSeries(val, out)

    def __mul__(self, other) -> "MatrixSeries":
        if isinstance(other, LaurentSeries):
            val = self.val + other.val
            order = min(self.val + other.order, other.val + self.order)
            if order <= val:
                raise WindowError("product has empty window")
            n = order - val
            r = self.size
            out = np.zeros((n, r, r), dtype=np.complex128)
            na = self.coeffs.shape[0]
            nb = other.coeffs.shape[0]
            for k in range(n):
                lo = max(0, k - nb + 1)
                hi = min(na - 1, k)
                for i in range(lo, hi + 1):
                    out[k] += self.coeffs[i] * other.coeffs[k - i]
            return MatrixSeries(val, out)
        return MatrixSeries(self.val, self.coeffs * complex(other))

    def __rmul__(self, other) -> "MatrixSeries":
        return self.__mul__(other)

    def left_const(self, G: np.ndarray) -> "MatrixSeries":
        return MatrixSeries(self.val, np.einsum("ab,kbc->kac", G, self.coeffs))

    def right_const(self, G: np.ndarray) -> "MatrixSeries":
        return MatrixSeries(self.val, np.einsum("kab,bc->kac", self.coeffs, G))

    def inverse(self) -> "MatrixSeries":
        A0 = self.coeffs[0]
        if abs(np.linalg.det(A0)) <= _LEADING_TOL:
            raise SingularLeadingError(
                "cannot invert series whose leading matrix is singular"
            )
        A0inv = np.linalg.inv(A0)
        n = self.coeffs.shape[0]
        r = self.size
        B = np.zeros((n, r, r), dtype=np.complex128)
        B[0] = A0inv
        for k in range(1, n):
            acc = np.zeros((r, r), dtype=np.complex128)
            for j in range(1, k + 1):
                acc += self.coeffs[j] @ B[k - j]
            B[k] = -A0inv @ acc
        return MatrixSeries(-self.val, B)

    def deriv(self) -> "MatrixSeries":
        ks = np.arange(self.val, self.order, dtype=np.complex128)
        return MatrixSeries(self.val - 1, ks[:, None, None] * self.coeffs)

    def trace(self) -> LaurentSeries:
        return LaurentSeries(self.val, np.trace(self.coeffs, axis1=1, axis2=2))

    def entry(self, a: int, b: int) -> LaurentSeries:
        return LaurentSeries(self.val, self.coeffs[:, a, b].copy())

    def transpose(self) -> "MatrixSeries":
        return MatrixSeries(self.val, np.transpose(self.coeffs, (0, 2, 1)))

    def eval(self, zeta: complex) -> np.ndarray:
        powers = zeta ** np.arange(self.val, self.order, dtype=np.float64)
        return np.einsum("k,kab->ab", powers.astype(np.complex128), self.coeffs)

    def max_abs(self) -> float:
        return float(np.max(np.abs(self.coeffs)))

    def __repr__(self) -> str:  # pragma: no cover
        return (
            f"MatrixSeries(val={self.val}, order={self.order}, r={self.size})"
        )


def diagonal_series(entries: Iterable[LaurentSeries]) -> MatrixSeries:
    """Assemble a diagonal matrix series on the common window."""
    items = list(entries)
    val = min(s.val for s in items)
    order = min(s.order for s in items)
    if order <= val:
        raise WindowError("diagonal assembly has empty window")
    r = len(items)
    out = np.zeros((order - val, r, r), dtype=np.complex128)
    for a, s in enumerate(items):
        lo = s.val - val
        hi = min(s.order, order) - val
        out[lo:hi, a, a] = s.coeffs[: hi - lo]
    return MatrixSeries(val, out)

"""Built-in example systems with their known closed forms.

Each preset packages a Lax matrix built from model coordinates, a registry
of named composite flows (weighted elementary parameters), and whatever
printed reference data exists for cross-checking: deformation matrices,
reduced Hamiltonians, scalar-equation constants.  A structural dimension
check runs at construction: the number of non-central model coordinates
must equal r(r-1)(d_inf + sum d_nu + N - 1).
"""

from __future__ import annotations

import cmath

import numpy as np

from .errors import ValidationError
from .lax import INF, FinitePole, InfinityPart, LaxMatrix
from .rational import RationalMatrix

SIGMA3 = np.diag([1.0, -1.0]).astype(complex)
SIGMA_P = np.array([[0.0, 1.0], [0.0, 0.0]], dtype=complex)
SIGMA_M = np.array([[0.0, 0.0], [1.0, 0.0]], dtype=complex)
SQ2 = float(np.sqrt(2.0))


class PresetSystem:
    def __init__(self, name: str, lax: LaxMatrix, coords: dict,
                 flows: dict, free_coords: int) -> None:
        self.name = name
        self.lax = lax
        self.coords = coords
        self.flows = flows
        self.free_coords = free_coords
        self._dimension_check()

    def _dimension_check(self) -> None:
        lx = self.lax
        r = lx.r
        two_k = r * (r - 1) * (lx.infinity.d + sum(p.d for p in lx.poles)
                               + len(lx.poles) - 1)
        if self.free_coords != two_k:
            raise ValidationError(
                f"{self.name}: {self.free_coords} free coordinates, "
                f"phase-space count expects {two_k}"
            )

    def flow_params(self, flow: str):
        try:
            return self.flows[flow]
        except KeyError:
            raise ValidationError(
                f"{self.name} has no flow {flow!r}; "
                f"known: {sorted(self.flows)}"
            ) from None


# -- second Painleve, lowest member ---------------------------------------------


def pii_alpha(a: complex) -> complex:
    """Constant term of the scalar second-order reduction u'' = 2u^3 + tu + alpha.

    Derived from the reduced first-order system; see README for why this
    differs from a published variant by 1.
    """
    return a + 0.5


def pii_hamiltonian(x1, x2, y1, y2, t) -> complex:
    return 0.5 * (x2**2 * y1**2 + t * x2 * y1 - 2 * x1 * y2)


def pii_reduced_rhs(t: float, uv: np.ndarray, a: complex) -> np.ndarray:
    u, v = uv
    return np.array([v + u**2 + t / 2, -2 * u * v + a], dtype=complex)


def _pii_raw(coords: dict):
    if "x1" in coords:
        x1, x2 = coords["x1"], coords["x2"]
        y1, y2 = coords["y1"], coords["y2"]
    else:
        u, v = coords["u"], coords["v"]
        a, w = coords["a"], coords.get("w", 0.0)
        ew = cmath.exp(w)
        x1, x2 = u * ew, ew
        y1, y2 = v / ew, (a - u * v) / ew
    return x1, x2, y1, y2, coords.get("t", 0.0)


def pii_matrices(x1, x2, y1, y2, t):
    A1 = np.array([[0.0, -2 * y1], [x2, 0.0]], dtype=complex)
    A0 = np.array([[x2 * y1 + t / 2, -2 * y2],
                   [x1, -(x2 * y1 + t / 2)]], dtype=complex)
    return A0, A1


def pii_read_coords(lax: LaxMatrix):
    """Invert the coefficient map: (x1, x2, y1, y2, t) from the stacks."""
    A0 = -lax.infinity.coeffs[0]
    A1 = -lax.infinity.coeffs[1]
    x2, y1 = A1[1, 0], -A1[0, 1] / 2
    x1, y2 = A0[1, 0], -A0[0, 1] / 2
    t = 2 * (A0[0, 0] - x2 * y1)
    return x1, x2, y1, y2, t


def pii_printed_deformation(x1, x2, y1, y2, t) -> RationalMatrix:
    const = np.array([[0.0, -y1], [x2 / 2, 0.0]], dtype=complex)
    return RationalMatrix(2, poly=np.stack([const, SIGMA3 / 2]))


def _make_pii(coords: dict) -> PresetSystem:
    x1, x2, y1, y2, t = _pii_raw(coords)
    A0, A1 = pii_matrices(x1, x2, y1, y2, t)
    lax = LaxMatrix([], InfinityPart(np.stack([-A0, -A1, -SIGMA3]), r=2))
    flows = {"t": [(0.5, ("t", INF, 1, 0)), (-0.5, ("t", INF, 1, 1))]}
    norm = {"x1": x1, "x2": x2, "y1": y1, "y2": y2, "t": t}
    return PresetSystem("pii", lax, norm, flows, free_coords=4)


# -- second Painleve, next member of the hierarchy -------------------------------


def pii2_raw(coords: dict):
    if "x1" in coords:
        keys = ("x1", "x2", "x3", "y1", "y2", "y3")
        x1, x2, x3, y1, y2, y3 = (coords[k] for k in keys)
    else:
        u1, u2 = coords["u1"], coords["u2"]
        v1, v2 = coords["v1"], coords["v2"]
        a, w = coords["a"], coords.get("w", 0.0)
        ew = cmath.exp(w)
        x1, x2, x3 = u1 * ew, u2 * ew, ew
        y1, y2 = v1 / ew, v2 / ew
        y3 = (a - u1 * v1 - u2 * v2) / ew
    return x1, x2, x3, y1, y2, y3, coords.get("t1", 0.0), coords.get("t2", 0.0)


def pii2_reduced(x1, x2, x3, y1, y2, y3):
    u1, u2 = x1 / x3, x2 / x3
    v1, v2 = y1 * x3, y2 * x3
    a = x1 * y1 + x2 * y2 + x3 * y3
    return u1, u2, v1, v2, a


def pii2_matrices(x1, x2, x3, y1, y2, y3, t1, t2):
    c3 = SIGMA3.copy()
    c2 = -SQ2 * x1 * SIGMA_P - SQ2 * y2 * SIGMA_M
    c1 = (t2 - x1 * y2) * SIGMA3 - SQ2 * x3 * SIGMA_P - SQ2 * y3 * SIGMA_M
    c0 = (-x1 * y3 - x3 * y2 + t1) * SIGMA3 \
        - SQ2 * (x2 + x1 * t2 / 2 - y2 * x1**2 / 4) * SIGMA_P \
        - SQ2 * (y1 + y2 * t2 / 2 - x1 * y2**2 / 4) * SIGMA_M
    return c0, c1, c2, c3


def pii2_printed_u1(x1, y2) -> RationalMatrix:
    const = -SQ2 * x1 * SIGMA_P - SQ2 * y2 * SIGMA_M
    return RationalMatrix(2, poly=np.stack([const, SIGMA3]))


def pii2_printed_u2(x1, x3, y2, y3) -> RationalMatrix:
    c0 = 0.5 * (-x1 * y2 * SIGMA3 - SQ2 * x3 * SIGMA_P - SQ2 * y3 * SIGMA_M)
    c1 = 0.5 * (-SQ2 * x1 * SIGMA_P - SQ2 * y2 * SIGMA_M)
    c2 = 0.5 * SIGMA3
    return RationalMatrix(2, poly=np.stack([c0, c1, c2]))


def pii2_printed_h1(u1, u2, v1, v2, a, t1, t2) -> complex:
    return ((1.5 * v2 * u1**2 - t2 * u1 + 2 * u2) * a
            - 2 * t1 * u1 * v2
            + (u1**2 * v1 + u1 * u2 * v2 - v2) * t2
            - 1.5 * u1**3 * v1 * v2
            - 1.5 * u1**2 * u2 * v2**2
            - 2 * u1 * u2 * v1
            + 1.5 * u1 * v2**2
            - 2 * u2**2 * v2 + 2 * v1)


def pii2_printed_h2(u1, u2, v1, v2, a, t1, t2) -> complex:
    s = u1**2 * v1 + u1 * u2 * v2 - v2
    return (0.5 * a**2 * u1**2
            + (-u1 * t1 - t2 - u1 * s) * a
            + s * t1
            + 0.25 * t2**2 * u1 * v2
            + (-0.25 * v2**2 * u1**2 + 0.5 * u1 * v1 + 0.5 * u2 * v2) * t2
            + 0.5 * u1**4 * v1**2
            + u1**3 * u2 * v1 * v2
            + v2**3 * u1**3 / 16
            + 0.5 * u1**2 * u2**2 * v2**2
            - 1.25 * u1**2 * v1 * v2
            - 1.25 * u1 * u2 * v2**2
            + 0.5 * v2**2 + u2 * v1)


def _make_pii2(coords: dict) -> PresetSystem:
    x1, x2, x3, y1, y2, y3, t1, t2 = pii2_raw(coords)
    c0, c1, c2, c3 = pii2_matrices(x1, x2, x3, y1, y2, y3, t1, t2)
    lax = LaxMatrix([], InfinityPart(np.stack([-c0, -c1, -c2, -c3]), r=2))
    flows = {
        "t1": [(1.0, ("t", INF, 1, 0)), (-1.0, ("t", INF, 1, 1))],
        "t2": [(1.0, ("t", INF, 2, 0)), (-1.0, ("t", INF, 2, 1))],
    }
    norm = {"x1": x1, "x2": x2, "x3": x3, "y1": y1, "y2": y2, "y3": y3,
            "t1": t1, "t2": t2}
    return PresetSystem("pii2", lax, norm, flows, free_coords=6)


# -- Fuchsian with moving poles ---------------------------------------------------


def _as_complex_matrix(m) -> np.ndarray:
    arr = np.asarray(m)
    if arr.dtype == object or (arr.ndim == 3 and arr.shape[-1] == 2
                               and not np.iscomplexobj(arr)):
        arr = arr[..., 0] + 1j * arr[..., 1]
    return arr.astype(complex)


def _make_schlesinger(coords: dict) -> PresetSystem:
    locs = [complex(*c) if isinstance(c, (list, tuple)) else complex(c)
            for c in coords["locs"]]
    residues = [_as_complex_matrix(m) for m in coords["residues"]]
    if len(locs) != len(residues):
        raise ValidationError("locs and residues length mismatch")
    r = residues[0].shape[0]
    poles = [FinitePole(c, m[None]) for c, m in zip(locs, residues)]
    lax = LaxMatrix(poles, InfinityPart(np.zeros((0, r, r)), r=r))
    flows = {f"c{nu + 1}": [(1.0, ("c", nu))] for nu in range(len(locs))}
    n = len(locs)
    # one global conjugation is not fixed by the shape, so quotient r(r-1)
    free = n * r * r - n * r - r * (r - 1)
    return PresetSystem("schlesinger", lax,
                        {"locs": locs, "residues": residues}, flows, free)


def schlesinger_pole_hamiltonian(lax: LaxMatrix, nu: int) -> complex:
    """Closed form sum_mu tr(L_nu L_mu) / (c_nu - c_mu)."""
    out = 0.0 + 0.0j
    ln = lax.poles[nu].coeffs[0]
    cn = lax.poles[nu].loc
    for mu, pole in enumerate(lax.poles):
        if mu == nu:
            continue
        out += np.trace(ln @ pole.coeffs[0]) / (cn - pole.loc)
    return complex(out)


# -- constant leading term plus Fuchsian poles ------------------------------------


def _make_fuchsian_const(coords: dict) -> PresetSystem:
    leading = [complex(*c) if isinstance(c, (list, tuple)) else complex(c)
               for c in coords["leading"]]
    locs = [complex(*c) if isinstance(c, (list, tuple)) else complex(c)
            for c in coords["locs"]]
    residues = [_as_complex_matrix(m) for m in coords["residues"]]
    r = len(leading)
    poles = [FinitePole(c, m[None]) for c, m in zip(locs, residues)]
    b0 = -np.diag(np.array(leading, dtype=complex))
    lax = LaxMatrix(poles, InfinityPart(b0[None], r=r))
    flows = {f"K{a + 1}": [(1.0, ("t", INF, 1, a))] for a in range(r)}
    for nu in range(len(locs)):
        flows[f"c{nu + 1}"] = [(1.0, ("c", nu))]
    n = len(locs)
    free = n * r * r - n * r
    return PresetSystem("fuchsian-const", lax,
                        {"leading": leading, "locs": locs,
                         "residues": residues}, flows, free)


def fuchsian_const_printed_u(lax: LaxMatrix, a: int) -> RationalMatrix:
    """z E_a plus the first projector correction, in closed form."""
    r = lax.r
    lead = -lax.infinity.coeffs[0]
    tvals = np.diag(lead)
    m1 = sum(pole.coeffs[0] for pole in lax.poles)
    ea = np.zeros((r, r), dtype=complex)
    ea[a, a] = 1.0
    w = np.zeros((r, r), dtype=complex)
    for b in range(r):
        if b == a:
            continue
        eb = np.zeros((r, r), dtype=complex)
        eb[b, b] = 1.0
        w += (ea @ m1 @ eb + eb @ m1 @ ea) / (tvals[a] - tvals[b])
    return RationalMatrix(r, poly=np.stack([w, ea]))


_BUILDERS = {
    "pii": _make_pii,
    "pii2": _make_pii2,
    "schlesinger": _make_schlesinger,
    "fuchsian-const": _make_fuchsian_const,
}


def preset_names() -> list:
    return sorted(_BUILDERS)


def make_preset(name: str, coordinates: dict) -> PresetSystem:
    try:
        builder = _BUILDERS[name]
    except KeyError:
        raise ValidationError(
            f"unknown preset {name!r}; known: {preset_names()}"
        ) from None
    return builder(dict(coordinates))

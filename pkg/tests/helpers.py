"""Shared builders and independent oracles for the test suite.

The bracket oracle here is written directly from the generating relation on
coefficient entries and never calls into the package's contraction code, so
agreement between the two is a real check, not a tautology.
"""

import numpy as np

from isomon.lax import FinitePole, InfinityPart, LaxMatrix
from isomon.poisson import LoopElement
from isomon.series import MatrixSeries


def crand(rng, *shape):
    out = rng.standard_normal(shape) + 1j * rng.standard_normal(shape)
    return complex(out) if not shape else out


def random_lax(rng, r, pole_ds, dinf, scale=0.5, spread=3.0):
    """Random system with well-separated poles and split leading spectra."""
    poles = []
    for k, d in enumerate(pole_ds):
        loc = spread * k + 0.3 * crand(rng)
        coeffs = scale * crand(rng, d + 1, r, r)
        # keep the top-order spectrum simple so branch machinery stays sane
        coeffs[d] += scale * np.diag(np.arange(1, r + 1))
        poles.append(FinitePole(complex(loc), coeffs))
    if dinf:
        inf_coeffs = scale * crand(rng, dinf, r, r)
        # the top polynomial coefficient is diagonal with split entries
        inf_coeffs[dinf - 1] = scale * np.diag(
            np.arange(1, r + 1) + 0.2 * crand(rng, r))
    else:
        inf_coeffs = np.zeros((0, r, r), dtype=complex)
    return LaxMatrix(poles, InfinityPart(inf_coeffs, r=r))


def random_shapes(rng, n):
    """Shapes with r <= 3, at most two finite poles, pole orders <= 3."""
    shapes = []
    while len(shapes) < n:
        r = int(rng.integers(2, 4))
        npoles = int(rng.integers(0, 3))
        ds = [int(rng.integers(0, 3)) for _ in range(npoles)]
        dinf = int(rng.integers(0, 3))
        if npoles == 0 and dinf == 0:
            continue
        shapes.append((r, ds, dinf))
    return shapes


def all_blocks(lax):
    """Every stored coefficient entry, tagged like bracket_coefficients."""
    out = []
    for nu, pole in enumerate(lax.poles):
        for alpha in range(1, pole.d + 2):
            for a in range(lax.r):
                for b in range(lax.r):
                    out.append(("pole", nu, alpha, a, b))
    for p in range(lax.infinity.d):
        for a in range(lax.r):
            for b in range(lax.r):
                out.append(("inf", p, a, b))
    return out


def block_value(lax, block):
    if block[0] == "pole":
        _, nu, alpha, a, b = block
        return complex(lax.poles[nu].coeffs[alpha - 1][a, b])
    _, p, a, b = block
    return complex(lax.infinity.coeffs[p][a, b])


def oracle_bracket(lax, first, second):
    """Generating relation, written out fresh: within one finite block
    {x^nu_alpha[a,b], x^nu_beta[c,d]} = -x^nu_{alpha+beta-1}[a,d] delta_{cb}
                                        +x^nu_{alpha+beta-1}[c,b] delta_{ad}
    (zero past the top order); the polynomial block uses degree p+q+1 with
    the same right side; everything else commutes."""
    if first[0] != second[0]:
        return 0.0j
    if first[0] == "pole":
        _, nu, alpha, a, b = first
        _, mu, beta, c, d = second
        if nu != mu:
            return 0.0j
        gamma = alpha + beta - 1
        if gamma > lax.poles[nu].d + 1:
            return 0.0j
        x = lax.poles[nu].coeffs[gamma - 1]
    else:
        _, p, a, b = first
        _, q, c, d = second
        gamma = p + q + 1
        if gamma > lax.infinity.d - 1:
            return 0.0j
        x = lax.infinity.coeffs[gamma]
    val = 0.0j
    if c == b:
        val -= x[a, d]
    if a == d:
        val += x[c, b]
    return val


def entry_element(lax, block):
    """Loop element whose pairing is the single coefficient entry."""
    r = lax.r
    if block[0] == "pole":
        _, nu, alpha, a, b = block
        jet = np.zeros((lax.poles[nu].d + 1, r, r), dtype=complex)
        jet[alpha - 1, b, a] = 1.0
        return LoopElement(lax, {nu: MatrixSeries(0, jet)})
    _, p, a, b = block
    jet = np.zeros((lax.infinity.d, r, r), dtype=complex)
    jet[p, b, a] = -1.0
    return LoopElement(lax, {}, MatrixSeries(1, jet))


def random_loop_element(lax, rng, width=2):
    """Random linear observable with full dual windows at every chart."""
    fins = {}
    for nu, pole in enumerate(lax.poles):
        fins[nu] = MatrixSeries(0, crand(rng, pole.d + width, lax.r, lax.r))
    inf_jet = None
    if lax.infinity.d:
        inf_jet = MatrixSeries(1, crand(rng, lax.infinity.d + width,
                                        lax.r, lax.r))
    return LoopElement(lax, fins, inf_jet)


def lax_allclose(a, b, tol):
    if len(a.poles) != len(b.poles):
        return False
    gap = 0.0
    for pa, pb in zip(a.poles, b.poles):
        gap = max(gap, abs(pa.loc - pb.loc),
                  float(np.max(np.abs(pa.coeffs - pb.coeffs))))
    if a.infinity.d or b.infinity.d:
        gap = max(gap, float(np.max(np.abs(a.infinity.coeffs
                                           - b.infinity.coeffs))))
    return gap <= tol

"""Exception hierarchy.

Every failure mode that callers are expected to branch on gets its own class;
numerical aborts carry enough state to diagnose the run that died.
"""

from __future__ import annotations


class IsomonError(Exception):
    """Base class for all package errors."""


class ValidationError(IsomonError):
    """A system violates a structural precondition (shape, regularity, ...)."""


class WindowError(IsomonError):
    """Truncated-series window misuse: empty overlap, out-of-window read."""


class SingularLeadingError(IsomonError):
    """Inversion attempted on a series whose leading coefficient vanishes."""


class DegenerateSpectrumError(IsomonError):
    """Leading matrix coefficient has (numerically) repeated eigenvalues."""


class ResonanceError(IsomonError):
    """Fuchsian exponents differ by a nonzero integer; recursion denominator
    vanished."""


class GradientPairingError(IsomonError):
    """gradient_loop result failed its pairing verification."""


class PathError(IsomonError):
    """Integration path violates pole clearance or is malformed."""


class NumericalAbortError(IsomonError):
    """Adaptive integration died (step underflow, blow-up, guard trip).

    Carries the last accepted state so callers can report where.
    """

    def __init__(self, message: str, last_t: float | None = None, last_state=None):
        super().__init__(message)
        self.last_t = last_t
        self.last_state = last_state


class CertificateError(IsomonError):
    """A certificate exceeded its tolerance."""


class InputError(IsomonError):
    """Malformed descriptor / CLI input."""

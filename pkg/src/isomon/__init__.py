"""Rational Lax matrices with prescribed pole structure: local invariants,
coefficient Poisson brackets, commuting deformation flows, monodromy
invariance certificates, and tau function accumulation.

The compiled transport kernel is used when available; set
ISOMON_PURE_PYTHON=1 to force the pure NumPy fallback.
"""

from .backend import BACKEND
from .descriptor import (descriptor_to_lax, lax_to_descriptor, load_system,
                         load_system_file, preset_descriptor)
from .errors import (CertificateError, DegenerateSpectrumError,
                     GradientPairingError, InputError, IsomonError,
                     NumericalAbortError, PathError, ResonanceError,
                     SingularLeadingError, ValidationError, WindowError)
from .flows import (FlowResult, deformation_matrix, flow_hamiltonian,
                    integrate_flow, vector_field)
from .formal import FormalSolution, deformation_v, formal_solution
from .lax import INF, FinitePole, InfinityPart, LaxMatrix
from .monodromy import (MonodromySet, invariance_certificate, loop_waypoints,
                        monodromy_set, residue_determinant_check, transport)
from .poisson import (LoopElement, bracket_coefficients, bracket_functions,
                      gradient_loop, hamiltonian_deformation)
from .presets import PresetSystem, make_preset, pii_alpha, preset_names
from .rational import RationalMatrix
from .series import LaurentSeries, MatrixSeries
from .spectral import (InvariantTable, eigen_expansions, extract_invariants,
                       root_certificate)
from .tau import (TauSample, closedness_certificate,
                  schlesinger_two_pole_log_tau, tau_accumulate)

__version__ = "0.1.0"

__all__ = [
    "BACKEND",
    "CertificateError",
    "DegenerateSpectrumError",
    "FinitePole",
    "FlowResult",
    "FormalSolution",
    "GradientPairingError",
    "INF",
    "InfinityPart",
    "InputError",
    "InvariantTable",
    "IsomonError",
    "LaurentSeries",
    "LaxMatrix",
    "LoopElement",
    "MatrixSeries",
    "MonodromySet",
    "NumericalAbortError",
    "PathError",
    "PresetSystem",
    "RationalMatrix",
    "ResonanceError",
    "SingularLeadingError",
    "TauSample",
    "ValidationError",
    "WindowError",
    "bracket_coefficients",
    "bracket_functions",
    "closedness_certificate",
    "deformation_matrix",
    "deformation_v",
    "descriptor_to_lax",
    "eigen_expansions",
    "extract_invariants",
    "flow_hamiltonian",
    "formal_solution",
    "gradient_loop",
    "hamiltonian_deformation",
    "integrate_flow",
    "invariance_certificate",
    "lax_to_descriptor",
    "load_system",
    "load_system_file",
    "loop_waypoints",
    "make_preset",
    "monodromy_set",
    "pii_alpha",
    "preset_descriptor",
    "preset_names",
    "residue_determinant_check",
    "root_certificate",
    "schlesinger_two_pole_log_tau",
    "tau_accumulate",
    "transport",
    "vector_field",
    "__version__",
]

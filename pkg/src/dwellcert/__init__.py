"""Certified bounds on the Lyapunov exponent of switching systems with dwell time."""

__version__ = "0.1.0"

from .errors import DwellCertError  # noqa: E402
from .system import SwitchingSystem, build_discretization, validate_system  # noqa: E402
from .cycles import find_leading_cycle, gripenberg_search, enumerate_cycles, to_dwell_notation  # noqa: E402
from .polytope import Multinorm, PolytopeNorm, Variant, norm_eval  # noqa: E402
from .ipa import IpaConfig, run_ipa, verify_certificate  # noqa: E402
from .bounds import BoundsReport, Verdict, lyapunov_bounds  # noqa: E402
from .pipeline import analyze  # noqa: E402

__all__ = [
    "DwellCertError",
    "SwitchingSystem",
    "build_discretization",
    "validate_system",
    "find_leading_cycle",
    "gripenberg_search",
    "enumerate_cycles",
    "to_dwell_notation",
    "Multinorm",
    "PolytopeNorm",
    "Variant",
    "norm_eval",
    "IpaConfig",
    "run_ipa",
    "verify_certificate",
    "BoundsReport",
    "Verdict",
    "lyapunov_bounds",
    "analyze",
]

"""Exact and error-tracked verification of convexity, threshold and pairwise claims
for the sequences ``g_l``, ``h_l``, ``d_l`` and the distribution ``Q_l``."""

from .finite_difference import verify_theorem_1_1, verify_theorem_1_1_range
from .functions import EvalPoint, FuncValue, Q, d, evaluate, expected_d, g, g_ratio, h
from .kernel import EXACT, DomainError, NumericMode, Sign, TrackedReal, certify_sign
from .pairwise import table_4_1, verify_pairwise_range
from .report import Status, VerificationReport
from .threshold import compute_a, verify_threshold

__version__ = "0.1.0"

__all__ = [
    "EXACT",
    "DomainError",
    "EvalPoint",
    "FuncValue",
    "NumericMode",
    "Q",
    "Sign",
    "Status",
    "TrackedReal",
    "VerificationReport",
    "certify_sign",
    "compute_a",
    "d",
    "evaluate",
    "expected_d",
    "g",
    "g_ratio",
    "h",
    "table_4_1",
    "verify_pairwise_range",
    "verify_theorem_1_1",
    "verify_theorem_1_1_range",
    "verify_threshold",
]

"""Common certainty, agreement and disagreement for quantum and classical agents."""

from .epistemics import Kind, classify, cond_prob, run_recursion
from .errors import AgreementError
from .linalg import TOL
from .quantum_model import HilbertFactorization, Measurement, Scenario
from .scenarios import EXAMPLES, example1, example2

__all__ = ["AgreementError", "EXAMPLES", "HilbertFactorization", "Kind", "Measurement",
           "Scenario", "TOL", "classify", "cond_prob", "example1", "example2", "run_recursion"]
__version__ = "0.1.0"

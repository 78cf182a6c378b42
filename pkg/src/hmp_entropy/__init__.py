"""Entropy rate of the binary symmetric hidden Markov process.

Three routes: exact finite-N enumeration with upper and lower bounds
(:mod:`.exact`), the closed-form small-noise series (:mod:`.series`), and an
exact symbolic re-derivation of the series coefficients (:mod:`.expansion`).
"""

__version__ = "0.1.0"

from .model import ProcessParams  # noqa: E402

__all__ = ["ProcessParams", "__version__"]

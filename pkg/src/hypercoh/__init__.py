"""Hypercomplex-aware undersampling diagnostics for multidimensional NMR-style acquisition.

The package provides the commutative hypercomplex algebra and its Fourier
transform, generators for every component-subset sampling schedule class,
the end-to-end acquisition operator, Gram-block coherence and point-spread
diagnostics, mixed-norm sparse recovery, and a seeded Monte Carlo harness
with statistical post-processing.
"""

__version__ = "0.1.0"

from .algebra import (
    GeneratorExponent,
    HyperComplex,
    conjugate,
    exp_generator,
    from_factors,
    inverse_factorizable,
    matrix_iso,
    modulus,
    multiply,
    vector_iso,
)
from .transform import HyperArray, forward, inverse, orthogonality_check

__all__ = [
    "__version__",
    "HyperComplex",
    "GeneratorExponent",
    "multiply",
    "conjugate",
    "modulus",
    "from_factors",
    "inverse_factorizable",
    "vector_iso",
    "matrix_iso",
    "exp_generator",
    "HyperArray",
    "forward",
    "inverse",
    "orthogonality_check",
]

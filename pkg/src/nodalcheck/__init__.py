"""Validated homology computation for nodal domains of random periodic fields.

The package pipeline: draw a random Fourier series (``fields``), sample
its signs on an equidistant grid and form cubical approximations of the
nodal domains (``cubical``), compute Betti numbers (``homology``),
certify the approximation by forbidden-sign-pattern analysis on dyadic
refinements (``admissibility``), compare empirical success rates with
closed-form probability bounds (``bounds``, ``experiments``), and probe
the underlying Gaussian orthant asymptotics (``orthant``).
"""

__version__ = "0.1.0"

from . import (admissibility, bounds, cubical, experiments, fields,
               homology, orthant)

__all__ = [
    "__version__",
    "admissibility",
    "bounds",
    "cubical",
    "experiments",
    "fields",
    "homology",
    "orthant",
]

"""Level-spacing statistics toolkit.

Seeded spectra from the classical Gaussian ensembles, Poisson level sequences
and a disordered XXZ chain; spectrum unfolding; pooled k-th nearest-neighbor
spacing statistics and number variance; analytic spacing surmises; and a
histogram goodness-of-fit measure.  The command line entry point
(``levelstats``) drives reproducible sampling/analysis campaigns.
"""

__version__ = "0.1.0"

from .errors import LevelstatsError, NumericalError, ValidationError

__all__ = [
    "LevelstatsError",
    "NumericalError",
    "ValidationError",
    "__version__",
]

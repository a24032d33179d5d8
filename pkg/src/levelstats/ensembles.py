"""Seeded spectrum samplers.

Gaussian orthogonal/unitary/symplectic matrices, scaled so every class has a
limiting semicircle of radius sqrt(2 N) with N the number of delivered levels
(distinct levels for the symplectic class, whose doublets are collapsed), plus
a Poisson level sequence with unit-mean gaps as the uncorrelated benchmark.

Small-matrix reference distributions: spectra of (k+1)-dimensional matrices
give the span E_{k+1} - E_1 whose density the power-law surmises approximate;
sampling those directly provides a Monte Carlo check that needs no unfolding.
"""

from dataclasses import dataclass, field

import numpy as np

from .errors import NumericalError, ValidationError
from .seeding import check_seed, realization_rng

__all__ = [
    "ENSEMBLES",
    "EnsembleSpec",
    "SpectrumSample",
    "sample_goe",
    "sample_gue",
    "sample_gse",
    "sample_poisson_levels",
    "sample_spectrum",
    "small_matrix_oracle",
]

ENSEMBLES = ("goe", "gue", "gse", "poisson")
_BETA_OF = {"goe": 1, "gue": 2, "gse": 4}


@dataclass(frozen=True)
class EnsembleSpec:
    """Which ensemble to draw from, how many levels, and the master seed."""

    ensemble: str
    dim: int  # delivered levels; the symplectic class diagonalizes 2*dim
    seed: int

    def __post_init__(self):
        if self.ensemble not in ENSEMBLES:
            raise ValidationError(f"ensemble must be one of {ENSEMBLES}, got {self.ensemble!r}")
        if self.dim < 2:
            raise ValidationError(f"dim must be >= 2, got {self.dim}")
        check_seed(self.seed)

    @property
    def beta(self):
        return _BETA_OF.get(self.ensemble)


@dataclass(eq=False)
class SpectrumSample:
    """Sorted eigenvalues of one realization plus its provenance."""

    spec: object  # EnsembleSpec or a model spec exposing .dim and .seed
    realization_index: int
    levels: np.ndarray = field(repr=False)

    def __post_init__(self):
        self.levels = np.asarray(self.levels, dtype=float)
        if self.levels.ndim != 1:
            raise ValidationError("levels must be one-dimensional")
        if np.any(np.diff(self.levels) < 0):
            raise ValidationError("levels must be sorted ascending")
        expected = getattr(self.spec, "dim", None)
        if expected is not None and self.levels.size != expected:
            raise ValidationError(
                f"expected {expected} levels, got {self.levels.size}"
            )


def _goe_matrix(rng, dim):
    m = rng.standard_normal((dim, dim))
    return 0.5 * (m + m.T)


def _gue_matrix(rng, dim):
    m = (rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim))) / np.sqrt(2.0)
    return 0.5 * (m + m.conj().T)


def _gse_matrix(rng, n_distinct):
    # Project a 2N x 2N Hermitian draw onto its quaternion-self-dual part
    # [[A, B], [-conj(B), conj(A)]]: A stays Hermitian, B is antisymmetric,
    # and every eigenvalue appears as a Kramers doublet.
    h = _gue_matrix(rng, 2 * n_distinct) * np.sqrt(2.0)
    n = n_distinct
    a = 0.5 * (h[:n, :n] + h[n:, n:].T)
    b = 0.5 * (h[:n, n:] - h[:n, n:].T)
    # the unscaled block matrix has radius sqrt(2 * 2n); shrink by sqrt(2) so
    # the distinct levels fill sqrt(2 * n_distinct) like the other classes
    return np.block([[a, b], [-b.conj(), a.conj()]]) / np.sqrt(2.0)


def sample_goe(dim, seed, realization_index=0):
    """Orthogonal-class spectrum: eigenvalues of (M + M^T)/2, M iid N(0,1).

    Diagonal variance 1, off-diagonal 1/2; semicircle radius sqrt(2 dim).
    """
    spec = EnsembleSpec("goe", dim, seed)
    rng = realization_rng(seed, realization_index)
    levels = np.linalg.eigvalsh(_goe_matrix(rng, dim))
    return SpectrumSample(spec, realization_index, levels)


def sample_gue(dim, seed, realization_index=0):
    """Unitary-class spectrum, off-diagonal complex variance 1/2 total."""
    spec = EnsembleSpec("gue", dim, seed)
    rng = realization_rng(seed, realization_index)
    levels = np.linalg.eigvalsh(_gue_matrix(rng, dim))
    return SpectrumSample(spec, realization_index, levels)


def sample_gse(n_distinct, seed, realization_index=0, pairing_tol=1e-8):
    """Symplectic-class spectrum, one level per Kramers doublet.

    Diagonalizes the 2*n_distinct complex representation, verifies that the
    sorted eigenvalues pair up within pairing_tol (relative to the spectral
    radius), and returns every second one.
    """
    spec = EnsembleSpec("gse", n_distinct, seed)
    rng = realization_rng(seed, realization_index)
    eigs = np.linalg.eigvalsh(_gse_matrix(rng, n_distinct))
    scale = max(1.0, float(np.abs(eigs).max()))
    gaps = (eigs[1::2] - eigs[::2]) / scale
    worst = float(gaps.max())
    if worst > pairing_tol:
        raise NumericalError(
            f"Kramers pairing violated: worst relative doublet gap {worst:.3e} "
            f"> {pairing_tol:.1e} (n_distinct={n_distinct}, seed={seed}, "
            f"realization={realization_index})"
        )
    return SpectrumSample(spec, realization_index, eigs[::2].copy())


def sample_poisson_levels(dim, seed, realization_index=0):
    """Uncorrelated levels: 0 followed by cumulative sums of dim-1 Exp(1) gaps."""
    spec = EnsembleSpec("poisson", dim, seed)
    rng = realization_rng(seed, realization_index)
    gaps = rng.exponential(1.0, size=dim - 1)
    levels = np.concatenate([[0.0], np.cumsum(gaps)])
    return SpectrumSample(spec, realization_index, levels)


_SAMPLERS = {
    "goe": sample_goe,
    "gue": sample_gue,
    "gse": sample_gse,
    "poisson": sample_poisson_levels,
}


def sample_spectrum(spec, realization_index=0):
    """Dispatch on an EnsembleSpec."""
    return _SAMPLERS[spec.ensemble](spec.dim, spec.seed, realization_index)


def _oracle_spans(rng, beta, dim, count):
    if beta == 1:
        m = rng.standard_normal((count, dim, dim))
        h = 0.5 * (m + m.transpose(0, 2, 1))
    elif beta == 2:
        m = (
            rng.standard_normal((count, dim, dim))
            + 1j * rng.standard_normal((count, dim, dim))
        ) / np.sqrt(2.0)
        h = 0.5 * (m + m.conj().transpose(0, 2, 1))
    else:
        m = (
            rng.standard_normal((count, 2 * dim, 2 * dim))
            + 1j * rng.standard_normal((count, 2 * dim, 2 * dim))
        )
        h = 0.5 * (m + m.conj().transpose(0, 2, 1))
        p, q, s = h[:, :dim, :dim], h[:, :dim, dim:], h[:, dim:, dim:]
        a = 0.5 * (p + s.transpose(0, 2, 1))
        b = 0.5 * (q - q.transpose(0, 2, 1))
        h = np.block([[a, b], [-b.conj(), a.conj()]])
    eigs = np.linalg.eigvalsh(h)
    # span of the distinct spectrum; symplectic doublets do not move extremes
    return eigs[:, -1] - eigs[:, 0]


def small_matrix_oracle(k, beta, n_samples, seed, batch_size=200_000):
    """Monte Carlo k-th neighbor spans from (k+1)-dimensional matrices.

    Pools E_{k+1} - E_1 over n_samples independent draws of the requested
    symmetry class and rescales the pooled set to mean k, mirroring the unit
    mean-spacing normalization of unfolded spectra.
    """
    from .spectral_stats import SpacingSet

    if k < 1 or int(k) != k:
        raise ValidationError(f"k must be a positive integer, got {k!r}")
    if beta not in (1, 2, 4):
        raise ValidationError(f"beta must be 1, 2 or 4, got {beta!r}")
    if n_samples < 10_000:
        raise ValidationError(f"n_samples must be >= 10000 for a usable histogram, got {n_samples}")
    rng = realization_rng(seed, 0)
    dim = int(k) + 1
    spans = np.empty(n_samples)
    done = 0
    while done < n_samples:
        count = min(batch_size, n_samples - done)
        spans[done : done + count] = _oracle_spans(rng, beta, dim, count)
        done += count
    spans *= k / spans.mean()
    return SpacingSet(k=int(k), values=spans, n_realizations=n_samples)

"""Map raw eigenvalues to unit mean spacing.

Two routes. The semicircle route uses the known limiting density of the
Gaussian matrix classes, so the staircase is analytic and exact up to finite
size effects. The polynomial route fits a low-order polynomial to the
empirical staircase inside a high-density bulk window and works for spectra
with no known density, at the price of a fitted smooth part.

Both return a central bulk of the transformed sequence; spectral edges are
discarded because the local density there is neither semicircular nor well
fit by a low-order polynomial.
"""

from dataclasses import dataclass, field

import numpy as np
from numpy.polynomial import Polynomial

from .errors import ValidationError

__all__ = [
    "UnfoldedSpectrum",
    "semicircle_cdf",
    "unfold_semicircle",
    "unfold_polynomial",
]


@dataclass(eq=False)
class UnfoldedSpectrum:
    """Bulk levels on the unit-mean-spacing scale, with how they got there."""

    levels: np.ndarray = field(repr=False)
    method: str  # "semicircle" or "polynomial"
    source: object = None  # SpectrumSample, if built from one
    window: tuple | None = None  # [lo, hi) index range kept from the raw sorted spectrum
    n_raw: int = 0
    n_clamped: int = 0  # levels outside the semicircle support, clamped to it
    fit_degree: int | None = None

    def __post_init__(self):
        self.levels = np.asarray(self.levels, dtype=float)

    @property
    def n_kept(self):
        return self.levels.size


def semicircle_cdf(energies, radius):
    """Fraction of the semicircle law below each energy, support [-R, R]."""
    if radius <= 0:
        raise ValidationError(f"radius must be positive, got {radius}")
    e = np.clip(np.asarray(energies, dtype=float), -radius, radius)
    x = e / radius
    return 0.5 + (x * np.sqrt(1.0 - x * x) + np.arcsin(x)) / np.pi


def _central_range(n, fraction):
    keep = max(min(int(round(fraction * n)), n), 0)
    lo = (n - keep) // 2
    return lo, lo + keep


def _resolve_levels(spectrum):
    levels = getattr(spectrum, "levels", spectrum)
    levels = np.asarray(levels, dtype=float)
    if levels.ndim != 1 or levels.size < 2:
        raise ValidationError("need a one-dimensional array of at least 2 levels")
    if np.any(np.diff(levels) < 0):
        raise ValidationError("levels must be sorted ascending")
    return levels


def unfold_semicircle(spectrum, bulk_fraction=0.8):
    """Unfold via the analytic semicircle staircase N * F(E), R = sqrt(2 N).

    N counts delivered levels (for the symplectic class that is already the
    distinct count). Levels outside [-R, R] map to the support edge; they are
    counted in n_clamped and land outside the kept bulk for any reasonable
    bulk_fraction. Keeps the central bulk_fraction of levels by rank.
    """
    if not 0 < bulk_fraction <= 1:
        raise ValidationError(f"bulk_fraction must be in (0, 1], got {bulk_fraction}")
    levels = _resolve_levels(spectrum)
    n = levels.size
    radius = np.sqrt(2.0 * n)
    n_clamped = int(np.count_nonzero((levels < -radius) | (levels > radius)))
    unfolded = n * semicircle_cdf(levels, radius)
    lo, hi = _central_range(n, bulk_fraction)
    return UnfoldedSpectrum(
        levels=unfolded[lo:hi],
        method="semicircle",
        source=spectrum if spectrum is not levels else None,
        window=(lo, hi),
        n_raw=n,
        n_clamped=n_clamped,
    )


def _bulk_window_by_density(levels, n_bins, density_threshold, smooth_bins):
    counts, edges = np.histogram(levels, bins=n_bins)
    profile = counts.astype(float)
    if smooth_bins > 1:
        kernel = np.ones(smooth_bins) / smooth_bins
        profile = np.convolve(profile, kernel, mode="same")
    peak = int(np.argmax(profile))
    floor = density_threshold * profile[peak]
    lo = peak
    while lo > 0 and profile[lo - 1] >= floor:
        lo -= 1
    hi = peak
    while hi < n_bins - 1 and profile[hi + 1] >= floor:
        hi += 1
    return edges[lo], edges[hi + 1]


def unfold_polynomial(
    spectrum,
    density_threshold=0.9,
    degree=3,
    n_bins=100,
    smooth_bins=9,
):
    """Unfold by fitting the empirical staircase inside a flat-density window.

    The density of states is estimated by an equal-width histogram of the
    full spectrum; the retained window is the contiguous bin run around the
    densest bin whose density stays at or above density_threshold times the
    maximum. Raw per-bin counts make that rule fire on shot noise for any
    realistic spectrum size, so the profile is boxcar-averaged over
    smooth_bins bins first (the staircase fit below still uses raw levels,
    never binned ones). n_bins is a cap: spectra with fewer than 10 levels
    per bin get a coarser histogram so the window rule sees counting
    statistics rather than empty bins. The staircase rank i -> poly(E_i) is
    then fit on the windowed levels and each windowed level is mapped
    through the fit.

    Refuses spectra with fewer than 10 * (degree + 1) windowed levels. A fit
    that is non-monotone over the window falls back to degree 1.
    """
    if degree < 1:
        raise ValidationError(f"degree must be >= 1, got {degree}")
    if not 0 < density_threshold < 1:
        raise ValidationError(
            f"density_threshold must be in (0, 1), got {density_threshold}"
        )
    if smooth_bins < 1 or smooth_bins % 2 == 0:
        raise ValidationError(f"smooth_bins must be odd and >= 1, got {smooth_bins}")
    levels = _resolve_levels(spectrum)
    n_bins = int(min(n_bins, max(10, levels.size // 10)))
    lo_e, hi_e = _bulk_window_by_density(levels, n_bins, density_threshold, smooth_bins)
    lo = int(np.searchsorted(levels, lo_e, side="left"))
    hi = int(np.searchsorted(levels, hi_e, side="right"))
    windowed = levels[lo:hi]
    if windowed.size < 10 * (degree + 1):
        raise ValidationError(
            f"polynomial unfolding needs >= {10 * (degree + 1)} levels in the "
            f"bulk window, got {windowed.size}"
        )
    # staircase samples: level E_i has rank i + 1/2 among the windowed levels
    ranks = np.arange(windowed.size) + 0.5
    fit_degree = degree
    fit = Polynomial.fit(windowed, ranks, deg=degree)
    smooth = fit(windowed)
    if np.any(np.diff(smooth) < 0):
        fit_degree = 1
        fit = Polynomial.fit(windowed, ranks, deg=1)
        smooth = fit(windowed)
    return UnfoldedSpectrum(
        levels=smooth,
        method="polynomial",
        source=spectrum if spectrum is not levels else None,
        window=(lo, hi),
        n_raw=levels.size,
        n_clamped=0,
        fit_degree=fit_degree,
    )

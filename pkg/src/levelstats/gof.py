"""Standard-deviation goodness-of-fit against an analytic density.

The figure of merit is the root-mean-square difference between histogram
densities and the model PDF at the bin centers, restricted to a window of a
few standard deviations around the model mean. Its absolute value depends on
the binning, so results always carry the bin width and window that produced
them alongside the number.
"""

from dataclasses import dataclass

import numpy as np

from .errors import ValidationError

__all__ = ["GofResult", "sigma_gof"]


@dataclass(frozen=True)
class GofResult:
    sigma: float
    n_bins_used: int
    window: tuple
    bin_width: float
    window_sigmas: float | None = None


def sigma_gof(histogram, dist, window_sigmas=3.0):
    """RMS difference between histogram densities and dist at bin centers.

    dist must be callable on an array of points and expose mean and variance
    attributes (any surmise spec qualifies); bins whose centers fall outside
    mean +/- window_sigmas * sqrt(variance), clipped below at 0, are ignored.
    window_sigmas=None uses every bin.
    """
    centers = histogram.centers
    widths = histogram.widths
    if not np.allclose(widths, widths[0], rtol=1e-9, atol=0.0):
        raise ValidationError("sigma_gof expects an equal-width histogram")
    bin_width = float(widths[0])
    if window_sigmas is None:
        keep = np.ones(centers.size, dtype=bool)
        window = (float(histogram.bin_edges[0]), float(histogram.bin_edges[-1]))
    else:
        if window_sigmas <= 0:
            raise ValidationError(f"window_sigmas must be positive, got {window_sigmas}")
        half = window_sigmas * np.sqrt(dist.variance)
        lo = max(0.0, dist.mean - half)
        hi = dist.mean + half
        keep = (centers >= lo) & (centers <= hi)
        window = (lo, hi)
    n_used = int(keep.sum())
    if n_used == 0:
        raise ValidationError(
            f"no histogram bins inside the comparison window {window}"
        )
    diff = histogram.densities[keep] - dist(centers[keep])
    sigma = float(np.sqrt(np.mean(diff**2)))
    return GofResult(
        sigma=sigma,
        n_bins_used=n_used,
        window=(float(window[0]), float(window[1])),
        bin_width=bin_width,
        window_sigmas=None if window_sigmas is None else float(window_sigmas),
    )

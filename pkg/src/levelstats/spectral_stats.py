"""Spacing sets, moments, histograms, and two-point counting statistics.

Spacings at order k are overlapping differences x[i+k] - x[i] of an unfolded
sequence, pooled over realizations. Overlap correlates the pooled values, so
uncertainty estimates here use delete-one-realization jackknife whenever the
per-realization block structure is known; a naive std/sqrt(n) on pooled
values would be badly optimistic.
"""

from dataclasses import dataclass, field

import numpy as np

from .errors import NumericalError, ValidationError

__all__ = [
    "SpacingSet",
    "MomentSummary",
    "Histogram",
    "NumberVarianceCurve",
    "knn_spacings",
    "moments",
    "default_bounds",
    "build_histogram",
    "number_variance",
    "sigma2_at",
    "delta_sigma_gap",
    "small_s_log_slope",
]


@dataclass(eq=False)
class SpacingSet:
    """Pooled k-th neighbor spacings, optionally with realization boundaries."""

    k: int
    values: np.ndarray = field(repr=False)
    n_realizations: int
    block_sizes: np.ndarray | None = field(default=None, repr=False)

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=float)
        if self.k < 1:
            raise ValidationError(f"k must be >= 1, got {self.k}")
        if self.values.ndim != 1 or self.values.size == 0:
            raise ValidationError("values must be a non-empty 1d array")
        if self.block_sizes is not None:
            self.block_sizes = np.asarray(self.block_sizes, dtype=np.int64)
            if self.block_sizes.sum() != self.values.size:
                raise ValidationError("block_sizes must sum to the pooled count")

    @property
    def n_values(self):
        return self.values.size


@dataclass(frozen=True)
class MomentSummary:
    mean: float
    variance: float
    skewness: float
    excess_kurtosis: float
    n_values: int
    se_mean: float
    se_variance: float


@dataclass(eq=False)
class Histogram:
    """Density-normalized histogram: sum(densities * widths) == 1."""

    bin_edges: np.ndarray = field(repr=False)
    counts: np.ndarray = field(repr=False)
    densities: np.ndarray = field(repr=False)
    n_in_range: int
    n_total: int
    k: int | None = None

    @property
    def centers(self):
        return 0.5 * (self.bin_edges[:-1] + self.bin_edges[1:])

    @property
    def widths(self):
        return np.diff(self.bin_edges)


@dataclass(eq=False)
class NumberVarianceCurve:
    """Variance of the level count in sliding windows of each length."""

    lengths: np.ndarray
    sigma2: np.ndarray
    n_windows: np.ndarray  # pooled window count per length
    n_realizations: int


def knn_spacings(spectra, k):
    """Pool x[i+k] - x[i] over realizations, in the given order.

    spectra: iterable of unfolded spectra (anything with a .levels array, or
    bare sorted arrays). Every realization must have more than k levels.
    """
    if k < 1 or int(k) != k:
        raise ValidationError(f"k must be a positive integer, got {k!r}")
    k = int(k)
    chunks = []
    for item in spectra:
        x = np.asarray(getattr(item, "levels", item), dtype=float)
        if x.size <= k:
            raise ValidationError(
                f"need more than k={k} levels per realization, got {x.size}"
            )
        chunks.append(x[k:] - x[:-k])
    if not chunks:
        raise ValidationError("no realizations supplied")
    values = np.concatenate(chunks)
    sizes = np.array([c.size for c in chunks], dtype=np.int64)
    return SpacingSet(k=k, values=values, n_realizations=len(chunks), block_sizes=sizes)


def _block_power_sums(values, block_sizes, max_power=2):
    bounds = np.concatenate([[0], np.cumsum(block_sizes)])
    sums = np.empty((max_power, block_sizes.size))
    for p in range(1, max_power + 1):
        csum = np.concatenate([[0.0], np.cumsum(values**p)])
        sums[p - 1] = csum[bounds[1:]] - csum[bounds[:-1]]
    return sums


def _jackknife_se(estimates):
    r = estimates.size
    dev = estimates - estimates.mean()
    return float(np.sqrt((r - 1) / r * np.sum(dev**2)))


def moments(spacings):
    """Sample moments of a pooled spacing set.

    Variance uses ddof=1; skewness and excess kurtosis are the standardized
    central-moment ratios of the pooled sample. Standard errors of the mean
    and variance come from delete-one-realization jackknife when block sizes
    are available (required: the pooled values overlap within a realization),
    else from the iid formulas.
    """
    v = spacings.values
    n = v.size
    if n < 2:
        raise ValidationError("need at least 2 spacings for moments")
    mean = float(v.mean())
    var = float(v.var(ddof=1))
    d = v - mean
    m2 = float(np.mean(d**2))
    if m2 == 0.0:
        skew = float("nan")
        kurt = float("nan")
    else:
        skew = float(np.mean(d**3)) / m2**1.5
        kurt = float(np.mean(d**4)) / m2**2 - 3.0
    bs = spacings.block_sizes
    if bs is not None and bs.size >= 2:
        p = _block_power_sums(v, bs, max_power=2)
        s1, s2 = p[0].sum(), p[1].sum()
        n_del = n - bs
        mean_del = (s1 - p[0]) / n_del
        var_del = (s2 - p[1] - n_del * mean_del**2) / (n_del - 1)
        se_mean = _jackknife_se(mean_del)
        se_var = _jackknife_se(var_del)
    else:
        se_mean = float(np.sqrt(var / n))
        m4 = float(np.mean(d**4))
        se_var = float(np.sqrt(max(m4 - m2**2, 0.0) / n))
    return MomentSummary(
        mean=mean,
        variance=var,
        skewness=skew,
        excess_kurtosis=kurt,
        n_values=n,
        se_mean=se_mean,
        se_variance=se_var,
    )


def default_bounds(k):
    """Histogram support wide enough for the matrix classes and Poisson:
    k plus/minus five Poisson standard deviations (variance k, the widest
    of the reference families), clipped at 0."""
    width = np.sqrt(float(k))
    return max(0.0, k - 5.0 * width), k + 5.0 * width


def build_histogram(spacings, bin_width=0.05, bounds=None):
    """Histogram a spacing set as a probability density.

    Densities are normalized over the values inside bounds, so the plotted
    area is exactly 1 even when outliers fall outside.
    """
    if bin_width <= 0:
        raise ValidationError(f"bin_width must be positive, got {bin_width}")
    if bounds is None:
        bounds = default_bounds(spacings.k)
    lo, hi = float(bounds[0]), float(bounds[1])
    if not hi > lo:
        raise ValidationError(f"empty bounds ({lo}, {hi})")
    n_bins = max(1, int(np.ceil((hi - lo) / bin_width - 1e-9)))
    edges = lo + bin_width * np.arange(n_bins + 1)
    counts, _ = np.histogram(spacings.values, bins=edges)
    n_in = int(counts.sum())
    if n_in == 0:
        raise ValidationError("no spacings inside the histogram bounds")
    densities = counts / (n_in * bin_width)
    return Histogram(
        bin_edges=edges,
        counts=counts,
        densities=densities,
        n_in_range=n_in,
        n_total=spacings.n_values,
        k=spacings.k,
    )


def _nv_lattice_units(lengths, l_step, start_stride):
    # when the L grid and the start grid share a common lattice, every window
    # boundary is one precomputed rank lookup instead of a fresh searchsorted
    delta = min(l_step, start_stride)
    r_len = l_step / delta
    r_stride = start_stride / delta
    if abs(r_len - round(r_len)) > 1e-9 or abs(r_stride - round(r_stride)) > 1e-9:
        return None
    units = np.rint(lengths / delta).astype(np.int64)
    if np.max(np.abs(units * delta - lengths)) > 1e-9 * max(delta, 1.0):
        return None
    return units, int(round(r_stride)), delta


def _nv_accumulate(x, lengths, start_stride, lattice, total, total_sq, n_windows):
    span = x[-1] - x[0]
    if lattice is not None:
        l_units, stride_units, delta = lattice
        j_max = int(np.floor(span / delta))
        ranks = np.searchsorted(x, x[0] + delta * np.arange(j_max + 1), side="left")
        start_idx = stride_units * np.arange(j_max // stride_units + 1)
        for i in range(lengths.size):
            n_starts = int(np.floor((span - lengths[i]) / start_stride)) + 1
            idx = start_idx[:n_starts]
            counts = ranks[idx + l_units[i]] - ranks[idx]
            total[i] += counts.sum()
            total_sq[i] += np.dot(counts, counts)
            n_windows[i] += n_starts
        return
    for i, length in enumerate(lengths):
        n_starts = int(np.floor((span - length) / start_stride)) + 1
        starts = x[0] + start_stride * np.arange(n_starts)
        counts = np.searchsorted(x, starts + length, side="left") - np.searchsorted(
            x, starts, side="left"
        )
        total[i] += counts.sum()
        total_sq[i] += np.dot(counts, counts)
        n_windows[i] += n_starts


def number_variance(spectra, l_max, l_step=0.25, start_stride=0.5):
    """Sigma^2(L): variance of the count in length-L windows slid along each
    unfolded sequence with the given stride, pooled over realizations.

    Windows start at x[0], x[0]+stride, ... while the window fits; the count
    is levels in [start, start+L). Pooled population variance over all
    windows of all realizations; count sums accumulate in exact integers, so
    the result does not depend on how realizations are batched.
    """
    if l_max <= 0 or l_step <= 0 or start_stride <= 0:
        raise ValidationError("l_max, l_step, start_stride must be positive")
    lengths = np.arange(0.0, l_max + 0.5 * l_step, l_step)
    lattice = _nv_lattice_units(lengths, l_step, start_stride)
    total = np.zeros(lengths.size, dtype=np.int64)
    total_sq = np.zeros(lengths.size, dtype=np.int64)
    n_windows = np.zeros(lengths.size, dtype=np.int64)
    n_real = 0
    for item in spectra:
        x = np.asarray(getattr(item, "levels", item), dtype=float)
        span = x[-1] - x[0]
        if span <= l_max:
            raise ValidationError(
                f"realization span {span:.3g} too short for l_max={l_max}"
            )
        _nv_accumulate(x, lengths, start_stride, lattice, total, total_sq, n_windows)
        n_real += 1
    if n_real == 0:
        raise ValidationError("no realizations supplied")
    mean = total / n_windows
    sigma2 = total_sq / n_windows - mean**2
    return NumberVarianceCurve(
        lengths=lengths,
        sigma2=sigma2,
        n_windows=n_windows,
        n_realizations=n_real,
    )


def sigma2_at(curve, length):
    """Sigma^2 at one window length, linearly interpolated on the curve."""
    lo, hi = curve.lengths[0], curve.lengths[-1]
    if not lo <= length <= hi:
        raise ValidationError(f"length {length} outside curve range [{lo}, {hi}]")
    return float(np.interp(length, curve.lengths, curve.sigma2))


def delta_sigma_gap(k, variance, curve, correction=1.0 / 6.0):
    """Spacing variance minus the number-variance prediction at L = k.

    For the matrix classes the k-th neighbor spacing variance tracks
    Sigma^2(k) - 1/6; for Poisson sequences the two are equal, so pass
    correction=0 there. Returns variance - (Sigma^2(k) - correction).
    """
    return float(variance - (sigma2_at(curve, float(k)) - correction))


def small_s_log_slope(spacings, s_lo=None, s_hi=None, n_bins=12, min_count=25):
    """Log-log slope of the density near s = 0, a level-repulsion probe.

    Bins log-uniformly on [s_lo, s_hi] (defaults: quantile-based band below
    the bulk), drops bins with fewer than min_count values, and fits a line
    to log density vs log geometric bin center. Needs at least 4 surviving
    bins.
    """
    v = spacings.values
    pos = v[v > 0]
    if pos.size < 10 * min_count:
        raise ValidationError("too few positive spacings for a slope estimate")
    if s_lo is None:
        s_lo = float(np.quantile(pos, 0.001))
    if s_hi is None:
        s_hi = float(np.quantile(pos, 0.05))
    if not 0 < s_lo < s_hi:
        raise ValidationError(f"need 0 < s_lo < s_hi, got ({s_lo}, {s_hi})")
    edges = np.geomspace(s_lo, s_hi, n_bins + 1)
    counts, _ = np.histogram(pos, bins=edges)
    widths = np.diff(edges)
    keep = counts >= min_count
    if keep.sum() < 4:
        raise NumericalError(
            f"only {int(keep.sum())} populated bins in [{s_lo:.3g}, {s_hi:.3g}]; "
            "need >= 4 for a slope fit"
        )
    centers = np.sqrt(edges[:-1] * edges[1:])[keep]
    dens = counts[keep] / (pos.size * widths[keep])
    slope, _ = np.polyfit(np.log(centers), np.log(dens), 1)
    return float(slope)

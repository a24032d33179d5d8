"""Open XXZ spin-1/2 chain with random on-site z-fields, zero-magnetization
sector, dense diagonalization, and disorder sweeps.

Sites carry spin operators S = sigma/2. The chain couples nearest neighbors
n, n+1 for n = 1..L-1 (open ends) through the planar exchange plus Jz times
the z-z term; disorder enters as h_n S^z_n with h_n uniform on
[-W/2, W/2], drawn per realization. Total S^z commutes with H, so work
happens inside the half-filling sector of dimension binomial(L, L/2).
"""

from dataclasses import dataclass, field
from math import comb

import numpy as np

from .ensembles import SpectrumSample
from .errors import ValidationError
from .gof import sigma_gof
from .seeding import check_seed, realization_rng
from .spectral_stats import (
    build_histogram,
    default_bounds,
    knn_spacings,
    moments,
    number_variance,
)
from .surmise import pdf_corrected, pdf_poisson_knn
from .unfolding import unfold_polynomial

__all__ = [
    "ChainSpec",
    "SectorBasis",
    "SweepRow",
    "SweepResult",
    "build_basis",
    "disorder_fields",
    "build_hamiltonian",
    "spectrum",
    "disorder_sweep",
]


@dataclass(frozen=True)
class ChainSpec:
    """Open chain of even length with uniform z-field disorder of width W."""

    length: int
    jz: float = 1.0
    disorder: float = 0.0  # W
    seed: int = 0
    boundary: str = "open"
    max_length: int = 16  # memory guard: dense sector matrix is dim^2 doubles

    def __post_init__(self):
        if self.length % 2 != 0 or self.length < 2:
            raise ValidationError(f"length must be even and >= 2, got {self.length}")
        if self.length > self.max_length:
            raise ValidationError(
                f"length {self.length} exceeds max_length {self.max_length}; "
                "raise max_length explicitly if the memory cost is intended"
            )
        if self.disorder < 0:
            raise ValidationError(f"disorder width must be >= 0, got {self.disorder}")
        if self.boundary != "open":
            raise ValidationError("only open boundaries are implemented")
        check_seed(self.seed)

    @property
    def dim(self):
        return comb(self.length, self.length // 2)


@dataclass(eq=False)
class SectorBasis:
    """All L-bit configurations with exactly L/2 set bits, sorted ascending."""

    length: int
    states: np.ndarray = field(repr=False)

    def rank(self, state):
        """Index of a basis state (bitstring as integer) within the sector."""
        idx = np.searchsorted(self.states, state)
        found = (idx < self.states.size) & (self.states[np.minimum(idx, self.states.size - 1)] == state)
        if not np.all(found):
            raise ValidationError("state outside the zero-magnetization sector")
        return idx

    @property
    def dim(self):
        return self.states.size


def build_basis(length):
    """Enumerate the zero-magnetization sector for an even chain length."""
    if length % 2 != 0 or not 2 <= length <= 20:
        raise ValidationError(f"length must be even with 2 <= L <= 20, got {length}")
    arr = np.arange(1 << length, dtype=np.int64)
    states = arr[np.bitwise_count(arr) == length // 2]
    return SectorBasis(length=length, states=states)


def disorder_fields(spec, realization_index=0):
    """The realization's on-site fields h_n, uniform on [-W/2, W/2].

    One draw per site in site order from the (seed, realization) stream, so
    cached spectra can be replayed exactly from these values.
    """
    rng = realization_rng(spec.seed, realization_index)
    half = 0.5 * spec.disorder
    return rng.uniform(-half, half, size=spec.length)


def build_hamiltonian(spec, basis, realization_index=0, h_values=None):
    """Dense real symmetric sector Hamiltonian for one disorder realization.

    Off-diagonal: adjacent exchange flips with amplitude 1/2. Diagonal, in
    z_n = +/-1 bit variables: Jz/4 * sum z_n z_{n+1} + 1/2 * sum h_n z_n.
    Pass h_values to rebuild from persisted fields instead of the RNG stream.
    """
    if basis.length != spec.length:
        raise ValidationError("basis length does not match the chain spec")
    if h_values is None:
        h = disorder_fields(spec, realization_index)
    else:
        h = np.asarray(h_values, dtype=float)
        if h.shape != (spec.length,):
            raise ValidationError(f"h_values must have shape ({spec.length},)")
    states = basis.states
    length = spec.length
    bits = ((states[:, None] >> np.arange(length)) & 1).astype(np.float64) * 2.0 - 1.0
    diag = 0.25 * spec.jz * np.sum(bits[:, :-1] * bits[:, 1:], axis=1) + 0.5 * (bits @ h)
    ham = np.zeros((basis.dim, basis.dim))
    ham[np.diag_indices(basis.dim)] = diag
    rows = np.arange(basis.dim)
    for n in range(length - 1):
        pair = np.int64((1 << n) | (1 << (n + 1)))
        differs = ((states >> n) & 1) != ((states >> (n + 1)) & 1)
        src = rows[differs]
        dst = basis.rank(states[differs] ^ pair)
        ham[src, dst] = 0.5  # the reverse flip fills the transpose entry
    return ham


def spectrum(spec, realization_index=0, basis=None, h_values=None):
    """All sector eigenvalues of one realization, sorted ascending."""
    if basis is None:
        basis = build_basis(spec.length)
    ham = build_hamiltonian(spec, basis, realization_index, h_values=h_values)
    levels = np.linalg.eigvalsh(ham)
    return SpectrumSample(spec, realization_index, levels)


@dataclass(frozen=True)
class SweepRow:
    """Aggregated statistics for one (W, k) cell of a disorder sweep."""

    disorder: float
    k: int
    mean: float
    variance: float
    skewness: float
    excess_kurtosis: float
    se_mean: float
    sigma_vs_goe: float
    sigma_vs_poisson: float
    n_values: int
    n_realizations: int


@dataclass(eq=False)
class SweepResult:
    spec: ChainSpec
    w_values: tuple
    k_max: int
    rows: list  # SweepRow, ordered by (W, k)
    nv_curves: dict  # W -> NumberVarianceCurve
    histograms: dict  # (W, k) -> Histogram

    def row(self, disorder, k):
        for r in self.rows:
            if r.disorder == disorder and r.k == k:
                return r
        raise KeyError((disorder, k))


def disorder_sweep(
    spec_template,
    w_values,
    n_realizations,
    k_max,
    spectra_provider=None,
    l_max=None,
):
    """Full per-W analysis: diagonalize, unfold, pool spacings, compare.

    For each W: n_realizations spectra (realization indices 0..n-1),
    polynomial unfolding with defaults, pooled kNN spacings for k = 1..k_max
    with moments and histograms, sigma-gof against the orthogonal-class
    corrected surmise and against the Poisson kNN reference, and the number
    variance of the unfolded bulks.

    spectra_provider(spec, realization_index) overrides diagonalization (the
    campaign runner injects its cache here).
    """
    if not w_values:
        raise ValidationError("w_values must be nonempty")
    if k_max < 1:
        raise ValidationError(f"k_max must be >= 1, got {k_max}")
    if n_realizations < 2:
        raise ValidationError("need at least 2 realizations")
    provider = spectra_provider or (lambda spec, idx: spectrum(spec, idx))
    if l_max is None:
        l_max = k_max + 1
    rows = []
    nv_curves = {}
    histograms = {}
    w_tuple = tuple(float(w) for w in w_values)
    for w in w_tuple:
        spec = ChainSpec(
            length=spec_template.length,
            jz=spec_template.jz,
            disorder=w,
            seed=spec_template.seed,
            boundary=spec_template.boundary,
            max_length=spec_template.max_length,
        )
        unfolded = [
            unfold_polynomial(provider(spec, idx)) for idx in range(n_realizations)
        ]
        nv_curves[w] = number_variance(unfolded, l_max=l_max)
        for k in range(1, k_max + 1):
            spacings = knn_spacings(unfolded, k)
            summary = moments(spacings)
            hist = build_histogram(spacings, bounds=default_bounds(k))
            histograms[(w, k)] = hist
            gof_goe = sigma_gof(hist, pdf_corrected(k, 1))
            gof_poisson = sigma_gof(hist, pdf_poisson_knn(k))
            rows.append(
                SweepRow(
                    disorder=w,
                    k=k,
                    mean=summary.mean,
                    variance=summary.variance,
                    skewness=summary.skewness,
                    excess_kurtosis=summary.excess_kurtosis,
                    se_mean=summary.se_mean,
                    sigma_vs_goe=gof_goe.sigma,
                    sigma_vs_poisson=gof_poisson.sigma,
                    n_values=summary.n_values,
                    n_realizations=n_realizations,
                )
            )
    return SweepResult(
        spec=spec_template,
        w_values=w_tuple,
        k_max=k_max,
        rows=rows,
        nv_curves=nv_curves,
        histograms=histograms,
    )

"""Analytic surmises for k-th nearest-neighbor level spacings.

Four interchangeable reference densities for the spacing s between levels i
and i+k of an unfolded spectrum (unit mean nearest-neighbor spacing):

* ``old``         -- C s^alpha exp(-A s^2) with the combinatorial exponent
                     alpha = k(k+1) beta/2 + k - 1 obtained by treating the
                     k+1 levels as an isolated Gaussian cluster.
* ``corrected``   -- same functional form, but the exponent is fixed by
                     matching the variance to the logarithmic variance law of
                     the infinite ensembles, which the old exponent misses at
                     large k.
* ``gaussian``    -- normal density with mean k and the same matched variance.
* ``poisson_knn`` -- gamma density s^(k-1) e^(-s) / (k-1)!, the k-th neighbor
                     spacing of uncorrelated levels.

A and C always enforce unit norm and mean k.  All gamma-function arithmetic
runs through ``gammaln`` so exponents of a few thousand stay finite; C itself
underflows double precision for k beyond ~25, so the stable representation is
``log_c`` and densities are evaluated in log space.
"""

import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np
from scipy.optimize import brentq
from scipy.special import gammaln

from .errors import NumericalError, ValidationError

__all__ = [
    "BETA_VALUES",
    "VARIANCE_LAW_OFFSET",
    "NN_CORRECTED_GUE_EXPONENT",
    "NN_CORRECTED_GUE_VARIANCE",
    "NormConstants",
    "SurmiseSpec",
    "alpha_old",
    "alpha_corrected",
    "norm_constants",
    "variance_of_surmise",
    "rmt_variance",
    "skewness_of_surmise",
    "pdf_old",
    "pdf_corrected",
    "pdf_gaussian",
    "pdf_poisson_knn",
    "pdf_wigner_nn",
    "pdf_nn_corrected_gue",
    "pdf_quadrature_moments",
]

BETA_VALUES = (1, 2, 4)

# Constant offset c_beta of the variance law (2 / (pi^2 beta)) ln k + c_beta,
# equal to the nearest-neighbor spacing variance of the matching Wigner form.
VARIANCE_LAW_OFFSET = {
    1: 4.0 / math.pi - 1.0,
    2: 3.0 * math.pi / 8.0 - 1.0,
    4: 45.0 * math.pi / 128.0 - 1.0,
}

# Variance-matched nearest-neighbor exponent for the unitary class: solving
# (alpha+1)/(2 A_alpha) - 1 = 0.17999 (the exact GUE NN spacing variance)
# sharpens the s^2 repulsion of the Wigner form to s^1.96998.
NN_CORRECTED_GUE_EXPONENT = 1.96998
NN_CORRECTED_GUE_VARIANCE = 0.17999

# Constants switch-over: exact gamma ratios below, large-alpha forms at and
# above this k when mode="auto".
AUTO_EXACT_MAX_K = 10

# The exact skewness formula subtracts nearly equal gamma ratios; beyond this
# exponent the 1/sqrt(2 alpha) asymptote is already accurate to ~1e-5.
SKEWNESS_ASYMPTOTE_MIN_ALPHA = 500.0


def _log_gamma_ratio_half(x):
    """log(Gamma(x + 1/2) / Gamma(x)), accurate to ~1e-15 relative.

    Subtracting gammaln values loses digits once they reach ~1e4, so large
    arguments switch to the ratio's own expansion (truncation < 1e-16 there).
    """
    if x < 300.0:
        return gammaln(x + 0.5) - gammaln(x)
    inv = 1.0 / x
    corr = inv * (-1.0 / 8.0 + inv * (1.0 / 128.0 + inv * (5.0 / 1024.0 - inv * 21.0 / 32768.0)))
    return 0.5 * math.log(x) + math.log1p(corr)


def _check_beta(beta):
    if beta not in BETA_VALUES:
        raise ValidationError(f"beta must be one of {BETA_VALUES}, got {beta!r}")
    return int(beta)


def _check_k(k):
    if int(k) != k or k < 1:
        raise ValidationError(f"k must be a positive integer, got {k!r}")
    return int(k)


def alpha_old(k, beta):
    """Combinatorial power-law exponent k(k+1)*beta/2 + k - 1."""
    k = _check_k(k)
    beta = _check_beta(beta)
    return 0.5 * k * (k + 1) * beta + k - 1


class NormConstants(NamedTuple):
    """Gaussian-weight coefficient A and log of the normalization C."""

    a: float
    log_c: float

    @property
    def c(self):
        """Linear-scale C; underflows to 0.0 for large k * alpha."""
        return math.exp(self.log_c)


def resolve_constants_mode(k, mode="auto"):
    """Map "auto" onto "exact" below k=10 and "asymptotic" from there on."""
    if mode == "auto":
        return "exact" if _check_k(k) < AUTO_EXACT_MAX_K else "asymptotic"
    return mode


def norm_constants(alpha, k, mode="auto"):
    """Constants of C s^alpha exp(-A s^2) with unit norm and mean k.

    mode
        "exact"      -- gamma-ratio expressions evaluated via gammaln.
        "asymptotic" -- large-alpha expansions
                        A = (alpha/2 + 1/4 + 1/(16 alpha)) / k^2,
                        C = (1 + 12 alpha) e^(1/4 + alpha/2)
                            / (12 sqrt(pi alpha) k^(1+alpha)).
        "auto"       -- exact for k < 10, asymptotic otherwise.
    """
    if alpha <= 0 or not math.isfinite(alpha):
        raise ValidationError(f"alpha must be positive and finite, got {alpha!r}")
    k = _check_k(k)
    mode = resolve_constants_mode(k, mode)
    if mode == "exact":
        # sqrt(A) = Gamma(alpha/2 + 1) / (k Gamma((alpha+1)/2))
        log_sqrt_a = _log_gamma_ratio_half((alpha + 1.0) / 2.0) - math.log(k)
        a = math.exp(2.0 * log_sqrt_a)
        # C = 2 A^((alpha+1)/2) / Gamma((alpha+1)/2)
        log_c = math.log(2.0) + (alpha + 1.0) * log_sqrt_a - gammaln((alpha + 1.0) / 2.0)
    elif mode == "asymptotic":
        a = (alpha / 2.0 + 0.25 + 1.0 / (16.0 * alpha)) / k**2
        log_c = (
            math.log1p(12.0 * alpha)
            - math.log(12.0)
            - 0.5 * math.log(math.pi * alpha)
            - (1.0 + alpha) * math.log(k)
            + 0.25
            + alpha / 2.0
        )
    else:
        raise ValidationError(f"unknown constants mode {mode!r}")
    if not (math.isfinite(a) and math.isfinite(log_c)):
        raise NumericalError(f"non-finite constants for alpha={alpha}, k={k}, mode={mode}")
    return NormConstants(a, log_c)


def variance_of_surmise(alpha, k):
    """Variance (alpha+1)/(2 A) - k^2 of the surmise, exact constants."""
    a = norm_constants(alpha, k, mode="exact").a
    return (alpha + 1.0) / (2.0 * a) - float(k) ** 2


def rmt_variance(k, beta):
    """Logarithmic variance law (2 / (pi^2 beta)) ln k + c_beta."""
    k = _check_k(k)
    beta = _check_beta(beta)
    return 2.0 / (math.pi**2 * beta) * math.log(k) + VARIANCE_LAW_OFFSET[beta]


def _alpha_corrected_large_k(k, beta):
    d = math.pi**2 * beta * VARIANCE_LAW_OFFSET[beta] + 2.0 * math.log(k)
    t = math.pi**2 * beta * k**2
    return t / (2.0 * d) - 0.75


def _alpha_corrected_closed_form(k, beta):
    d = math.pi**2 * beta * VARIANCE_LAW_OFFSET[beta] + 2.0 * math.log(k)
    t = math.pi**2 * beta * k**2
    u = d / t
    disc = 1.0 - u * (4.0 - u)
    if disc < 0.0:
        raise NumericalError(
            f"closed-form corrected exponent undefined for k={k}, beta={beta} "
            f"(discriminant {disc:.3g} < 0); use mode='large_k' or 'exact_root'"
        )
    return (t - d + t * math.sqrt(disc)) / (4.0 * d)


def _alpha_corrected_exact_root(k, beta):
    target = rmt_variance(k, beta)
    guess = _alpha_corrected_large_k(k, beta)

    def objective(alpha):
        return variance_of_surmise(alpha, k) - target

    for lo, hi in ((0.3 * guess, 3.0 * guess), (0.1 * guess, 10.0 * guess)):
        if objective(lo) > 0.0 > objective(hi):
            return brentq(objective, lo, hi, xtol=1e-10, rtol=4 * np.finfo(float).eps)
    raise NumericalError(f"could not bracket corrected exponent for k={k}, beta={beta}")


def alpha_corrected(k, beta, mode="auto"):
    """Variance-matched exponent: surmise variance equals the log variance law.

    mode
        "exact_root"  -- numerical root of the matching condition with exact
                         constants; satisfies the condition to ~1e-12.
        "closed_form" -- quadratic-formula solution using the asymptotic A;
                         undefined where its discriminant turns negative
                         (k=1, beta=1 sits just outside the domain).
        "large_k"     -- leading-order solution
                         pi^2 beta k^2 / (2 (pi^2 beta c_beta + 2 ln k)) - 3/4.
        "auto"        -- closed_form for k in {2, 3} with beta in {1, 2},
                         large_k otherwise (where the two are indistinguishable
                         at sampling accuracy).
    """
    k = _check_k(k)
    beta = _check_beta(beta)
    if mode == "auto":
        mode = "closed_form" if (k in (2, 3) and beta in (1, 2)) else "large_k"
    if mode == "large_k":
        return _alpha_corrected_large_k(k, beta)
    if mode == "closed_form":
        return _alpha_corrected_closed_form(k, beta)
    if mode == "exact_root":
        return _alpha_corrected_exact_root(k, beta)
    raise ValidationError(f"unknown alpha mode {mode!r}")


def skewness_of_surmise(alpha):
    """Skewness of C s^alpha exp(-A s^2); scale-free, so depends on alpha only.

    Exact gamma-ratio expression below alpha = 500, the 1/sqrt(2 alpha)
    asymptote above (the exact form loses digits to cancellation there).
    """
    if alpha <= 0 or not math.isfinite(alpha):
        raise ValidationError(f"alpha must be positive and finite, got {alpha!r}")
    if alpha > SKEWNESS_ASYMPTOTE_MIN_ALPHA:
        return 1.0 / math.sqrt(2.0 * alpha)
    # r = Gamma(alpha/2 + 1) / Gamma((alpha+1)/2) = <s> sqrt(A)
    r = math.exp(_log_gamma_ratio_half((alpha + 1.0) / 2.0))
    num = math.sqrt(2.0) * r * (4.0 * r**2 - (2.0 * alpha + 1.0))
    den = ((alpha + 1.0) - 2.0 * r**2) ** 1.5
    return num / den


def _as_float_array(s):
    arr = np.asarray(s, dtype=float)
    if np.any(arr < 0):
        raise ValidationError("spacing values must be non-negative")
    return arr


@dataclass(frozen=True)
class SurmiseSpec:
    """One reference spacing density, evaluable via pdf() or directly callable.

    ``mean`` is the nominal first moment k and ``variance`` the analytic
    variance implied by the stored constants; goodness-of-fit windows are cut
    from these two numbers.
    """

    family: str  # old | corrected | gaussian | poisson_knn | wigner_nn | corrected_nn_gue
    k: int
    beta: int | None
    alpha: float | None
    a_coeff: float | None
    log_c: float | None
    constants_mode: str | None
    mean: float
    variance: float

    def pdf(self, s):
        arr = _as_float_array(s)
        if self.family == "gaussian":
            out = np.exp(-0.5 * (arr - self.mean) ** 2 / self.variance) / math.sqrt(
                2.0 * math.pi * self.variance
            )
        elif self.family == "poisson_knn":
            out = np.zeros_like(arr)
            pos = arr > 0
            out[pos] = np.exp(
                (self.k - 1) * np.log(arr[pos]) - arr[pos] - gammaln(self.k)
            )
            if self.k == 1:
                out = np.where(arr == 0, 1.0, out)
        else:
            out = np.zeros_like(arr)
            pos = arr > 0
            out[pos] = np.exp(
                self.log_c + self.alpha * np.log(arr[pos]) - self.a_coeff * arr[pos] ** 2
            )
        return float(out) if np.isscalar(s) or arr.ndim == 0 else out

    __call__ = pdf


def _power_gauss_spec(family, k, beta, alpha, constants_mode):
    constants_mode = resolve_constants_mode(k, constants_mode)
    consts = norm_constants(alpha, k, mode=constants_mode)
    variance = (alpha + 1.0) / (2.0 * consts.a) - float(k) ** 2
    return SurmiseSpec(
        family=family,
        k=k,
        beta=beta,
        alpha=alpha,
        a_coeff=consts.a,
        log_c=consts.log_c,
        constants_mode=constants_mode,
        mean=float(k),
        variance=variance,
    )


def pdf_old(k, beta, constants_mode="auto"):
    """Surmise with the combinatorial exponent; k=1 is the Wigner NN form."""
    return _power_gauss_spec("old", _check_k(k), _check_beta(beta), alpha_old(k, beta), constants_mode)


def pdf_corrected(k, beta, alpha_mode="auto", constants_mode="auto"):
    """Surmise with the variance-matched exponent."""
    alpha = alpha_corrected(k, beta, mode=alpha_mode)
    return _power_gauss_spec("corrected", _check_k(k), _check_beta(beta), alpha, constants_mode)


def pdf_wigner_nn(beta):
    """Nearest-neighbor Wigner form: the k=1 member of the old family."""
    beta = _check_beta(beta)
    spec = _power_gauss_spec("wigner_nn", 1, beta, float(beta), "exact")
    return spec


def pdf_nn_corrected_gue():
    """GUE nearest-neighbor form with the variance-matched power 1.96998."""
    return _power_gauss_spec("corrected_nn_gue", 1, 2, NN_CORRECTED_GUE_EXPONENT, "exact")


def pdf_gaussian(k, beta):
    """Normal density with mean k and the log-law variance."""
    k = _check_k(k)
    beta = _check_beta(beta)
    return SurmiseSpec(
        family="gaussian",
        k=k,
        beta=beta,
        alpha=None,
        a_coeff=None,
        log_c=None,
        constants_mode=None,
        mean=float(k),
        variance=rmt_variance(k, beta),
    )


def pdf_poisson_knn(k):
    """Gamma(k, 1) density: k-th neighbor spacing of uncorrelated levels."""
    k = _check_k(k)
    return SurmiseSpec(
        family="poisson_knn",
        k=k,
        beta=None,
        alpha=None,
        a_coeff=None,
        log_c=None,
        constants_mode=None,
        mean=float(k),
        variance=float(k),
    )


def pdf_quadrature_moments(spec, n_sigma=12.0):
    """(norm, mean, variance) of a SurmiseSpec by adaptive quadrature.

    Integrates over [0, mean + n_sigma * sqrt(variance)]; the neglected tail
    is ~exp(-n_sigma^2 / 2) of the mass.  Interior break points around the
    peak keep the adaptive rule from stepping over narrow densities at
    large k.
    """
    from scipy.integrate import quad

    width = math.sqrt(spec.variance)
    hi = spec.mean + n_sigma * width
    interior = [p for p in (spec.mean - 3 * width, spec.mean, spec.mean + 3 * width) if 0.0 < p < hi]
    opts = dict(points=interior, limit=200)
    norm = quad(spec.pdf, 0.0, hi, **opts)[0]
    mean = quad(lambda s: s * spec.pdf(s), 0.0, hi, **opts)[0]
    second = quad(lambda s: s * s * spec.pdf(s), 0.0, hi, **opts)[0]
    return norm, mean, second - mean**2

"""Analytic checks of the surmise families: exact constants, matched
exponents, and quadrature oracles for norm, mean, variance, skew and kurtosis."""

import math

import numpy as np
import pytest
from scipy.integrate import quad
from scipy.stats import gamma as gamma_dist
from scipy.stats import norm as norm_dist

from levelstats import surmise as sm
from levelstats.errors import NumericalError, ValidationError


def quad_moment(spec, order, about=0.0):
    w = math.sqrt(spec.variance)
    hi = spec.mean + 12.0 * w
    pts = [p for p in (spec.mean - 3 * w, spec.mean, spec.mean + 3 * w) if 0.0 < p < hi]
    return quad(lambda s: (s - about) ** order * spec.pdf(s), 0.0, hi, points=pts, limit=200)[0]


@pytest.mark.parametrize(
    "k, beta, expected",
    [(1, 1, 1), (1, 2, 2), (1, 4, 4), (2, 2, 7), (3, 4, 26), (5, 1, 19)],
)
def test_alpha_old_closed_form(k, beta, expected):
    assert sm.alpha_old(k, beta) == expected


def test_alpha_old_rejects_bad_input():
    with pytest.raises(ValidationError):
        sm.alpha_old(0, 1)
    with pytest.raises(ValidationError):
        sm.alpha_old(2, 3)


@pytest.mark.parametrize(
    "beta, a_ref, c_ref",
    [
        (1, math.pi / 4, math.pi / 2),
        (2, 4 / math.pi, 32 / math.pi**2),
        (4, 64 / (9 * math.pi), 8 * (64 / (9 * math.pi)) ** 2.5 / (3 * math.sqrt(math.pi))),
    ],
)
def test_nn_constants_match_wigner_closed_forms(beta, a_ref, c_ref):
    consts = sm.norm_constants(float(beta), 1, mode="exact")
    assert consts.a == pytest.approx(a_ref, abs=1e-12)
    assert consts.c == pytest.approx(c_ref, abs=1e-12)


def test_asymptotic_constants_approach_exact():
    exact = sm.norm_constants(100.0, 10, mode="exact")
    approx = sm.norm_constants(100.0, 10, mode="asymptotic")
    assert approx.a == pytest.approx(exact.a, rel=1e-4)
    assert approx.log_c == pytest.approx(exact.log_c, abs=5e-3)


def test_auto_constants_mode_switches_at_k_10():
    assert sm.pdf_old(9, 1).constants_mode == "exact"
    assert sm.pdf_old(10, 1).constants_mode == "asymptotic"


@pytest.mark.parametrize("maker", [sm.pdf_old, sm.pdf_corrected])
@pytest.mark.parametrize("beta", [1, 2, 4])
@pytest.mark.parametrize("k", [1, 3, 10, 40])
def test_quadrature_norm_and_mean(maker, beta, k):
    spec = maker(k, beta, constants_mode="exact")
    norm, mean, var = sm.pdf_quadrature_moments(spec)
    assert norm == pytest.approx(1.0, abs=1e-8)
    assert mean == pytest.approx(float(k), abs=1e-6)
    assert var == pytest.approx(spec.variance, abs=1e-6)


def test_asymptotic_mode_norm_error_is_small_but_visible():
    # large-alpha constants miss unit norm at O(alpha^-2); the auto policy
    # accepts that above k=10 where the relative effect is ~4e-3 and falling
    spec = sm.pdf_old(10, 1, constants_mode="asymptotic")
    norm, mean, _ = sm.pdf_quadrature_moments(spec)
    assert abs(norm - 1.0) < 5e-3
    assert abs(mean - 10.0) < 5e-2


@pytest.mark.parametrize("beta", [1, 2, 4])
def test_variance_law_offset_equals_wigner_nn_variance(beta):
    # the law's constant term is exactly the NN variance of the Wigner form
    assert sm.variance_of_surmise(float(beta), 1) == pytest.approx(
        sm.VARIANCE_LAW_OFFSET[beta], abs=1e-12
    )


def test_rmt_variance_reference_values():
    assert sm.rmt_variance(20, 2) == pytest.approx(0.4816283849282144, abs=1e-12)
    assert sm.rmt_variance(50, 1) == pytest.approx(1.0659811474272334, abs=1e-12)


def test_corrected_exponent_k1_reference_values():
    assert sm.alpha_corrected(1, 1, "large_k") == pytest.approx(1.08, abs=0.01)
    assert sm.alpha_corrected(1, 2, "large_k") == pytest.approx(2.06, abs=0.01)
    assert sm.alpha_corrected(1, 4, "large_k") == pytest.approx(4.04, abs=0.01)


@pytest.mark.parametrize("beta", [1, 2, 4])
def test_exact_root_at_k1_recovers_wigner_exponent(beta):
    # variance matching at k=1 has the NN Wigner exponent as its exact solution
    assert sm.alpha_corrected(1, beta, "exact_root") == pytest.approx(float(beta), abs=1e-8)


@pytest.mark.parametrize("beta", [1, 2, 4])
@pytest.mark.parametrize("k", [2, 5, 17, 60, 100])
def test_exact_root_satisfies_variance_match(k, beta):
    root = sm.alpha_corrected(k, beta, "exact_root")
    assert sm.variance_of_surmise(root, k) == pytest.approx(sm.rmt_variance(k, beta), abs=1e-8)


@pytest.mark.parametrize("beta", [1, 2, 4])
@pytest.mark.parametrize("k", [2, 5, 10, 30, 100])
def test_closed_form_tracks_exact_root_within_one_percent(k, beta):
    cf = sm.alpha_corrected(k, beta, "closed_form")
    er = sm.alpha_corrected(k, beta, "exact_root")
    assert cf == pytest.approx(er, rel=1e-2)


@pytest.mark.parametrize("k", [4, 10, 40])
def test_closed_form_and_large_k_agree_beyond_k4(k):
    cf = sm.alpha_corrected(k, 2, "closed_form")
    lk = sm.alpha_corrected(k, 2, "large_k")
    assert lk == pytest.approx(cf, rel=5e-3)


def test_closed_form_domain_error_at_k1_goe():
    # discriminant turns negative there; callers are pointed at other modes
    with pytest.raises(NumericalError):
        sm.alpha_corrected(1, 1, "closed_form")


def test_auto_alpha_mode_policy():
    assert sm.alpha_corrected(2, 1) == sm.alpha_corrected(2, 1, "closed_form")
    assert sm.alpha_corrected(3, 2) == sm.alpha_corrected(3, 2, "closed_form")
    assert sm.alpha_corrected(2, 4) == sm.alpha_corrected(2, 4, "large_k")
    assert sm.alpha_corrected(4, 1) == sm.alpha_corrected(4, 1, "large_k")
    assert sm.alpha_corrected(1, 1) == sm.alpha_corrected(1, 1, "large_k")


@pytest.mark.parametrize("alpha, k", [(1.0, 1), (4.0, 2), (26.0, 3), (188.0, 18)])
def test_skewness_formula_matches_quadrature(alpha, k):
    spec = sm._power_gauss_spec("old", k, 1, alpha, "exact")
    mean = quad_moment(spec, 1)
    mu2 = quad_moment(spec, 2, about=mean)
    mu3 = quad_moment(spec, 3, about=mean)
    assert sm.skewness_of_surmise(alpha) == pytest.approx(mu3 / mu2**1.5, abs=1e-7)


def test_skewness_approaches_asymptote():
    assert sm.skewness_of_surmise(50.0) == pytest.approx(0.1, rel=5e-2)
    assert sm.skewness_of_surmise(200.0) == pytest.approx(1 / math.sqrt(400.0), rel=1e-2)
    # continuity across the exact/asymptote switch at alpha = 500
    below = sm.skewness_of_surmise(499.999)
    above = sm.skewness_of_surmise(500.001)
    assert below == pytest.approx(above, rel=1e-3)


def test_excess_kurtosis_vanishes_like_inverse_alpha_squared():
    spec = sm._power_gauss_spec("old", 1, 1, 200.0, "exact")
    mean = quad_moment(spec, 1)
    mu2 = quad_moment(spec, 2, about=mean)
    mu4 = quad_moment(spec, 4, about=mean)
    kurt = mu4 / mu2**2 - 3.0
    assert kurt / (3.0 / (4.0 * 200.0**2)) == pytest.approx(1.0, abs=0.1)


def test_pdf_old_nn_reference_value():
    # (pi/2) exp(-pi/4) at s=1 for the orthogonal NN form
    assert sm.pdf_old(1, 1).pdf(1.0) == pytest.approx(
        (math.pi / 2) * math.exp(-math.pi / 4), abs=1e-12
    )


def test_wigner_nn_is_k1_member_of_old_family():
    for beta in (1, 2, 4):
        wig = sm.pdf_wigner_nn(beta)
        old = sm.pdf_old(1, beta, constants_mode="exact")
        s = np.linspace(0.0, 4.0, 101)
        np.testing.assert_allclose(wig.pdf(s), old.pdf(s), rtol=0, atol=1e-14)
        assert wig.alpha == old.alpha == float(beta)


def test_pdf_vanishes_at_origin_and_rejects_negative_s():
    for spec in (sm.pdf_old(3, 2), sm.pdf_corrected(3, 2), sm.pdf_poisson_knn(3)):
        assert spec.pdf(0.0) == 0.0
        with pytest.raises(ValidationError):
            spec.pdf(-0.1)
    assert sm.pdf_poisson_knn(1).pdf(0.0) == 1.0


@pytest.mark.parametrize("k", [1, 2, 5])
def test_poisson_knn_is_gamma_density(k):
    spec = sm.pdf_poisson_knn(k)
    s = np.linspace(0.0, 5.0 * k, 200)
    np.testing.assert_allclose(spec.pdf(s), gamma_dist.pdf(s, a=k), atol=1e-12)
    assert spec.mean == k
    assert spec.variance == k


def test_gaussian_surmise_is_normal_with_law_variance():
    spec = sm.pdf_gaussian(12, 1)
    var = sm.rmt_variance(12, 1)
    s = np.linspace(8.0, 16.0, 50)
    np.testing.assert_allclose(spec.pdf(s), norm_dist.pdf(s, loc=12.0, scale=math.sqrt(var)), atol=1e-12)


def test_nn_corrected_gue_variance_pins_exact_value():
    spec = sm.pdf_nn_corrected_gue()
    assert spec.alpha == sm.NN_CORRECTED_GUE_EXPONENT
    assert spec.variance == pytest.approx(sm.NN_CORRECTED_GUE_VARIANCE, abs=1e-4)
    _, mean, var = sm.pdf_quadrature_moments(spec)
    assert mean == pytest.approx(1.0, abs=1e-6)
    assert var == pytest.approx(sm.NN_CORRECTED_GUE_VARIANCE, abs=1e-4)


def test_pdf_accepts_arrays_and_scalars_consistently():
    spec = sm.pdf_corrected(4, 2)
    s = np.array([0.0, 0.5, 4.0, 9.0])
    vec = spec.pdf(s)
    assert vec.shape == s.shape
    for si, vi in zip(s, vec):
        assert spec.pdf(float(si)) == vi
    assert spec(2.0) == spec.pdf(2.0)


def test_log_c_representation_survives_linear_underflow():
    # at k=100 the linear-scale C is far below the double floor, but the
    # density itself is still evaluable through log space
    spec = sm.pdf_corrected(100, 4, constants_mode="exact")
    assert spec.log_c < -700.0
    assert spec.pdf(100.0) > 0.1

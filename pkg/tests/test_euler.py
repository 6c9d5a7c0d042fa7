"""Euler products, star regions, predictions, and consistency heuristics."""

import math

import numpy as np
import pytest

from mvlab.errors import DomainError, ValidationError
from mvlab.euler import (
    DivergenceVerdict,
    EulerProductResult,
    StarRegion,
    average_radius,
    divergence_heuristic,
    estimate_tau,
    euler_product,
    laplace_consistency,
    prediction_report,
    prime_product_linear,
    region_contains,
    thm1_predict,
    thm3_predict,
    thm4_predict,
    wirsing_prediction,
)
from mvlab.mfunc import (
    FnPair,
    MultiplicativeFn,
    character_twist,
    divisor,
    eps,
    liouville,
    moebius,
    one,
    random_on_primes,
    twist,
)
from mvlab.summatory import summatory_table

EULER_GAMMA = float(np.euler_gamma)


def _collapsing():
    """Custom function whose Euler factor at p = 2 is exactly 0."""

    def ev(p, k):
        if p == 2 and k == 1:
            return -2.0
        return 0.0

    return MultiplicativeFn(name="collapsing", eval=ev, prime_bound=2.0,
                            real=True)


# ---------------------------------------------------------------------------
# products


def test_product_trivial_cases(pt):
    res = euler_product(one(), 3, pt)
    # (1 - 1/2)^{-1} (1 - 1/3)^{-1} = 3 up to the series floor
    assert res.value.real == pytest.approx(3.0, rel=1e-12)
    assert res.value.imag == 0.0
    res_eps = euler_product(eps(), 10**4, pt)
    assert res_eps.value == 1.0
    assert res_eps.min_factor_modulus == 1.0
    assert res_eps.truncated_terms == 0
    empty = euler_product(one(), 1.5, pt)
    assert empty.value == 1.0 and empty.log_value == 0.0


def test_product_matches_brute_force_small(pt):
    for f in (one(), moebius(), twist(one(), 1.0), divisor()):
        res = euler_product(f, 100, pt)
        expected = 1.0 + 0j
        for p in (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47,
                  53, 59, 61, 67, 71, 73, 79, 83, 89, 97):
            factor = 1.0 + 0j
            for k in range(1, 64):
                term = complex(f(p, k)) / p**k
                factor += term
                if abs(term) < 1e-20 * abs(factor):
                    break
            expected *= factor
        assert res.value == pytest.approx(expected, rel=1e-12)
        assert np.exp(res.log_value) == pytest.approx(res.value, rel=1e-13)


def test_product_mertens_growth(pt):
    x = 10**6
    res = euler_product(one(), x, pt)
    assert res.value.real == pytest.approx(
        math.exp(EULER_GAMMA) * math.log(x), rel=2e-4)


def test_product_closed_form_relations(pt):
    x = 10**5
    v_one = euler_product(one(), x, pt).value.real
    v_div = euler_product(divisor(), x, pt).value.real
    v_liou = euler_product(liouville(), x, pt).value.real
    lin_one = prime_product_linear(one(), x, pt).real
    # divisor factor is the square of the one() factor
    assert v_div == pytest.approx(v_one**2, rel=1e-10)
    # liouville factor is 1/(1 + 1/p), the reciprocal of the linear product
    assert v_liou * lin_one == pytest.approx(1.0, rel=1e-10)


def test_product_vanishing_flag(pt):
    res = euler_product(_collapsing(), 10, pt)
    assert res.min_factor_modulus == 0.0
    assert res.vanishing
    assert res.value == 0
    assert res.log_value.real == float("-inf")
    healthy = euler_product(moebius(), 10**4, pt)
    assert not healthy.vanishing


def test_product_truncation_counter(pt):
    # at the default floor the geometric series of one() reaches the power
    # cap for nearly every prime; a loose floor stops well short of it
    deep = euler_product(one(), 10**4, pt)
    assert deep.truncated_terms >= 1200
    shallow = euler_product(one(), 10**4, pt, tol=1e-6)
    assert shallow.truncated_terms == 0
    assert euler_product(moebius(), 10**4, pt).truncated_terms == 0
    assert shallow.value.real == pytest.approx(deep.value.real, rel=1e-5)


def test_product_validation(pt):
    with pytest.raises(DomainError):
        euler_product(one(), 10, pt, tol=0.0)
    with pytest.raises(DomainError):
        euler_product(one(), pt.limit * 2, pt)
    with pytest.raises(DomainError):
        prime_product_linear(one(), pt.limit * 2, pt)


# ---------------------------------------------------------------------------
# star regions


def test_disc_region_radius_and_membership():
    r = StarRegion.disc(0.8)
    assert average_radius(r) == pytest.approx(0.8, rel=1e-14)
    assert region_contains(r, 0.0)
    assert region_contains(r, 0.5 + 0.5j)
    assert region_contains(r, 0.8 + 0.0j)
    assert not region_contains(r, 0.80001 + 0.0j)
    assert region_contains(r, 0.80001 + 0.0j, slack=1e-3)


def test_cardioid_average_radius():
    r = StarRegion.from_function(lambda t: 1.0 + math.cos(t))
    assert average_radius(r) == pytest.approx(1.0, abs=1e-9)


def test_square_region_average_radius():
    a = 0.7
    r = StarRegion.from_function(lambda t: a / max(abs(math.cos(t)),
                                                   abs(math.sin(t))))
    closed_form = 4.0 * a / math.pi * math.log(1.0 + math.sqrt(2.0))
    # dense quadrature oracle for the same radial function
    thetas = np.linspace(0.0, 2.0 * np.pi, 10**6 + 1)
    w = a / np.maximum(np.abs(np.cos(thetas)), np.abs(np.sin(thetas)))
    dense = float(np.trapezoid(w, thetas) / (2.0 * np.pi))
    assert dense == pytest.approx(closed_form, rel=1e-9)
    assert average_radius(r) == pytest.approx(closed_form, rel=2e-6)
    # corner of the square is on the boundary, just outside is not
    corner = a * (1.0 + 1.0j)
    assert region_contains(r, corner, slack=1e-6)
    assert not region_contains(r, 1.001 * corner)


def test_star_region_validation():
    with pytest.raises(DomainError):
        StarRegion(np.ones(4))
    with pytest.raises(DomainError):
        StarRegion(np.array([1.0, -0.1] + [1.0] * 6))
    with pytest.raises(DomainError):
        StarRegion(np.array([1.0, np.inf] + [1.0] * 6))
    with pytest.raises(DomainError):
        StarRegion.disc(-1.0)


# ---------------------------------------------------------------------------
# scalar predictions


def test_estimate_tau_values(pt):
    t_one = estimate_tau(one(), 10**6, pt)
    assert abs(t_one - 1.0) <= 0.1
    t_div = estimate_tau(divisor(), 10**6, pt)
    assert t_div == pytest.approx(2.0 * t_one, rel=1e-12)
    assert estimate_tau(eps(), 10**4, pt) == 0.0
    with pytest.raises(DomainError):
        estimate_tau(one(), 2.5, pt)


def test_wirsing_prediction_one(ft, pt):
    x = 10**6
    pred = wirsing_prediction(one(), x, 1.0, pt)
    reference = summatory_table(one(), [x], ft)[0].value.real
    assert pred.real / reference == pytest.approx(1.0, abs=1e-3)


def test_wirsing_prediction_divisor(ft, pt):
    x = 10**6
    pred = wirsing_prediction(divisor(), x, 2.0, pt)
    reference = summatory_table(divisor(), [x], ft)[0].value.real
    rel = pred.real / reference - 1.0
    assert abs(rel) <= 0.02
    with pytest.raises(DomainError):
        wirsing_prediction(divisor(), x, 0.0, pt)


# ---------------------------------------------------------------------------
# harmonic-sum prediction


def test_harmonic_prediction_identity_pairs(ft, pt):
    for g in (one(), divisor(), random_on_primes(4)):
        pred = thm1_predict(FnPair(h=g, g=g), 10**4, ft, pt)
        assert pred.ratio == 1.0 + 0j
        assert pred.case_tag == "thm1"
        names = [a.name for a in pred.audits]
        assert "domination-spot-check" in names
        assert "comparison-series" in names


def test_harmonic_prediction_moebius(ft, pt):
    x = 10**5
    pred = thm1_predict(FnPair(h=moebius(), g=one()), x, ft, pt)
    scale = summatory_table(one(), [x], ft)[0].harmonic.real
    assert abs(pred.predicted) / scale <= 0.01
    assert abs(pred.reference) / scale <= 0.01
    statuses = {a.name: a.status for a in pred.audits}
    assert statuses["domination-spot-check"] == "pass"
    assert statuses["comparison-series"] == "warn"  # the series diverges


def test_harmonic_prediction_character_drift(ft, pt):
    # bounded harmonic sums: the ratio drifts toward exp(-gamma) because the
    # comparison-scale slack dominates; the gap shrinks along the grid
    pair = FnPair(h=character_twist(one(), 5, 2), g=one())
    target = math.exp(-EULER_GAMMA)
    frozen = {10**4: 0.5967, 10**5: 0.5896, 10**6: 0.5849}
    gaps = []
    for x, expected in frozen.items():
        pred = thm1_predict(pair, x, ft, pt)
        r = abs(pred.ratio)
        assert r == pytest.approx(expected, abs=5e-4)
        gaps.append(abs(r - target))
    assert gaps[0] > gaps[1] > gaps[2]


def test_harmonic_prediction_vanishing_paths(ft, pt):
    with pytest.raises(ValidationError):
        thm1_predict(FnPair(h=one(), g=_collapsing()), 100, ft, pt)
    pred = thm1_predict(FnPair(h=_collapsing(), g=one()), 100, ft, pt)
    warn_names = [a.name for a in pred.audits if a.status == "warn"]
    assert "numerator-factor" in warn_names
    assert pred.predicted == 0


# ---------------------------------------------------------------------------
# plain-sum prediction with a value region


def test_region_prediction_identity(ft, pt):
    region = StarRegion.disc(1.0)
    pred = thm3_predict(FnPair(h=one(), g=one()), region, 10**4, ft, pt, c=1.05)
    assert pred.ratio == 1.0 + 0j
    statuses = {a.name: a.status for a in pred.audits}
    assert statuses["region-average-radius"] == "pass"
    assert statuses["region-membership"] == "pass"


def test_region_prediction_audit_warnings(ft, pt):
    small = StarRegion.disc(0.5)
    pred = thm3_predict(FnPair(h=one(), g=one()), small, 10**4, ft, pt, c=1.0)
    statuses = {a.name: a.status for a in pred.audits}
    assert statuses["region-membership"] == "warn"  # all values sit at 1 > 0.5
    big = StarRegion.disc(1.2)
    pred2 = thm3_predict(FnPair(h=one(), g=one()), big, 10**4, ft, pt, c=1.0)
    statuses2 = {a.name: a.status for a in pred2.audits}
    assert statuses2["region-average-radius"] == "warn"
    assert statuses2["region-membership"] == "pass"


def test_region_prediction_character_tracking(ft, pt):
    # reference sum of the character vanishes exactly on full periods, so the
    # meaningful drift is |predicted - reference| / sum g(n)
    x = 10**6
    pair = FnPair(h=character_twist(one(), 5, 2), g=one())
    pred = thm3_predict(pair, StarRegion.disc(1.0), x, ft, pt, c=1.05)
    assert pred.reference == 0
    assert math.isnan(pred.ratio.real)
    scale = summatory_table(one(), [x], ft)[0].value.real
    assert abs(pred.predicted - pred.reference) / scale <= 0.05


# ---------------------------------------------------------------------------
# twisted prediction


def test_twisted_prediction_cancels_pure_phase(ft, pt):
    # h(n) = n^{i t0}: the twist at t = -t0 restores the constant function
    x = 10**4
    pair = FnPair(h=twist(one(), 1.0), g=one())
    pred = thm4_predict(pair, -1.0, x, ft, pt)
    assert pred.case_tag == "thm4_case_i"
    assert abs(pred.ratio - 1.0) <= 0.01


def test_twisted_prediction_zero_frequency_identity(ft, pt):
    x = 10**4
    pair = FnPair(h=moebius(), g=one())
    pred = thm4_predict(pair, 0.0, x, ft, pt)
    ph = euler_product(moebius(), x, pt)
    pg = euler_product(one(), x, pt)
    a_val = summatory_table(one(), [x], ft)[0].value
    expected = complex(np.exp(ph.log_value - pg.log_value)) * a_val
    assert pred.predicted == pytest.approx(expected, rel=1e-13)


# ---------------------------------------------------------------------------
# heuristics


def test_divergence_heuristic_identity_pair(pt):
    grid = np.geomspace(100.0, 10**6, 8)
    verdict = divergence_heuristic(FnPair(h=one(), g=one()), 0.0, grid, pt)
    assert isinstance(verdict, DivergenceVerdict)
    assert verdict.classification == "converging"
    assert verdict.slope == pytest.approx(0.0, abs=1e-12)
    assert verdict.partial_sums == tuple([0.0] * 8)


def test_divergence_heuristic_frozen_slopes(pt):
    grid = np.geomspace(100.0, 10**6, 8)
    liou = divergence_heuristic(FnPair(h=liouville(), g=one()), 0.0, grid, pt)
    assert liou.classification == "diverging"
    assert liou.slope == pytest.approx(1.9721, abs=0.05)
    char = divergence_heuristic(
        FnPair(h=character_twist(one(), 5, 2), g=one()), 0.0, grid, pt)
    assert char.classification == "diverging"
    assert char.slope == pytest.approx(1.0011, abs=0.05)
    assert char.max_residual <= 0.05


def test_divergence_heuristic_twist_matters(pt):
    # twisting a pure phase back to zero kills the divergence
    grid = np.geomspace(100.0, 10**5, 6)
    pair = FnPair(h=twist(one(), 1.5), g=one())
    untwisted = divergence_heuristic(pair, -1.5, grid, pt)
    assert untwisted.classification == "converging"
    assert untwisted.slope == pytest.approx(0.0, abs=1e-12)
    raw = divergence_heuristic(pair, 0.0, grid, pt)
    assert raw.slope > 0.3


def test_divergence_heuristic_validation(pt):
    with pytest.raises(DomainError):
        divergence_heuristic(FnPair(h=one(), g=one()), 0.0, [10.0, 100.0], pt)
    with pytest.raises(DomainError):
        divergence_heuristic(FnPair(h=one(), g=one()), 0.0,
                             [100.0, 50.0, 10.0], pt)
    with pytest.raises(DomainError):
        divergence_heuristic(FnPair(h=one(), g=one()), 0.0,
                             [10.0, 100.0, pt.limit * 2.0], pt)


def test_laplace_consistency_identity(ft, pt):
    check = laplace_consistency(FnPair(h=one(), g=one()), 10**4, ft, pt)
    assert check.from_products == 3.0
    assert check.from_partial_sums == 3.0
    assert check.rel_diff == 0.0
    assert check.s == pytest.approx(1.0 / math.log(10**4))


def test_laplace_consistency_nontrivial(ft, pt):
    moeb = laplace_consistency(FnPair(h=moebius(), g=one()), 10**4, ft, pt)
    assert moeb.rel_diff <= 1e-3
    char = laplace_consistency(
        FnPair(h=character_twist(one(), 5, 2), g=one()), 10**4, ft, pt)
    assert char.rel_diff <= 0.05
    # a factor engineered to vanish after the 1/log x damping
    s = 1.0 / math.log(100)
    shifted_zero = MultiplicativeFn(
        name="shiftedzero",
        eval=lambda p, k: -2.0 * 2.0**s if (p == 2 and k == 1) else 0.0,
        prime_bound=3.0, real=True)
    with pytest.raises(ValidationError):
        laplace_consistency(FnPair(h=one(), g=shifted_zero), 100, ft, pt)


# ---------------------------------------------------------------------------
# report schema


def test_prediction_report_schema(ft, pt):
    pred = thm1_predict(FnPair(h=moebius(), g=one()), 10**3, ft, pt)
    report = prediction_report(pred)
    assert set(report) == {"case", "x", "predicted", "reference", "ratio",
                           "audits"}
    assert set(report["predicted"]) == {"re", "im"}
    assert set(report["reference"]) == {"re", "im"}
    assert set(report["ratio"]) == {"re", "im"}
    for audit in report["audits"]:
        assert set(audit) == {"name", "status", "detail"}
        assert audit["status"] in {"pass", "warn"}
    assert report["case"] == "thm1"
    assert isinstance(report["x"], float)

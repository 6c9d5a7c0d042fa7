"""Partial-sum engine: exact values, checkpoint tables, lemma-style bounds."""

import io
import math

import numpy as np
import pytest

from mvlab.errors import DomainError, ValidationError
from mvlab.mfunc import (
    character_twist,
    divisor,
    eval_at,
    liouville,
    moebius,
    one,
    random_on_primes,
    twist,
)
from mvlab.summatory import (
    SummatoryPoint,
    dirichlet_series_partial,
    lemma1_bound,
    lemma2_ratio,
    lemma3_ratio,
    prime_powers,
    prime_sum_table,
    summatory_table,
    values_array,
    write_summatory_csv,
)

# exact integer checkpoint sums, cross-checked against the hyperbola
# identity (divisor) and published tables (moebius, liouville)
DIVISOR_SUM = {10**4: 93668, 10**5: 1166750, 10**6: 13970034}
MERTENS = {10**4: -23, 10**5: -48, 10**6: 212}
LIOUVILLE_SUM = {10**5: -288, 10**6: -530}


def _trial_primes(n):
    sieve = np.ones(n + 1, dtype=bool)
    sieve[:2] = False
    for p in range(2, int(n**0.5) + 1):
        if sieve[p]:
            sieve[p * p :: p] = False
    return np.flatnonzero(sieve)


# ---------------------------------------------------------------------------
# values_array


def test_values_array_matches_pointwise_evaluation(ft):
    fns = [divisor(), moebius(), liouville(),
           twist(random_on_primes(12), 0.3), character_twist(one(), 5, 1)]
    for f in fns:
        v = values_array(f, 2000, ft)
        assert v[0] == 0 and v[1] == 1
        for n in range(2, 2001):
            assert complex(v[n]) == pytest.approx(
                eval_at(f, n, ft), rel=1e-12, abs=1e-13)


def test_values_array_dtypes(ft):
    assert values_array(divisor(), 100, ft).dtype == np.float64
    assert values_array(twist(one(), 1.0), 100, ft).dtype == np.complex128


def test_values_array_range_checks(ft):
    with pytest.raises(DomainError):
        values_array(one(), 0, ft)
    with pytest.raises(DomainError):
        values_array(one(), ft.limit + 1, ft)


# ---------------------------------------------------------------------------
# checkpoint tables


def _hyperbola_divisor_sum(x):
    # sum_{n<=x} d(n) = 2 sum_{d<=sqrt(x)} floor(x/d) - floor(sqrt(x))^2
    r = math.isqrt(x)
    return 2 * sum(x // d for d in range(1, r + 1)) - r * r


def test_divisor_checkpoints_match_hyperbola_identity(ft):
    xs = sorted(DIVISOR_SUM)
    points = summatory_table(divisor(), xs, ft)
    for x, point in zip(xs, points):
        exact = _hyperbola_divisor_sum(x)
        assert exact == DIVISOR_SUM[x]
        assert point.value.real == exact
        assert point.value.imag == 0.0


def test_moebius_and_liouville_checkpoints(ft):
    m_pts = summatory_table(moebius(), sorted(MERTENS), ft)
    for x, point in zip(sorted(MERTENS), m_pts):
        assert point.value.real == MERTENS[x]
    l_pts = summatory_table(liouville(), sorted(LIOUVILLE_SUM), ft)
    for x, point in zip(sorted(LIOUVILLE_SUM), l_pts):
        assert point.value.real == LIOUVILLE_SUM[x]


def test_harmonic_column_matches_direct_sum(ft):
    point = summatory_table(one(), [5000], ft)[0]
    expected = math.fsum(1.0 / n for n in range(1, 5001))
    assert point.harmonic.real == pytest.approx(expected, rel=1e-14)
    assert point.value.real == 5000.0


def test_fractional_and_tiny_checkpoints(ft):
    points = summatory_table(one(), [0.5, 1.0, 2.7], ft)
    assert points[0].value == 0
    assert points[1].value == 1
    assert points[2].value == 2
    assert points[2].harmonic == pytest.approx(1.5)


def test_checkpoint_validation(ft):
    with pytest.raises(DomainError):
        summatory_table(one(), [100, 10], ft)
    with pytest.raises(DomainError):
        summatory_table(one(), [ft.limit + 1], ft)
    with pytest.raises(DomainError):
        summatory_table(one(), [-1.0, 10.0], ft)
    assert summatory_table(one(), [], ft) == []


# ---------------------------------------------------------------------------
# prime sums and prime powers


def test_prime_sum_table_matches_explicit_loop(pt):
    f = twist(divisor(), 0.4)
    res = prime_sum_table(f, 10, 5000, pt)
    ps = [int(p) for p in _trial_primes(5000) if p > 10]
    recip = sum(complex(f(p, 1)) / p for p in ps)
    logw = sum(complex(f(p, 1)) * math.log(p) / p for p in ps)
    assert res.recip == pytest.approx(recip, rel=1e-12)
    assert res.log_weighted == pytest.approx(logw, rel=1e-12)


def test_prime_sum_table_includes_two_when_a_is_one(pt):
    res = prime_sum_table(one(), 1, 2, pt)
    assert res.recip == pytest.approx(0.5)


def test_prime_sum_table_empty_and_errors(pt):
    res = prime_sum_table(one(), 23, 28, pt)
    assert res.recip == 0 and res.log_weighted == 0
    with pytest.raises(DomainError):
        prime_sum_table(one(), 0, 10, pt)
    with pytest.raises(DomainError):
        prime_sum_table(one(), 10, pt.limit + 1, pt)


def test_prime_powers_match_brute_force(pt):
    n_max = 1000
    q, p, k = prime_powers(n_max, pt)
    brute = []
    for pp in _trial_primes(n_max).tolist():
        pk, kk = pp, 1
        while pk <= n_max:
            brute.append((pk, pp, kk))
            pk *= pp
            kk += 1
    brute.sort()
    assert [tuple(t) for t in zip(q.tolist(), p.tolist(), k.tolist())] == brute
    assert np.all(p**k == q)


# ---------------------------------------------------------------------------
# explicit bounds


def test_nonnegative_upper_bound_holds_on_seeded_battery(ft, pt):
    for seed in range(10):
        g = random_on_primes(seed)
        lhs, rhs, dtilde = lemma1_bound(g, 2000, ft, pt)
        assert lhs <= rhs
        assert dtilde >= 0.0


def test_dtilde_matches_integer_scan(ft, pt):
    g = random_on_primes(3)
    x = 500
    _, _, dtilde = lemma1_bound(g, x, ft, pt)
    # the sup over real y is attained at prime-power jumps, all integers
    q = []
    for p in _trial_primes(x).tolist():
        pk, kk = p, 1
        while pk <= x:
            q.append((pk, p, kk))
            pk *= p
            kk += 1
    q.sort()
    acc, best = 0.0, 0.0
    running = {(pk, p, kk): g(p, kk).real for pk, p, kk in q}
    for y in range(1, x + 1):
        for (pk, p, kk), gval in running.items():
            if pk == y:
                acc += gval * math.log(pk)
        best = max(best, acc / y)
    assert dtilde == pytest.approx(best, rel=1e-12)


def test_lemma1_rejects_signed_functions(ft, pt):
    with pytest.raises(ValidationError):
        lemma1_bound(moebius(), 1000, ft, pt)
    with pytest.raises(DomainError):
        lemma1_bound(one(), 1.5, ft, pt)


def test_harmonic_to_product_ratio_oracle(ft, pt):
    x = 10**4
    ratio = lemma2_ratio(one(), x, ft, pt)
    harmonic = math.fsum(1.0 / n for n in range(1, x + 1))
    prod = math.exp(math.fsum(math.log1p(1.0 / p) for p in _trial_primes(x)))
    assert ratio == pytest.approx(harmonic / prod, rel=1e-10)
    assert 0.0 < ratio < 10.0
    with pytest.raises(ValidationError):
        lemma2_ratio(liouville(), x, ft, pt)


def test_windowed_harmonic_ratio(ft):
    x = 10**4
    val = lemma3_ratio(one(), 200, 5000, x, ft)
    window = math.fsum(1.0 / n for n in range(201, 5001))
    scale = (math.log(math.log(5000) / math.log(200)) + 1 / math.log(x))
    base = math.fsum(1.0 / n for n in range(1, x + 1))
    assert val == pytest.approx(window / (scale * base), rel=1e-10)
    assert lemma3_ratio(one(), 300, 300, x, ft) == 0.0
    with pytest.raises(DomainError):
        lemma3_ratio(one(), 50, 5000, x, ft)  # u below sqrt(x)
    with pytest.raises(ValidationError):
        lemma3_ratio(moebius(), 200, 5000, x, ft)


# ---------------------------------------------------------------------------
# Dirichlet series tails


def test_partial_series_brackets_zeta_two(ft):
    n = 10**5
    val = dirichlet_series_partial(one(), 1.0, n, ft).real
    tail = math.pi**2 / 6 - val
    assert 1.0 / (n + 1) < tail < 1.0 / n


def test_partial_series_moebius_near_inverse_zeta(ft):
    n = 10**5
    val = dirichlet_series_partial(moebius(), 1.0, n, ft).real
    assert abs(val - 6.0 / math.pi**2) < 1.0 / n


def test_partial_series_matches_small_loop(ft):
    f = divisor()
    val = dirichlet_series_partial(f, 0.5, 200, ft)
    expected = math.fsum(eval_at(f, n, ft).real * n**-1.5 for n in range(1, 201))
    assert val.real == pytest.approx(expected, rel=1e-13)
    assert val.imag == 0.0
    with pytest.raises(DomainError):
        dirichlet_series_partial(one(), 0.0, 100, ft)
    with pytest.raises(DomainError):
        dirichlet_series_partial(one(), 1.0, ft.limit + 1, ft)


# ---------------------------------------------------------------------------
# serialization


def test_summatory_csv_golden_bytes():
    points = [
        SummatoryPoint(x=10.0, value=(3 + 0j), harmonic=(1.5 + 0j)),
        SummatoryPoint(x=100.0, value=(-2 + 1j), harmonic=(0.25 - 0.5j)),
    ]
    buf = io.StringIO()
    write_summatory_csv(points, buf)
    assert buf.getvalue() == (
        "x,re_value,im_value,re_harmonic,im_harmonic\n"
        "10.0,3.0,0.0,1.5,0.0\n"
        "100.0,-2.0,1.0,0.25,-0.5\n"
    )

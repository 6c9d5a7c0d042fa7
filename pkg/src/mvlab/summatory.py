"""Partial sums of multiplicative functions over n <= x.

The engine computes f(n) for every n <= N in one vectorized pass: for each
prime power p^k <= N it multiplies the slots of exact p-valuation k by
f(p^k), so each n receives exactly one factor per prime dividing it.
Checkpoint sums then use compensated prefix reductions, making tables
deterministic and independent of any internal chunking.
"""

import csv
import io
import math
from dataclasses import dataclass

import numpy as np

from .accum import neumaier_sum, prefix_sums_at
from .errors import DomainError, ValidationError
from .mfunc import MultiplicativeFn
from .sieve import FactorTable, PrimeTable

__all__ = [
    "SummatoryPoint",
    "PrimeSumPoint",
    "values_array",
    "summatory_table",
    "prime_sum_table",
    "lemma1_bound",
    "lemma2_ratio",
    "lemma3_ratio",
    "dirichlet_series_partial",
    "prime_powers",
    "write_summatory_csv",
]


@dataclass(frozen=True)
class SummatoryPoint:
    """Partial sums at one checkpoint: value = sum f(n), harmonic = sum f(n)/n."""

    x: float
    value: complex
    harmonic: complex


@dataclass(frozen=True)
class PrimeSumPoint:
    """Prime sums over a < p <= b: recip = sum f(p)/p, log_weighted = sum f(p) log p / p."""

    x: float
    recip: complex
    log_weighted: complex


def values_array(f: MultiplicativeFn, n_max: int, table: FactorTable) -> np.ndarray:
    """Array v with v[n] = f(n) for 0 <= n <= n_max (v[0] = 0, v[1] = 1).

    Args:
        f: function to evaluate.
        n_max: inclusive bound, 1 <= n_max <= table.limit.
        table: factor table covering n_max (supplies the prime list).

    Returns:
        float64 array when f is real-valued, complex128 otherwise.
    """
    n_max = int(n_max)
    if n_max < 1 or n_max > table.limit:
        raise DomainError(f"n_max={n_max} outside table range [1, {table.limit}]")
    dtype = np.float64 if f.is_real else np.complex128
    v = np.ones(n_max + 1, dtype=dtype)
    v[0] = 0.0
    if n_max == 1:
        return v
    idx = np.arange(n_max + 1, dtype=np.int64)
    primes = idx[2:][table.spf[2 : n_max + 1] == idx[2:]]
    root = math.isqrt(n_max)
    n_small = int(np.searchsorted(primes, root, side="right"))

    # p > sqrt(n_max): every multiple m*p <= n_max has m < p, valuation 1
    large = primes[n_small:]
    vals = f.values_on_primes(large)
    for p, fp in zip(large, vals):
        v[p::p] *= fp

    # p <= sqrt(n_max): pick out exact valuation k with a periodic mask on
    # the multiplier m of p^k (keep m not divisible by p)
    for p in primes[:n_small].tolist():
        pk = p
        k = 1
        while pk <= n_max:
            m_count = n_max // pk
            keep = np.ones(p, dtype=bool)
            keep[p - 1] = False  # m = p, 2p, ... have higher valuation
            mask = np.resize(keep, m_count)
            view = v[pk::pk]
            fpk = complex(f.eval(p, k))
            view[mask] *= fpk.real if dtype == np.float64 else fpk
            if pk > n_max // p:
                break
            pk *= p
            k += 1
    return v


def summatory_table(f: MultiplicativeFn, xs, table: FactorTable) -> list[SummatoryPoint]:
    """Partial sums sum_{n<=x} f(n) and sum_{n<=x} f(n)/n at each checkpoint.

    One values pass covers all checkpoints; sums are compensated and
    deterministic.

    Args:
        f: function to sum.
        xs: ascending checkpoints, max(xs) <= table.limit.
        table: factor table covering max(xs).
    """
    xs = [float(x) for x in xs]
    if any(b < a for a, b in zip(xs, xs[1:])):
        raise DomainError("checkpoints must be ascending")
    if not xs:
        return []
    if xs[-1] > table.limit:
        raise DomainError(f"checkpoint {xs[-1]} exceeds table limit {table.limit}")
    if xs[0] < 0:
        raise DomainError("checkpoints must be non-negative")
    n_max = int(xs[-1])
    v = values_array(f, max(n_max, 1), table)
    harm = v / np.maximum(np.arange(v.size, dtype=np.float64), 1.0)
    stops = np.array([int(x) + 1 for x in xs], dtype=np.int64)
    stops = np.minimum(stops, v.size)
    vals = prefix_sums_at(v, stops)
    harms = prefix_sums_at(harm, stops)
    return [
        SummatoryPoint(x=x, value=complex(vv), harmonic=complex(hh))
        for x, vv, hh in zip(xs, vals, harms)
    ]


def prime_sum_table(f: MultiplicativeFn, a, b, pt: PrimeTable) -> PrimeSumPoint:
    """Prime sums of f(p)/p and f(p) log p / p over a < p <= b."""
    if not 1 <= a <= b:
        raise DomainError("need 1 <= a <= b")
    if b > pt.limit:
        raise DomainError(f"b={b} exceeds prime table limit {pt.limit}")
    ps = pt.between(a, b)
    if ps.size == 0:
        return PrimeSumPoint(x=float(b), recip=0j, log_weighted=0j)
    pf = ps.astype(np.float64)
    vals = f.values_on_primes(ps)
    recip = neumaier_sum(vals / pf)
    logw = neumaier_sum(vals * np.log(pf) / pf)
    return PrimeSumPoint(x=float(b), recip=complex(recip), log_weighted=complex(logw))


def prime_powers(n_max: int, pt: PrimeTable) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """All prime powers q = p^k <= n_max as (q, p, k), sorted by q."""
    ps = pt.upto(n_max)
    qs = [ps]
    pp = [ps]
    kk = [np.ones(ps.size, dtype=np.int64)]
    k = 2
    while True:
        cap = int(round(n_max ** (1.0 / k)))
        while cap**k > n_max:
            cap -= 1
        if cap < 2:
            break
        base = pt.upto(cap)
        qs.append(base**k)
        pp.append(base)
        kk.append(np.full(base.size, k, dtype=np.int64))
        k += 1
    q = np.concatenate(qs)
    order = np.argsort(q, kind="stable")
    return q[order], np.concatenate(pp)[order], np.concatenate(kk)[order]


def lemma1_bound(g: MultiplicativeFn, x, table: FactorTable,
                 pt: PrimeTable) -> tuple[float, float, float]:
    """Both sides of the explicit upper bound for sums of non-negative g.

    lhs = sum_{2<=n<=x} g(n); rhs = (x/log x + 10x/(log x)^2) * dtilde *
    sum_{n<=x} g(n)/n, where dtilde = sup over y in [1, x] of
    y^{-1} sum_{q<=y} g(q) log q with q running over prime powers.  The sup
    is attained at prime-power jump abscissae, so it is scanned exactly.

    Returns:
        (lhs, rhs, dtilde).
    """
    if not g.nonneg:
        raise ValidationError("lemma1_bound needs a non-negative function")
    x = float(x)
    if x < 2:
        raise DomainError("x must be >= 2")
    n_max = int(x)
    pts = summatory_table(g, [x], table)[0]
    lhs = float(pts.value.real) - 1.0  # drop the n=1 term
    q, p, k = prime_powers(n_max, pt)
    gq = np.empty(q.size)
    for kk in np.unique(k):
        sel = k == kk
        gq[sel] = g.values_on_powers(p[sel], int(kk)).real
    jumps = np.cumsum(gq * np.log(q.astype(np.float64)))
    dtilde = float(np.max(jumps / q)) if q.size else 0.0
    dtilde = max(dtilde, 0.0)  # y = 1 gives 0
    lx = math.log(x)
    rhs = (x / lx + 10.0 * x / lx**2) * dtilde * float(pts.harmonic.real)
    return lhs, rhs, dtilde


def lemma2_ratio(g: MultiplicativeFn, x, table: FactorTable, pt: PrimeTable) -> float:
    """Ratio sum_{n<=x} g(n)/n over prod_{p<=x}(1 + g(p)/p), for non-negative g.

    The source guarantees a positive floor for this ratio; only positivity
    and boundedness are tested, no specific constant.
    """
    if not g.nonneg:
        raise ValidationError("lemma2_ratio needs a non-negative function")
    harmonic = float(summatory_table(g, [x], table)[0].harmonic.real)
    ps = pt.upto(x)
    log_prod = neumaier_sum(np.log1p(g.values_on_primes(ps).real / ps))
    return harmonic / math.exp(log_prod)


def lemma3_ratio(g: MultiplicativeFn, u, v, x, table: FactorTable) -> float:
    """Windowed harmonic sum over (u, v] against its uniform bound scale.

    Returns (sum_{u<n<=v} g(n)/n) / ((log(log v / log u) + 1/log x) *
    sum_{n<=x} g(n)/n), for x^{1/2} <= u <= v <= x^{3/2}.
    """
    if not g.nonneg:
        raise ValidationError("lemma3_ratio needs a non-negative function")
    x = float(x)
    if not (x ** 0.5 <= u <= v <= x ** 1.5):
        raise DomainError("need x^(1/2) <= u <= v <= x^(3/2)")
    if v > table.limit:
        raise DomainError(f"v={v} exceeds table limit {table.limit}")
    if u == v:
        return 0.0
    pts = summatory_table(g, [u, v] if u < v else [v], table)
    window = float(pts[-1].harmonic.real - pts[0].harmonic.real)
    base = float(summatory_table(g, [x], table)[0].harmonic.real)
    scale = (math.log(math.log(v) / math.log(u)) + 1.0 / math.log(x)) * base
    return window / scale


def dirichlet_series_partial(f: MultiplicativeFn, s: float, n_max: int,
                             table: FactorTable) -> complex:
    """Truncated series sum_{n<=N} f(n) n^{-1-s} for s > 0."""
    if s <= 0:
        raise DomainError("s must be positive")
    if n_max > table.limit:
        raise DomainError(f"N={n_max} exceeds table limit {table.limit}")
    v = values_array(f, int(n_max), table)
    n = np.arange(v.size, dtype=np.float64)
    n[0] = 1.0
    return complex(neumaier_sum(v * n ** (-1.0 - s)))


def write_summatory_csv(points: list[SummatoryPoint], fh: io.TextIOBase) -> None:
    """Emit checkpoint rows as CSV: x, re_value, im_value, re_harmonic, im_harmonic."""
    writer = csv.writer(fh, lineterminator="\n")
    writer.writerow(["x", "re_value", "im_value", "re_harmonic", "im_harmonic"])
    for pt_ in points:
        writer.writerow([
            repr(pt_.x),
            repr(pt_.value.real),
            repr(pt_.value.imag),
            repr(pt_.harmonic.real),
            repr(pt_.harmonic.imag),
        ])

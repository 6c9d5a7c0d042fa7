"""Truncated Euler products, star regions, and mean-value predictions.

Products over p <= x are accumulated in log space (sum of principal-branch
factor logarithms) so that ~10^6 factors neither overflow nor lose relative
accuracy. Predictions divide a product ratio into a directly computed
partial sum; each prediction carries hypothesis audits rather than failing
hard, except where a vanishing denominator makes the ratio meaningless.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .accum import neumaier_sum
from .errors import DomainError, ValidationError
from .mfunc import FnPair, MultiplicativeFn, abs_fn, spot_check_domination, twist
from .sieve import FactorTable, PrimeTable
from .summatory import (
    dirichlet_series_partial,
    prime_sum_table,
    summatory_table,
)

# Per-factor series truncation: stop once p^k exceeds this hard cap even if
# the term is still above the relative floor; counts as a truncated factor.
POWER_CAP = 10**18
# |factor| below this reports the vanishing-factor condition.
VANISHING_FLOOR = 1e-12

# Slope thresholds for the log log x fit used by divergence_heuristic.
CONVERGING_SLOPE = 0.15
DIVERGING_SLOPE = 0.35

STAR_ANGLES = 4096


# ---------------------------------------------------------------------------
# Euler products


@dataclass(frozen=True)
class EulerProductResult:
    """Truncated Euler product over p <= x.

    Attributes:
        x: inclusive prime bound.
        value: product of factors 1 + f(p)/p + f(p^2)/p^2 + ...
        log_value: sum of principal-branch factor logarithms.
        min_factor_modulus: smallest |factor|; below 1e-12 the product is
            flagged as vanishing and downstream ratios refuse to divide by it.
        truncated_terms: count of factors whose series ended at the power
            cap rather than at the relative floor.
    """

    x: float
    value: complex
    log_value: complex
    min_factor_modulus: float
    truncated_terms: int

    @property
    def vanishing(self) -> bool:
        return self.min_factor_modulus < VANISHING_FLOOR


def euler_product(f: MultiplicativeFn, x, pt: PrimeTable,
                  tol: float = 1e-18) -> EulerProductResult:
    """Product over p <= x of the truncated series sum_k f(p^k) p^{-k}.

    Args:
        f: function to evaluate on prime powers.
        x: inclusive prime bound, x <= pt.limit.
        pt: prime table covering x.
        tol: relative floor; a factor's series stops once the latest term
            falls below tol * |factor so far| (or p^k would exceed 10^18).

    Returns:
        EulerProductResult with value = exp(log_value).
    """
    if tol <= 0:
        raise DomainError("tol must be positive")
    if x > pt.limit:
        raise DomainError(f"x={x} exceeds prime table limit {pt.limit}")
    ps = pt.upto(x)
    if ps.size == 0:
        return EulerProductResult(float(x), 1.0 + 0j, 0.0 + 0j, 1.0, 0)
    pf = ps.astype(np.float64)
    factor = np.ones(ps.size, dtype=np.float64 if f.is_real else np.complex128)
    idx = np.arange(ps.size)
    pk = pf.copy()
    truncated = 0
    k = 1
    while idx.size:
        term = f.values_on_powers(ps[idx], k) / pk
        factor[idx] += term
        significant = np.abs(term) >= tol * np.abs(factor[idx])
        can_grow = pk <= POWER_CAP / pf[idx]
        truncated += int(np.count_nonzero(significant & ~can_grow))
        cont = significant & can_grow
        idx = idx[cont]
        pk = pk[cont] * pf[idx]
        k += 1
    min_mod = float(np.min(np.abs(factor)))
    if min_mod == 0.0:
        # an exact zero factor annihilates the product; the compensated log
        # sum would turn -inf into nan, so short-circuit
        return EulerProductResult(float(x), 0j, complex(float("-inf"), 0.0),
                                  0.0, truncated)
    log_value = complex(neumaier_sum(np.log(factor.astype(np.complex128))))
    value = np.exp(log_value)
    if f.nonneg:
        value = complex(max(value.real, 0.0))
    return EulerProductResult(
        x=float(x),
        value=complex(value),
        log_value=log_value,
        min_factor_modulus=min_mod,
        truncated_terms=truncated,
    )


def prime_product_linear(f: MultiplicativeFn, x, pt: PrimeTable) -> complex:
    """First-order product prod_{p<=x} (1 + f(p)/p), accumulated in log space."""
    if x > pt.limit:
        raise DomainError(f"x={x} exceeds prime table limit {pt.limit}")
    ps = pt.upto(x)
    if ps.size == 0:
        return 1.0 + 0j
    factor = 1.0 + f.values_on_primes(ps) / ps
    return complex(np.exp(neumaier_sum(np.log(factor.astype(np.complex128)))))


def _shifted(f: MultiplicativeFn, s: float) -> MultiplicativeFn:
    """Damp by p^{-ks}: result(p^k) = f(p^k) p^{-ks} (real s > 0)."""
    s = float(s)

    def ev(p, k):
        return f.eval(p, k) * p ** (-k * s)

    def pvec(ps):
        return f.values_on_primes(ps) * ps.astype(np.float64) ** (-s)

    def kvec(ps, k):
        return f.values_on_powers(ps, k) * ps.astype(np.float64) ** (-k * s)

    return MultiplicativeFn(
        name=f"shift({f.name},{s!r})",
        eval=ev,
        prime_bound=f.prime_bound,
        nonneg=f.nonneg,
        real=f.real,
        prime_vec=pvec,
        power_vec=kvec,
    )


# ---------------------------------------------------------------------------
# star regions


@dataclass(frozen=True)
class StarRegion:
    """Star-shaped region {rho e^{i theta}: 0 <= rho <= w(theta)}.

    The radial function is sampled on a uniform angle grid over [0, 2pi);
    membership and quadrature interpolate linearly and wrap w(2pi) = w(0).
    """

    w: np.ndarray = field(repr=False)

    def __post_init__(self):
        w = np.asarray(self.w, dtype=np.float64)
        if w.ndim != 1 or w.size < 8:
            raise DomainError("radial grid must be 1-D with at least 8 angles")
        if not np.all(np.isfinite(w)) or np.any(w < 0):
            raise DomainError("radial samples must be finite and >= 0")
        object.__setattr__(self, "w", w)

    @classmethod
    def from_function(cls, radial, n: int = STAR_ANGLES) -> "StarRegion":
        """Sample w(theta) at n uniform angles in [0, 2pi)."""
        thetas = 2.0 * np.pi * np.arange(n) / n
        return cls(np.array([float(radial(t)) for t in thetas]))

    @classmethod
    def disc(cls, radius: float, n: int = STAR_ANGLES) -> "StarRegion":
        if radius < 0:
            raise DomainError("radius must be >= 0")
        return cls(np.full(n, float(radius)))


def average_radius(r: StarRegion) -> float:
    """Mean radius (2pi)^{-1} integral of w, by trapezoid on the wrapped grid."""
    closed = np.append(r.w, r.w[0])
    n = r.w.size
    return float(np.trapezoid(closed, dx=2.0 * np.pi / n) / (2.0 * np.pi))


def region_contains(r: StarRegion, z: complex, slack: float = 0.0) -> bool:
    """Whether |z| <= w(arg z) + slack, interpolating between grid angles."""
    z = complex(z)
    rho = abs(z)
    if rho == 0.0:
        return True
    n = r.w.size
    theta = math.atan2(z.imag, z.real) % (2.0 * math.pi)
    pos = theta * n / (2.0 * math.pi)
    i = int(pos) % n
    frac = pos - int(pos)
    w_here = (1.0 - frac) * r.w[i] + frac * r.w[(i + 1) % n]
    return rho <= w_here + slack


# ---------------------------------------------------------------------------
# scalar predictions


def estimate_tau(lam: MultiplicativeFn, x, pt: PrimeTable) -> float:
    """Mean prime log-density: sum_{p<=x} lam(p) log p / p divided by log x."""
    if x < 3:
        raise DomainError("x must be >= 3")
    sums = prime_sum_table(lam, 1, x, pt)
    return float(np.real(sums.log_weighted)) / math.log(x)


def wirsing_prediction(lam: MultiplicativeFn, x, tau: float, pt: PrimeTable,
                       tol: float = 1e-18) -> complex:
    """Mean-value prediction e^{-gamma tau}/Gamma(tau) * x/log x * prod_x(lam).

    Args:
        lam: non-negative multiplicative function.
        x: evaluation point, x <= pt.limit.
        tau: prime log-density parameter, > 0.
        pt: prime table.
        tol: Euler-product truncation floor.
    """
    if tau <= 0:
        raise DomainError("tau must be positive")
    prod = euler_product(lam, x, pt, tol)
    front = math.exp(-np.euler_gamma * tau) / math.gamma(tau)
    return complex(front * (x / math.log(x)) * prod.value)


# ---------------------------------------------------------------------------
# theorem predictions


@dataclass(frozen=True)
class Audit:
    """One hypothesis check attached to a prediction: pass/warn plus detail."""

    name: str
    status: str
    detail: str


@dataclass(frozen=True)
class TheoremPrediction:
    """A predicted mean value next to the directly computed reference sum.

    ratio = predicted/reference (nan when the reference vanishes).
    """

    x: float
    predicted: complex
    reference: complex
    ratio: complex
    case_tag: str
    audits: tuple[Audit, ...] = ()


def prediction_report(pred: TheoremPrediction) -> dict:
    """JSON-ready dict: {case, x, predicted:{re,im}, ..., audits:[...]}."""

    def c(z: complex) -> dict:
        return {"re": float(z.real), "im": float(z.imag)}

    return {
        "case": pred.case_tag,
        "x": float(pred.x),
        "predicted": c(pred.predicted),
        "reference": c(pred.reference),
        "ratio": c(pred.ratio),
        "audits": [
            {"name": a.name, "status": a.status, "detail": a.detail}
            for a in pred.audits
        ],
    }


def _ratio(predicted: complex, reference: complex) -> complex:
    if reference == 0:
        return complex(float("nan"), float("nan"))
    return predicted / reference


def _domination_audit(pair: FnPair, pt: PrimeTable) -> Audit:
    bad = spot_check_domination(pair, pt)
    status = "pass" if bad == 0 else "warn"
    return Audit("domination-spot-check", status,
                 f"{bad} sampled prime powers with |h| > g")


def _product_ratio(pair: FnPair, x, pt: PrimeTable, tol: float,
                   h_override: MultiplicativeFn | None = None) -> tuple[complex, list[Audit]]:
    """prod_x(h)/prod_x(g) with vanishing-factor handling.

    A vanishing g-factor is an error (the ratio is meaningless); a vanishing
    h-factor only zeroes the product and is reported as an audit.
    """
    h = pair.h if h_override is None else h_override
    ph = euler_product(h, x, pt, tol)
    pg = euler_product(pair.g, x, pt, tol)
    if pg.vanishing:
        raise ValidationError(
            f"vanishing Euler factor for dominant function {pair.g.name!r} "
            f"(min modulus {pg.min_factor_modulus:.3e})")
    audits = []
    if ph.vanishing:
        audits.append(Audit("numerator-factor", "warn",
                            f"vanishing factor in prod({h.name}); product is 0"))
    return complex(np.exp(ph.log_value - pg.log_value)), audits


def thm1_predict(pair: FnPair, x, table: FactorTable, pt: PrimeTable,
                 tol: float = 1e-18) -> TheoremPrediction:
    """Predict the harmonic sum of h as (prod_x(h)/prod_x(g)) * sum g(n)/n.

    The reference is the directly computed sum of h(n)/n over n <= x. When
    the prime comparison series between g and h diverges, the product ratio
    tends to 0; the prediction still uses it and an audit records the verdict.
    """
    ratio_prod, audits = _product_ratio(pair, x, pt, tol)
    pts_g = summatory_table(pair.g, [x], table)[0]
    pts_h = summatory_table(pair.h, [x], table)[0]
    predicted = ratio_prod * pts_g.harmonic
    reference = pts_h.harmonic
    audits.append(_domination_audit(pair, pt))
    lo = max(min(100.0, float(x) / 4.0), 1.5)
    if float(x) > 1.01 * lo:
        grid = np.geomspace(lo, float(x), 8)
        verdict = divergence_heuristic(pair, 0.0, grid, pt)
        status = "warn" if verdict.classification == "diverging" else "pass"
        audits.append(Audit(
            "comparison-series", status,
            f"{verdict.classification} (slope {verdict.slope:.3f} vs log log x); "
            "diverging means the product ratio tends to 0"))
    else:
        audits.append(Audit("comparison-series", "pass",
                            "not evaluated: x too small for a divergence grid"))
    return TheoremPrediction(float(x), complex(predicted), complex(reference),
                             _ratio(complex(predicted), complex(reference)),
                             "thm1", tuple(audits))


def thm3_predict(pair: FnPair, region: StarRegion, x, table: FactorTable,
                 pt: PrimeTable, c: float, tol: float = 1e-18) -> TheoremPrediction:
    """Predict sum h(n) as (prod_x(h)/prod_x(g)) * sum g(n), values in a star region.

    Audits: average radius of the region must stay below c, and sampled
    values h(p^k) must lie inside the region (failures downgrade to warnings
    recorded in the result).
    """
    ratio_prod, audits = _product_ratio(pair, x, pt, tol)
    pts_g = summatory_table(pair.g, [x], table)[0]
    pts_h = summatory_table(pair.h, [x], table)[0]
    predicted = ratio_prod * pts_g.value
    reference = pts_h.value
    avg = average_radius(region)
    audits.append(Audit(
        "region-average-radius", "pass" if avg < c else "warn",
        f"average radius {avg:.6f} vs required < {c}"))
    hi = min(pt.limit, 10**5)
    ps = pt.upto(hi)
    if ps.size > 120:
        keep = np.unique(np.concatenate([
            np.arange(20), np.linspace(0, ps.size - 1, 100).astype(int)]))
        ps = ps[keep]
    outside = 0
    for p in ps:
        for k in (1, 2, 3):
            if not region_contains(region, pair.h(int(p), k), slack=1e-9):
                outside += 1
    audits.append(Audit(
        "region-membership", "pass" if outside == 0 else "warn",
        f"{outside} sampled values h(p^k) outside the region"))
    audits.append(_domination_audit(pair, pt))
    return TheoremPrediction(float(x), complex(predicted), complex(reference),
                             _ratio(complex(predicted), complex(reference)),
                             "thm3", tuple(audits))


def thm4_predict(pair: FnPair, t: float, x, table: FactorTable,
                 pt: PrimeTable, tol: float = 1e-18) -> TheoremPrediction:
    """Predict sum h(n) via the twisted comparison at frequency t.

    predicted = (1 - it)^{-1} x^{-it} * (prod_x(h * p^{it}) / prod_x(g)) * sum g(n).
    At t = 0 this reduces to the un-twisted product-ratio prediction applied
    to the plain summatory function.
    """
    t = float(t)
    ratio_prod, audits = _product_ratio(pair, x, pt, tol,
                                        h_override=twist(pair.h, t))
    pts_g = summatory_table(pair.g, [x], table)[0]
    pts_h = summatory_table(pair.h, [x], table)[0]
    front = (1.0 / (1.0 - 1j * t)) * np.exp(-1j * t * math.log(x))
    predicted = front * ratio_prod * pts_g.value
    reference = pts_h.value
    audits.append(_domination_audit(pair, pt))
    return TheoremPrediction(float(x), complex(predicted), complex(reference),
                             _ratio(complex(predicted), complex(reference)),
                             "thm4_case_i", tuple(audits))


# ---------------------------------------------------------------------------
# heuristics and consistency checks


@dataclass(frozen=True)
class DivergenceVerdict:
    """Least-squares fit of comparison partial sums against log log x.

    classification is a heuristic label, never a proof: slopes below
    CONVERGING_SLOPE read as converging, above DIVERGING_SLOPE as diverging,
    anything else (or a poor fit) as inconclusive.
    """

    classification: str
    slope: float
    intercept: float
    max_residual: float
    partial_sums: tuple[float, ...]


def divergence_heuristic(pair: FnPair, t: float, x_grid, pt: PrimeTable) -> DivergenceVerdict:
    """Classify the comparison series sum_p p^{-1}(g(p) - Re h(p) p^{it}).

    Args:
        pair: dominated pair (h, g).
        t: twist frequency.
        x_grid: ascending abscissae within the prime table.
        pt: prime table.
    """
    xs = np.asarray(list(x_grid), dtype=np.float64)
    if xs.size < 3:
        raise DomainError("x_grid needs at least 3 points")
    if np.any(np.diff(xs) <= 0):
        raise DomainError("x_grid must be strictly ascending")
    if xs[-1] > pt.limit:
        raise DomainError(f"x_grid exceeds prime table limit {pt.limit}")
    ps = pt.upto(xs[-1])
    pf = ps.astype(np.float64)
    logs = np.log(pf)
    gv = np.real(pair.g.values_on_primes(ps))
    hv = pair.h.values_on_primes(ps).astype(np.complex128)
    terms = (gv - np.real(hv * np.exp(1j * t * logs))) / pf
    stops = np.searchsorted(ps, xs.astype(np.int64), side="right")
    csum = np.concatenate([[0.0], np.cumsum(terms)])
    partial = csum[stops]
    ll = np.log(np.log(xs))
    slope, intercept = np.polyfit(ll, partial, 1)
    resid = float(np.max(np.abs(partial - (slope * ll + intercept))))
    if abs(slope) <= CONVERGING_SLOPE:
        label = "converging"
    elif abs(slope) >= DIVERGING_SLOPE:
        label = "diverging"
    else:
        label = "inconclusive"
    return DivergenceVerdict(label, float(slope), float(intercept), resid,
                             tuple(float(v) for v in partial))


@dataclass(frozen=True)
class LaplaceCheck:
    """Euler-product vs partial-sum evaluation of the comparison transform."""

    s: float
    from_products: float
    from_partial_sums: float
    rel_diff: float


def laplace_consistency(pair: FnPair, x, table: FactorTable,
                        pt: PrimeTable) -> LaplaceCheck:
    """Compare two computations of the transform value f(s) at s = 1/log x.

    The transform pairs C(y) = 2 * sum g(n)/n + Re sum h(n)/n with the
    denominator D(y) = sum g(n)/n; its value satisfies
    f(s) = 2 + Re[prod(shifted h) / prod(shifted g)], which is confronted
    with the ratio of truncated Dirichlet series at the same shift.
    """
    s = 1.0 / math.log(x)
    ph = euler_product(_shifted(pair.h, s), x, pt)
    pg = euler_product(_shifted(pair.g, s), x, pt)
    if pg.vanishing:
        raise ValidationError("vanishing factor in the dominant product")
    from_products = 2.0 + float(np.real(np.exp(ph.log_value - pg.log_value)))
    n_max = int(x)
    d_hat = dirichlet_series_partial(pair.g, s, n_max, table)
    h_hat = dirichlet_series_partial(pair.h, s, n_max, table)
    if abs(d_hat) == 0:
        raise ValidationError("vanishing partial Dirichlet series for g")
    from_partial = 2.0 + float(np.real(h_hat)) / float(np.real(d_hat))
    rel = abs(from_products - from_partial) / max(abs(from_products), 1e-300)
    return LaplaceCheck(s, from_products, from_partial, rel)

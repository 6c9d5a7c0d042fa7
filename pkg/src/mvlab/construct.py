"""Constructive objects: interval-valued example functions and the greedy
prime-subsequence procedure with its turning points.

The example functions take values alpha/beta on primes in alternating
intervals (exp(2^k), exp(2^{k+1})], k = -1, 0, 1, ..., and vanish on all
higher prime powers; the variant additionally vanishes near each interval
endpoint.  Their prime-sum densities oscillate instead of converging, which
is what the oscillation and construction checks exercise.
"""

import csv
import math
from dataclasses import dataclass

import numpy as np

from .errors import ConstructionError, DomainError, ValidationError
from .mfunc import MultiplicativeFn
from .sieve import PrimeTable

_LN2 = math.log(2.0)


def _interval_index(u):
    """k with 2^k < u <= 2^{k+1} for u = log p (array or scalar)."""
    return np.ceil(np.log2(u)).astype(np.int64) - 1


def lambda0(alpha: float, beta: float) -> MultiplicativeFn:
    """Alternating-interval function: alpha on odd-index intervals
    (including the first interval (e^{1/2}, e]), beta on even, 0 at k >= 2.

    Args:
        alpha, beta: values with 0 < alpha < beta.
    """
    alpha = float(alpha)
    beta = float(beta)
    if not 0 < alpha < beta:
        raise DomainError("need 0 < alpha < beta")

    def pvec(ps):
        k = _interval_index(np.log(ps.astype(np.float64)))
        return np.where(k % 2 != 0, alpha, beta)

    def ev(p, k):
        if k >= 2:
            return 0.0
        idx = math.ceil(math.log2(math.log(p))) - 1
        return alpha if idx % 2 != 0 else beta

    return MultiplicativeFn(
        name=f"lambda0({alpha!r},{beta!r})",
        eval=ev,
        prime_bound=beta,
        nonneg=True,
        prime_vec=pvec,
        power_vec=lambda ps, k: pvec(ps) if k == 1 else np.zeros(ps.size),
    )


def _in_gap(u):
    """True where u = log p falls in a terminal gap (2^k - 2k log 2, 2^k]."""
    u = np.asarray(u, dtype=np.float64)
    kk = np.ceil(np.log2(u))
    hit = np.zeros(u.shape, dtype=bool)
    for k in (kk, kk + 1):  # the gap of the next power can reach below 2^kk
        top = 2.0**k
        hit |= (u > top - 2.0 * k * _LN2) & (u <= top)
    return hit


def lambda1(alpha: float, beta: float) -> MultiplicativeFn:
    """As lambda0, but zero on primes in (y (log y)^{-2}, y] for y = exp(2^k)."""
    base = lambda0(alpha, beta)

    def pvec(ps):
        u = np.log(ps.astype(np.float64))
        return np.where(_in_gap(u), 0.0, base.prime_vec(ps))

    def ev(p, k):
        if k >= 2:
            return 0.0
        if bool(_in_gap(np.array([math.log(p)]))[0]):
            return 0.0
        return base.eval(p, 1)

    return MultiplicativeFn(
        name=f"lambda1({float(alpha)!r},{float(beta)!r})",
        eval=ev,
        prime_bound=float(beta),
        nonneg=True,
        prime_vec=pvec,
        power_vec=lambda ps, k: pvec(ps) if k == 1 else np.zeros(ps.size),
    )


@dataclass(frozen=True)
class SubsequenceTrace:
    """Result of the greedy retained-prime construction.

    Attributes:
        alpha: target density.
        seed_prime: smallest prime t with sum_{p<=t} g(p) log p / p >= alpha log t.
        retained: boolean indicator aligned with the primes <= x_max.
        turning_points: primes where S(y)/log y crosses alpha (strictly below
            at odd positions, strictly above at even positions).
        checkpoint_y: multiplicatively spaced abscissae (turning points merged).
        checkpoint_s: S(y) at the checkpoints.
        checkpoint_ratio: S(y)/log y at the checkpoints.
        checkpoint_phase: 1 where primes are being retained at y, 0 where dropped.
    """

    alpha: float
    seed_prime: int
    x_max: float
    retained: np.ndarray
    turning_points: np.ndarray
    checkpoint_y: np.ndarray
    checkpoint_s: np.ndarray
    checkpoint_ratio: np.ndarray
    checkpoint_phase: np.ndarray

    @property
    def trajectory(self) -> np.ndarray:
        """(y, S(y)/log y) pairs at the checkpoints."""
        return np.column_stack([self.checkpoint_y, self.checkpoint_ratio])


def greedy_subsequence(g: MultiplicativeFn, alpha: float, x_max,
                       pt: PrimeTable, checkpoint_ratio: float = 1.05) -> SubsequenceTrace:
    """Select a prime subsequence whose log-weighted density tracks alpha.

    Starting from the seed prime, primes are dropped until S(y)/log y falls
    strictly below alpha (first turning point), then kept until it climbs
    strictly above (second), and so on, where S(y) sums g(p) log p / p over
    retained primes p <= y.

    Args:
        g: non-negative function supplying the prime weights g(p).
        alpha: target density, 0 < alpha.
        x_max: construction horizon, <= pt.limit.
        pt: prime table covering x_max.
        checkpoint_ratio: multiplicative spacing of trajectory checkpoints.

    Returns:
        SubsequenceTrace with indicator, turning points and trajectory.

    Raises:
        ConstructionError: if no seed prime exists below x_max.
    """
    if not g.nonneg:
        raise ValidationError("greedy construction needs a non-negative g")
    if alpha <= 0:
        raise DomainError("alpha must be positive")
    if x_max > pt.limit:
        raise DomainError(f"x_max={x_max} exceeds prime table limit {pt.limit}")
    ps = pt.upto(x_max)
    if ps.size == 0:
        raise ConstructionError("no primes below x_max")
    logs = np.log(ps.astype(np.float64))
    w = g.values_on_primes(ps) * logs / ps
    W = np.cumsum(w)
    D = W - alpha * logs

    seed_mask = D >= 0.0
    if not seed_mask.any():
        raise ConstructionError(
            f"no seed prime below {x_max}: the density never reaches alpha={alpha}"
        )
    i = int(np.argmax(seed_mask))
    seed = int(ps[i])
    retained = np.zeros(ps.size, dtype=bool)
    retained[: i + 1] = True
    S = float(W[i])
    turning: list[int] = []
    dropping = True
    while True:
        if dropping:
            # S constant; ratio falls below alpha when log p exceeds S/alpha
            j = int(np.searchsorted(logs, S / alpha, side="right"))
            if j <= i:
                j = i + 1
            if j >= ps.size:
                break
            turning.append(int(ps[j]))
            i = j
            dropping = False
        else:
            # keeping: S(y_j) = S + W[j] - W[i]; crosses above alpha when
            # D[j] > W[i] - S
            thr = W[i] - S
            tail = D[i + 1 :] > thr
            if not tail.any():
                retained[i + 1 :] = True
                S = S + float(W[-1] - W[i])
                i = ps.size - 1
                break
            j = i + 1 + int(np.argmax(tail))
            retained[i + 1 : j + 1] = True
            S = S + float(W[j] - W[i])
            turning.append(int(ps[j]))
            i = j
            dropping = True

    turning_arr = np.array(turning, dtype=np.int64)
    # multiplicative checkpoints: geometric grid from the seed to x_max, turning
    # points merged in so every crossing is visible in the trajectory
    start = float(seed)
    n_steps = max(int(math.ceil(math.log(float(x_max) / start)
                                / math.log(checkpoint_ratio))), 1)
    grid = start * checkpoint_ratio ** np.arange(n_steps + 1)
    grid[-1] = float(x_max)
    ys = np.unique(np.concatenate([grid, turning_arr.astype(np.float64)]))
    ys = ys[(ys >= start) & (ys <= float(x_max))]

    R = np.cumsum(np.where(retained, w, 0.0))
    idx = np.searchsorted(ps, ys, side="right") - 1
    S_at = np.where(idx >= 0, R[np.maximum(idx, 0)], 0.0)
    ratio_at = S_at / np.log(ys)
    n_turn = np.searchsorted(turning_arr, ys, side="right")
    phase = np.where(ys < seed, 1, n_turn % 2).astype(np.int8)
    return SubsequenceTrace(
        alpha=float(alpha),
        seed_prime=seed,
        x_max=float(x_max),
        retained=retained,
        turning_points=turning_arr,
        checkpoint_y=ys,
        checkpoint_s=S_at,
        checkpoint_ratio=ratio_at,
        checkpoint_phase=phase,
    )


def check_density(trace: SubsequenceTrace, window: tuple[float, float]) -> tuple[float, float]:
    """Sup and final |S(y)/log y - alpha| over checkpoints in the window.

    Args:
        trace: a SubsequenceTrace.
        window: (lo, hi) abscissa range; must contain at least one checkpoint.

    Returns:
        (sup_dev, final_dev).
    """
    lo, hi = window
    mask = (trace.checkpoint_y >= lo) & (trace.checkpoint_y <= hi)
    if not mask.any():
        raise DomainError(f"window {window} contains no trajectory checkpoints")
    dev = np.abs(trace.checkpoint_ratio[mask] - trace.alpha)
    return float(dev.max()), float(dev[-1])


def audit_density_floor(g: MultiplicativeFn, pt: PrimeTable, c: float,
                        x_max, n_grid: int = 12) -> list[tuple[float, float, float, float]]:
    """Check sum_{y<p<=x} g(p) log p / p >= c log(x/y) on a (y, x) grid.

    Returns the violating (y, x, lhs, rhs) quadruples; an empty list means
    the uniform interval-density floor held everywhere on the grid.
    """
    ps = pt.upto(x_max)
    logs = np.log(ps.astype(np.float64))
    W = np.concatenate([[0.0], np.cumsum(g.values_on_primes(ps) * logs / ps)])
    xs = np.geomspace(100.0, float(x_max), n_grid)
    out = []
    for x in xs:
        for y in np.geomspace(2.0, x ** 0.9, n_grid):
            iy = int(np.searchsorted(ps, y, side="right"))
            ix = int(np.searchsorted(ps, x, side="right"))
            lhs = float(W[ix] - W[iy])
            rhs = c * math.log(x / y)
            if lhs < rhs:
                out.append((float(y), float(x), lhs, rhs))
    return out


def write_trace_csv(trace: SubsequenceTrace, fh) -> None:
    """Write checkpoint rows y, S, S_over_log_y, retained_phase to a stream."""
    writer = csv.writer(fh, lineterminator="\n")
    writer.writerow(["y", "S", "S_over_log_y", "retained_phase"])
    for y, s, r, ph in zip(trace.checkpoint_y, trace.checkpoint_s,
                           trace.checkpoint_ratio, trace.checkpoint_phase):
        writer.writerow([repr(float(y)), repr(float(s)), repr(float(r)),
                         int(ph)])


def turning_points_list(trace: SubsequenceTrace) -> list[int]:
    """Turning-point primes as plain ints, ready for JSON serialization."""
    return [int(p) for p in trace.turning_points]

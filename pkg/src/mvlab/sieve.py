"""Prime generation and factorization tables.

Provides the two shared infrastructure tables: an ascending prime list
(segmented, odd-only sieve of Eratosthenes) and a smallest-prime-factor
table giving O(log n) factorization of every n up to its limit.
"""

import math
import os
import struct
from dataclasses import dataclass

import numpy as np

from .accum import neumaier_sum
from .errors import DomainError, ResourceError, ValidationError

DEFAULT_BUDGET = 10**8
SEGMENT = 1 << 20  # numbers per segment; cache-friendly, result-invariant

_CACHE_MAGIC = b"MVSP"
_CACHE_VERSION = 1


def budget_limit() -> int:
    """Sieve budget: MVLAB_LIMIT env var, else 10^8."""
    raw = os.environ.get("MVLAB_LIMIT")
    if raw is None:
        return DEFAULT_BUDGET
    try:
        return int(float(raw))
    except ValueError as exc:
        raise ValueError(f"MVLAB_LIMIT is not a number: {raw!r}") from exc


@dataclass(frozen=True)
class PrimeTable:
    """All primes up to ``limit``, ascending, as an int64 array."""

    limit: int
    primes: np.ndarray

    def count(self, x=None) -> int:
        """Number of primes <= x (defaults to the table limit)."""
        if x is None:
            return int(self.primes.size)
        if x > self.limit:
            raise DomainError(f"x={x} exceeds prime table limit {self.limit}")
        return int(np.searchsorted(self.primes, x, side="right"))

    def upto(self, x) -> np.ndarray:
        """View of the primes <= x."""
        if x > self.limit:
            raise DomainError(f"x={x} exceeds prime table limit {self.limit}")
        return self.primes[: np.searchsorted(self.primes, x, side="right")]

    def between(self, a, b) -> np.ndarray:
        """View of the primes with a < p <= b."""
        if b > self.limit:
            raise DomainError(f"b={b} exceeds prime table limit {self.limit}")
        lo = np.searchsorted(self.primes, a, side="right")
        hi = np.searchsorted(self.primes, b, side="right")
        return self.primes[lo:hi]


@dataclass(frozen=True)
class FactorTable:
    """Smallest prime factor of every 2 <= n <= limit (spf[n]; spf[0]=spf[1]=0)."""

    limit: int
    spf: np.ndarray

    def primes(self) -> np.ndarray:
        """Primes up to the limit, recovered as fixed points of spf."""
        idx = np.arange(self.limit + 1, dtype=np.int64)
        return idx[self.spf == idx][1:] if self.limit >= 2 else idx[:0]

    def save(self, path) -> None:
        """Write the table to a little-endian binary cache file."""
        header = struct.pack("<4sIQ", _CACHE_MAGIC, _CACHE_VERSION, self.limit)
        with open(path, "wb") as fh:
            fh.write(header)
            fh.write(self.spf.astype("<i4", copy=False).tobytes())

    @classmethod
    def load(cls, path) -> "FactorTable":
        """Read a table written by ``save``; validates magic/version/length."""
        with open(path, "rb") as fh:
            header = fh.read(struct.calcsize("<4sIQ"))
            magic, version, limit = struct.unpack("<4sIQ", header)
            if magic != _CACHE_MAGIC:
                raise ValidationError(f"not a factor-table cache: bad magic {magic!r}")
            if version != _CACHE_VERSION:
                raise ValidationError(f"unsupported cache version {version}")
            data = np.frombuffer(fh.read(), dtype="<i4")
        if data.size != limit + 1:
            raise ValidationError(
                f"cache truncated: expected {limit + 1} entries, got {data.size}"
            )
        return cls(limit=int(limit), spf=data.astype(np.int32))


def _simple_odd_sieve(limit: int) -> np.ndarray:
    """Primes <= limit by a dense odd-only sieve (used for base primes)."""
    if limit < 2:
        return np.empty(0, dtype=np.int64)
    # is_c[i] marks 2i+1 composite; index 0 is the number 1
    n_odd = (limit + 1) // 2
    is_c = np.zeros(n_odd, dtype=bool)
    is_c[0] = True
    for p in range(3, math.isqrt(limit) + 1, 2):
        if not is_c[p // 2]:
            is_c[p * p // 2 :: p] = True
    odds = 2 * np.flatnonzero(~is_c).astype(np.int64) + 1
    return np.concatenate(([2], odds))


def sieve_primes(limit: int, budget: int | None = None) -> PrimeTable:
    """All primes <= limit via a segmented odd-only sieve.

    Args:
        limit: inclusive upper bound, >= 0.
        budget: maximum admissible limit; defaults to MVLAB_LIMIT or 10^8.

    Returns:
        PrimeTable with ascending int64 primes.

    Raises:
        ResourceError: if limit exceeds the budget.
    """
    limit = int(limit)
    if limit < 0:
        raise DomainError("limit must be non-negative")
    if budget is None:
        budget = budget_limit()
    if limit > budget:
        raise ResourceError(
            f"sieve limit {limit} exceeds budget {budget} (set MVLAB_LIMIT to raise)"
        )
    if limit < 2:
        return PrimeTable(limit=limit, primes=np.empty(0, dtype=np.int64))
    root = math.isqrt(limit)
    base = _simple_odd_sieve(root)
    if limit <= root * root and limit <= SEGMENT:
        return PrimeTable(limit=limit, primes=_simple_odd_sieve(limit))
    chunks = [base[base <= limit]]
    odd_base = base[1:]  # odd base primes only; evens handled by stride 2
    lo = root + 1
    while lo <= limit:
        hi = min(lo + SEGMENT - 1, limit)
        # odd numbers in [lo, hi]
        first_odd = lo if lo % 2 == 1 else lo + 1
        n_odd = (hi - first_odd) // 2 + 1
        if n_odd <= 0:
            lo = hi + 1
            continue
        is_c = np.zeros(n_odd, dtype=bool)
        for p in odd_base:
            p = int(p)
            start = ((first_odd + p - 1) // p) * p
            if start < p * p:
                start = p * p
            if start % 2 == 0:
                start += p
            if start > hi:
                continue
            is_c[(start - first_odd) // 2 :: p] = True
        chunks.append(first_odd + 2 * np.flatnonzero(~is_c).astype(np.int64))
        lo = hi + 1
    return PrimeTable(limit=limit, primes=np.concatenate(chunks))


def build_factor_table(limit: int, budget: int | None = None) -> FactorTable:
    """Smallest-prime-factor table for all 2 <= n <= limit.

    Args:
        limit: inclusive upper bound, >= 2.
        budget: maximum admissible limit; defaults to MVLAB_LIMIT or 10^8.

    Returns:
        FactorTable with spf stored as int32.

    Raises:
        ResourceError: if limit exceeds the budget.
    """
    limit = int(limit)
    if limit < 2:
        raise DomainError("factor table limit must be >= 2")
    if budget is None:
        budget = budget_limit()
    if limit > budget:
        raise ResourceError(
            f"factor table limit {limit} exceeds budget {budget} "
            "(set MVLAB_LIMIT to raise)"
        )
    if limit >= 2**31:
        raise ResourceError("factor table limit must fit in int32")
    spf = np.zeros(limit + 1, dtype=np.int32)
    for p in range(2, math.isqrt(limit) + 1):
        if spf[p] == 0:
            sl = spf[p * p :: p]
            sl[sl == 0] = p
    # remaining zeros at n >= 2 are primes
    idx = np.arange(limit + 1, dtype=np.int64)
    unmarked = (spf == 0) & (idx >= 2)
    spf[unmarked] = idx[unmarked]
    return FactorTable(limit=limit, spf=spf)


def factorize(n: int, table: FactorTable) -> list[tuple[int, int]]:
    """Factor n into ascending (prime, exponent) pairs using the spf table.

    Args:
        n: integer with 2 <= n <= table.limit.
        table: FactorTable covering n.

    Returns:
        List of (p, k) with p strictly increasing and prod(p^k) = n.
    """
    if n < 2 or n > table.limit:
        raise DomainError(f"n={n} outside factor table range [2, {table.limit}]")
    spf = table.spf
    out: list[tuple[int, int]] = []
    m = int(n)
    while m > 1:
        p = int(spf[m])
        k = 0
        while m % p == 0:
            m //= p
            k += 1
        out.append((p, k))
    return out


def mertens_log_sum(x, pt: PrimeTable) -> float:
    """Sum of (log p)/p over primes p <= x, compensated.

    The result tracks log x to within a bounded gap for all x >= 2.
    """
    if x < 2:
        raise DomainError("x must be >= 2")
    if x > pt.limit:
        raise DomainError(f"x={x} exceeds prime table limit {pt.limit}")
    ps = pt.upto(x).astype(np.float64)
    return float(neumaier_sum(np.log(ps) / ps))

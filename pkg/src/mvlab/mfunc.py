"""Complex-valued multiplicative functions given by their prime-power values.

A function is represented by an evaluator contract (p, k) -> value rather
than a table, because twists and the interval-built examples have no finite
tabulation.  Optional vectorized evaluators over prime arrays back the large
sieve passes; they must agree with the scalar contract.
"""

import math
import re
from dataclasses import dataclass, field, replace
from typing import Callable, Optional

import numpy as np

from .accum import neumaier_sum
from .errors import DomainError, ParseError
from .sieve import FactorTable, PrimeTable, factorize

__all__ = [
    "MultiplicativeFn",
    "FnPair",
    "one",
    "divisor",
    "moebius",
    "liouville",
    "eps",
    "twist",
    "abs_fn",
    "dirichlet_convolve",
    "split_by_prime_set",
    "exponential_split",
    "character_twist",
    "sigma_distance",
    "eval_at",
    "parse_fn_spec",
    "random_on_primes",
    "spot_check_domination",
]


@dataclass(frozen=True)
class MultiplicativeFn:
    """A multiplicative function defined by its values on prime powers.

    Attributes:
        name: display string; registry/composite names re-parse to an
            equivalent function.
        eval: map (prime p, exponent k >= 1) -> complex value at p^k.
            The value at 1 is the empty product, always 1.
        prime_bound: asserted bound beta with |f(p)| <= beta on primes.
        nonneg: all values are real and >= 0.
        real: all values are real (implied by nonneg).
        prime_vec: optional vectorized evaluator over an int64 prime array,
            returning f(p) per prime; must match eval(p, 1).
        power_vec: optional vectorized evaluator (primes, k) -> f(p^k).
    """

    name: str
    eval: Callable[[int, int], complex]
    prime_bound: float = 1.0
    nonneg: bool = False
    real: bool = False
    prime_vec: Optional[Callable[[np.ndarray], np.ndarray]] = field(
        default=None, repr=False, compare=False
    )
    power_vec: Optional[Callable[[np.ndarray, int], np.ndarray]] = field(
        default=None, repr=False, compare=False
    )

    @property
    def is_real(self) -> bool:
        return self.real or self.nonneg

    def __call__(self, p: int, k: int = 1) -> complex:
        if k < 0:
            raise DomainError("exponent must be >= 0")
        if k == 0:
            return 1.0 + 0j
        return complex(self.eval(int(p), int(k)))

    def values_on_primes(self, ps: np.ndarray) -> np.ndarray:
        """f(p) for each prime in ps (float64 when real, else complex128)."""
        dtype = np.float64 if self.is_real else np.complex128
        if self.prime_vec is not None:
            return np.asarray(self.prime_vec(ps), dtype=dtype)
        out = np.empty(ps.size, dtype=np.complex128)
        for i, p in enumerate(ps):
            out[i] = self.eval(int(p), 1)
        return out.real.astype(np.float64) if self.is_real else out

    def values_on_powers(self, ps: np.ndarray, k: int) -> np.ndarray:
        """f(p^k) for each prime in ps at a fixed exponent k >= 1."""
        if k == 1:
            return self.values_on_primes(ps)
        dtype = np.float64 if self.is_real else np.complex128
        if self.power_vec is not None:
            return np.asarray(self.power_vec(ps, k), dtype=dtype)
        out = np.empty(ps.size, dtype=np.complex128)
        for i, p in enumerate(ps):
            out[i] = self.eval(int(p), k)
        return out.real.astype(np.float64) if self.is_real else out


@dataclass(frozen=True)
class FnPair:
    """A dominated pair: complex h with |h(p^k)| <= g(p^k), g non-negative."""

    h: MultiplicativeFn
    g: MultiplicativeFn


def spot_check_domination(pair: FnPair, pt: PrimeTable, max_exp: int = 4,
                          n_primes: int = 200, slack: float = 1e-9) -> int:
    """Count sampled prime powers where |h(p^k)| > g(p^k) + slack.

    Sampling covers the smallest primes plus an even spread up to 10^5
    (or the table limit), exponents 1..max_exp.
    """
    hi = min(pt.limit, 10**5)
    ps = pt.upto(hi)
    if ps.size > n_primes:
        idx = np.unique(np.concatenate([
            np.arange(25), np.linspace(0, ps.size - 1, n_primes - 25).astype(int)
        ]))
        ps = ps[idx]
    bad = 0
    for p in ps:
        for k in range(1, max_exp + 1):
            if abs(pair.h(int(p), k)) > pair.g(int(p), k).real + slack:
                bad += 1
    return bad


# ---------------------------------------------------------------------------
# registry


def one() -> MultiplicativeFn:
    """The constant function 1 (f(p^k) = 1 for every prime power)."""
    return MultiplicativeFn(
        name="one",
        eval=lambda p, k: 1.0,
        prime_bound=1.0,
        nonneg=True,
        prime_vec=lambda ps: np.ones(ps.size),
        power_vec=lambda ps, k: np.ones(ps.size),
    )


def divisor() -> MultiplicativeFn:
    """Number-of-divisors function d, with d(p^k) = k + 1."""
    return MultiplicativeFn(
        name="divisor",
        eval=lambda p, k: float(k + 1),
        prime_bound=2.0,
        nonneg=True,
        prime_vec=lambda ps: np.full(ps.size, 2.0),
        power_vec=lambda ps, k: np.full(ps.size, float(k + 1)),
    )


def moebius() -> MultiplicativeFn:
    """Moebius function: -1 at primes, 0 at higher prime powers."""
    return MultiplicativeFn(
        name="moebius",
        eval=lambda p, k: -1.0 if k == 1 else 0.0,
        prime_bound=1.0,
        real=True,
        prime_vec=lambda ps: np.full(ps.size, -1.0),
        power_vec=lambda ps, k: np.full(ps.size, -1.0 if k == 1 else 0.0),
    )


def liouville() -> MultiplicativeFn:
    """Liouville function: (-1)^k at p^k (parity of Omega)."""
    return MultiplicativeFn(
        name="liouville",
        eval=lambda p, k: float((-1) ** k),
        prime_bound=1.0,
        real=True,
        prime_vec=lambda ps: np.full(ps.size, -1.0),
        power_vec=lambda ps, k: np.full(ps.size, float((-1) ** k)),
    )


def eps() -> MultiplicativeFn:
    """Convolution identity: 1 at n=1, 0 at every prime power."""
    return MultiplicativeFn(
        name="eps",
        eval=lambda p, k: 0.0,
        prime_bound=0.0,
        nonneg=True,
        prime_vec=lambda ps: np.zeros(ps.size),
        power_vec=lambda ps, k: np.zeros(ps.size),
    )


def random_on_primes(seed: int, lo: float = 0.0, hi: float = 2.0,
                     name: Optional[str] = None) -> MultiplicativeFn:
    """Seeded random function: f(p) uniform in [lo, hi), 0 at k >= 2.

    The value at p depends only on (seed, p) through a 64-bit mix, so results
    are independent of evaluation order and identical across runs.
    """
    if not lo < hi:
        raise DomainError("need lo < hi")
    u_seed = np.uint64(seed & 0xFFFFFFFFFFFFFFFF)
    span = hi - lo

    def _mix(z: np.ndarray) -> np.ndarray:
        z = (z + np.uint64(0x9E3779B97F4A7C15)) * np.uint64(0xBF58476D1CE4E5B9)
        z ^= z >> np.uint64(27)
        z = z * np.uint64(0x94D049BB133111EB)
        z ^= z >> np.uint64(31)
        return z

    def uniform(ps: np.ndarray) -> np.ndarray:
        z = _mix(_mix(ps.astype(np.uint64)) ^ _mix(np.full(ps.size, u_seed)))
        return lo + span * ((z >> np.uint64(11)).astype(np.float64) * 2.0**-53)

    return MultiplicativeFn(
        name=name or f"random[{seed},{lo!r},{hi!r}]",
        eval=lambda p, k: float(uniform(np.array([p], dtype=np.uint64))[0]) if k == 1 else 0.0,
        prime_bound=max(abs(lo), abs(hi)),
        nonneg=lo >= 0.0,
        real=True,
        prime_vec=uniform,
        power_vec=lambda ps, k: uniform(ps) if k == 1 else np.zeros(ps.size),
    )


# ---------------------------------------------------------------------------
# combinators


def twist(f: MultiplicativeFn, t: float) -> MultiplicativeFn:
    """Multiply by n^{it}: result(p^k) = f(p^k) exp(i k t log p)."""
    t = float(t)
    if t == 0.0:
        return replace(f, name=f"twist({f.name},{t!r})")

    def ev(p, k):
        return f.eval(p, k) * complex(math.cos(k * t * math.log(p)),
                                      math.sin(k * t * math.log(p)))

    def pvec(ps):
        return f.values_on_primes(ps) * np.exp(1j * t * np.log(ps.astype(np.float64)))

    def kvec(ps, k):
        return f.values_on_powers(ps, k) * np.exp(1j * k * t * np.log(ps.astype(np.float64)))

    return MultiplicativeFn(
        name=f"twist({f.name},{t!r})",
        eval=ev,
        prime_bound=f.prime_bound,
        nonneg=False,
        real=False,
        prime_vec=pvec,
        power_vec=kvec,
    )


def abs_fn(f: MultiplicativeFn) -> MultiplicativeFn:
    """Pointwise modulus |f|, flagged non-negative."""
    return MultiplicativeFn(
        name=f"abs({f.name})",
        eval=lambda p, k: abs(f.eval(p, k)),
        prime_bound=f.prime_bound,
        nonneg=True,
        prime_vec=lambda ps: np.abs(f.values_on_primes(ps)),
        power_vec=lambda ps, k: np.abs(f.values_on_powers(ps, k)),
    )


def dirichlet_convolve(f: MultiplicativeFn, g: MultiplicativeFn) -> MultiplicativeFn:
    """Dirichlet convolution: (f*g)(p^k) = sum_{j=0..k} f(p^j) g(p^{k-j})."""

    def ev(p, k):
        acc = f.eval(p, k) + g.eval(p, k)  # j=k and j=0 terms (f(1)=g(1)=1)
        for j in range(1, k):
            acc += f.eval(p, j) * g.eval(p, k - j)
        return acc

    def pvec(ps):
        return f.values_on_primes(ps) + g.values_on_primes(ps)

    def kvec(ps, k):
        acc = f.values_on_powers(ps, k) + g.values_on_powers(ps, k)
        for j in range(1, k):
            acc = acc + f.values_on_powers(ps, j) * g.values_on_powers(ps, k - j)
        return acc

    both_real = f.is_real and g.is_real
    return MultiplicativeFn(
        name=f"conv({f.name},{g.name})",
        eval=ev,
        prime_bound=f.prime_bound + g.prime_bound,
        nonneg=f.nonneg and g.nonneg,
        real=both_real,
        prime_vec=pvec,
        power_vec=kvec,
    )


def split_by_prime_set(g: MultiplicativeFn, in_set: Callable[[int], bool],
                       mode: str = "full") -> tuple[MultiplicativeFn, MultiplicativeFn]:
    """Split g into (g1, g2) by a prime predicate.

    Mode "full": g1 carries g's values off the set, g2 on the set (zero
    elsewhere), so g = g1 * g2 exactly at every prime power.
    Mode "squarefree": both parts vanish at k >= 2, so g and g1 * g2 agree
    on squarefree integers only.
    """
    if mode not in ("full", "squarefree"):
        raise DomainError(f"unknown split mode {mode!r}")
    sq = mode == "squarefree"

    def mk(on_set: bool, tag: str) -> MultiplicativeFn:
        def ev(p, k):
            if sq and k >= 2:
                return 0.0
            return g.eval(p, k) if bool(in_set(p)) == on_set else 0.0

        def pvec(ps):
            vals = g.values_on_primes(ps)
            mask = np.fromiter((bool(in_set(int(p))) == on_set for p in ps),
                               dtype=bool, count=ps.size)
            return np.where(mask, vals, 0.0)

        return MultiplicativeFn(
            name=f"{g.name}|{tag}",
            eval=ev,
            prime_bound=g.prime_bound,
            nonneg=g.nonneg,
            real=g.real,
            prime_vec=pvec,
            power_vec=None,
        )

    return mk(False, "offset"), mk(True, "onset")


def exponential_split(g: MultiplicativeFn) -> tuple[MultiplicativeFn, MultiplicativeFn]:
    """Split g = g1 * g2 with g1(p^k) = g(p)^k / k! and g2(p) = 0.

    g2(p^k) = sum_{r=0..k} (r!)^{-1} (-g(p))^r g(p^{k-r}); the r=k-1 and r=k
    terms cancel the linear part, so g2 vanishes at primes.
    """

    def ev1(p, k):
        return g.eval(p, 1) ** k / math.factorial(k)

    def ev2(p, k):
        gp = g.eval(p, 1)
        acc = 0j
        for r in range(0, k + 1):
            tail = 1.0 if r == k else g.eval(p, k - r)
            acc += (-gp) ** r / math.factorial(r) * tail
        return acc

    def pvec1(ps):
        return g.values_on_primes(ps)

    def kvec1(ps, k):
        return g.values_on_primes(ps) ** k / math.factorial(k)

    def kvec2(ps, k):
        gp = g.values_on_primes(ps)
        acc = np.zeros(ps.size, dtype=gp.dtype)
        for r in range(0, k + 1):
            tail = 1.0 if r == k else g.values_on_powers(ps, k - r)
            acc = acc + (-gp) ** r / math.factorial(r) * tail
        return acc

    g1 = MultiplicativeFn(
        name=f"expsplit1({g.name})",
        eval=ev1,
        prime_bound=g.prime_bound,
        nonneg=g.nonneg,
        real=g.is_real,
        prime_vec=pvec1,
        power_vec=kvec1,
    )
    g2 = MultiplicativeFn(
        name=f"expsplit2({g.name})",
        eval=ev2,
        prime_bound=0.0,
        nonneg=False,
        real=g.is_real,
        prime_vec=lambda ps: np.zeros(ps.size),
        power_vec=kvec2,
    )
    return g1, g2


# ---------------------------------------------------------------------------
# Dirichlet characters to prime modulus


def _is_prime(q: int) -> bool:
    if q < 2:
        return False
    for d in range(2, math.isqrt(q) + 1):
        if q % d == 0:
            return False
    return True


def _primitive_root(q: int) -> int:
    """Smallest primitive root of a prime q."""
    if q == 2:
        return 1
    n = q - 1
    fac = []
    m = n
    d = 2
    while d * d <= m:
        if m % d == 0:
            fac.append(d)
            while m % d == 0:
                m //= d
        d += 1
    if m > 1:
        fac.append(m)
    for g0 in range(2, q):
        if all(pow(g0, n // r, q) != 1 for r in fac):
            return g0
    raise RuntimeError(f"no primitive root found for {q}")  # unreachable for prime q


def character_twist(g: MultiplicativeFn, q: int, index: int) -> MultiplicativeFn:
    """Twist by the Dirichlet character mod prime q with the given index.

    The character is fixed by chi(g0) = exp(2 pi i index / (q-1)) for the
    smallest primitive root g0 of q; chi(p) = 0 when q divides p.
    Result(p^k) = g(p^k) chi(p)^k.
    """
    q = int(q)
    index = int(index)
    if not _is_prime(q):
        raise DomainError(f"modulus {q} is not prime")
    if not 0 <= index < q - 1:
        raise DomainError(f"character index {index} outside [0, {q - 1})")
    g0 = _primitive_root(q)
    dlog = np.zeros(q, dtype=np.int64)
    acc = 1
    for j in range(q - 1):
        dlog[acc] = j
        acc = acc * g0 % q
    # chi values on residues 0..q-1 (0 at residue 0)
    chi = np.exp(2j * np.pi * index * dlog / (q - 1))
    chi[0] = 0.0
    chi_is_real = index == 0 or 2 * index == q - 1
    if chi_is_real:
        chi = chi.real.round().astype(np.float64)

    def ev(p, k):
        c = chi[p % q]
        return g.eval(p, k) * c**k

    def pvec(ps):
        return g.values_on_primes(ps) * chi[ps % q]

    def kvec(ps, k):
        return g.values_on_powers(ps, k) * chi[ps % q] ** k

    return MultiplicativeFn(
        name=f"char({g.name},{q},{index})",
        eval=ev,
        prime_bound=g.prime_bound,
        nonneg=g.nonneg and index == 0,
        real=g.is_real and chi_is_real,
        prime_vec=pvec,
        power_vec=kvec,
    )


# ---------------------------------------------------------------------------
# evaluation and metrics


def eval_at(f: MultiplicativeFn, n: int, table: FactorTable) -> complex:
    """Value of f at n via the factor table: product of f(p^k) over p^k || n."""
    n = int(n)
    if n < 1 or n > table.limit:
        raise DomainError(f"n={n} outside table range [1, {table.limit}]")
    if n == 1:
        return 1.0 + 0j
    acc = 1.0 + 0j
    for p, k in factorize(n, table):
        acc *= complex(f.eval(p, k))
    return acc


def sigma_distance(f: MultiplicativeFn, g: MultiplicativeFn, x, pt: PrimeTable) -> float:
    """Prime-sum metric: sqrt(sum_{p<=x} |f(p) - g(p)|^2 / p)."""
    if x > pt.limit:
        raise DomainError(f"x={x} exceeds prime table limit {pt.limit}")
    ps = pt.upto(x)
    if ps.size == 0:
        return 0.0
    diff = f.values_on_primes(ps).astype(np.complex128) - g.values_on_primes(ps)
    return math.sqrt(max(neumaier_sum(np.abs(diff) ** 2 / ps), 0.0))


# ---------------------------------------------------------------------------
# function-spec grammar: name | name(arg,...), nesting allowed

_NAME_RE = re.compile(r"[A-Za-z_][A-Za-z0-9_]*")
_NUM_RE = re.compile(r"[+-]?(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?")


class _Parser:
    def __init__(self, text: str):
        self.text = text
        self.pos = 0

    def skip_ws(self):
        while self.pos < len(self.text) and self.text[self.pos].isspace():
            self.pos += 1

    def peek(self) -> str:
        return self.text[self.pos] if self.pos < len(self.text) else ""

    def expect(self, ch: str):
        if self.peek() != ch:
            raise ParseError(f"expected {ch!r}", self.pos)
        self.pos += 1

    def parse_expr(self):
        self.skip_ws()
        m = _NAME_RE.match(self.text, self.pos)
        if not m:
            num = _NUM_RE.match(self.text, self.pos)
            if num:
                self.pos = num.end()
                return float(num.group())
            raise ParseError("expected a function name or number", self.pos)
        name = m.group()
        name_pos = self.pos
        self.pos = m.end()
        self.skip_ws()
        args = []
        if self.peek() == "(":
            self.pos += 1
            while True:
                args.append(self.parse_expr())
                self.skip_ws()
                if self.peek() == ",":
                    self.pos += 1
                    continue
                self.expect(")")
                break
        return self._build(name, args, name_pos)

    def _build(self, name, args, pos):
        def need(n):
            if len(args) != n:
                raise ParseError(f"{name} takes {n} argument(s), got {len(args)}", pos)

        def num(i):
            if not isinstance(args[i], float):
                raise ParseError(f"argument {i + 1} of {name} must be numeric", pos)
            return args[i]

        def fn(i):
            if not isinstance(args[i], MultiplicativeFn):
                raise ParseError(f"argument {i + 1} of {name} must be a function", pos)
            return args[i]

        if name in ("one", "divisor", "moebius", "liouville", "eps"):
            need(0)
            return {"one": one, "divisor": divisor, "moebius": moebius,
                    "liouville": liouville, "eps": eps}[name]()
        if name in ("lambda0", "lambda1"):
            need(2)
            from . import construct

            maker = construct.lambda0 if name == "lambda0" else construct.lambda1
            return maker(num(0), num(1))
        if name == "twist":
            need(2)
            return twist(fn(0), num(1))
        if name == "abs":
            need(1)
            return abs_fn(fn(0))
        if name == "conv":
            need(2)
            return dirichlet_convolve(fn(0), fn(1))
        if name == "char":
            need(3)
            q, idx = num(1), num(2)
            if q != int(q) or idx != int(idx):
                raise ParseError("char modulus and index must be integers", pos)
            return character_twist(fn(0), int(q), int(idx))
        raise ParseError(f"unknown function name {name!r}", pos)


def parse_fn_spec(spec: str) -> MultiplicativeFn:
    """Parse a function-spec string into a MultiplicativeFn.

    Grammar: ``name`` or ``name(arg, ...)`` with names one, divisor, moebius,
    liouville, eps, lambda0, lambda1, twist, abs, conv, char; numeric
    arguments are decimal literals; nesting is allowed, e.g.
    ``twist(char(one,5,2),0.7)``.
    """
    parser = _Parser(spec)
    result = parser.parse_expr()
    parser.skip_ws()
    if parser.pos != len(spec):
        raise ParseError("trailing characters after expression", parser.pos)
    if not isinstance(result, MultiplicativeFn):
        raise ParseError("expression is a bare number, not a function", 0)
    return result

"""Integer machinery: factorization, CRT digit vectors and the (m, k, s, l) index maps.

Every index ``i`` in ``Z_d`` is stored as its CRT residues ``i mod p_u**r_u``,
each expanded in base ``p_u``.  A factorization ``d = x * y`` splits those
digits into a low block (which determines ``m = i mod y``) and a high block.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import cached_property
from itertools import product

DEFAULT_CEILING = 10**6

DigitVector = tuple[tuple[int, ...], ...]


@dataclass(frozen=True)
class CrtBasis:
    """Reconstruction coefficients ``M_u = d / p_u**r_u`` and ``N_u = M_u**-1 mod p_u**r_u``."""

    moduli: tuple[int, ...]
    M: tuple[int, ...]
    N: tuple[int, ...]

    def idempotents(self) -> tuple[int, ...]:
        return tuple(m * n for m, n in zip(self.M, self.N))


@dataclass(frozen=True)
class DimensionProfile:
    d: int
    primes: tuple[tuple[int, int], ...]
    divisors: tuple[int, ...]

    @property
    def prime_list(self) -> tuple[int, ...]:
        return tuple(p for p, _ in self.primes)

    @property
    def total_exponent(self) -> int:
        return sum(r for _, r in self.primes)

    @cached_property
    def crt(self) -> CrtBasis:
        moduli, Ms, Ns = [], [], []
        for p, r in self.primes:
            q = p**r
            M = self.d // q
            moduli.append(q)
            Ms.append(M)
            # extended Euclid under the hood; Python ints never overflow
            Ns.append(pow(M, -1, q) if q > 1 else 0)
        return CrtBasis(tuple(moduli), tuple(Ms), tuple(Ns))

    def exponents(self, x: int) -> tuple[int, ...]:
        """Exponent vector of the divisor ``x`` over this profile's primes."""
        if x <= 0 or self.d % x:
            raise ValueError(f"{x} does not divide {self.d}")
        return tuple(multiplicity(p, x) for p, _ in self.primes)

    def is_prime_power(self) -> bool:
        return len(self.primes) == 1

    def tau(self) -> int:
        return math.prod(r + 1 for _, r in self.primes)


def multiplicity(p: int, n: int) -> int:
    e = 0
    while n % p == 0:
        n //= p
        e += 1
    return e


def factorize(d: int, ceiling: int = DEFAULT_CEILING) -> DimensionProfile:
    if not isinstance(d, int) or isinstance(d, bool):
        raise TypeError(f"dimension must be an int, got {type(d).__name__}")
    if d < 1:
        raise ValueError(f"dimension must be positive, got {d}")
    if d > ceiling:
        raise ValueError(f"dimension {d} exceeds ceiling {ceiling}")

    primes = []
    n, p = d, 2
    while p * p <= n:
        if n % p == 0:
            r = 0
            while n % p == 0:
                n //= p
                r += 1
            primes.append((p, r))
        p += 1 if p == 2 else 2
    if n > 1:
        primes.append((n, 1))

    divisors = sorted(
        math.prod(p**e for (p, _), e in zip(primes, exps))
        for exps in product(*(range(r + 1) for _, r in primes))
    )
    return DimensionProfile(d, tuple(primes), tuple(divisors))


def _check_index(i: int, profile: DimensionProfile) -> None:
    if not 0 <= i < profile.d:
        raise ValueError(f"index {i} outside [0, {profile.d})")


def _check_divisor(x: int, profile: DimensionProfile) -> None:
    if x <= 0 or profile.d % x:
        raise ValueError(f"{x} is not a divisor of {profile.d}")


def to_digits(i: int, profile: DimensionProfile) -> DigitVector:
    """Per prime ``p_u``, the base-``p_u`` digits (least significant first) of ``i mod p_u**r_u``."""
    _check_index(i, profile)
    out = []
    for p, r in profile.primes:
        res = i % p**r
        digits = []
        for _ in range(r):
            res, dig = divmod(res, p)
            digits.append(dig)
        out.append(tuple(digits))
    return tuple(out)


def residues(digits: DigitVector, profile: DimensionProfile) -> tuple[int, ...]:
    if len(digits) != len(profile.primes):
        raise ValueError("digit vector does not match the factorization")
    res = []
    for (p, r), block in zip(profile.primes, digits):
        if len(block) != r:
            raise ValueError(f"expected {r} digits for prime {p}, got {len(block)}")
        for dig in block:
            if not 0 <= dig < p:
                raise ValueError(f"digit {dig} outside [0, {p})")
        res.append(digit_slice(block, p, 0, r))
    return tuple(res)


def from_digits(digits: DigitVector, profile: DimensionProfile) -> int:
    """CRT recomposition ``sum_u residue_u * M_u * N_u mod d``."""
    res = residues(digits, profile)
    e = profile.crt.idempotents()
    return sum(a * b for a, b in zip(res, e)) % profile.d


def digit_slice(block: tuple[int, ...], p: int, lo: int, hi: int) -> int:
    """Value of digits ``lo .. hi-1`` read as a base-``p`` number; empty slice is 0."""
    return sum(block[t] * p ** (t - lo) for t in range(lo, hi))


def index_split(i: int, x: int, profile: DimensionProfile) -> tuple[int, int]:
    """``i = k*y + m`` with ``y = d/x``; returns ``(m, k)``."""
    _check_index(i, profile)
    _check_divisor(x, profile)
    y = profile.d // x
    return i % y, i // y


def index_split_b(j: int, x: int, profile: DimensionProfile) -> tuple[int, int]:
    """``j = l*x + s``; returns ``(s, l)``."""
    _check_index(j, profile)
    _check_divisor(x, profile)
    return j % x, j // x


def crt_index_split(i: int, x: int, profile: DimensionProfile) -> tuple[int, int]:
    """``(m, k)`` read off the CRT digit blocks of ``i``.

    ``m`` equals ``i mod y`` exactly.  ``k`` is a bijective relabelling of
    ``i div y``: the two differ by the carry ``(A - m) / y`` where ``A`` is
    the unreduced low-block sum, which depends on ``m`` only.
    """
    _check_divisor(x, profile)
    digits = to_digits(i, profile)
    y = profile.d // x
    ex, ey = profile.exponents(x), profile.exponents(y)
    crt = profile.crt
    low = high = 0
    for u, ((p, r), block) in enumerate(zip(profile.primes, digits)):
        low += digit_slice(block, p, 0, ey[u]) * crt.M[u] * crt.N[u]
        high += digit_slice(block, p, ey[u], r) * (x // p ** ex[u]) * crt.N[u]
    return low % y, high % x


def crt_index_split_b(j: int, x: int, profile: DimensionProfile) -> tuple[int, int]:
    """``(s, l)`` from the CRT digit blocks of ``j``; the mirror of :func:`crt_index_split`."""
    _check_divisor(x, profile)
    y = profile.d // x
    m, k = crt_index_split(j, y, profile)
    return m, k


def crt_carry(i: int, x: int, profile: DimensionProfile) -> int:
    """Carry ``q`` with ``i div y = (k_crt + q) mod x``."""
    digits = to_digits(i, profile)
    y = profile.d // x
    ey = profile.exponents(y)
    crt = profile.crt
    low = sum(
        digit_slice(block, p, 0, ey[u]) * crt.M[u] * crt.N[u]
        for u, ((p, _), block) in enumerate(zip(profile.primes, digits))
    )
    return (low - low % y) // y


@dataclass(frozen=True)
class CoverageReport:
    d: int
    x: int
    k_residues: int
    m_values: int
    s_residues: int
    l_values: int

    @property
    def ok(self) -> bool:
        y = self.d // self.x
        return (self.k_residues, self.m_values, self.s_residues, self.l_values) == (
            self.x,
            y,
            self.x,
            y,
        )


def residue_coverage_check(x: int, profile: DimensionProfile) -> CoverageReport:
    """Count the distinct values the CRT formulas for ``k, m, s, l`` take over ``Z_d``."""
    _check_divisor(x, profile)
    ks, ms, ss, ls = set(), set(), set(), set()
    for i in range(profile.d):
        m, k = crt_index_split(i, x, profile)
        s, l = crt_index_split_b(i, x, profile)
        ks.add(k)
        ms.add(m)
        ss.add(s)
        ls.add(l)
    return CoverageReport(profile.d, x, len(ks), len(ms), len(ss), len(ls))


def _set_digit(n: int, u: int, pos: int, value: int, profile: DimensionProfile) -> int:
    digits = [list(b) for b in to_digits(n, profile)]
    digits[u][pos] = value
    return from_digits(tuple(tuple(b) for b in digits), profile)


def fiber_over_s(s_coarse: int, x: int, p: int, profile: DimensionProfile) -> list[int]:
    """All ``s`` in ``Z_x`` with ``s = s_coarse mod x/p``.

    Obtained by sweeping the top ``p``-digit (position ``r_(p,x) - 1``) of the
    ``j``-index through ``Z_p``.
    """
    _check_divisor(x, profile)
    if p not in profile.prime_list or x % p:
        raise ValueError(f"prime {p} does not divide {x}")
    if not 0 <= s_coarse < x // p:
        raise ValueError(f"{s_coarse} outside [0, {x // p})")
    u = profile.prime_list.index(p)
    pos = multiplicity(p, x) - 1
    return [_set_digit(s_coarse, u, pos, t, profile) % x for t in range(p)]


def fiber_over_m(m_coarse: int, y: int, p: int, profile: DimensionProfile) -> list[int]:
    """All ``m`` in ``Z_{y*p}`` with ``m = m_coarse mod y``.

    Obtained by sweeping the ``p``-digit at position ``r_(p,y)`` of the ``i``-index.
    """
    _check_divisor(y * p, profile)
    if p not in profile.prime_list:
        raise ValueError(f"{p} is not a prime factor of {profile.d}")
    if not 0 <= m_coarse < y:
        raise ValueError(f"{m_coarse} outside [0, {y})")
    u = profile.prime_list.index(p)
    pos = multiplicity(p, y)
    return [_set_digit(m_coarse, u, pos, t, profile) % (y * p) for t in range(p)]

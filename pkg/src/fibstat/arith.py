"""Small integer-arithmetic helpers shared across the package.

Sieves, factorization, Moebius values and deterministic primality for the
word-sized integers the rest of the library throws around.  Everything here
returns plain Python ints (or numpy arrays where documented); nothing is
probabilistic.
"""

from __future__ import annotations

import math

import numpy as np

__all__ = [
    "primes_up_to",
    "smallest_prime_factors",
    "moebius_up_to",
    "factorize",
    "prime_support",
    "is_prime",
    "valuation",
]


def primes_up_to(n: int) -> np.ndarray:
    """All primes <= n as an int64 array (empty for n < 2)."""
    if n < 2:
        return np.zeros(0, dtype=np.int64)
    sieve = np.ones(n + 1, dtype=bool)
    sieve[:2] = False
    for p in range(2, math.isqrt(n) + 1):
        if sieve[p]:
            sieve[p * p :: p] = False
    return np.nonzero(sieve)[0].astype(np.int64)


def smallest_prime_factors(n: int) -> np.ndarray:
    """spf[m] = least prime factor of m for 2 <= m <= n (spf[0] = spf[1] = 0)."""
    spf = np.zeros(n + 1, dtype=np.int64)
    if n < 2:
        return spf
    spf[2::2] = 2
    for p in range(3, math.isqrt(n) + 1, 2):
        if spf[p] == 0:
            spf[p * p :: 2 * p] = np.where(spf[p * p :: 2 * p] == 0, p, spf[p * p :: 2 * p])
    odd = np.arange(3, n + 1, 2)
    unset = odd[spf[odd] == 0]
    spf[unset] = unset
    return spf


def moebius_up_to(n: int) -> np.ndarray:
    """mu[k] for 0 <= k <= n via a squarefree sieve (mu[0] = 0)."""
    mu = np.ones(n + 1, dtype=np.int64)
    mu[0] = 0
    if n < 2:
        return mu
    primes = primes_up_to(n)
    for p in primes:
        mu[p::p] *= -1
        sq = p * p
        if sq <= n:
            mu[sq::sq] = 0
    return mu


def _pollard_rho(n: int) -> int:
    # Brent's variant; n must be odd composite and not a prime power handled upstream.
    if n % 2 == 0:
        return 2
    for c in range(1, 20):
        x = y = 2
        d = 1
        while d == 1:
            x = (x * x + c) % n
            y = (y * y + c) % n
            y = (y * y + c) % n
            d = math.gcd(abs(x - y), n)
        if d != n:
            return d
    raise ArithmeticError(f"rho failed on {n}")


_SPF_CACHE_LIMIT = 1 << 20
_spf_cache: np.ndarray | None = None


def _spf(n: int) -> np.ndarray:
    global _spf_cache
    if _spf_cache is None:
        _spf_cache = smallest_prime_factors(_SPF_CACHE_LIMIT)
    return _spf_cache


def factorize(n: int) -> dict[int, int]:
    """Prime factorization of |n| as {p: exponent}; factorize(0) raises."""
    if n == 0:
        raise ValueError("0 has no factorization")
    n = abs(n)
    out: dict[int, int] = {}
    if n < 2:
        return out
    if n <= _SPF_CACHE_LIMIT:
        spf = _spf(n)
        while n > 1:
            p = int(spf[n])
            e = 0
            while n % p == 0:
                n //= p
                e += 1
            out[p] = e
        return out
    stack = [n]
    while stack:
        m = stack.pop()
        if m == 1:
            continue
        if is_prime(m):
            out[m] = out.get(m, 0) + 1
            continue
        # strip small primes first so rho only sees hard composites
        reduced = False
        for p in (2, 3, 5, 7, 11, 13):
            if m % p == 0:
                out[p] = out.get(p, 0) + 1
                stack.append(m // p)
                reduced = True
                break
        if reduced:
            continue
        d = _pollard_rho(m)
        stack.append(d)
        stack.append(m // d)
    return out


def prime_support(n: int) -> list[int]:
    """Sorted primes dividing |n| (empty for n = +-1)."""
    if n in (1, -1):
        return []
    return sorted(factorize(n))


_SMALL_PRIMES = (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37)


def is_prime(n: int) -> bool:
    """Deterministic Miller-Rabin, exact for all 64-bit inputs."""
    if n < 2:
        return False
    for p in _SMALL_PRIMES:
        if n % p == 0:
            return n == p
    d = n - 1
    r = 0
    while d % 2 == 0:
        d //= 2
        r += 1
    # this witness set is known exact below 3.3e24
    for a in (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37):
        x = pow(a, d, n)
        if x in (1, n - 1):
            continue
        for _ in range(r - 1):
            x = x * x % n
            if x == n - 1:
                break
        else:
            return False
    return True


def valuation(n: int, p: int) -> int:
    """v_p(n) for n != 0; raises on n = 0."""
    if n == 0:
        raise ValueError("v_p(0) is infinite")
    n = abs(n)
    v = 0
    while n % p == 0:
        n //= p
        v += 1
    return v
